#include "cwflow/io.hpp"
#include "cwflow/sphere_oracle.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace cwflow;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;      // validation / property failure
constexpr int kDegeneration = 2; // run degenerated

fs::path output_root() {
  if (const char* env = std::getenv("CWFLOW_OUTPUT_ROOT")) return fs::path(env);
  return fs::path(".");
}

int run_one_simulation(const std::string& config_path, std::ostream& log) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const std::exception& ex) {
    log << config_path << ": " << ex.what() << '\n';
    return kFailure;
  }

  const fs::path out_dir = output_root() / cfg.output_dir;
  fs::create_directories(out_dir);

  TriangleSurface initial = build_initial_surface(cfg.surface);
  const Trajectory traj = run_flow(initial, cfg.params, cfg.policy,
                                   cfg.stopping, cfg.diagnostics);

  AuditOptions audit_opt;
  audit_opt.theorem_mode = cfg.params.theorem_mode;
  const AuditReport audit = monotonicity_audit(traj, audit_opt);

  {
    std::ofstream csv(out_dir / "trajectory.csv");
    write_trajectory_csv(csv, traj);
  }
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    std::ostringstream name;
    name << "snapshot_" << std::setw(4) << std::setfill('0') << i << ".obj";
    std::ofstream obj(out_dir / name.str());
    save_obj(obj, traj.snapshots[i].surface);
  }
  json rep = report_json(cfg, traj, audit);
  rep["config"] = to_json(cfg);
  {
    std::ofstream rj(out_dir / "report.json");
    rj << rep.dump(2) << '\n';
  }

  log << cfg.name << ": " << traj.termination << " at t = " << traj.final_time
      << " (step " << traj.final_step << "), report in " << out_dir.string()
      << '\n';
  if (traj.termination == "degeneration") return kDegeneration;
  if (!audit.clean()) {
    log << cfg.name << ": audit reported "
        << audit.energy_violations + audit.ao2_violations +
               audit.li_yau_violations
        << " violation(s)\n";
    return kFailure;
  }
  return kOk;
}

int cmd_simulate(const std::vector<std::string>& configs, int jobs) {
  if (jobs <= 1 || configs.size() <= 1) {
    int worst = kOk;
    for (const std::string& path : configs)
      worst = std::max(worst, run_one_simulation(path, std::cout));
    return worst;
  }
  std::mutex log_mutex;
  std::vector<int> status(configs.size(), kOk);
  std::vector<std::thread> workers;
  std::size_t next = 0;
  std::mutex next_mutex;
  const int n_workers = std::min<int>(jobs, static_cast<int>(configs.size()));
  for (int w = 0; w < n_workers; ++w)
    workers.emplace_back([&] {
      while (true) {
        std::size_t idx;
        {
          std::lock_guard lock(next_mutex);
          if (next >= configs.size()) return;
          idx = next++;
        }
        std::ostringstream log;
        status[idx] = run_one_simulation(configs[idx], log);
        std::lock_guard lock(log_mutex);
        std::cout << log.str();
      }
    });
  for (std::thread& t : workers) t.join();
  return *std::max_element(status.begin(), status.end());
}

int cmd_validate_operators(const std::vector<int>& levels) {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok, double value) {
    std::cout << (ok ? "pass" : "FAIL") << "  " << name << " (" << value
              << ")\n";
    if (!ok) ++failures;
  };
  constexpr double pi = std::numbers::pi;

  double prev_h = std::numeric_limits<double>::infinity();
  for (int level : levels) {
    const TriangleSurface s = icosphere(level);
    DiscreteGeometry g;
    g.compute(s);
    std::ostringstream tag;
    tag << "icosphere level " << level;

    const double h_err = (g.bundle.H.array() - 2.0).abs().maxCoeff() / 2.0;
    check(tag.str() + ": max |H - 2|/2", h_err < prev_h + 1e-12, h_err);
    prev_h = h_err;
    const double gb = std::abs(g.integrate(g.bundle.K) - 4 * pi);
    check(tag.str() + ": |int K - 4pi|", gb < 1e-10, gb);
    const double area_err = std::abs(g.bundle.total_area - 4 * pi) / (4 * pi);
    const double vol_err =
        std::abs(signed_volume(s) - 4 * pi / 3) / (4 * pi / 3);
    if (level >= 4) {
      check(tag.str() + ": H within 1%", h_err < 0.01, h_err);
      const double k_err = (g.bundle.K.array() - 1.0).abs().maxCoeff();
      check(tag.str() + ": K within 1%", k_err < 0.01, k_err);
      check(tag.str() + ": area within 1%", area_err < 0.01, area_err);
      check(tag.str() + ": volume within 1%", vol_err < 0.01, vol_err);
    }
  }

  const IdentityReport torus = identity_suite(AnalyticSurface::torus(2.0, 1.0));
  check("torus identity residual <= 1e-4", torus.identity_residual_rel <= 1e-4,
        torus.identity_residual_rel);
  check("torus Codazzi bound", torus.codazzi_bound_holds,
        torus.max_ratio_gradA2_over_gradAo2);
  check("torus Michael-Simon battery", torus.ms_violations == 0,
        static_cast<double>(torus.ms_tested));

  const QuadratureResult wt = quadrature_integrate(
      AnalyticSurface::torus(std::sqrt(2.0), 1.0), Integrand::H2, 1e-8);
  const double wt_err = std::abs(0.25 * wt.value - 2 * pi * pi) / (2 * pi * pi);
  check("sqrt(2) torus Willmore = 2 pi^2", wt_err <= 1e-4, wt_err);

  std::cout << (failures == 0 ? "all operator checks passed\n"
                              : "operator checks FAILED\n");
  return failures == 0 ? kOk : kFailure;
}

int cmd_oracle(double rho0, double lambda1, double lambda2) {
  try {
    json j;
    j["rho0"] = rho0;
    j["lambda1"] = lambda1;
    j["lambda2"] = lambda2;
    j["extinction_time"] = oracle::extinction_time(rho0, lambda1, lambda2);
    j["initial_energy"] = oracle::sphere_energy(rho0, lambda1, lambda2);
    j["theorem_bound"] = oracle::theorem_bound(
        oracle::sphere_energy(rho0, lambda1, lambda2), lambda1);
    const auto small = oracle::smallness_constants(lambda1, lambda2);
    j["sobolev_constant"] = small.sobolev_constant;
    if (small.lambda2_cap_applicable) j["epsilon2_lambda2_cap"] = small.lambda2_cap;
    std::cout << j.dump(2) << '\n';
    return kOk;
  } catch (const std::exception& ex) {
    std::cerr << "oracle: " << ex.what() << '\n';
    return kFailure;
  }
}

int cmd_analyze(const std::string& csv_path, const std::string& blowup_dir,
                bool theorem_mode) {
  Trajectory traj;
  try {
    std::ifstream in(csv_path);
    if (!in) throw ConfigError("cannot open " + csv_path);
    traj = read_trajectory_csv(in);
  } catch (const std::exception& ex) {
    std::cerr << "analyze: " << ex.what() << '\n';
    return kFailure;
  }

  AuditOptions opt;
  opt.theorem_mode = theorem_mode;
  const AuditReport audit = monotonicity_audit(traj, opt);
  json j;
  j["records"] = traj.records.size();
  j["termination"] = traj.termination;
  j["final_time"] = traj.final_time;
  j["audit"] = {{"clean", audit.clean()},
                {"energy_violations", audit.energy_violations},
                {"ao2_violations", audit.ao2_violations},
                {"ledger_violations", audit.ledger_violations},
                {"li_yau_violations", audit.li_yau_violations}};

  if (!blowup_dir.empty()) {
    std::vector<fs::path> objs;
    for (const auto& entry : fs::directory_iterator(blowup_dir))
      if (entry.path().extension() == ".obj") objs.push_back(entry.path());
    std::sort(objs.begin(), objs.end());
    for (std::size_t i = 0; i < objs.size(); ++i) {
      std::ifstream in(objs[i]);
      traj.snapshots.push_back(
          {static_cast<long>(i), 0.0, load_obj(in)});
    }
    try {
      const BlowupReport rep = blowup_analysis(traj);
      j["blowup"] = {{"snapshots", rep.entries.size()},
                     {"final_residual", rep.final_residual},
                     {"residual_decreasing", rep.residual_decreasing},
                     {"first_int_Ao2", rep.first_int_Ao2},
                     {"final_int_Ao2", rep.final_int_Ao2},
                     {"ao2_decreasing", rep.ao2_decreasing}};
    } catch (const std::exception& ex) {
      std::cerr << "analyze: blowup: " << ex.what() << '\n';
      return kFailure;
    }
  }
  std::cout << j.dump(2) << '\n';
  if (traj.termination == "degeneration") return kDegeneration;
  return audit.clean() ? kOk : kFailure;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"constrained Willmore flow laboratory"};
  app.require_subcommand(1);

  std::vector<std::string> config_paths;
  int jobs = 1;
  CLI::App* simulate = app.add_subcommand("simulate", "run configured flows");
  simulate->add_option("configs", config_paths, "experiment config JSON files")
      ->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("--jobs", jobs, "parallel worker threads");

  std::vector<int> levels = {2, 3, 4};
  CLI::App* validate =
      app.add_subcommand("validate-operators", "discrete operator checks");
  validate->add_option("--levels", levels, "icosphere subdivision levels")
      ->delimiter(',');

  double rho0 = 1, lambda1 = 1, lambda2 = 0;
  CLI::App* oracle_cmd =
      app.add_subcommand("oracle", "closed-form sphere predictions");
  oracle_cmd->add_option("--rho0", rho0)->required();
  oracle_cmd->add_option("--lambda1", lambda1)->required();
  oracle_cmd->add_option("--lambda2", lambda2);

  std::string csv_path, blowup_dir;
  bool theorem_mode = false;
  CLI::App* analyze = app.add_subcommand("analyze", "audit a trajectory CSV");
  analyze->add_option("trajectory", csv_path, "trajectory.csv")
      ->required()
      ->check(CLI::ExistingFile);
  analyze->add_option("--blowup", blowup_dir, "snapshot directory")
      ->check(CLI::ExistingDirectory);
  analyze->add_flag("--theorem-mode", theorem_mode,
                    "enable int |A^o|^2 monotonicity audit");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(config_paths, jobs);
    if (validate->parsed()) return cmd_validate_operators(levels);
    if (oracle_cmd->parsed()) return cmd_oracle(rho0, lambda1, lambda2);
    if (analyze->parsed()) return cmd_analyze(csv_path, blowup_dir, theorem_mode);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
