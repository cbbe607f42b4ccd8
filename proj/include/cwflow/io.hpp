#pragma once

#include "cwflow/analytic.hpp"
#include "cwflow/diagnostics.hpp"
#include "cwflow/flow.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cwflow {

using nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

struct SurfaceSpec {
  std::string kind = "sphere"; // sphere|spheroid|torus|perturbed_sphere|obj
  double rho = 1;              // sphere / perturbed_sphere radius
  double a = 1, c = 1;         // spheroid semiaxes
  double R = 2, r = 1;         // torus radii
  double eps = 0.1;            // perturbation amplitude
  int resolution = 4;          // subdivision level / grid resolution
  std::string obj_path;        // kind == "obj"
};

struct ExperimentConfig {
  std::string name = "run";
  SurfaceSpec surface;
  FlowParams params;
  StepPolicy policy;
  StoppingSpec stopping;
  DiagnosticsConfig diagnostics;
  std::string output_dir = "out";
  unsigned seed = 0; // phase seed for perturbed initial data
};

inline AnalyticSurface analytic_from_spec(const SurfaceSpec& spec) {
  if (spec.kind == "sphere") return AnalyticSurface::sphere(spec.rho);
  if (spec.kind == "spheroid") return AnalyticSurface::spheroid(spec.a, spec.c);
  if (spec.kind == "torus") return AnalyticSurface::torus(spec.R, spec.r);
  if (spec.kind == "perturbed_sphere")
    return AnalyticSurface::perturbed_sphere(spec.rho, spec.eps);
  throw ConfigError("not an analytic surface kind: " + spec.kind);
}

inline TriangleSurface build_initial_surface(const SurfaceSpec& spec) {
  if (spec.kind == "obj") {
    std::ifstream in(spec.obj_path);
    if (!in) throw ConfigError("cannot open OBJ file: " + spec.obj_path);
    return load_obj(in);
  }
  return sample_mesh(analytic_from_spec(spec), spec.resolution);
}

inline json to_json(const ExperimentConfig& cfg) {
  json s;
  s["kind"] = cfg.surface.kind;
  if (cfg.surface.kind == "sphere") {
    s["rho"] = cfg.surface.rho;
  } else if (cfg.surface.kind == "spheroid") {
    s["a"] = cfg.surface.a;
    s["c"] = cfg.surface.c;
  } else if (cfg.surface.kind == "torus") {
    s["R"] = cfg.surface.R;
    s["r"] = cfg.surface.r;
  } else if (cfg.surface.kind == "perturbed_sphere") {
    s["rho"] = cfg.surface.rho;
    s["eps"] = cfg.surface.eps;
  } else if (cfg.surface.kind == "obj") {
    s["path"] = cfg.surface.obj_path;
  }
  if (cfg.surface.kind != "obj") s["resolution"] = cfg.surface.resolution;

  json j;
  j["name"] = cfg.name;
  j["surface"] = s;
  j["flow"] = {{"c0", cfg.params.c0},
               {"lambda1", cfg.params.lambda1},
               {"lambda2", cfg.params.lambda2},
               {"theorem_mode", cfg.params.theorem_mode},
               {"epsilon2", cfg.params.epsilon2}};
  j["stepping"] = {{"cfl", cfg.policy.cfl},
                   {"dt_max", cfg.policy.dt_max},
                   {"remesh_every", cfg.policy.remesh_every},
                   {"coarsen", cfg.policy.coarsen},
                   {"coarsen_exponent", cfg.policy.coarsen_exponent},
                   {"edge_floor_scale", cfg.policy.edge_floor_scale},
                   {"min_angle_floor_deg", cfg.policy.min_angle_floor_deg}};
  j["stopping"] = {{"t_max", cfg.stopping.t_max},
                   {"max_steps", cfg.stopping.max_steps},
                   {"area_floor_rel", cfg.stopping.area_floor_rel}};
  j["diagnostics"] = {{"record_every", cfg.diagnostics.record_every},
                      {"snapshot_every", cfg.diagnostics.snapshot_every},
                      {"ball_radii", cfg.diagnostics.ball_radii}};
  j["output_dir"] = cfg.output_dir;
  j["seed"] = cfg.seed;
  return j;
}

inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  try {
    cfg.name = j.value("name", cfg.name);
    const json& s = j.at("surface");
    cfg.surface.kind = s.at("kind").get<std::string>();
    cfg.surface.rho = s.value("rho", cfg.surface.rho);
    cfg.surface.a = s.value("a", cfg.surface.a);
    cfg.surface.c = s.value("c", cfg.surface.c);
    cfg.surface.R = s.value("R", cfg.surface.R);
    cfg.surface.r = s.value("r", cfg.surface.r);
    cfg.surface.eps = s.value("eps", cfg.surface.eps);
    cfg.surface.resolution = s.value("resolution", cfg.surface.resolution);
    cfg.surface.obj_path = s.value("path", cfg.surface.obj_path);

    if (j.contains("flow")) {
      const json& f = j.at("flow");
      cfg.params.c0 = f.value("c0", cfg.params.c0);
      cfg.params.lambda1 = f.value("lambda1", cfg.params.lambda1);
      cfg.params.lambda2 = f.value("lambda2", cfg.params.lambda2);
      cfg.params.theorem_mode = f.value("theorem_mode", cfg.params.theorem_mode);
      cfg.params.epsilon2 = f.value("epsilon2", cfg.params.epsilon2);
    }
    if (j.contains("stepping")) {
      const json& p = j.at("stepping");
      cfg.policy.cfl = p.value("cfl", cfg.policy.cfl);
      cfg.policy.dt_max = p.value("dt_max", cfg.policy.dt_max);
      cfg.policy.remesh_every = p.value("remesh_every", cfg.policy.remesh_every);
      cfg.policy.coarsen = p.value("coarsen", cfg.policy.coarsen);
      cfg.policy.coarsen_exponent =
          p.value("coarsen_exponent", cfg.policy.coarsen_exponent);
      cfg.policy.edge_floor_scale =
          p.value("edge_floor_scale", cfg.policy.edge_floor_scale);
      cfg.policy.min_angle_floor_deg =
          p.value("min_angle_floor_deg", cfg.policy.min_angle_floor_deg);
    }
    if (j.contains("stopping")) {
      const json& t = j.at("stopping");
      cfg.stopping.t_max = t.value("t_max", cfg.stopping.t_max);
      cfg.stopping.max_steps = t.value("max_steps", cfg.stopping.max_steps);
      cfg.stopping.area_floor_rel =
          t.value("area_floor_rel", cfg.stopping.area_floor_rel);
    }
    if (j.contains("diagnostics")) {
      const json& d = j.at("diagnostics");
      cfg.diagnostics.record_every =
          d.value("record_every", cfg.diagnostics.record_every);
      cfg.diagnostics.snapshot_every =
          d.value("snapshot_every", cfg.diagnostics.snapshot_every);
      cfg.diagnostics.ball_radii =
          d.value("ball_radii", cfg.diagnostics.ball_radii);
    }
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("bad config: ") + ex.what());
  }

  cfg.params.validate();
  cfg.policy.validate();
  if (cfg.surface.kind != "obj")
    analytic_from_spec(cfg.surface); // validates kind and parameters
  if (!(cfg.stopping.area_floor_rel > 0 && cfg.stopping.area_floor_rel < 1))
    throw ConfigError("area_floor_rel must be in (0,1)");
  for (double rho : cfg.diagnostics.ball_radii)
    if (!(rho > 0)) throw ConfigError("ball radii must be positive");
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("config parse error: ") + ex.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Trajectory CSV
// ---------------------------------------------------------------------------

/// Shortest-round-trip formatting so identical runs produce identical files.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  double back = 0;
  std::sscanf(buf, "%lf", &back);
  if (back == x) {
    for (int prec = 1; prec < 17; ++prec) {
      char shorter[40];
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, x);
      std::sscanf(shorter, "%lf", &back);
      if (back == x) return shorter;
    }
  }
  return buf;
}

inline std::string eta_column_name(double rho) {
  std::string s = format_double(rho);
  return "eta_rho_" + s;
}

inline std::vector<std::string> csv_header(const std::vector<double>& radii) {
  std::vector<std::string> cols = {"time",    "area",   "volume",
                                   "willmore", "energy_total", "int_Ao2",
                                   "int_A2",  "li_yau"};
  for (double rho : radii) cols.push_back(eta_column_name(rho));
  for (const char* c : {"roundness", "isoperimetric", "min_edge", "max_W", "event"})
    cols.push_back(c);
  return cols;
}

inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const auto cols = csv_header(traj.ball_radii);
  for (std::size_t i = 0; i < cols.size(); ++i)
    out << cols[i] << (i + 1 < cols.size() ? ',' : '\n');
  for (const DiagnosticsRecord& r : traj.records) {
    out << format_double(r.time) << ',' << format_double(r.area) << ','
        << format_double(r.volume) << ',' << format_double(r.willmore) << ','
        << format_double(r.energy_total) << ',' << format_double(r.int_Ao2)
        << ',' << format_double(r.int_A2) << ',' << (r.li_yau ? 1 : 0);
    for (double eta : r.eta) out << ',' << format_double(eta);
    out << ',' << format_double(r.roundness) << ','
        << format_double(r.isoperimetric) << ',' << format_double(r.min_edge)
        << ',' << format_double(r.max_W) << ',' << r.event << '\n';
  }
}

/// Reads a trajectory ledger back; eta radii are recovered from the header
/// column names. Snapshots are not part of the CSV.
inline Trajectory read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty trajectory CSV");
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string col;
    while (std::getline(hs, col, ',')) header.push_back(col);
  }
  Trajectory traj;
  std::size_t n_eta = 0;
  for (const std::string& col : header)
    if (col.rfind("eta_rho_", 0) == 0) {
      traj.ball_radii.push_back(std::stod(col.substr(8)));
      ++n_eta;
    }
  const auto expected = csv_header(traj.ball_radii);
  if (header != expected) throw ConfigError("unexpected trajectory CSV schema");

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<std::string> cells;
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    if (cells.size() != expected.size())
      throw ConfigError("malformed trajectory CSV row");
    DiagnosticsRecord r;
    std::size_t i = 0;
    try {
      r.time = std::stod(cells[i++]);
      r.area = std::stod(cells[i++]);
      r.volume = std::stod(cells[i++]);
      r.willmore = std::stod(cells[i++]);
      r.energy_total = std::stod(cells[i++]);
      r.int_Ao2 = std::stod(cells[i++]);
      r.int_A2 = std::stod(cells[i++]);
      r.li_yau = std::stoi(cells[i++]) != 0;
      for (std::size_t k = 0; k < n_eta; ++k) r.eta.push_back(std::stod(cells[i++]));
      r.roundness = std::stod(cells[i++]);
      r.isoperimetric = std::stod(cells[i++]);
      r.min_edge = std::stod(cells[i++]);
      r.max_W = std::stod(cells[i++]);
    } catch (const std::exception&) {
      throw ConfigError("malformed trajectory CSV value");
    }
    r.event = cells[i];
    traj.records.push_back(std::move(r));
  }
  if (traj.records.empty()) throw ConfigError("trajectory CSV has no records");
  if (!traj.records.back().event.empty())
    traj.termination = traj.records.back().event;
  traj.final_time = traj.records.back().time;
  return traj;
}

// ---------------------------------------------------------------------------
// Run report
// ---------------------------------------------------------------------------

inline json report_json(const ExperimentConfig& cfg, const Trajectory& traj,
                        const AuditReport& audit) {
  json j;
  j["name"] = cfg.name;
  j["termination"] = traj.termination;
  j["final_time"] = traj.final_time;
  j["final_step"] = traj.final_step;
  j["records"] = traj.records.size();
  j["snapshots"] = traj.snapshots.size();

  const DiagnosticsRecord& first = traj.records.front();
  const DiagnosticsRecord& last = traj.records.back();
  j["initial_energy"] = first.energy_total;
  j["final_energy"] = last.energy_total;
  j["final_roundness"] = last.roundness;
  j["final_area"] = last.area;

  if (traj.termination == "extinction")
    j["extinction_time"] = traj.final_time;
  if (cfg.params.lambda1 > 0) {
    const double bound = first.energy_total /
                             (4 * cfg.params.lambda1 * cfg.params.lambda1 *
                              std::numbers::pi) +
                         1.0;
    j["theorem_bound"] = bound;
    j["theorem_bound_satisfied"] = traj.final_time < bound;
  }

  j["audit"] = {{"clean", audit.clean()},
                {"energy_violations", audit.energy_violations},
                {"ao2_violations", audit.ao2_violations},
                {"ledger_violations", audit.ledger_violations},
                {"li_yau_violations", audit.li_yau_violations},
                {"max_energy_increase_rel", audit.max_energy_increase_rel},
                {"max_ledger_residual", audit.max_ledger_residual}};
  return j;
}

} // namespace cwflow
