// Acceptance gate: one pass/fail line per criterion, driven by three bundled
// flow runs (shrinking sphere at two parameter sets, perturbed sphere in
// theorem mode) plus the closed-form quadrature cross-checks.

#include "cwflow/flow.hpp"
#include "cwflow/io.hpp"
#include "cwflow/sphere_oracle.hpp"

#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <numbers>

using namespace cwflow;
constexpr double pi = std::numbers::pi;

namespace {

struct RunResult {
  Trajectory traj;
  double initial_energy = 0;
  double wall_seconds = 0;
};

StepPolicy bundled_policy() {
  StepPolicy policy;
  policy.cfl = 0.08;
  policy.remesh_every = 25;
  policy.coarsen = true;
  policy.coarsen_exponent = 1.0 / 6.0;
  policy.edge_floor_scale = 0.45;
  return policy;
}

RunResult run_bundled(const TriangleSurface& initial, const FlowParams& params,
                      long snapshot_every) {
  RunResult res;
  res.initial_energy = helfrich_energy(initial, params).total;
  StoppingSpec stop;
  stop.max_steps = 40'000'000;
  DiagnosticsConfig diag;
  diag.record_every = 2000;
  diag.snapshot_every = snapshot_every;
  const auto t0 = std::chrono::steady_clock::now();
  res.traj = run_flow(initial, params, bundled_policy(), stop, diag);
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return res;
}

const RunResult& sphere_run_l20() {
  static const RunResult res = [] {
    FlowParams p;
    p.lambda1 = 1;
    p.lambda2 = 0;
    p.theorem_mode = true;
    return run_bundled(icosphere(4), p, 0);
  }();
  return res;
}

const RunResult& sphere_run_l21() {
  static const RunResult res = [] {
    FlowParams p;
    p.lambda1 = 1;
    p.lambda2 = 1;
    p.theorem_mode = true;
    return run_bundled(icosphere(3), p, 0);
  }();
  return res;
}

const RunResult& perturbed_run() {
  static const RunResult res = [] {
    FlowParams p;
    p.lambda1 = 1;
    p.lambda2 = 0;
    p.theorem_mode = true;
    const TriangleSurface init =
        sample_mesh(AnalyticSurface::perturbed_sphere(1.0, 0.1), 4);
    return run_bundled(init, p, 50'000);
  }();
  return res;
}

void verdict(int criterion, bool pass, const std::string& what) {
  std::printf("criterion %2d: %s — %s\n", criterion, pass ? "PASS" : "FAIL",
              what.c_str());
  CHECK_MESSAGE(pass, "criterion ", criterion, ": ", what);
}

} // namespace

TEST_CASE("1. self-similar sphere shrinking") {
  const RunResult& run = sphere_run_l20();
  const double T = oracle::extinction_time(1.0, 1.0, 0.0);
  double worst = 0;
  for (const DiagnosticsRecord& r : run.traj.records) {
    if (r.time > 0.9 * T) break;
    const double rho = oracle::sphere_radius(1.0, 1.0, 0.0, r.time);
    const double fitted = std::sqrt(r.area / (4 * pi));
    worst = std::max(worst, std::abs(fitted - rho) / rho);
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "max radius error %.3f%% for t <= 0.9T, wall %.0fs", 100 * worst,
                run.wall_seconds);
  verdict(1, run.traj.termination == "extinction" && worst < 0.02 &&
                 run.wall_seconds < 300,
          buf);
}

TEST_CASE("2. extinction times") {
  const double t0 = sphere_run_l20().traj.final_time;
  const double t1 = sphere_run_l21().traj.final_time;
  const double ref0 = 0.125, ref1 = 0.0945349;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "lambda2=0: T=%.5f (ref %.5f); lambda2=1: T=%.5f (ref %.5f)",
                t0, ref0, t1, ref1);
  verdict(2, std::abs(t0 - ref0) < 0.05 * ref0 &&
                 std::abs(t1 - ref1) < 0.05 * ref1,
          buf);
}

TEST_CASE("3. finite-time bound") {
  bool ok = true;
  std::string detail;
  for (const RunResult* run :
       {&sphere_run_l20(), &sphere_run_l21(), &perturbed_run()}) {
    const double bound =
        run->initial_energy / (4 * 1.0 * 1.0 * pi) + 1.0; // lambda1 = 1 runs
    ok = ok && run->traj.final_time < bound;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "T=%.4f < %.4f; ", run->traj.final_time,
                  bound);
    detail += buf;
  }
  verdict(3, ok, detail);
}

TEST_CASE("4. round-point asymptotics") {
  const RunResult& run = perturbed_run();
  bool ok = false;
  std::string detail = "blowup analysis failed";
  try {
    const BlowupReport rep = blowup_analysis(run.traj, 8, 200);
    ok = rep.final_residual < 1e-2 &&
         rep.final_int_Ao2 < 0.1 * rep.first_int_Ao2;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "final residual %.2e, int|Ao|^2 %.2e -> %.2e",
                  rep.final_residual, rep.first_int_Ao2, rep.final_int_Ao2);
    detail = buf;
  } catch (const std::exception& ex) {
    detail = ex.what();
  }
  verdict(4, ok, detail);
}

TEST_CASE("5. energy monotonicity audit") {
  bool ok = true;
  int total_viol = 0;
  double worst = 0;
  for (const RunResult* run :
       {&sphere_run_l20(), &sphere_run_l21(), &perturbed_run()}) {
    AuditOptions opt; // energy descent only; remesh budget 0.5%
    const AuditReport rep = monotonicity_audit(run->traj, opt);
    total_viol += rep.energy_violations;
    worst = std::max(worst, rep.max_energy_increase_rel);
    ok = ok && rep.energy_violations == 0;
    for (const AuditViolation& v : rep.violations)
      if (v.check == "energy")
        std::printf("  energy violation at step %ld: +%.3e relative\n", v.step,
                    v.amount);
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf),
                "%d energy violations, max relative increase %.2e", total_viol,
                worst);
  verdict(5, ok, buf);
}

TEST_CASE("6. tracefree monotonicity and Li-Yau threshold") {
  const RunResult& run = perturbed_run();
  AuditOptions opt;
  opt.theorem_mode = true;
  const AuditReport rep = monotonicity_audit(run.traj, opt);
  char buf[120];
  std::snprintf(buf, sizeof(buf),
                "%d int|Ao|^2 violations, %d Li-Yau violations",
                rep.ao2_violations, rep.li_yau_violations);
  verdict(6, rep.ao2_violations == 0 && rep.li_yau_violations == 0, buf);
}

TEST_CASE("7. operator convergence") {
  double prev_h = std::numeric_limits<double>::infinity();
  double prev_k = std::numeric_limits<double>::infinity();
  bool decreasing = true, gauss_bonnet = true, final_ok = true;
  double h4 = 0, k4 = 0, a4 = 0, v4 = 0;
  for (int level : {2, 3, 4}) {
    const TriangleSurface s = icosphere(level);
    DiscreteGeometry g;
    g.compute(s);
    const double h_err = (g.bundle.H.array() - 2.0).abs().maxCoeff() / 2.0;
    const double k_err = (g.bundle.K.array() - 1.0).abs().maxCoeff();
    decreasing = decreasing && h_err < prev_h && k_err < prev_k;
    prev_h = h_err;
    prev_k = k_err;
    gauss_bonnet =
        gauss_bonnet && std::abs(g.integrate(g.bundle.K) - 4 * pi) < 1e-10;
    if (level == 4) {
      h4 = h_err;
      k4 = k_err;
      a4 = std::abs(g.bundle.total_area - 4 * pi) / (4 * pi);
      v4 = std::abs(signed_volume(s) - 4 * pi / 3) / (4 * pi / 3);
      final_ok = h4 < 0.01 && k4 < 0.01 && a4 < 0.01 && v4 < 0.01;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "subdiv-4 errors H %.2e K %.2e area %.2e vol %.2e", h4, k4, a4,
                v4);
  verdict(7, decreasing && gauss_bonnet && final_ok, buf);
}

TEST_CASE("8. first variation") {
  FlowParams p;
  p.lambda1 = 1;
  p.lambda2 = 1;
  const double expected = -(8 * pi * p.lambda1 + 4 * pi * p.lambda2);
  double prev = std::numeric_limits<double>::infinity();
  bool decreasing = true;
  double res4 = 0, fd4 = 0;
  for (int level : {2, 3, 4}) {
    const TriangleSurface s = icosphere(level);
    const ScalarField phi = ScalarField::Ones(s.vertex_count());
    const FirstVariationReport rep = first_variation_check(s, p, phi, 1e-5);
    decreasing = decreasing && rep.residual_rel < prev + 1e-12;
    prev = rep.residual_rel;
    if (level == 4) {
      res4 = rep.residual_rel;
      fd4 = rep.fd_derivative;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "dE/ds = %.4f (analytic %.4f), subdiv-4 residual %.2e", fd4,
                expected, res4);
  verdict(8, decreasing && res4 <= 0.02 &&
                 std::abs(fd4 - expected) < 0.02 * std::abs(expected),
          buf);
}

TEST_CASE("9. identity suite") {
  const IdentityReport torus = identity_suite(AnalyticSurface::torus(2.0, 1.0));
  const IdentityReport pert =
      identity_suite(AnalyticSurface::perturbed_sphere(1.0, 0.1));
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "torus residual %.2e, MS battery %d+%d tested, 0 violations "
                "required (got %d)",
                torus.identity_residual_rel, torus.ms_tested, pert.ms_tested,
                torus.ms_violations + pert.ms_violations);
  verdict(9, torus.identity_residual_rel <= 1e-4 && torus.ms_violations == 0 &&
                 pert.ms_violations == 0,
          buf);
}

TEST_CASE("10. torus Willmore cross-check") {
  const QuadratureResult q = quadrature_integrate(
      AnalyticSurface::torus(std::sqrt(2.0), 1.0), Integrand::H2, 1e-8);
  const double rel = std::abs(0.25 * q.value - 2 * pi * pi) / (2 * pi * pi);
  char buf[120];
  std::snprintf(buf, sizeof(buf), "1/4 int H^2 = %.8f (2 pi^2 = %.8f)",
                0.25 * q.value, 2 * pi * pi);
  verdict(10, q.converged && rel <= 1e-4, buf);
}
