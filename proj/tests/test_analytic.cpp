#include "cwflow/analytic.hpp"
#include "cwflow/geometry.hpp"

#include <doctest.h>

#include <numbers>

using namespace cwflow;
constexpr double pi = std::numbers::pi;

TEST_CASE("exact sphere curvatures") {
  const AnalyticSurface s = AnalyticSurface::sphere(2.0);
  for (double u : {0.3, 1.0, 2.8})
    for (double v : {0.1, 2.0, 5.0}) {
      CHECK(s.exact_H(u, v) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(s.exact_K(u, v) == doctest::Approx(0.25).epsilon(1e-12));
      CHECK(s.forms(u, v).Ao2 == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("spheroid pole is umbilic with H = 2c/a^2") {
  const AnalyticSurface s = AnalyticSurface::spheroid(1.0, 1.5);
  const double u = 1e-6; // chart degenerates at the exact pole
  CHECK(s.exact_H(u, 0.0) == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(s.forms(u, 0.0).Ao2 == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("exact fields satisfy |Ao|^2 = H^2/2 - 2K pointwise") {
  for (const AnalyticSurface& s :
       {AnalyticSurface::sphere(1.0), AnalyticSurface::spheroid(1.0, 1.5),
        AnalyticSurface::torus(2.0, 1.0),
        AnalyticSurface::perturbed_sphere(1.0, 0.1)}) {
    for (double u : {0.4, 1.2, 2.2})
      for (double v : {0.7, 3.0, 5.5}) {
        const ChartForms f = s.forms(u, v);
        CHECK(f.Ao2 ==
              doctest::Approx(0.5 * f.H * f.H - 2 * f.K).epsilon(1e-12));
        // tracefree part really is tracefree w.r.t. the metric
        const double trace = (f.ginv * f.Ao).trace();
        CHECK(std::abs(trace) < 1e-10);
      }
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS(AnalyticSurface::torus(1.0, 2.0));
  CHECK_THROWS(AnalyticSurface::perturbed_sphere(1.0, 0.7));
  CHECK_THROWS(AnalyticSurface::sphere(-1.0));
}

TEST_CASE("quadrature of basic integrands on the sphere") {
  const AnalyticSurface s = AnalyticSurface::sphere(1.0);
  CHECK(quadrature_integrate(s, Integrand::One).value ==
        doctest::Approx(4 * pi).epsilon(1e-8));
  CHECK(quadrature_integrate(s, Integrand::H2).value ==
        doctest::Approx(16 * pi).epsilon(1e-8));
  CHECK(quadrature_integrate(s, Integrand::K).value ==
        doctest::Approx(4 * pi).epsilon(1e-8));
  CHECK(std::abs(quadrature_integrate(s, Integrand::Ao4).value) < 1e-10);
}

TEST_CASE("Willmore energy of the sqrt(2) torus is 2 pi^2") {
  // t = R/r = sqrt(2) minimizes pi^2 t^2 / sqrt(t^2 - 1) at 2 pi^2
  const AnalyticSurface s = AnalyticSurface::torus(std::sqrt(2.0), 1.0);
  const QuadratureResult q = quadrature_integrate(s, Integrand::H2, 1e-8);
  CHECK(q.converged);
  CHECK(0.25 * q.value == doctest::Approx(2 * pi * pi).epsilon(1e-4));
}

TEST_CASE("torus Gauss-Bonnet by quadrature") {
  const AnalyticSurface s = AnalyticSurface::torus(2.0, 1.0);
  CHECK(std::abs(quadrature_integrate(s, Integrand::K).value) < 1e-8);
}

TEST_CASE("gradient integrands vanish on the round sphere") {
  const AnalyticSurface s = AnalyticSurface::sphere(1.0);
  CHECK(std::abs(quadrature_integrate(s, Integrand::GradH2).value) < 1e-10);
  CHECK(std::abs(quadrature_integrate(s, Integrand::GradAo2).value) < 1e-10);
}

TEST_CASE("integral identity suite") {
  SUBCASE("sphere: all terms vanish") {
    const IdentityReport rep = identity_suite(AnalyticSurface::sphere(1.0));
    CHECK(rep.identity_residual_rel < 1e-4);
    CHECK(rep.ms_violations == 0);
  }
  SUBCASE("torus R=2 r=1") {
    const IdentityReport rep = identity_suite(AnalyticSurface::torus(2.0, 1.0));
    CHECK(rep.identity_residual_rel <= 1e-4);
    CHECK(rep.codazzi_bound_holds);
    CHECK(rep.ms_violations == 0);
    CHECK(rep.max_ratio_gradH2_over_gradAo2 <= 8.0 + 1e-6);
  }
  SUBCASE("perturbed sphere") {
    const IdentityReport rep =
        identity_suite(AnalyticSurface::perturbed_sphere(1.0, 0.1));
    CHECK(rep.identity_residual_rel <= 1e-3);
    CHECK(rep.codazzi_bound_holds);
    CHECK(rep.ms_violations == 0);
  }
}

TEST_CASE("Michael-Simon constant check for u = 1 on the unit sphere") {
  // LHS = sqrt(4 pi), RHS = (64/sqrt(pi)) * int |H| = (64/sqrt(pi)) * 8 pi
  const AnalyticSurface s = AnalyticSurface::sphere(1.0);
  const double lhs = std::sqrt(4 * pi);
  const double rhs = (64.0 / std::sqrt(pi)) * 8 * pi;
  CHECK(lhs == doctest::Approx(3.5449).epsilon(1e-4));
  CHECK(rhs == doctest::Approx(907.57).epsilon(1e-3));
  CHECK(lhs < rhs);
}

TEST_CASE("sampled meshes are valid and sized as expected") {
  const TriangleSurface sph =
      sample_mesh(AnalyticSurface::sphere(1.0), 4);
  CHECK(sph.vertex_count() == 2562); // 10 * 4^k + 2
  CHECK(sph.euler_characteristic() == 2);

  const TriangleSurface tor = sample_mesh(AnalyticSurface::torus(2.0, 1.0), 64);
  CHECK(tor.euler_characteristic() == 0);
  CHECK(tor.vertex_count() == 64 * 32);
  CHECK(signed_volume(tor) > 0); // outward orientation

  const TriangleSurface pert =
      sample_mesh(AnalyticSurface::perturbed_sphere(1.0, 0.1), 3);
  CHECK(pert.euler_characteristic() == 2);
  CHECK_THROWS(sample_mesh(AnalyticSurface::sphere(1.0), 1));
}

TEST_CASE("discrete curvatures converge to the analytic fields") {
  auto max_rel_err = [](const AnalyticSurface& surf, int level) {
    const TriangleSurface mesh = sample_mesh(surf, level);
    DiscreteGeometry g;
    g.compute(mesh);
    double worst = 0;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      const Vec3 p = mesh.vertex(v);
      const double theta = std::acos(std::clamp(
          p.normalized().z(), -1.0, 1.0));
      const double phi = std::atan2(p.y(), p.x());
      const double He = surf.exact_H(std::max(theta, 1e-8), phi);
      worst = std::max(worst, std::abs(g.bundle.H[v] - He) / std::abs(He));
    }
    return worst;
  };
  // spheroid vertices sit on the chart rays only for sphere-like kinds where
  // the radial map preserves direction; for the sphere this is exact
  const AnalyticSurface sph = AnalyticSurface::sphere(1.0);
  double prev = std::numeric_limits<double>::infinity();
  for (int level : {2, 3, 4}) {
    const double err = max_rel_err(sph, level);
    CHECK(err < prev);
    prev = err;
    if (level == 4) CHECK(err < 0.01);
  }
}

TEST_CASE("identity residual decreases under quadrature refinement") {
  const AnalyticSurface s = AnalyticSurface::torus(2.0, 1.0);
  auto residual_at = [&](int n) {
    auto q = [&](Integrand which) {
      double total = 0;
      const auto field = [&](double u, double v) {
        switch (which) {
          case Integrand::H2Ao2: {
            const ChartForms f = s.forms(u, v);
            return f.H * f.H * f.Ao2;
          }
          case Integrand::Ao4: {
            const double a = s.forms(u, v).Ao2;
            return a * a;
          }
          case Integrand::GradH2: return curvature_gradients(s, u, v).gradH2;
          case Integrand::GradAo2: return curvature_gradients(s, u, v).gradAo2;
          default: return 0.0;
        }
      };
      const int nu = 2 * n, nv = n;
      const double du = 2 * pi / nu, dv = 2 * pi / nv;
      for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j)
          total += field(i * du, j * dv) * s.forms(i * du, j * dv).sqrt_g * du * dv;
      return total;
    };
    const double t1 = q(Integrand::GradAo2), t2 = 0.5 * q(Integrand::H2Ao2);
    const double t3 = 0.5 * q(Integrand::GradH2), t4 = q(Integrand::Ao4);
    return std::abs(t1 + t2 - t3 - t4) / std::max({t1, t2, t3, t4});
  };
  const double r1 = residual_at(8), r2 = residual_at(16);
  CHECK(r2 <= r1 + 1e-12);
}
