#include "cwflow/energy.hpp"
#include "cwflow/sphere_oracle.hpp"

#include <doctest.h>

#include <numbers>

using namespace cwflow;
constexpr double pi = std::numbers::pi;

TEST_CASE("parameter validation") {
  FlowParams p;
  p.lambda1 = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(p.validate());
  p = FlowParams{};
  p.theorem_mode = true;
  p.lambda1 = -1;
  CHECK_THROWS(p.validate());
  p.lambda1 = 1;
  p.lambda2 = -0.5;
  CHECK_THROWS(p.validate());
  p.lambda2 = 0;
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("energy of the unit sphere matches the closed form") {
  const TriangleSurface s = icosphere(4);
  FlowParams p;
  p.lambda1 = 1;
  p.lambda2 = 1;
  const EnergyBreakdown e = helfrich_energy(s, p);
  // 4 pi + 4 pi + 4 pi / 3 = 29.3215...
  CHECK(e.total ==
        doctest::Approx(oracle::sphere_energy(1.0, 1.0, 1.0)).epsilon(0.01));
  CHECK(e.willmore == doctest::Approx(4 * pi).epsilon(0.01));
  CHECK(e.area_term == doctest::Approx(4 * pi).epsilon(0.01));
  CHECK(e.volume_term == doctest::Approx(4 * pi / 3).epsilon(0.01));
}

TEST_CASE("pure Willmore energy is scale invariant at 4 pi") {
  FlowParams p;
  p.lambda1 = 0;
  p.lambda2 = 0;
  const TriangleSurface s = icosphere(4);
  for (double c : {0.5, 1.0, 3.0}) {
    const TriangleSurface sc =
        s.with_vertices(VertexPositions(c * s.vertices()));
    CHECK(helfrich_energy(sc, p).willmore ==
          doctest::Approx(4 * pi).epsilon(0.01));
  }
}

TEST_CASE("spontaneous curvature c0 = 2 zeroes the unit-sphere bending term") {
  FlowParams p;
  p.c0 = 2;
  p.lambda1 = 0;
  const EnergyBreakdown e = helfrich_energy(icosphere(4), p);
  CHECK(e.willmore < 0.01);
}

TEST_CASE("Euler-Lagrange operator on round spheres") {
  FlowParams p;
  p.lambda1 = 1;
  p.lambda2 = 1;
  const TriangleSurface base = icosphere(4);
  for (double rho : {0.5, 1.0, 2.0}) {
    const TriangleSurface s =
        base.with_vertices(VertexPositions(rho * base.vertices()));
    const ScalarField W = euler_lagrange(s, p);
    // sphere: Delta H = 0, Ao = 0, so W = -4 lambda1 / rho - 2 lambda2
    const double expected = -4 * p.lambda1 / rho - 2 * p.lambda2;
    CHECK((W.array() - expected).abs().maxCoeff() <
          0.05 * std::abs(expected));
  }
}

TEST_CASE("Euler-Lagrange matches the radius ODE rate") {
  // dr/dt along the flow equals W on the sphere (velocity +W nu_out)
  FlowParams p;
  p.lambda1 = 1;
  const ScalarField W = euler_lagrange(icosphere(4), p);
  const double mean = W.mean();
  CHECK(mean == doctest::Approx(-4.0).epsilon(0.02));
}

TEST_CASE("first variation against the finite-difference derivative") {
  const TriangleSurface s = icosphere(3);
  FlowParams p;
  p.lambda1 = 1;
  p.lambda2 = 1;

  SUBCASE("uniform inward displacement of the unit sphere") {
    // d/ds E(S_{1-s}) = -(8 pi lambda1 + 4 pi lambda2) at s = 0
    const ScalarField phi = ScalarField::Ones(s.vertex_count());
    const FirstVariationReport rep = first_variation_check(s, p, phi, 1e-4);
    const double expected = -(8 * pi * p.lambda1 + 4 * pi * p.lambda2);
    CHECK(rep.fd_derivative == doctest::Approx(expected).epsilon(0.02));
    CHECK(rep.pairing == doctest::Approx(expected).epsilon(0.02));
    CHECK(rep.residual_rel < 0.02);
  }

  SUBCASE("non-uniform test function") {
    ScalarField phi(s.vertex_count());
    for (int v = 0; v < s.vertex_count(); ++v)
      phi[v] = s.vertex(v).z(); // first spherical harmonic
    const FirstVariationReport rep = first_variation_check(s, p, phi, 1e-4);
    // translation mode: exact derivative is zero; require the pairing and
    // the FD derivative to agree on the scale of the uniform mode above
    CHECK(std::abs(rep.fd_derivative - rep.pairing) < 0.5);
  }
}

TEST_CASE("first variation residual decays under refinement") {
  FlowParams p;
  p.lambda1 = 1;
  double prev = std::numeric_limits<double>::infinity();
  for (int level : {2, 3, 4}) {
    const TriangleSurface s = icosphere(level);
    ScalarField phi(s.vertex_count());
    for (int v = 0; v < s.vertex_count(); ++v) {
      const Vec3 q = s.vertex(v);
      phi[v] = 1.0 + 0.3 * (3 * q.z() * q.z() - 1.0);
    }
    const FirstVariationReport rep = first_variation_check(s, p, phi, 1e-5);
    CHECK(rep.residual_rel < prev + 1e-12);
    prev = rep.residual_rel;
    if (level == 4) CHECK(rep.residual_rel < 0.02);
  }
}
