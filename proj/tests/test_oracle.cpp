#include "cwflow/sphere_oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

namespace oracle = cwflow::oracle;
constexpr double pi = std::numbers::pi;

namespace {

// reference integration of d rho/dt = -4 l1/rho - 2 l2 with classical RK4
double rk4_radius(double rho0, double l1, double l2, double t, int steps) {
  auto f = [&](double r) { return -4 * l1 / r - 2 * l2; };
  double r = rho0;
  const double h = t / steps;
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(r);
    const double k2 = f(r + 0.5 * h * k1);
    const double k3 = f(r + 0.5 * h * k2);
    const double k4 = f(r + h * k3);
    r += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return r;
}

} // namespace

TEST_CASE("lambda2 = 0 closed form") {
  CHECK(oracle::extinction_time(1.0, 1.0, 0.0) == doctest::Approx(0.125));
  CHECK(oracle::sphere_radius(1.0, 1.0, 0.0, 0.06) ==
        doctest::Approx(std::sqrt(1.0 - 0.48)).epsilon(1e-14));
  CHECK(oracle::time_to_radius(2.0, 0.5, 0.0, 1.0) ==
        doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("lambda2 > 0 closed form: T(1,1,1) = 1/2 - ln(3/2)") {
  const double T = oracle::extinction_time(1.0, 1.0, 1.0);
  CHECK(T == doctest::Approx(0.5 - std::log(1.5)).epsilon(1e-12));
  CHECK(T == doctest::Approx(0.0945348918918356).epsilon(1e-12));
}

TEST_CASE("time_to_radius and sphere_radius are mutually inverse") {
  for (double l2 : {0.0, 0.5, 2.0})
    for (double rho : {0.2, 0.6, 0.95}) {
      const double t = oracle::time_to_radius(1.0, 1.0, l2, rho);
      CHECK(oracle::sphere_radius(1.0, 1.0, l2, t) ==
            doctest::Approx(rho).epsilon(1e-10));
    }
}

TEST_CASE("radius agrees with RK4 across a parameter grid") {
  for (double l1 : {0.5, 1.0, 2.0})
    for (double l2 : {0.0, 1.0})
      for (double rho0 : {0.5, 1.0, 2.0}) {
        const double T = oracle::extinction_time(rho0, l1, l2);
        const double t = 0.7 * T;
        const double ref = rk4_radius(rho0, l1, l2, t, 200000);
        CHECK(oracle::sphere_radius(rho0, l1, l2, t) ==
              doctest::Approx(ref).epsilon(1e-8));
      }
}

TEST_CASE("extinction time is within the theorem bound") {
  for (double l1 : {0.5, 1.0, 2.0})
    for (double l2 : {0.0, 1.0})
      for (double rho0 : {0.5, 1.0, 2.0}) {
        const double E0 = oracle::sphere_energy(rho0, l1, l2);
        CHECK(oracle::extinction_time(rho0, l1, l2) <
              oracle::theorem_bound(E0, l1));
      }
}

TEST_CASE("monotonicity in the parameters") {
  CHECK(oracle::extinction_time(1.0, 2.0, 0.0) <
        oracle::extinction_time(1.0, 1.0, 0.0));
  CHECK(oracle::extinction_time(1.0, 1.0, 1.0) <
        oracle::extinction_time(1.0, 1.0, 0.0));
  CHECK(oracle::extinction_time(0.5, 1.0, 0.0) <
        oracle::extinction_time(1.0, 1.0, 0.0));
}

TEST_CASE("sphere energy closed form") {
  CHECK(oracle::sphere_energy(1.0, 1.0, 1.0) ==
        doctest::Approx(4 * pi + 4 * pi + 4 * pi / 3).epsilon(1e-14));
  CHECK(oracle::sphere_energy(2.0, 0.5, 0.0) ==
        doctest::Approx(4 * pi + 8 * pi).epsilon(1e-14));
}

TEST_CASE("invalid arguments are rejected") {
  CHECK_THROWS(oracle::extinction_time(-1.0, 1.0, 0.0));
  CHECK_THROWS(oracle::extinction_time(1.0, 0.0, 0.0));
  CHECK_THROWS(oracle::extinction_time(1.0, 1.0, -1.0));
  CHECK_THROWS(oracle::time_to_radius(1.0, 1.0, 0.0, 2.0));
  CHECK_THROWS(oracle::sphere_radius(1.0, 1.0, 0.0, 0.2)); // t >= T
  CHECK_THROWS(oracle::theorem_bound(1.0, 0.0));
}

TEST_CASE("smallness constants") {
  const auto rep = oracle::smallness_constants(1.0, 1.0, 1.0);
  CHECK(rep.sobolev_constant == doctest::Approx(64.0 / std::sqrt(pi)));
  CHECK(rep.sobolev_constant == doctest::Approx(36.1078).epsilon(1e-5));
  CHECK(rep.lambda2_cap_applicable);
  CHECK(rep.lambda2_cap == doctest::Approx(0.25));
  CHECK(rep.c3_cap_available);
  CHECK(rep.c3_cap ==
        doctest::Approx(0.5 / (32 * rep.sobolev_constant *
                               rep.sobolev_constant)));

  const auto no2 = oracle::smallness_constants(2.0, 0.0);
  CHECK_FALSE(no2.lambda2_cap_applicable);
  CHECK_FALSE(no2.c3_cap_available);
}
