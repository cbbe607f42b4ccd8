#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace cwflow::oracle {

/// Round spheres shrink self-similarly: with H = 2/rho and A^o = 0 the flow
/// reduces to the radius ODE
///   d rho / dt = -4 lambda1 / rho - 2 lambda2.
/// For lambda2 = 0 this integrates to rho(t)^2 = rho0^2 - 8 lambda1 t; for
/// lambda2 > 0 the closed-form antiderivative of t(rho) is inverted by
/// bisection.

/// Time at which the sphere starting at rho0 reaches radius rho.
inline double time_to_radius(double rho0, double lambda1, double lambda2,
                             double rho) {
  if (!(lambda1 > 0) || lambda2 < 0)
    throw std::invalid_argument("requires lambda1 > 0, lambda2 >= 0");
  if (!(rho >= 0 && rho <= rho0)) throw std::invalid_argument("rho out of range");
  if (lambda2 == 0) return (rho0 * rho0 - rho * rho) / (8 * lambda1);
  // t(rho) = int_rho^rho0 r dr / (4 l1 + 2 l2 r)
  auto anti = [&](double r) {
    return r / (2 * lambda2) -
           (lambda1 / (lambda2 * lambda2)) * std::log(4 * lambda1 + 2 * lambda2 * r);
  };
  return anti(rho0) - anti(rho);
}

inline double extinction_time(double rho0, double lambda1, double lambda2) {
  if (!(rho0 > 0)) throw std::invalid_argument("rho0 must be positive");
  if (!(lambda1 > 0))
    throw std::invalid_argument("no finite extinction without lambda1 > 0");
  if (lambda2 < 0) throw std::invalid_argument("requires lambda2 >= 0");
  return time_to_radius(rho0, lambda1, lambda2, 0.0);
}

inline double sphere_radius(double rho0, double lambda1, double lambda2,
                            double t) {
  const double T = extinction_time(rho0, lambda1, lambda2);
  if (t < 0 || t >= T) throw std::invalid_argument("t outside [0, extinction)");
  if (lambda2 == 0) return std::sqrt(rho0 * rho0 - 8 * lambda1 * t);
  // bisection on the monotone map rho -> time_to_radius
  double lo = 0, hi = rho0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (time_to_radius(rho0, lambda1, lambda2, mid) > t) lo = mid;
    else hi = mid;
    if (hi - lo < 1e-14 * rho0) break;
  }
  return 0.5 * (lo + hi);
}

/// Finite-time bound of the main shrink-to-round-point theorem:
///   T < E(f0) / (4 lambda1^2 pi) + 1.
inline double theorem_bound(double energy_f0, double lambda1) {
  if (!(lambda1 > 0)) throw std::invalid_argument("lambda1 must be positive");
  if (energy_f0 < 0) throw std::invalid_argument("energy must be >= 0");
  return energy_f0 / (4 * lambda1 * lambda1 * std::numbers::pi) + 1.0;
}

/// Energy of the round sphere S_rho: 4 pi + 4 pi lambda1 rho^2 +
/// (4 pi/3) lambda2 rho^3.
inline double sphere_energy(double rho, double lambda1, double lambda2) {
  constexpr double pi = std::numbers::pi;
  return 4 * pi + 4 * pi * lambda1 * rho * rho +
         (4 * pi / 3) * lambda2 * rho * rho * rho;
}

struct SmallnessReport {
  double sobolev_constant = 0;        // C_S = 4^3 / sqrt(omega_2), omega_2 = pi
  double lambda2_cap = 0;             // lambda1^3 / (4 lambda2^2), lambda2 > 0
  bool lambda2_cap_applicable = false;
  double c3_cap = 0;                  // (1/(32 C_S^2)) min{1, 1/(2 c3)}
  bool c3_cap_available = false;
};

/// Reports the computable smallness caps on epsilon2. The constant c3 comes
/// from an external estimate and has no numeric value here; it is accepted
/// as an input and never invented.
inline SmallnessReport smallness_constants(double lambda1, double lambda2,
                                           double c3 = 0) {
  if (!(lambda1 > 0)) throw std::invalid_argument("lambda1 must be positive");
  SmallnessReport rep;
  rep.sobolev_constant = 64.0 / std::sqrt(std::numbers::pi);
  if (lambda2 > 0) {
    rep.lambda2_cap_applicable = true;
    rep.lambda2_cap = lambda1 * lambda1 * lambda1 / (4 * lambda2 * lambda2);
  }
  if (c3 > 0) {
    rep.c3_cap_available = true;
    rep.c3_cap = (1.0 / (32 * rep.sobolev_constant * rep.sobolev_constant)) *
                 std::min(1.0, 1.0 / (2 * c3));
  }
  return rep;
}

} // namespace cwflow::oracle
