#pragma once

#include "cwflow/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace cwflow {

/// Parameters of the Helfrich functional
///   E(f) = 1/4 int (H - c0)^2 dmu + lambda1 mu(Sigma) + lambda2 Vol.
/// theorem_mode enforces the shrink-to-round-point hypotheses
/// (lambda1 > 0, lambda2 >= 0) and carries the configurable small-energy
/// threshold epsilon2 (the sharp value depends on an uncomputed absolute
/// constant, so it is a knob, default 0.1 * 4pi).
struct FlowParams {
  double c0 = 0;
  double lambda1 = 1;
  double lambda2 = 0;
  bool theorem_mode = false;
  double epsilon2 = 0.4 * std::numbers::pi;

  void validate() const {
    if (!std::isfinite(c0) || !std::isfinite(lambda1) || !std::isfinite(lambda2))
      throw std::invalid_argument("non-finite flow parameter");
    if (theorem_mode && !(lambda1 > 0 && lambda2 >= 0))
      throw std::invalid_argument(
          "theorem mode requires lambda1 > 0 and lambda2 >= 0");
  }
};

struct EnergyBreakdown {
  double willmore = 0;    // 1/4 int (H - c0)^2
  double area_term = 0;   // lambda1 * area
  double volume_term = 0; // lambda2 * signed volume
  double total = 0;
  double area = 0;
  double volume = 0;
};

inline EnergyBreakdown helfrich_energy(const DiscreteGeometry& geom,
                                       const TriangleSurface& s,
                                       const FlowParams& p) {
  EnergyBreakdown e;
  const ScalarField dev =
      (geom.bundle.H.array() - p.c0).square().matrix();
  e.willmore = 0.25 * geom.integrate(dev);
  e.area = geom.bundle.total_area;
  e.volume = signed_volume(s);
  e.area_term = p.lambda1 * e.area;
  e.volume_term = p.lambda2 * e.volume;
  e.total = e.willmore + e.area_term + e.volume_term;
  return e;
}

inline EnergyBreakdown helfrich_energy(const TriangleSurface& s,
                                       const FlowParams& p) {
  DiscreteGeometry geom;
  geom.compute(s);
  return helfrich_energy(geom, s, p);
}

/// Euler-Lagrange operator of the Helfrich functional,
///   W = Delta H + H|A^o|^2 + 2 c0 K - (2 lambda1 + c0^2/2) H - 2 lambda2,
/// evaluated per vertex with the discrete operators. The flow has normal
/// velocity -W along the inward normal, i.e. +W along nu_out.
inline ScalarField euler_lagrange(const DiscreteGeometry& geom,
                                  const TriangleSurface& s,
                                  const FlowParams& p) {
  const ScalarField laplH = geom.laplace(s, geom.bundle.H);
  ScalarField W(s.vertex_count());
  const double lin = 2 * p.lambda1 + 0.5 * p.c0 * p.c0;
  for (int v = 0; v < s.vertex_count(); ++v)
    W[v] = laplH[v] + geom.bundle.H[v] * geom.bundle.Ao2[v] +
           2 * p.c0 * geom.bundle.K[v] - lin * geom.bundle.H[v] - 2 * p.lambda2;
  return W;
}

inline ScalarField euler_lagrange(const TriangleSurface& s, const FlowParams& p) {
  DiscreteGeometry geom;
  geom.compute(s);
  return euler_lagrange(geom, s, p);
}

struct FirstVariationReport {
  double fd_derivative = 0;      // centered difference of the discrete energy
  double pairing = 0;            // 1/2 int phi W dmu
  double residual_rel = 0;
  double step = 0;
};

/// Compares d/ds E(f - s phi nu_out)|_{s=0} (displacement along the inward
/// normal, matching the flow's sign convention) against 1/2 int phi W dmu.
/// This is a mesh-convergence check: the discrete Euler-Lagrange operator is
/// not the exact gradient of the discrete energy, agreement improves under
/// refinement.
inline FirstVariationReport first_variation_check(const TriangleSurface& s,
                                                  const FlowParams& p,
                                                  const ScalarField& phi,
                                                  double step = 1e-4) {
  DiscreteGeometry geom;
  geom.compute(s);

  auto energy_at = [&](double sgn) {
    VertexPositions V = s.vertices();
    for (int v = 0; v < s.vertex_count(); ++v)
      V.row(v) -= sgn * step * phi[v] * geom.bundle.nu.row(v);
    const TriangleSurface moved = s.with_vertices(std::move(V));
    return helfrich_energy(moved, p).total;
  };
  const double ep = energy_at(1.0), em = energy_at(-1.0);
  if (!std::isfinite(ep) || !std::isfinite(em))
    throw std::runtime_error("non-finite energy in variation check");

  FirstVariationReport rep;
  rep.step = step;
  rep.fd_derivative = (ep - em) / (2 * step);
  const ScalarField W = euler_lagrange(geom, s, p);
  rep.pairing = 0.5 * geom.integrate(
                          (phi.array() * W.array()).matrix());
  const double scale = std::max({std::abs(rep.fd_derivative),
                                 std::abs(rep.pairing), 1e-12});
  rep.residual_rel = std::abs(rep.fd_derivative - rep.pairing) / scale;
  return rep;
}

} // namespace cwflow
