#pragma once

#include "cwflow/mesh.hpp"

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace cwflow {

/// Position and derivatives of a parametric chart up to second order.
struct ChartJet2 {
  Vec3 p, pu, pv, puu, puv, pvv;
};

/// First/second fundamental forms and curvatures at a chart point. The
/// second form is taken against the inward normal so round spheres have
/// H = 2/rho > 0.
struct ChartForms {
  Vec3 p, n_out;
  Eigen::Matrix2d g;     // metric [E F; F G]
  Eigen::Matrix2d ginv;
  Eigen::Matrix2d A;     // second fundamental form (inward-normal sign)
  Eigen::Matrix2d Ao;    // tracefree part
  double sqrt_g = 0;     // area element
  double H = 0, K = 0, Ao2 = 0;
};

enum class SurfaceKind { Sphere, Spheroid, Torus, PerturbedSphere };

/// Closed-form reference surfaces: sphere (rho), spheroid (a,a,c), torus
/// (R > r), and a radially perturbed sphere rho0(1 + eps Y) with Y a fixed
/// real degree-2 spherical-harmonic combination. Charts use (u,v) =
/// (theta, phi) for the sphere-like kinds and the standard torus angles.
class AnalyticSurface {
public:
  static AnalyticSurface sphere(double rho) {
    AnalyticSurface s;
    s.kind_ = SurfaceKind::Sphere;
    s.p0_ = rho;
    if (!(rho > 0)) throw std::invalid_argument("sphere radius must be positive");
    return s;
  }
  static AnalyticSurface spheroid(double a, double c) {
    AnalyticSurface s;
    s.kind_ = SurfaceKind::Spheroid;
    s.p0_ = a;
    s.p1_ = c;
    if (!(a > 0 && c > 0)) throw std::invalid_argument("spheroid semiaxes must be positive");
    return s;
  }
  static AnalyticSurface torus(double R, double r) {
    AnalyticSurface s;
    s.kind_ = SurfaceKind::Torus;
    s.p0_ = R;
    s.p1_ = r;
    if (!(R > r && r > 0)) throw std::invalid_argument("torus requires R > r > 0");
    return s;
  }
  static AnalyticSurface perturbed_sphere(double rho0, double eps) {
    AnalyticSurface s;
    s.kind_ = SurfaceKind::PerturbedSphere;
    s.p0_ = rho0;
    s.p1_ = eps;
    if (!(rho0 > 0)) throw std::invalid_argument("radius must be positive");
    if (!(std::abs(eps) < 0.5))
      throw std::invalid_argument("perturbation amplitude must satisfy |eps| < 0.5");
    return s;
  }

  SurfaceKind kind() const { return kind_; }
  bool u_periodic() const { return kind_ == SurfaceKind::Torus; }
  /// Kind-dependent parameters: (rho,-), (a,c), (R,r), (rho0,eps).
  double param0() const { return p0_; }
  double param1() const { return p1_; }

  /// Fixed degree-2 perturbation pattern and its chart derivatives.
  static void harmonic_y2(double theta, double phi, double& y, double& yt,
                          double& yp, double& ytt, double& ytp, double& ypp) {
    constexpr double w20 = 0.7, w22 = 0.3;
    const double s = std::sin(theta), c = std::cos(theta);
    const double c2p = std::cos(2 * phi), s2p = std::sin(2 * phi);
    y = w20 * 0.5 * (3 * c * c - 1) + w22 * s * s * c2p;
    yt = -3 * w20 * s * c + 2 * w22 * s * c * c2p;
    yp = -2 * w22 * s * s * s2p;
    ytt = -3 * w20 * (c * c - s * s) + 2 * w22 * (c * c - s * s) * c2p;
    ytp = -4 * w22 * s * c * s2p;
    ypp = -4 * w22 * s * s * c2p;
  }

  ChartJet2 jet(double u, double v) const {
    ChartJet2 j;
    switch (kind_) {
      case SurfaceKind::Sphere:
      case SurfaceKind::PerturbedSphere: {
        const double su = std::sin(u), cu = std::cos(u);
        const double sv = std::sin(v), cv = std::cos(v);
        const Vec3 er(su * cv, su * sv, cu);
        const Vec3 et(cu * cv, cu * sv, -su);
        const Vec3 ep(-su * sv, su * cv, 0);
        const Vec3 etp(-cu * sv, cu * cv, 0);
        const Vec3 epp(-su * cv, -su * sv, 0);
        double rho = p0_, rt = 0, rp = 0, rtt = 0, rtp = 0, rpp = 0;
        if (kind_ == SurfaceKind::PerturbedSphere) {
          double y, yt, yp, ytt, ytp, ypp;
          harmonic_y2(u, v, y, yt, yp, ytt, ytp, ypp);
          rho = p0_ * (1 + p1_ * y);
          rt = p0_ * p1_ * yt;
          rp = p0_ * p1_ * yp;
          rtt = p0_ * p1_ * ytt;
          rtp = p0_ * p1_ * ytp;
          rpp = p0_ * p1_ * ypp;
        }
        j.p = rho * er;
        j.pu = rt * er + rho * et;
        j.pv = rp * er + rho * ep;
        j.puu = rtt * er + 2 * rt * et - rho * er;
        j.puv = rtp * er + rt * ep + rp * et + rho * etp;
        j.pvv = rpp * er + 2 * rp * ep + rho * epp;
        break;
      }
      case SurfaceKind::Spheroid: {
        const double a = p0_, c = p1_;
        const double su = std::sin(u), cu = std::cos(u);
        const double sv = std::sin(v), cv = std::cos(v);
        j.p = Vec3(a * su * cv, a * su * sv, c * cu);
        j.pu = Vec3(a * cu * cv, a * cu * sv, -c * su);
        j.pv = Vec3(-a * su * sv, a * su * cv, 0);
        j.puu = Vec3(-a * su * cv, -a * su * sv, -c * cu);
        j.puv = Vec3(-a * cu * sv, a * cu * cv, 0);
        j.pvv = Vec3(-a * su * cv, -a * su * sv, 0);
        break;
      }
      case SurfaceKind::Torus: {
        const double R = p0_, r = p1_;
        const double su = std::sin(u), cu = std::cos(u);
        const double sv = std::sin(v), cv = std::cos(v);
        const double w = R + r * cv;
        j.p = Vec3(w * cu, w * su, r * sv);
        j.pu = Vec3(-w * su, w * cu, 0);
        j.pv = Vec3(-r * sv * cu, -r * sv * su, r * cv);
        j.puu = Vec3(-w * cu, -w * su, 0);
        j.puv = Vec3(r * sv * su, -r * sv * cu, 0);
        j.pvv = Vec3(-r * cv * cu, -r * cv * su, -r * sv);
        break;
      }
    }
    return j;
  }

  ChartForms forms(double u, double v) const {
    const ChartJet2 j = jet(u, v);
    ChartForms f;
    f.p = j.p;
    const double E = j.pu.dot(j.pu), F = j.pu.dot(j.pv), G = j.pv.dot(j.pv);
    const Vec3 cr = j.pu.cross(j.pv);
    const double det = E * G - F * F;
    f.sqrt_g = cr.norm();
    f.n_out = cr / f.sqrt_g; // chart orientation chosen outward
    const Vec3 n_in = -f.n_out;
    const double L = j.puu.dot(n_in), M = j.puv.dot(n_in), N = j.pvv.dot(n_in);
    f.g << E, F, F, G;
    f.ginv << G / det, -F / det, -F / det, E / det;
    f.A << L, M, M, N;
    f.H = (G * L - 2 * F * M + E * N) / det;
    f.K = (L * N - M * M) / det;
    f.Ao = f.A - 0.5 * f.H * f.g;
    f.Ao2 = 0.5 * f.H * f.H - 2 * f.K;
    return f;
  }

  double exact_H(double u, double v) const { return forms(u, v).H; }
  double exact_K(double u, double v) const { return forms(u, v).K; }

private:
  SurfaceKind kind_ = SurfaceKind::Sphere;
  double p0_ = 1, p1_ = 0;
};

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

namespace detail {

/// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = 0;
      for (int k = 0; k < n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2 * k + 1) * z * p1 - k * p2) / (k + 1);
      }
      pp = n * (z * p0 - p1) / (z * z - 1);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1 - z * z) * pp * pp);
  }
}

} // namespace detail

struct QuadratureResult {
  double value = 0;
  double est_rel_error = 0;
  bool converged = false;
};

/// Integrate fn(u,v) (a scalar field on the surface) against the exact area
/// element: Gauss-Legendre in theta and trapezoid in phi for sphere-like
/// charts, doubly periodic trapezoid for the torus. Refines until the
/// successive-level difference meets tol.
template <class Fn>
QuadratureResult quadrature(const AnalyticSurface& surf, Fn&& fn,
                            double rel_tol = 1e-7, int n_start = 24,
                            int n_max = 768) {
  constexpr double pi = std::numbers::pi;
  auto level = [&](int n) {
    double total = 0;
    if (surf.u_periodic()) {
      const int nu = 2 * n, nv = n;
      const double du = 2 * pi / nu, dv = 2 * pi / nv;
      for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) {
          const double u = i * du, v = j * dv;
          total += fn(u, v) * surf.forms(u, v).sqrt_g * du * dv;
        }
    } else {
      std::vector<double> gx, gw;
      detail::gauss_legendre(n, gx, gw);
      const int nv = 2 * n;
      const double dv = 2 * pi / nv;
      for (int i = 0; i < n; ++i) {
        const double u = 0.5 * pi * (gx[i] + 1.0);
        const double wu = 0.5 * pi * gw[i];
        for (int j = 0; j < nv; ++j) {
          const double v = j * dv;
          total += fn(u, v) * surf.forms(u, v).sqrt_g * wu * dv;
        }
      }
    }
    return total;
  };

  QuadratureResult res;
  double prev = level(n_start);
  for (int n = 2 * n_start; n <= n_max; n *= 2) {
    const double cur = level(n);
    const double scale = std::max({std::abs(cur), std::abs(prev), 1e-12});
    res.value = cur;
    res.est_rel_error = std::abs(cur - prev) / scale;
    if (res.est_rel_error <= rel_tol) {
      res.converged = true;
      return res;
    }
    prev = cur;
  }
  return res; // not converged; caller sees achieved error
}

// ---------------------------------------------------------------------------
// Covariant derivative quantities by chart finite differences
// ---------------------------------------------------------------------------

namespace detail {

/// 6th-order centered first-derivative weights for step h.
struct Stencil6 {
  static constexpr int half = 3;
  static constexpr double w[7] = {-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0,
                                  3.0 / 4,   -3.0 / 20, 1.0 / 60};
};

/// Shifts the stencil center so every sample stays strictly inside (0, pi).
/// The chart formulas continue through u = 0 with the normal flipped (H
/// changes sign), so a stencil must never straddle a pole.
inline double pole_safe_u(double u, double h, double guard = 1e-5) {
  constexpr double pi = std::numbers::pi;
  const double margin = Stencil6::half * h + guard;
  return std::clamp(u, margin, pi - margin);
}

} // namespace detail

/// Pointwise first-derivative data of the curvature fields at (u,v):
/// |grad H|^2, |grad A^o|^2 and |grad A|^2 with full covariant derivatives
/// (Christoffel symbols of the exact metric, derivatives by 6th-order
/// centered chart differences).
struct GradientData {
  double gradH2 = 0;
  double gradAo2 = 0;
  double gradA2 = 0;
};

inline GradientData curvature_gradients(const AnalyticSurface& surf, double u,
                                        double v, double h = 0.01) {
  using S = detail::Stencil6;
  if (!surf.u_periodic()) u = detail::pole_safe_u(u, h);

  // samples along the two chart directions
  ChartForms cu[7], cv[7];
  for (int k = 0; k < 7; ++k) {
    cu[k] = surf.forms(u + (k - S::half) * h, v);
    cv[k] = surf.forms(u, v + (k - S::half) * h);
  }
  const ChartForms& c0 = cu[S::half];

  auto d1 = [&](auto&& get, int dir) {
    double acc = 0;
    for (int k = 0; k < 7; ++k) acc += S::w[k] * get(dir == 0 ? cu[k] : cv[k]);
    return acc / h;
  };

  // partial derivatives of H, g and Ao
  double dH[2], dg[2][2][2], dAo[2][2][2];
  for (int dir = 0; dir < 2; ++dir) {
    dH[dir] = d1([](const ChartForms& f) { return f.H; }, dir);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        dg[dir][a][b] = d1([a, b](const ChartForms& f) { return f.g(a, b); }, dir);
        dAo[dir][a][b] = d1([a, b](const ChartForms& f) { return f.Ao(a, b); }, dir);
      }
  }

  // Christoffel symbols of the exact induced metric
  double Gamma[2][2][2]; // Gamma[c][a][b] = Gamma^c_{ab}
  for (int c = 0; c < 2; ++c)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        double acc = 0;
        for (int d = 0; d < 2; ++d)
          acc += c0.ginv(c, d) * (dg[a][b][d] + dg[b][a][d] - dg[d][a][b]);
        Gamma[c][a][b] = 0.5 * acc;
      }

  // covariant derivative of the tracefree second fundamental form
  double covAo[2][2][2]; // covAo[c][a][b] = nabla_c Ao_{ab}
  for (int c = 0; c < 2; ++c)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        double acc = dAo[c][a][b];
        for (int d = 0; d < 2; ++d)
          acc -= Gamma[d][c][a] * c0.Ao(d, b) + Gamma[d][c][b] * c0.Ao(a, d);
        covAo[c][a][b] = acc;
      }

  GradientData out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) out.gradH2 += c0.ginv(a, b) * dH[a] * dH[b];

  for (int c = 0; c < 2; ++c)
    for (int cc = 0; cc < 2; ++cc)
      for (int a = 0; a < 2; ++a)
        for (int aa = 0; aa < 2; ++aa)
          for (int b = 0; b < 2; ++b)
            for (int bb = 0; bb < 2; ++bb) {
              const double contraction =
                  c0.ginv(c, cc) * c0.ginv(a, aa) * c0.ginv(b, bb);
              out.gradAo2 += contraction * covAo[c][a][b] * covAo[cc][aa][bb];
              // nabla A = nabla Ao + (1/2) g (x) dH
              const double covA = covAo[c][a][b] + 0.5 * c0.g(a, b) * dH[c];
              const double covA2 = covAo[cc][aa][bb] + 0.5 * c0.g(aa, bb) * dH[cc];
              out.gradA2 += contraction * covA * covA2;
            }
  return out;
}

enum class Integrand { One, H2, K, Ao2, Ao4, H2Ao2, GradH2, GradAo2 };

inline Integrand integrand_from_name(const std::string& name) {
  if (name == "1") return Integrand::One;
  if (name == "H2") return Integrand::H2;
  if (name == "K") return Integrand::K;
  if (name == "Ao2") return Integrand::Ao2;
  if (name == "Ao4") return Integrand::Ao4;
  if (name == "H2Ao2") return Integrand::H2Ao2;
  if (name == "GradH2") return Integrand::GradH2;
  if (name == "GradAo2") return Integrand::GradAo2;
  throw std::invalid_argument("unknown integrand: " + name);
}

inline QuadratureResult quadrature_integrate(const AnalyticSurface& surf,
                                             Integrand which,
                                             double rel_tol = 1e-7) {
  auto field = [&](double u, double v) -> double {
    switch (which) {
      case Integrand::One: return 1.0;
      case Integrand::H2: {
        const double H = surf.exact_H(u, v);
        return H * H;
      }
      case Integrand::K: return surf.exact_K(u, v);
      case Integrand::Ao2: return surf.forms(u, v).Ao2;
      case Integrand::Ao4: {
        const double a = surf.forms(u, v).Ao2;
        return a * a;
      }
      case Integrand::H2Ao2: {
        const ChartForms f = surf.forms(u, v);
        return f.H * f.H * f.Ao2;
      }
      case Integrand::GradH2: return curvature_gradients(surf, u, v).gradH2;
      case Integrand::GradAo2: return curvature_gradients(surf, u, v).gradAo2;
    }
    return 0;
  };
  // derivative integrands are limited to coarser grids (each sample costs 13
  // chart jets); their quadrature still converges fast on smooth data
  const bool heavy = which == Integrand::GradH2 || which == Integrand::GradAo2;
  return quadrature(surf, field, rel_tol, heavy ? 16 : 24, heavy ? 256 : 768);
}

// ---------------------------------------------------------------------------
// Identity suite
// ---------------------------------------------------------------------------

struct IdentityReport {
  // (i) integral identity: int |grad Ao|^2 + 1/2 int H^2|Ao|^2
  //                       - 1/2 int |grad H|^2 - int |Ao|^4 = 0
  double term_gradAo2 = 0, term_H2Ao2 = 0, term_gradH2 = 0, term_Ao4 = 0;
  double identity_residual_rel = 0;
  // (ii) pointwise contraction bounds
  double max_ratio_gradH2_over_gradAo2 = 0;
  double max_ratio_gradA2_over_gradAo2 = 0;
  bool codazzi_bound_holds = true; // |grad A|^2 <= 3 |grad Ao|^2 pointwise
  // (iii) Michael-Simon Sobolev battery
  int ms_tested = 0;
  int ms_violations = 0;
  double ms_worst_margin = std::numeric_limits<double>::infinity(); // RHS/LHS
  bool quadrature_converged = true;
};

inline IdentityReport identity_suite(const AnalyticSurface& surf,
                                     double rel_tol = 1e-6) {
  IdentityReport rep;
  auto q = [&](Integrand which) {
    const QuadratureResult r = quadrature_integrate(surf, which, rel_tol);
    rep.quadrature_converged = rep.quadrature_converged && r.converged;
    return r.value;
  };
  rep.term_gradAo2 = q(Integrand::GradAo2);
  rep.term_H2Ao2 = 0.5 * q(Integrand::H2Ao2);
  rep.term_gradH2 = 0.5 * q(Integrand::GradH2);
  rep.term_Ao4 = q(Integrand::Ao4);
  const double scale =
      std::max({std::abs(rep.term_gradAo2), std::abs(rep.term_H2Ao2),
                std::abs(rep.term_gradH2), std::abs(rep.term_Ao4), 1e-10});
  rep.identity_residual_rel =
      std::abs(rep.term_gradAo2 + rep.term_H2Ao2 - rep.term_gradH2 - rep.term_Ao4) /
      scale;

  // pointwise ratios on a fixed interior grid
  {
    constexpr double pi = std::numbers::pi;
    const int nu = 40, nv = 80;
    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < nv; ++j) {
        const double u = surf.u_periodic() ? (2 * pi * (i + 0.5) / nu)
                                           : (pi * (i + 0.5) / nu);
        const double v = 2 * pi * (j + 0.5) / nv;
        const GradientData gd = curvature_gradients(surf, u, v);
        if (gd.gradAo2 > 1e-10) {
          rep.max_ratio_gradH2_over_gradAo2 =
              std::max(rep.max_ratio_gradH2_over_gradAo2, gd.gradH2 / gd.gradAo2);
          rep.max_ratio_gradA2_over_gradAo2 =
              std::max(rep.max_ratio_gradA2_over_gradAo2, gd.gradA2 / gd.gradAo2);
          if (gd.gradA2 > 3.0 * gd.gradAo2 * (1 + 1e-6) + 1e-12)
            rep.codazzi_bound_holds = false;
        }
      }
  }

  // Michael-Simon Sobolev: (int u^2)^{1/2} <= (4^3/sqrt(pi))(int |grad u| + int |H||u|)
  {
    const double Cs = 64.0 / std::sqrt(std::numbers::pi);
    using TestFn = std::function<double(const AnalyticSurface&, double, double)>;
    std::vector<TestFn> battery = {
        [](const AnalyticSurface&, double, double) { return 1.0; },
        [](const AnalyticSurface& s, double u, double v) { return s.forms(u, v).p.x(); },
        [](const AnalyticSurface& s, double u, double v) { return s.forms(u, v).p.y(); },
        [](const AnalyticSurface& s, double u, double v) { return s.forms(u, v).p.z(); },
        [](const AnalyticSurface& s, double u, double v) { return s.exact_H(u, v); },
        [](const AnalyticSurface&, double u, double v) {
          double y, yt, yp, ytt, ytp, ypp;
          AnalyticSurface::harmonic_y2(u, v, y, yt, yp, ytt, ytp, ypp);
          return y;
        }};
    for (const auto& fn : battery) {
      auto grad_abs = [&](double u, double v) {
        using S = detail::Stencil6;
        const double h = 0.01;
        u = detail::pole_safe_u(u, h);
        double du = 0, dv = 0;
        for (int k = 0; k < 7; ++k) {
          du += S::w[k] * fn(surf, u + (k - S::half) * h, v);
          dv += S::w[k] * fn(surf, u, v + (k - S::half) * h);
        }
        du /= h;
        dv /= h;
        const ChartForms f = surf.forms(u, v);
        const double g2 = f.ginv(0, 0) * du * du + 2 * f.ginv(0, 1) * du * dv +
                          f.ginv(1, 1) * dv * dv;
        return std::sqrt(std::max(g2, 0.0));
      };
      const double u2 =
          quadrature(surf, [&](double u, double v) {
            const double val = fn(surf, u, v);
            return val * val;
          }, rel_tol).value;
      const double gu =
          quadrature(surf, grad_abs, 1e-5, 16, 128).value;
      const double hu =
          quadrature(surf, [&](double u, double v) {
            return std::abs(surf.exact_H(u, v)) * std::abs(fn(surf, u, v));
          }, rel_tol).value;
      const double lhs = std::sqrt(std::max(u2, 0.0));
      const double rhs = Cs * (gu + hu);
      rep.ms_tested++;
      if (lhs > rhs * (1 + 1e-9)) rep.ms_violations++;
      if (lhs > 1e-12)
        rep.ms_worst_margin = std::min(rep.ms_worst_margin, rhs / lhs);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Mesh sampling
// ---------------------------------------------------------------------------

/// Triangulated sample: icosphere projection for the sphere-like kinds
/// (`resolution` = subdivision level), structured resolution x resolution/2
/// grid for the torus.
inline TriangleSurface sample_mesh(const AnalyticSurface& surf, int resolution) {
  if (resolution < 2) throw std::invalid_argument("resolution too small");
  switch (surf.kind()) {
    case SurfaceKind::Sphere:
    case SurfaceKind::Spheroid:
    case SurfaceKind::PerturbedSphere: {
      TriangleSurface base = icosphere(resolution);
      VertexPositions V = base.vertices();
      for (int i = 0; i < V.rows(); ++i) {
        const Vec3 d = V.row(i).transpose();
        switch (surf.kind()) {
          case SurfaceKind::Sphere:
            V.row(i) = surf.param0() * d;
            break;
          case SurfaceKind::Spheroid:
            V.row(i) = Vec3(surf.param0() * d.x(), surf.param0() * d.y(),
                            surf.param1() * d.z());
            break;
          case SurfaceKind::PerturbedSphere: {
            const double theta = std::acos(std::clamp(d.z(), -1.0, 1.0));
            const double phi = std::atan2(d.y(), d.x());
            V.row(i) = surf.jet(theta, phi).p;
            break;
          }
          default: break;
        }
      }
      return base.with_vertices(std::move(V));
    }
    case SurfaceKind::Torus: {
      const int nu = resolution, nv = std::max(3, resolution / 2);
      constexpr double two_pi = 2.0 * std::numbers::pi;
      VertexPositions V(nu * nv, 3);
      for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j)
          V.row(i * nv + j) = surf.jet(two_pi * i / nu, two_pi * j / nv).p;
      FaceIndices F(2 * nu * nv, 3);
      int f = 0;
      for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) {
          const int i1 = (i + 1) % nu, j1 = (j + 1) % nv;
          const int v00 = i * nv + j, v10 = i1 * nv + j;
          const int v11 = i1 * nv + j1, v01 = i * nv + j1;
          F.row(f++) << v00, v10, v11;
          F.row(f++) << v00, v11, v01;
        }
      return TriangleSurface(std::move(V), F);
    }
  }
  throw std::logic_error("unreachable");
}

} // namespace cwflow
