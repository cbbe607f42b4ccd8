#pragma once

#include "cwflow/mesh.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace cwflow {

/// Discrete curvature data of a surface: outward unit normals, mean
/// curvature H (positive on round spheres), Gauss curvature K (angle
/// defect), |A^o|^2 = max(H^2/2 - 2K, 0), and mixed vertex areas.
///
/// Conventions: the mean-curvature vector is the cotangent Laplacian of the
/// positions, Delta f = -H nu_out with H = k1 + k2, so H = 2/rho on a round
/// sphere of radius rho. The inward-normal sign needed by the flow equation
/// is applied once, in the flow engine.
struct CurvatureBundle {
  VectorField nu;           // outward unit normals
  ScalarField H;            // mean curvature, 1/length
  ScalarField K;            // Gauss curvature, 1/length^2
  ScalarField Ao2;          // |A^o|^2 >= 0, 1/length^2
  ScalarField vertex_areas; // mixed (Voronoi / obtuse-safe) weights, length^2
  double total_area = 0;
};

/// Per-face quantities plus cotangent weights, reusable as a workspace in
/// the flow loop to avoid reallocating between steps.
class DiscreteGeometry {
public:
  void compute(const TriangleSurface& s) {
    const auto& V = s.vertices();
    const auto& F = s.faces();
    const int nv = s.vertex_count();
    const int nf = s.face_count();

    face_normal.resize(nf, 3);
    face_area.resize(nf);
    cot.resize(nf, 3);
    corner_angle.resize(nf, 3);

    bundle.nu.setZero(nv, 3);
    bundle.H.resize(nv);
    bundle.K.resize(nv);
    bundle.Ao2.resize(nv);
    bundle.vertex_areas.setZero(nv);
    angle_sum.assign(nv, 0.0);
    hvec.setZero(nv, 3);

    double total = 0;
    for (int f = 0; f < nf; ++f) {
      const int i = F(f, 0), j = F(f, 1), k = F(f, 2);
      const Vec3 p0 = V.row(i), p1 = V.row(j), p2 = V.row(k);
      const Vec3 e0 = p2 - p1, e1 = p0 - p2, e2 = p1 - p0; // edge opposite corner c
      const Vec3 n = e2.cross(-e1);
      const double n2 = n.norm();
      face_area[f] = 0.5 * n2;
      total += face_area[f];
      face_normal.row(f) = n / n2;

      // cotangent at corner c = dot/cross of the two adjacent edges
      const double c0 = (-e1).dot(e2) / n2;        // corner i, edges (p1-p0),(p2-p0)
      const double c1 = (-e2).dot(e0) / n2;        // corner j
      const double c2 = (-e0).dot(e1) / n2;        // corner k
      cot(f, 0) = c0;
      cot(f, 1) = c1;
      cot(f, 2) = c2;
      corner_angle(f, 0) = std::atan2(n2, (p1 - p0).dot(p2 - p0));
      corner_angle(f, 1) = std::atan2(n2, (p2 - p1).dot(p0 - p1));
      corner_angle(f, 2) = std::atan2(n2, (p0 - p2).dot(p1 - p2));

      // mixed area (Meyer et al.): Voronoi if non-obtuse, else area/2 at the
      // obtuse corner and area/4 at the others
      const double l0 = e0.squaredNorm(), l1 = e1.squaredNorm(), l2 = e2.squaredNorm();
      double w[3];
      if (c0 < 0) {
        w[0] = 0.5;
        w[1] = 0.25;
        w[2] = 0.25;
        for (int c = 0; c < 3; ++c) bundle.vertex_areas[F(f, c)] += w[c] * face_area[f];
      } else if (c1 < 0) {
        w[0] = 0.25;
        w[1] = 0.5;
        w[2] = 0.25;
        for (int c = 0; c < 3; ++c) bundle.vertex_areas[F(f, c)] += w[c] * face_area[f];
      } else if (c2 < 0) {
        w[0] = 0.25;
        w[1] = 0.25;
        w[2] = 0.5;
        for (int c = 0; c < 3; ++c) bundle.vertex_areas[F(f, c)] += w[c] * face_area[f];
      } else {
        // Voronoi: (1/8)(|e|^2 cot(opposite)) for the two edges at the corner
        bundle.vertex_areas[i] += (l2 * c2 + l1 * c1) / 8.0;
        bundle.vertex_areas[j] += (l0 * c0 + l2 * c2) / 8.0;
        bundle.vertex_areas[k] += (l1 * c1 + l0 * c0) / 8.0;
      }

      // angle-weighted normal accumulation and angle defect
      for (int c = 0; c < 3; ++c) {
        const int v = F(f, c);
        bundle.nu.row(v) += corner_angle(f, c) * face_normal.row(f);
        angle_sum[v] += corner_angle(f, c);
      }

      // mean-curvature vector accumulation: Delta f (v) gathers
      // (1/2)(cot alpha + cot beta)(p_u - p_v); distribute per face
      hvec.row(i) += 0.5 * (c2 * (p1 - p0) + c1 * (p2 - p0));
      hvec.row(j) += 0.5 * (c2 * (p0 - p1) + c0 * (p2 - p1));
      hvec.row(k) += 0.5 * (c1 * (p0 - p2) + c0 * (p1 - p2));
    }
    bundle.total_area = total;

    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (int v = 0; v < nv; ++v) {
      const double nn = bundle.nu.row(v).norm();
      if (!(nn > 0)) throw MeshError("vanishing vertex normal");
      bundle.nu.row(v) /= nn;
      const double area = bundle.vertex_areas[v];
      // Delta f = hvec/area points along -nu_out on convex regions;
      // H = <Delta f, -nu_out>
      bundle.H[v] = -(hvec.row(v) / area).dot(bundle.nu.row(v));
      bundle.K[v] = (two_pi - angle_sum[v]) / area;
      bundle.Ao2[v] = std::max(0.5 * bundle.H[v] * bundle.H[v] - 2.0 * bundle.K[v], 0.0);
    }
  }

  CurvatureBundle bundle;
  VectorField face_normal;
  ScalarField face_area;
  Eigen::Matrix<double, Eigen::Dynamic, 3> cot;          // per-corner cotangents
  Eigen::Matrix<double, Eigen::Dynamic, 3> corner_angle; // per-corner angles
  VectorField hvec;
  std::vector<double> angle_sum;

  /// Cotangent Laplace-Beltrami of a scalar field, mixed-area normalized.
  /// Exact zero on constants by construction.
  ScalarField laplace(const TriangleSurface& s, const ScalarField& u) const {
    const auto& F = s.faces();
    ScalarField out = ScalarField::Zero(s.vertex_count());
    for (int f = 0; f < s.face_count(); ++f) {
      const int i = F(f, 0), j = F(f, 1), k = F(f, 2);
      const double cij = 0.5 * cot(f, 2); // weight of edge (i,j)
      const double cjk = 0.5 * cot(f, 0);
      const double cki = 0.5 * cot(f, 1);
      out[i] += cij * (u[j] - u[i]) + cki * (u[k] - u[i]);
      out[j] += cij * (u[i] - u[j]) + cjk * (u[k] - u[j]);
      out[k] += cki * (u[i] - u[k]) + cjk * (u[j] - u[k]);
    }
    for (int v = 0; v < s.vertex_count(); ++v) out[v] /= bundle.vertex_areas[v];
    return out;
  }

  double integrate(const ScalarField& u) const {
    return u.dot(bundle.vertex_areas);
  }
};

inline CurvatureBundle curvature_bundle(const TriangleSurface& s) {
  DiscreteGeometry g;
  g.compute(s);
  return std::move(g.bundle);
}

inline VectorField vertex_normals(const TriangleSurface& s) {
  return curvature_bundle(s).nu;
}

inline ScalarField mean_curvature(const TriangleSurface& s) {
  return curvature_bundle(s).H;
}

inline ScalarField gauss_curvature(const TriangleSurface& s) {
  return curvature_bundle(s).K;
}

inline ScalarField tracefree_norm_sq(const ScalarField& H, const ScalarField& K) {
  return (0.5 * H.array().square() - 2.0 * K.array()).max(0.0).matrix();
}

inline ScalarField laplace_beltrami(const TriangleSurface& s, const ScalarField& u) {
  DiscreteGeometry g;
  g.compute(s);
  return g.laplace(s, u);
}

/// Discrete surface integral sum u(v) * mixed_area(v).
inline double integrate(const TriangleSurface& s, const ScalarField& u) {
  DiscreteGeometry g;
  g.compute(s);
  return g.integrate(u);
}

inline double surface_area(const TriangleSurface& s) {
  double total = 0;
  const auto& V = s.vertices();
  const auto& F = s.faces();
  for (int f = 0; f < s.face_count(); ++f) {
    const Vec3 p0 = V.row(F(f, 0)), p1 = V.row(F(f, 1)), p2 = V.row(F(f, 2));
    total += 0.5 * (p1 - p0).cross(p2 - p0).norm();
  }
  return total;
}

/// Divergence-theorem volume against the origin; positive for outward
/// orientation, translation invariant on closed surfaces.
inline double signed_volume(const TriangleSurface& s) {
  double vol = 0;
  const auto& V = s.vertices();
  const auto& F = s.faces();
  for (int f = 0; f < s.face_count(); ++f) {
    const Vec3 p0 = V.row(F(f, 0)), p1 = V.row(F(f, 1)), p2 = V.row(F(f, 2));
    vol += p0.dot(p1.cross(p2)) / 6.0;
  }
  return vol;
}

} // namespace cwflow
