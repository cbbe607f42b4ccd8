#pragma once

#include "cwflow/diagnostics.hpp"
#include "cwflow/energy.hpp"
#include "cwflow/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace cwflow {

// ---------------------------------------------------------------------------
// Remeshing
// ---------------------------------------------------------------------------

struct RemeshOptions {
  double target_edge = 0;      // 0 = keep the current mean edge length
  double collapse_ratio = 0.75;
  double split_ratio = 1.4;
  int smooth_iters = 2;
  double smooth_step = 0.5;
  int min_vertices = 12;
  double min_angle_floor_deg = 6.0;
};

struct RemeshStats {
  int collapses = 0;
  int splits = 0;
  int flips = 0;
  int smooth_iters = 0;
  bool changed_connectivity() const { return collapses + splits + flips > 0; }
};

namespace remesh_detail {

using FaceList = std::vector<std::array<int, 3>>;

struct EdgeRec {
  int a, b, f0, f1; // a < b
  double len2;
};

inline std::vector<EdgeRec> edge_list(const std::vector<Vec3>& V,
                                      const FaceList& F) {
  std::unordered_map<std::uint64_t, EdgeRec> map;
  map.reserve(F.size() * 3);
  for (int f = 0; f < static_cast<int>(F.size()); ++f)
    for (int c = 0; c < 3; ++c) {
      int a = F[f][c], b = F[f][(c + 1) % 3];
      if (a > b) std::swap(a, b);
      const std::uint64_t key =
          (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
      auto it = map.find(key);
      if (it == map.end())
        map.emplace(key, EdgeRec{a, b, f, -1, (V[a] - V[b]).squaredNorm()});
      else
        it->second.f1 = f;
    }
  std::vector<EdgeRec> edges;
  edges.reserve(map.size());
  for (auto& [k, e] : map) edges.push_back(e);
  return edges;
}

inline std::vector<std::vector<int>> vertex_faces(int nv, const FaceList& F) {
  std::vector<std::vector<int>> vf(nv);
  for (int f = 0; f < static_cast<int>(F.size()); ++f)
    for (int c = 0; c < 3; ++c) vf[F[f][c]].push_back(f);
  return vf;
}

inline double min_corner_angle(const Vec3& p0, const Vec3& p1, const Vec3& p2) {
  auto angle = [](const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 u = b - a, v = c - a;
    return std::atan2(u.cross(v).norm(), u.dot(v));
  };
  return std::min({angle(p0, p1, p2), angle(p1, p2, p0), angle(p2, p0, p1)});
}

inline Vec3 face_normal_of(const std::vector<Vec3>& V, const std::array<int, 3>& f) {
  return (V[f[1]] - V[f[0]]).cross(V[f[2]] - V[f[0]]);
}

/// Collapse edges shorter than `thresh` into a volume-preserving point.
/// One pass; vertices whose star changed are not touched twice.
inline int collapse_pass(std::vector<Vec3>& V, FaceList& F, double thresh,
                         int min_vertices, double min_angle_floor) {
  const int nv = static_cast<int>(V.size());
  auto edges = edge_list(V, F);
  std::sort(edges.begin(), edges.end(),
            [](const EdgeRec& x, const EdgeRec& y) { return x.len2 < y.len2; });
  auto vf = vertex_faces(nv, F);
  std::vector<bool> touched(nv, false);
  std::vector<bool> removed(F.size(), false);
  int alive = nv;
  int collapses = 0;
  const double t2 = thresh * thresh;

  for (const EdgeRec& e : edges) {
    if (e.len2 > t2) break;
    if (alive <= min_vertices) break;
    const int a = e.a, b = e.b;
    if (touched[a] || touched[b]) continue;

    // ring intersection must be exactly the two opposite vertices
    std::set<int> ring_a, ring_b;
    for (int f : vf[a])
      if (!removed[f])
        for (int c : F[f])
          if (c != a) ring_a.insert(c);
    for (int f : vf[b])
      if (!removed[f])
        for (int c : F[f])
          if (c != b) ring_b.insert(c);
    std::vector<int> common;
    std::set_intersection(ring_a.begin(), ring_a.end(), ring_b.begin(),
                          ring_b.end(), std::back_inserter(common));
    if (common.size() != 2) continue;

    // faces around the merged vertex after collapse
    std::vector<std::array<int, 3>> star;
    std::vector<int> star_ids;
    double local_vol_before = 0;
    bool ok = true;
    for (int v : {a, b})
      for (int f : vf[v]) {
        if (removed[f]) continue;
        const auto& tri = F[f];
        const bool has_a = tri[0] == a || tri[1] == a || tri[2] == a;
        const bool has_b = tri[0] == b || tri[1] == b || tri[2] == b;
        if (v == b && has_a) continue; // shared faces visited via a
        local_vol_before += V[tri[0]].dot(V[tri[1]].cross(V[tri[2]])) / 6.0;
        if (has_a && has_b) continue; // removed by the collapse
        std::array<int, 3> t = tri;
        for (int& idx : t)
          if (idx == b) idx = a;
        star.push_back(t);
        star_ids.push_back(f);
      }

    // volume-preserving placement along the local normal
    Vec3 p = 0.5 * (V[a] + V[b]);
    Vec3 nsum = Vec3::Zero();
    for (const auto& t : star) nsum += face_normal_of(V, t);
    Vec3 cross_sum = Vec3::Zero(); // d(vol)/dp around the merged vertex
    {
      const Vec3 keep_a = V[a];
      V[a] = p;
      double vol_mid = 0;
      for (const auto& t : star) {
        // merged vertex appears exactly once per star face
        vol_mid += V[t[0]].dot(V[t[1]].cross(V[t[2]])) / 6.0;
        // gradient: rotate so the merged vertex leads
        std::array<int, 3> r = t;
        while (r[0] != a) std::rotate(r.begin(), r.begin() + 1, r.end());
        cross_sum += V[r[1]].cross(V[r[2]]) / 6.0;
      }
      V[a] = keep_a;
      const double nn = nsum.norm();
      if (nn > 1e-14) {
        const Vec3 nhat = nsum / nn;
        const double denom = nhat.dot(cross_sum);
        if (std::abs(denom) > 1e-14) {
          double delta = (local_vol_before - vol_mid) / denom;
          const double cap = 0.5 * std::sqrt(e.len2);
          delta = std::clamp(delta, -cap, cap);
          p += delta * nhat;
        }
      }
    }

    // quality of the new star
    {
      const Vec3 keep_a = V[a];
      V[a] = p;
      for (std::size_t si = 0; si < star.size() && ok; ++si) {
        const auto& t = star[si];
        const Vec3 n_new = face_normal_of(V, t);
        if (n_new.norm() < 1e-16) {
          ok = false;
          break;
        }
        // orientation reference: the original face at original positions
        V[a] = keep_a;
        const Vec3 n_old = face_normal_of(V, F[star_ids[si]]);
        V[a] = p;
        if (n_new.dot(n_old) <= 0 ||
            min_corner_angle(V[t[0]], V[t[1]], V[t[2]]) < 0.5 * min_angle_floor)
          ok = false;
      }
      V[a] = keep_a;
    }
    if (!ok) continue;

    // apply
    V[a] = p;
    for (int f : vf[b]) {
      if (removed[f]) continue;
      auto& tri = F[f];
      const bool has_a = tri[0] == a || tri[1] == a || tri[2] == a;
      if (has_a) {
        removed[f] = true;
        continue;
      }
      for (int& idx : tri)
        if (idx == b) idx = a;
      vf[a].push_back(f);
    }
    touched[a] = touched[b] = true;
    for (int c : ring_a) touched[c] = true;
    for (int c : ring_b) touched[c] = true;
    --alive;
    ++collapses;
    // b becomes unreferenced; compaction below drops it
  }

  if (collapses > 0) {
    FaceList keep;
    keep.reserve(F.size());
    for (std::size_t f = 0; f < F.size(); ++f)
      if (!removed[f]) keep.push_back(F[f]);
    F.swap(keep);
    // drop unreferenced vertices
    std::vector<int> remap(V.size(), -1);
    std::vector<Vec3> nvlist;
    nvlist.reserve(V.size());
    for (auto& tri : F)
      for (int& idx : tri) {
        if (remap[idx] < 0) {
          remap[idx] = static_cast<int>(nvlist.size());
          nvlist.push_back(V[idx]);
        }
        idx = remap[idx];
      }
    V.swap(nvlist);
  }
  return collapses;
}

/// Split edges longer than `thresh` at a volume-preserving midpoint.
inline int split_pass(std::vector<Vec3>& V, FaceList& F, double thresh) {
  auto edges = edge_list(V, F);
  std::vector<bool> dirty(F.size(), false);
  int splits = 0;
  const double t2 = thresh * thresh;
  for (const EdgeRec& e : edges) {
    if (e.len2 < t2) continue;
    if (dirty[e.f0] || dirty[e.f1]) continue;
    const int a = e.a, b = e.b;
    Vec3 m = 0.5 * (V[a] + V[b]);
    // placement preserving the two faces' volume contribution
    const Vec3 n0 = face_normal_of(V, F[e.f0]);
    const Vec3 n1 = face_normal_of(V, F[e.f1]);
    const Vec3 nsum = n0 + n1;
    const double vol_before =
        (V[F[e.f0][0]].dot(V[F[e.f0][1]].cross(V[F[e.f0][2]])) +
         V[F[e.f1][0]].dot(V[F[e.f1][1]].cross(V[F[e.f1][2]]))) /
        6.0;
    const int mid = static_cast<int>(V.size());
    V.push_back(m);
    auto replace = [&](int f, int from) {
      std::array<int, 3> t = F[f];
      for (int& idx : t)
        if (idx == from) idx = mid;
      return t;
    };
    // four new faces: two overwrite, two append
    const std::array<int, 3> fa0 = replace(e.f0, b); // (a, m, c0) pattern
    const std::array<int, 3> fb0 = replace(e.f0, a);
    const std::array<int, 3> fa1 = replace(e.f1, b);
    const std::array<int, 3> fb1 = replace(e.f1, a);
    double vol_mid = 0;
    Vec3 cross_sum = Vec3::Zero();
    for (const auto& t : {fa0, fb0, fa1, fb1}) {
      vol_mid += V[t[0]].dot(V[t[1]].cross(V[t[2]])) / 6.0;
      std::array<int, 3> r = t;
      while (r[0] != mid) std::rotate(r.begin(), r.begin() + 1, r.end());
      cross_sum += V[r[1]].cross(V[r[2]]) / 6.0;
    }
    const double nn = nsum.norm();
    if (nn > 1e-14) {
      const Vec3 nhat = nsum / nn;
      const double denom = nhat.dot(cross_sum);
      if (std::abs(denom) > 1e-14) {
        double delta = (vol_before - vol_mid) / denom;
        const double cap = 0.25 * std::sqrt(e.len2);
        V[mid] += std::clamp(delta, -cap, cap) * nhat;
      }
    }
    F[e.f0] = fa0;
    F[e.f1] = fa1;
    F.push_back(fb0);
    F.push_back(fb1);
    dirty[e.f0] = dirty[e.f1] = true;
    ++splits;
  }
  return splits;
}

/// Delaunay-style flips: replace edge (a,b) by (c,d) when the worst corner
/// angle of the two triangles improves.
inline int flip_pass(std::vector<Vec3>& V, FaceList& F) {
  auto edges = edge_list(V, F);
  std::vector<bool> dirty(F.size(), false);
  std::unordered_set<std::uint64_t> existing;
  existing.reserve(edges.size());
  for (const EdgeRec& e : edges)
    existing.insert((static_cast<std::uint64_t>(e.a) << 32) |
                    static_cast<std::uint32_t>(e.b));
  int flips = 0;
  for (const EdgeRec& e : edges) {
    if (dirty[e.f0] || dirty[e.f1]) continue;
    // orient: f0 contains directed a->b or b->a; normalize to (a,b,c),(b,a,d)
    int a = e.a, b = e.b;
    auto has_directed = [&](int f, int x, int y) {
      for (int c = 0; c < 3; ++c)
        if (F[f][c] == x && F[f][(c + 1) % 3] == y) return true;
      return false;
    };
    int f_abc = has_directed(e.f0, a, b) ? e.f0 : e.f1;
    int f_bad = f_abc == e.f0 ? e.f1 : e.f0;
    auto opposite = [&](int f) {
      for (int c : F[f])
        if (c != a && c != b) return c;
      return -1;
    };
    const int c = opposite(f_abc), d = opposite(f_bad);
    if (c < 0 || d < 0 || c == d) continue;
    const std::uint64_t cd_key =
        (static_cast<std::uint64_t>(std::min(c, d)) << 32) |
        static_cast<std::uint32_t>(std::max(c, d));
    if (existing.count(cd_key)) continue;

    const double before = std::min(min_corner_angle(V[a], V[b], V[c]),
                                   min_corner_angle(V[b], V[a], V[d]));
    const double after = std::min(min_corner_angle(V[a], V[d], V[c]),
                                  min_corner_angle(V[b], V[c], V[d]));
    if (after <= before + 1e-12) continue;
    const Vec3 n_ref = face_normal_of(V, F[f_abc]) + face_normal_of(V, F[f_bad]);
    const std::array<int, 3> t1 = {a, d, c}, t2 = {b, c, d};
    if (face_normal_of(V, t1).dot(n_ref) <= 0) continue;
    if (face_normal_of(V, t2).dot(n_ref) <= 0) continue;

    F[f_abc] = t1;
    F[f_bad] = t2;
    dirty[f_abc] = dirty[f_bad] = true;
    existing.insert(cd_key);
    ++flips;
  }
  return flips;
}

/// Area-weighted tangential smoothing; displacement is projected onto the
/// tangent plane, so vertices move only tangentially by construction.
inline void tangential_smooth(std::vector<Vec3>& V, const FaceList& F,
                              double step, int iters) {
  const int nv = static_cast<int>(V.size());
  for (int it = 0; it < iters; ++it) {
    std::vector<Vec3> centroid(nv, Vec3::Zero());
    std::vector<double> weight(nv, 0.0);
    std::vector<Vec3> normal(nv, Vec3::Zero());
    for (const auto& tri : F) {
      const Vec3 n = (V[tri[1]] - V[tri[0]]).cross(V[tri[2]] - V[tri[0]]);
      const double area = 0.5 * n.norm();
      const Vec3 bary = (V[tri[0]] + V[tri[1]] + V[tri[2]]) / 3.0;
      for (int c = 0; c < 3; ++c) {
        centroid[tri[c]] += area * bary;
        weight[tri[c]] += area;
        normal[tri[c]] += n;
      }
    }
    for (int v = 0; v < nv; ++v) {
      if (!(weight[v] > 0)) continue;
      const Vec3 target = centroid[v] / weight[v];
      const double nn = normal[v].norm();
      if (!(nn > 0)) continue;
      const Vec3 nhat = normal[v] / nn;
      Vec3 d = target - V[v];
      d -= nhat.dot(d) * nhat;
      V[v] += step * d;
    }
  }
}

} // namespace remesh_detail

/// Mesh-quality maintenance: edge collapses/splits toward a target edge
/// length, angle-improving flips, then tangential smoothing. Collapse and
/// split placements preserve the local enclosed volume, keeping the
/// geometric drift within the budget asserted by the tests. Topology
/// (genus) is preserved; the vertex count may change when coarsening.
inline TriangleSurface remesh(const TriangleSurface& s,
                              const RemeshOptions& opt,
                              RemeshStats* stats = nullptr) {
  std::vector<Vec3> V(s.vertex_count());
  for (int v = 0; v < s.vertex_count(); ++v) V[v] = s.vertex(v);
  remesh_detail::FaceList F(s.face_count());
  for (int f = 0; f < s.face_count(); ++f)
    F[f] = {s.faces()(f, 0), s.faces()(f, 1), s.faces()(f, 2)};

  const double target = opt.target_edge > 0 ? opt.target_edge : s.mean_edge_length();
  const double floor_rad = opt.min_angle_floor_deg * std::numbers::pi / 180.0;

  RemeshStats st;
  for (int pass = 0; pass < 3; ++pass) {
    const int splits = remesh_detail::split_pass(V, F, opt.split_ratio * target);
    const int collapses = remesh_detail::collapse_pass(
        V, F, opt.collapse_ratio * target, opt.min_vertices, floor_rad);
    const int flips = remesh_detail::flip_pass(V, F);
    st.splits += splits;
    st.collapses += collapses;
    st.flips += flips;
    if (splits + collapses + flips == 0) break;
  }
  remesh_detail::tangential_smooth(V, F, opt.smooth_step, opt.smooth_iters);
  st.smooth_iters = opt.smooth_iters;

  VertexPositions Vm(static_cast<int>(V.size()), 3);
  for (std::size_t v = 0; v < V.size(); ++v) Vm.row(static_cast<int>(v)) = V[v];
  FaceIndices Fm(static_cast<int>(F.size()), 3);
  for (std::size_t f = 0; f < F.size(); ++f)
    Fm.row(static_cast<int>(f)) << F[f][0], F[f][1], F[f][2];
  TriangleSurface out(std::move(Vm), Fm);
  if (stats) *stats = st;
  return out;
}

// ---------------------------------------------------------------------------
// Time stepping
// ---------------------------------------------------------------------------

/// Explicit stepping for the fourth-order flow: dt = k h_min^4 / (1 + max|W|
/// h_min), capped by dt_max. Remeshing runs at a fixed cadence and is
/// skipped while the mesh is within the edge-length band and angle floor.
struct StepPolicy {
  double cfl = 0.01;   // k in (0, 1]
  double dt_max = 1e-3;
  int remesh_every = 25;
  bool coarsen = true; // let the edge-length target grow relative to the surface
  double coarsen_exponent = 0.25; // target = h0 * (area/area0)^exponent
  double edge_floor_scale = 0.45; // absolute floor as fraction of initial mean edge
  RemeshOptions remesh_options;
  double min_angle_floor_deg = 6.0;

  void validate() const {
    if (!(cfl > 0 && cfl <= 1)) throw std::invalid_argument("cfl must be in (0,1]");
    if (!(dt_max > 0)) throw std::invalid_argument("dt_max must be positive");
    if (remesh_every < 1) throw std::invalid_argument("remesh_every must be >= 1");
  }
};

struct StoppingSpec {
  double t_max = std::numeric_limits<double>::infinity();
  long max_steps = 50'000'000;
  double area_floor_rel = 1e-4; // extinction when area < rel * initial area
};

struct FlowState {
  TriangleSurface surface;
  double time = 0;
  long step_index = 0;
  FlowParams params;
};

enum class StepEvent { None, Degeneration };

/// One explicit Euler step of the flow: vertices move by dt * W * nu_out
/// (equivalently -W along the paper-convention inward normal; this is the
/// single place the inward sign is applied).
inline StepEvent flow_step(FlowState& state, const StepPolicy& policy,
                           DiscreteGeometry& geom, double* dt_out = nullptr) {
  geom.compute(state.surface);
  const ScalarField W = euler_lagrange(geom, state.surface, state.params);
  const double max_w = W.cwiseAbs().maxCoeff();
  if (!std::isfinite(max_w)) return StepEvent::Degeneration;
  const double h_min = state.surface.min_edge_length();
  const double h4 = h_min * h_min * h_min * h_min;
  const double dt = std::min(policy.cfl * h4 / (1.0 + max_w * h_min), policy.dt_max);
  if (dt_out) *dt_out = dt;

  VertexPositions V = state.surface.vertices();
  for (int v = 0; v < V.rows(); ++v)
    V.row(v) += dt * W[v] * geom.bundle.nu.row(v);
  if (!V.allFinite()) return StepEvent::Degeneration;
  state.surface = state.surface.with_vertices(std::move(V));
  state.time += dt;
  state.step_index++;
  return StepEvent::None;
}

struct DiagnosticsConfig {
  long record_every = 1000;
  long snapshot_every = 0; // 0 = no snapshots
  std::vector<double> ball_radii;
};

/// Drives the flow to extinction / degeneration / budget, producing the
/// trajectory ledger. Diagnostic records mark intervals that contained a
/// remeshing pass so audits can apply the drift budget there.
inline Trajectory run_flow(const TriangleSurface& initial,
                           const FlowParams& params, const StepPolicy& policy,
                           const StoppingSpec& stop,
                           const DiagnosticsConfig& diag = {}) {
  params.validate();
  policy.validate();

  FlowState state{initial, 0.0, 0, params};
  Trajectory traj;
  traj.ball_radii = diag.ball_radii;

  DiscreteGeometry geom;
  geom.compute(state.surface);
  const double area0 = geom.bundle.total_area;
  const double area_floor = stop.area_floor_rel * area0;
  const double h0_mean = state.surface.mean_edge_length();
  const double edge_floor = policy.edge_floor_scale * h0_mean;
  const double angle_floor_rad =
      policy.min_angle_floor_deg * std::numbers::pi / 180.0;

  bool remeshed_since_record = false;
  auto record_now = [&](const std::string& event) {
    geom.compute(state.surface);
    const ScalarField W = euler_lagrange(geom, state.surface, state.params);
    DiagnosticsRecord r = make_record(state.surface, geom, params,
                                      diag.ball_radii, state.time,
                                      state.step_index, &W);
    r.event = !event.empty() ? event : (remeshed_since_record ? "remesh" : "");
    traj.records.push_back(std::move(r));
    remeshed_since_record = false;
  };
  auto snapshot_now = [&]() {
    traj.snapshots.push_back({state.step_index, state.time, state.surface});
  };

  record_now("");
  if (diag.snapshot_every > 0) snapshot_now();

  std::string termination;
  while (true) {
    if (state.time >= stop.t_max) {
      termination = "t_max";
      break;
    }
    if (state.step_index >= stop.max_steps) {
      termination = "step_budget";
      break;
    }

    const StepEvent ev = flow_step(state, policy, geom);
    if (ev == StepEvent::Degeneration) {
      termination = "degeneration";
      break;
    }

    // geom holds the pre-step state; area changes slowly, good enough for
    // the extinction/remesh triggers which are re-checked every step
    const double area = surface_area(state.surface);
    if (area < area_floor) {
      termination = "extinction";
      break;
    }

    if (policy.remesh_every > 0 &&
        state.step_index % policy.remesh_every == 0) {
      // coarsening target follows (area/area0)^exponent with exponent < 1/2:
      // slower than the mesh's own ~sqrt(area) shrinkage, so collapses
      // trigger periodically and dt (~ h_min^4) decays much slower than the
      // fixed-connectivity area^2
      const double target =
          policy.coarsen
              ? std::max(h0_mean * std::pow(area / area0,
                                            policy.coarsen_exponent),
                         edge_floor)
              : h0_mean;
      const double h_min = state.surface.min_edge_length();
      // quality probe: smallest corner angle
      double min_angle = std::numbers::pi;
      {
        DiscreteGeometry probe;
        probe.compute(state.surface);
        min_angle = probe.corner_angle.minCoeff();
      }
      const bool needs =
          h_min < policy.remesh_options.collapse_ratio * target ||
          state.surface.mean_edge_length() >
              policy.remesh_options.split_ratio * target ||
          min_angle < angle_floor_rad;
      if (needs) {
        RemeshOptions opts = policy.remesh_options;
        opts.target_edge = target;
        opts.min_angle_floor_deg = policy.min_angle_floor_deg;
        try {
          state.surface = remesh(state.surface, opts);
        } catch (const MeshError&) {
          termination = "degeneration";
          break;
        }
        remeshed_since_record = true;
        DiscreteGeometry probe;
        probe.compute(state.surface);
        if (probe.corner_angle.minCoeff() < 0.5 * angle_floor_rad) {
          termination = "degeneration";
          break;
        }
      }
    }

    if (diag.record_every > 0 && state.step_index % diag.record_every == 0)
      record_now("");
    if (diag.snapshot_every > 0 && state.step_index % diag.snapshot_every == 0)
      snapshot_now();
  }

  record_now(termination);
  if (diag.snapshot_every > 0) snapshot_now();
  traj.termination = termination;
  traj.final_time = state.time;
  traj.final_step = state.step_index;
  return traj;
}

} // namespace cwflow
