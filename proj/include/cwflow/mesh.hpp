#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace cwflow {

using Vec3 = Eigen::Vector3d;
using VertexPositions = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using FaceIndices = Eigen::Matrix<int, Eigen::Dynamic, 3>;
using ScalarField = Eigen::VectorXd;
using VectorField = Eigen::Matrix<double, Eigen::Dynamic, 3>;

class MeshError : public std::runtime_error {
public:
  explicit MeshError(const std::string& what) : std::runtime_error(what) {}
};

/// Compressed row storage for vertex -> {faces, neighbors} adjacency.
struct AdjacencyCSR {
  std::vector<int> offsets;
  std::vector<int> items;

  int count(int v) const { return offsets[v + 1] - offsets[v]; }
  const int* begin(int v) const { return items.data() + offsets[v]; }
  const int* end(int v) const { return items.data() + offsets[v + 1]; }
};

struct Edge {
  int a, b;   // a < b
  int f0, f1; // incident faces
};

/// Connectivity of a closed oriented triangle mesh. Immutable and shared
/// between surfaces that differ only in vertex positions (flow steps keep
/// connectivity fixed between remeshing passes).
struct MeshTopology {
  FaceIndices faces;
  std::vector<Edge> edges;
  AdjacencyCSR vertex_faces;
  AdjacencyCSR vertex_ring;
  int vertex_count = 0;

  int face_count() const { return static_cast<int>(faces.rows()); }
  int edge_count() const { return static_cast<int>(edges.size()); }
  int euler_characteristic() const {
    return vertex_count - edge_count() + face_count();
  }
};

namespace detail {

inline std::uint64_t directed_edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

inline std::shared_ptr<const MeshTopology> build_topology(int vertex_count,
                                                          const FaceIndices& faces) {
  auto topo = std::make_shared<MeshTopology>();
  topo->vertex_count = vertex_count;
  topo->faces = faces;

  const int nf = static_cast<int>(faces.rows());
  std::unordered_map<std::uint64_t, int> directed; // key -> face
  directed.reserve(static_cast<std::size_t>(nf) * 3);
  std::unordered_map<std::uint64_t, std::array<int, 3>> undirected; // key -> {count,f0,f1}
  undirected.reserve(static_cast<std::size_t>(nf) * 3);

  for (int f = 0; f < nf; ++f) {
    for (int c = 0; c < 3; ++c) {
      const int a = faces(f, c);
      const int b = faces(f, (c + 1) % 3);
      if (a < 0 || a >= vertex_count || b < 0 || b >= vertex_count)
        throw MeshError("face references vertex out of range");
      if (a == b) throw MeshError("degenerate face with repeated vertex");
      auto [it, inserted] = directed.emplace(directed_edge_key(a, b), f);
      (void)it;
      if (!inserted)
        throw MeshError("inconsistent orientation: directed edge repeated "
                        "(not repairable by a global flip)");
      const std::uint64_t ukey =
          directed_edge_key(std::min(a, b), std::max(a, b));
      auto& rec = undirected[ukey];
      if (rec[0] == 0) rec = {1, f, -1};
      else {
        rec[0]++;
        rec[2] = f;
      }
    }
  }

  topo->edges.reserve(undirected.size());
  for (const auto& [key, rec] : undirected) {
    if (rec[0] == 1) throw MeshError("open boundary: edge with a single face");
    if (rec[0] > 2) throw MeshError("non-manifold edge shared by more than two faces");
    Edge e;
    e.a = static_cast<int>(key >> 32);
    e.b = static_cast<int>(key & 0xffffffffu);
    e.f0 = rec[1];
    e.f1 = rec[2];
    topo->edges.push_back(e);
  }
  std::sort(topo->edges.begin(), topo->edges.end(), [](const Edge& x, const Edge& y) {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });

  // vertex -> faces
  {
    std::vector<int> deg(vertex_count, 0);
    for (int f = 0; f < nf; ++f)
      for (int c = 0; c < 3; ++c) deg[faces(f, c)]++;
    topo->vertex_faces.offsets.assign(vertex_count + 1, 0);
    for (int v = 0; v < vertex_count; ++v)
      topo->vertex_faces.offsets[v + 1] = topo->vertex_faces.offsets[v] + deg[v];
    topo->vertex_faces.items.resize(topo->vertex_faces.offsets.back());
    std::vector<int> cursor(topo->vertex_faces.offsets.begin(),
                            topo->vertex_faces.offsets.end() - 1);
    for (int f = 0; f < nf; ++f)
      for (int c = 0; c < 3; ++c)
        topo->vertex_faces.items[cursor[faces(f, c)]++] = f;
  }

  // vertex -> one-ring neighbors
  {
    std::vector<int> deg(vertex_count, 0);
    for (const Edge& e : topo->edges) {
      deg[e.a]++;
      deg[e.b]++;
    }
    topo->vertex_ring.offsets.assign(vertex_count + 1, 0);
    for (int v = 0; v < vertex_count; ++v)
      topo->vertex_ring.offsets[v + 1] = topo->vertex_ring.offsets[v] + deg[v];
    topo->vertex_ring.items.resize(topo->vertex_ring.offsets.back());
    std::vector<int> cursor(topo->vertex_ring.offsets.begin(),
                            topo->vertex_ring.offsets.end() - 1);
    for (const Edge& e : topo->edges) {
      topo->vertex_ring.items[cursor[e.a]++] = e.b;
      topo->vertex_ring.items[cursor[e.b]++] = e.a;
    }
  }

  for (int v = 0; v < vertex_count; ++v)
    if (topo->vertex_faces.count(v) == 0)
      throw MeshError("isolated vertex");

  return topo;
}

} // namespace detail

/// Closed oriented triangle mesh immersed in R^3. Immutable after
/// construction; copies that share connectivity are cheap.
class TriangleSurface {
public:
  TriangleSurface(VertexPositions vertices, const FaceIndices& faces)
      : vertices_(std::move(vertices)),
        topo_(detail::build_topology(static_cast<int>(vertices_.rows()), faces)) {
    validate_geometry();
  }

  TriangleSurface(VertexPositions vertices, std::shared_ptr<const MeshTopology> topo)
      : vertices_(std::move(vertices)), topo_(std::move(topo)) {
    if (vertices_.rows() != topo_->vertex_count)
      throw MeshError("vertex count does not match topology");
  }

  /// Same connectivity, new positions. Geometry is not revalidated; the
  /// flow engine checks degeneracy with its own thresholds.
  TriangleSurface with_vertices(VertexPositions vertices) const {
    return TriangleSurface(std::move(vertices), topo_);
  }

  const VertexPositions& vertices() const { return vertices_; }
  const FaceIndices& faces() const { return topo_->faces; }
  const MeshTopology& topology() const { return *topo_; }
  std::shared_ptr<const MeshTopology> topology_ptr() const { return topo_; }

  int vertex_count() const { return static_cast<int>(vertices_.rows()); }
  int face_count() const { return topo_->face_count(); }
  int euler_characteristic() const { return topo_->euler_characteristic(); }

  Vec3 vertex(int v) const { return vertices_.row(v).transpose(); }

  double min_edge_length() const {
    double hmin = std::numeric_limits<double>::infinity();
    double hsum = 0;
    for (const Edge& e : topo_->edges) {
      const double len = (vertices_.row(e.a) - vertices_.row(e.b)).norm();
      hmin = std::min(hmin, len);
      hsum += len;
    }
    const double hmean = hsum / static_cast<double>(topo_->edge_count());
    if (!(hmin > 1e-10 * hmean))
      throw MeshError("degenerate edge below tolerance");
    return hmin;
  }

  double mean_edge_length() const {
    double hsum = 0;
    for (const Edge& e : topo_->edges)
      hsum += (vertices_.row(e.a) - vertices_.row(e.b)).norm();
    return hsum / static_cast<double>(topo_->edge_count());
  }

  /// 4-to-1 loop-style subdivision of the connectivity with edge midpoints
  /// (no smoothing). Used by refinement studies and property tests.
  TriangleSurface subdivide() const {
    const int nv = vertex_count();
    const int nf = face_count();
    std::unordered_map<std::uint64_t, int> midpoint;
    midpoint.reserve(topo_->edges.size());
    VertexPositions V(nv + topo_->edge_count(), 3);
    V.topRows(nv) = vertices_;
    int next = nv;
    for (const Edge& e : topo_->edges) {
      V.row(next) = 0.5 * (vertices_.row(e.a) + vertices_.row(e.b));
      midpoint[detail::directed_edge_key(e.a, e.b)] = next;
      ++next;
    }
    auto mid = [&](int a, int b) {
      return midpoint.at(detail::directed_edge_key(std::min(a, b), std::max(a, b)));
    };
    FaceIndices F(4 * nf, 3);
    for (int f = 0; f < nf; ++f) {
      const int i = faces()(f, 0), j = faces()(f, 1), k = faces()(f, 2);
      const int ij = mid(i, j), jk = mid(j, k), ki = mid(k, i);
      F.row(4 * f + 0) << i, ij, ki;
      F.row(4 * f + 1) << ij, j, jk;
      F.row(4 * f + 2) << ki, jk, k;
      F.row(4 * f + 3) << ij, jk, ki;
    }
    return TriangleSurface(std::move(V), F);
  }

private:
  void validate_geometry() const {
    if (!vertices_.allFinite()) throw MeshError("non-finite vertex position");

    // duplicate vertices (exact coordinate match)
    {
      std::unordered_set<std::string> seen;
      seen.reserve(static_cast<std::size_t>(vertices_.rows()));
      for (int v = 0; v < vertices_.rows(); ++v) {
        double xyz[3] = {vertices_(v, 0), vertices_(v, 1), vertices_(v, 2)};
        std::string key(reinterpret_cast<const char*>(xyz), sizeof(xyz));
        if (!seen.insert(key).second) throw MeshError("duplicate vertex");
      }
    }

    const int nf = face_count();
    Eigen::VectorXd area(nf);
    for (int f = 0; f < nf; ++f) {
      const Vec3 p0 = vertex(faces()(f, 0));
      const Vec3 p1 = vertex(faces()(f, 1));
      const Vec3 p2 = vertex(faces()(f, 2));
      area[f] = 0.5 * (p1 - p0).cross(p2 - p0).norm();
    }
    const double mean_area = area.mean();
    if (!(mean_area > 0)) throw MeshError("all faces degenerate");
    if (area.minCoeff() < 1e-12 * mean_area)
      throw MeshError("degenerate face (area below tolerance)");
  }

  VertexPositions vertices_;
  std::shared_ptr<const MeshTopology> topo_;
};

/// Parses the `v x y z` / `f i j k` OBJ subset (1-based indices; extra
/// `/`-qualified index tuples are tolerated, only positions are used).
inline TriangleSurface load_obj(std::istream& in) {
  std::vector<Vec3> verts;
  std::vector<std::array<int, 3>> faces;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z))
        throw MeshError("OBJ parse failure at line " + std::to_string(lineno));
      verts.push_back(Vec3(x, y, z));
    } else if (tag == "f") {
      std::array<int, 3> f{};
      std::string tok;
      for (int c = 0; c < 3; ++c) {
        if (!(ls >> tok))
          throw MeshError("OBJ parse failure at line " + std::to_string(lineno));
        const std::size_t slash = tok.find('/');
        if (slash != std::string::npos) tok = tok.substr(0, slash);
        try {
          f[c] = std::stoi(tok) - 1;
        } catch (const std::exception&) {
          throw MeshError("OBJ parse failure at line " + std::to_string(lineno));
        }
      }
      std::string extra;
      if (ls >> extra)
        throw MeshError("non-triangular face at line " + std::to_string(lineno));
      faces.push_back(f);
    }
    // other record types ignored
  }
  if (verts.empty() || faces.empty()) throw MeshError("OBJ contains no mesh");
  VertexPositions V(static_cast<int>(verts.size()), 3);
  for (std::size_t v = 0; v < verts.size(); ++v) V.row(static_cast<int>(v)) = verts[v];
  FaceIndices F(static_cast<int>(faces.size()), 3);
  for (std::size_t f = 0; f < faces.size(); ++f)
    F.row(static_cast<int>(f)) << faces[f][0], faces[f][1], faces[f][2];
  return TriangleSurface(std::move(V), F);
}

inline TriangleSurface load_obj_string(const std::string& text) {
  std::istringstream in(text);
  return load_obj(in);
}

inline void save_obj(std::ostream& out, const TriangleSurface& s) {
  out.precision(17);
  for (int v = 0; v < s.vertex_count(); ++v)
    out << "v " << s.vertices()(v, 0) << ' ' << s.vertices()(v, 1) << ' '
        << s.vertices()(v, 2) << '\n';
  for (int f = 0; f < s.face_count(); ++f)
    out << "f " << s.faces()(f, 0) + 1 << ' ' << s.faces()(f, 1) + 1 << ' '
        << s.faces()(f, 2) + 1 << '\n';
}

inline std::string save_obj_string(const TriangleSurface& s) {
  std::ostringstream out;
  save_obj(out, s);
  return out.str();
}

/// Regular icosahedron with unit circumradius.
inline TriangleSurface icosahedron() {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  const double s = 1.0 / std::sqrt(1.0 + phi * phi);
  const double a = s, b = phi * s; // unit circumradius
  VertexPositions V(12, 3);
  V << -a, b, 0, a, b, 0, -a, -b, 0, a, -b, 0, 0, -a, b, 0, a, b, 0, -a, -b,
      0, a, -b, b, 0, -a, b, 0, a, -b, 0, -a, -b, 0, a;
  FaceIndices F(20, 3);
  const int faces[20][3] = {
      {0, 11, 5}, {0, 5, 1},   {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4},  {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},   {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11},  {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int f = 0; f < 20; ++f) F.row(f) << faces[f][0], faces[f][1], faces[f][2];
  TriangleSurface surf(std::move(V), F);
  // orient outward: signed volume must be positive
  double vol = 0;
  for (int f = 0; f < 20; ++f) {
    Eigen::Matrix3d m;
    m.row(0) = surf.vertices().row(surf.faces()(f, 0));
    m.row(1) = surf.vertices().row(surf.faces()(f, 1));
    m.row(2) = surf.vertices().row(surf.faces()(f, 2));
    vol += m.determinant() / 6.0;
  }
  if (vol < 0) {
    FaceIndices Ff = surf.faces();
    Ff.col(1).swap(Ff.col(2));
    return TriangleSurface(surf.vertices(), Ff);
  }
  return surf;
}

/// Icosphere: icosahedron subdivided `subdiv` times with vertices projected
/// to the unit sphere after each level.
inline TriangleSurface icosphere(int subdiv, double radius = 1.0) {
  TriangleSurface s = icosahedron();
  for (int k = 0; k < subdiv; ++k) {
    s = s.subdivide();
    VertexPositions V = s.vertices();
    for (int v = 0; v < V.rows(); ++v) V.row(v).normalize();
    s = s.with_vertices(std::move(V));
  }
  if (radius != 1.0) {
    VertexPositions V = s.vertices() * radius;
    s = s.with_vertices(std::move(V));
  }
  return s;
}

} // namespace cwflow
