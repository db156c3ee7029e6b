#pragma once
//
// Triangular meshes with tagged boundary edges, validity checks and a plain
// text format:
//
//   vertices N triangles M boundary K
//   x y s          (N rows; s = hole arc-length parameter or nan)
//   i j k          (M rows, counterclockwise, 0-based)
//   i j tag        (K rows, tag = outer | hole)
//

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "pointhole/errors.hpp"
#include "pointhole/vec2.hpp"

namespace pointhole::fem {

enum class BoundaryTag { outer, hole };

inline const char* tag_name(BoundaryTag t) { return t == BoundaryTag::outer ? "outer" : "hole"; }

struct BoundaryEdge {
  int a = 0, b = 0;
  BoundaryTag tag = BoundaryTag::outer;
};

struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary;
  /// Arc-length parameter s of the unscaled hole curve for hole vertices, nan otherwise.
  std::vector<double> hole_param;

  // grading metadata
  double h_max_near_hole = 0.0;
  double h_uniform = 0.0;
  double hole_scale = 0.0;  ///< eps of the scaled hole, 0 if none
  double hole_perimeter = 0.0;  ///< perimeter of the unscaled hole curve
  Vec2 center;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }

  double signed_area(const std::array<int, 3>& t) const {
    return 0.5 * cross(vertices[t[1]] - vertices[t[0]], vertices[t[2]] - vertices[t[0]]);
  }

  double area() const {
    double s = 0.0;
    for (const auto& t : triangles) s += signed_area(t);
    return s;
  }

  std::size_t num_edges() const {
    std::map<std::pair<int, int>, int> edges;
    for (const auto& t : triangles)
      for (int k = 0; k < 3; ++k) {
        const int a = t[k], b = t[(k + 1) % 3];
        edges[{std::min(a, b), std::max(a, b)}]++;
      }
    return edges.size();
  }

  long euler_characteristic() const {
    return static_cast<long>(num_vertices()) - static_cast<long>(num_edges()) + static_cast<long>(num_triangles());
  }

  std::vector<bool> on_boundary(BoundaryTag tag) const {
    std::vector<bool> mark(vertices.size(), false);
    for (const auto& e : boundary)
      if (e.tag == tag) mark[e.a] = mark[e.b] = true;
    return mark;
  }
};

/// Smallest interior angle of a triangle, in degrees.
inline double min_angle_deg(Vec2 p0, Vec2 p1, Vec2 p2) {
  const Vec2 p[3] = {p0, p1, p2};
  double m = 180.0;
  for (int k = 0; k < 3; ++k) {
    const Vec2 u = p[(k + 1) % 3] - p[k], v = p[(k + 2) % 3] - p[k];
    const double ang = std::atan2(std::abs(cross(u, v)), dot(u, v));
    m = std::min(m, ang * 180.0 / std::numbers::pi);
  }
  return m;
}

struct MeshReport {
  bool conforming = true;      ///< every edge shared by at most 2 triangles
  bool positive_areas = true;
  bool boundary_consistent = true;  ///< edges used once are exactly the tagged boundary
  bool hole_single_loop = true;
  double min_angle = 180.0;
  double min_area = std::numeric_limits<double>::infinity();
  std::vector<std::string> problems;

  bool valid(double angle_floor = 20.0) const {
    return conforming && positive_areas && boundary_consistent && hole_single_loop && min_angle >= angle_floor;
  }
};

inline MeshReport check_mesh(const Mesh& mesh) {
  MeshReport rep;
  std::map<std::pair<int, int>, int> edges;
  for (const auto& t : mesh.triangles) {
    const double a = mesh.signed_area(t);
    rep.min_area = std::min(rep.min_area, a);
    if (!(a > 0.0)) rep.positive_areas = false;
    rep.min_angle = std::min(rep.min_angle, min_angle_deg(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]));
    for (int k = 0; k < 3; ++k) {
      const int u = t[k], v = t[(k + 1) % 3];
      edges[{std::min(u, v), std::max(u, v)}]++;
    }
  }
  std::size_t single = 0;
  for (const auto& [e, c] : edges) {
    if (c > 2) rep.conforming = false;
    if (c == 1) ++single;
  }
  for (const auto& e : mesh.boundary) {
    auto it = edges.find({std::min(e.a, e.b), std::max(e.a, e.b)});
    if (it == edges.end() || it->second != 1) rep.boundary_consistent = false;
  }
  if (single != mesh.boundary.size()) rep.boundary_consistent = false;

  // hole edges: every hole vertex has degree 2 and the edges form one cycle
  std::map<int, std::vector<int>> adj;
  std::size_t hole_edges = 0;
  for (const auto& e : mesh.boundary)
    if (e.tag == BoundaryTag::hole) {
      adj[e.a].push_back(e.b);
      adj[e.b].push_back(e.a);
      ++hole_edges;
    }
  if (hole_edges > 0) {
    for (const auto& [v, nb] : adj)
      if (nb.size() != 2) rep.hole_single_loop = false;
    if (rep.hole_single_loop) {
      const int start = adj.begin()->first;
      int prev = -1, cur = start;
      std::size_t steps = 0;
      do {
        const auto& nb = adj[cur];
        const int next = nb[0] != prev ? nb[0] : nb[1];
        prev = cur;
        cur = next;
        ++steps;
      } while (cur != start && steps <= hole_edges);
      if (steps != hole_edges) rep.hole_single_loop = false;
    }
  }
  if (!rep.conforming) rep.problems.emplace_back("non-conforming edge (shared by more than two triangles)");
  if (!rep.positive_areas) rep.problems.emplace_back("non-positive triangle area");
  if (!rep.boundary_consistent) rep.problems.emplace_back("boundary tags do not match the free edges");
  if (!rep.hole_single_loop) rep.problems.emplace_back("hole edges do not form a single closed loop");
  return rep;
}

/// Longest edge over triangles touching the hole boundary.
inline double hole_edge_h(const Mesh& mesh) {
  const auto mark = mesh.on_boundary(BoundaryTag::hole);
  double h = 0.0;
  for (const auto& t : mesh.triangles) {
    if (!mark[t[0]] && !mark[t[1]] && !mark[t[2]]) continue;
    for (int k = 0; k < 3; ++k) h = std::max(h, norm(mesh.vertices[t[k]] - mesh.vertices[t[(k + 1) % 3]]));
  }
  return h;
}

inline std::size_t count_tagged(const Mesh& mesh, BoundaryTag tag) {
  std::size_t n = 0;
  for (const auto& e : mesh.boundary) n += e.tag == tag;
  return n;
}

// ---------------------------------------------------------------------------
// text I/O

inline void write_mesh(std::ostream& out, const Mesh& mesh) {
  char buf[128];
  out << "vertices " << mesh.vertices.size() << " triangles " << mesh.triangles.size() << " boundary "
      << mesh.boundary.size() << '\n';
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const double s = i < mesh.hole_param.size() ? mesh.hole_param[i] : std::numeric_limits<double>::quiet_NaN();
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", mesh.vertices[i].x, mesh.vertices[i].y, s);
    out << buf;
  }
  for (const auto& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& e : mesh.boundary) out << e.a << ' ' << e.b << ' ' << tag_name(e.tag) << '\n';
}

inline Mesh read_mesh(std::istream& in) {
  Mesh mesh;
  std::string w1, w2, w3;
  std::size_t nv = 0, nt = 0, nb = 0;
  if (!(in >> w1 >> nv >> w2 >> nt >> w3 >> nb) || w1 != "vertices" || w2 != "triangles" || w3 != "boundary")
    throw DomainError("read_mesh: malformed header");
  mesh.vertices.resize(nv);
  mesh.hole_param.resize(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    std::string sx, sy, ss;
    if (!(in >> sx >> sy >> ss)) throw DomainError("read_mesh: truncated vertex block");
    mesh.vertices[i] = {std::stod(sx), std::stod(sy)};
    mesh.hole_param[i] = std::strtod(ss.c_str(), nullptr);
  }
  mesh.triangles.resize(nt);
  for (auto& t : mesh.triangles)
    if (!(in >> t[0] >> t[1] >> t[2])) throw DomainError("read_mesh: truncated triangle block");
  mesh.boundary.resize(nb);
  for (auto& e : mesh.boundary) {
    std::string tag;
    if (!(in >> e.a >> e.b >> tag)) throw DomainError("read_mesh: truncated boundary block");
    if (tag == "outer") e.tag = BoundaryTag::outer;
    else if (tag == "hole") e.tag = BoundaryTag::hole;
    else throw DomainError("read_mesh: unknown boundary tag '" + tag + "'");
  }
  for (const auto& t : mesh.triangles)
    for (int v : t)
      if (v < 0 || static_cast<std::size_t>(v) >= nv) throw DomainError("read_mesh: vertex index out of range");
  return mesh;
}

inline void save_mesh(const std::string& path, const Mesh& mesh) {
  std::ofstream out(path);
  if (!out) throw DomainError("save_mesh: cannot open " + path);
  write_mesh(out, mesh);
}

inline Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("load_mesh: cannot open " + path);
  return read_mesh(in);
}

}  // namespace pointhole::fem
