#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fminimal/errors.hpp"

namespace fminimal {

using Point3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

/// Oriented triangle mesh in R^3. Construction validates that the input is
/// an orientable 2-manifold (possibly with boundary) without degenerate
/// triangles; afterwards the mesh is immutable.
class TriMesh {
 public:
  static constexpr double kMinFaceArea = 1e-14;

  TriMesh(std::vector<Point3> vertices, std::vector<Face> faces)
      : vertices_(std::move(vertices)), faces_(std::move(faces)) {
    build();
  }

  std::size_t num_vertices() const noexcept { return vertices_.size(); }
  std::size_t num_faces() const noexcept { return faces_.size(); }
  std::size_t num_edges() const noexcept { return edge_count_; }
  const std::vector<Point3>& vertices() const noexcept { return vertices_; }
  const std::vector<Face>& faces() const noexcept { return faces_; }
  const Point3& vertex(int v) const { return vertices_.at(static_cast<std::size_t>(v)); }
  /// True for vertices on a boundary edge.
  const std::vector<bool>& boundary_flags() const noexcept { return boundary_; }
  bool closed() const noexcept { return boundary_edge_count_ == 0; }

  long euler_characteristic() const noexcept {
    return static_cast<long>(vertices_.size()) - static_cast<long>(edge_count_) + static_cast<long>(faces_.size());
  }

  /// Genus of a closed connected mesh, (2 - chi) / 2.
  int genus() const {
    if (!closed()) throw UnsupportedError("genus is defined here for closed meshes only");
    const long chi = euler_characteristic();
    if ((2 - chi) % 2 != 0 || chi > 2) throw MeshError("Euler characteristic does not give an integer genus");
    return static_cast<int>((2 - chi) / 2);
  }

  /// Faces incident to vertex v.
  const std::vector<int>& vertex_faces(int v) const { return vertex_faces_.at(static_cast<std::size_t>(v)); }
  /// Vertices sharing an edge with v, sorted.
  const std::vector<int>& neighbors(int v) const { return neighbors_.at(static_cast<std::size_t>(v)); }

  double face_area(int f) const { return 0.5 * face_cross(f).norm(); }
  /// Unnormalized normal (twice the area) following the face's winding.
  Point3 face_cross(int f) const {
    const Face& t = faces_.at(static_cast<std::size_t>(f));
    return (vertices_[t[1]] - vertices_[t[0]]).cross(vertices_[t[2]] - vertices_[t[0]]);
  }

  double area() const {
    double a = 0.0;
    for (std::size_t f = 0; f < faces_.size(); ++f) a += face_area(static_cast<int>(f));
    return a;
  }

  /// Vertices reachable within `rings` edge hops of v, excluding v itself, sorted.
  std::vector<int> ring(int v, int rings) const {
    std::vector<int> frontier{v};
    std::vector<int> seen{v};
    for (int r = 0; r < rings; ++r) {
      std::vector<int> next;
      for (int u : frontier) {
        for (int w : neighbors(u)) {
          if (std::find(seen.begin(), seen.end(), w) == seen.end()) {
            seen.push_back(w);
            next.push_back(w);
          }
        }
      }
      frontier = std::move(next);
    }
    seen.erase(seen.begin());
    std::sort(seen.begin(), seen.end());
    return seen;
  }

 private:
  void build() {
    const auto nv = static_cast<int>(vertices_.size());
    vertex_faces_.assign(vertices_.size(), {});
    neighbors_.assign(vertices_.size(), {});
    boundary_.assign(vertices_.size(), false);
    // Directed edge (a, b) -> number of faces using it in that direction.
    std::map<std::pair<int, int>, int> directed;
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      const Face& t = faces_[f];
      for (int k = 0; k < 3; ++k) {
        if (t[k] < 0 || t[k] >= nv) throw MeshError("face references a vertex out of range");
      }
      if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) throw MeshError("face repeats a vertex");
      if (face_area(static_cast<int>(f)) <= kMinFaceArea) throw DegenerateGeometry("degenerate triangle in mesh");
      for (int k = 0; k < 3; ++k) {
        vertex_faces_[t[k]].push_back(static_cast<int>(f));
        const int a = t[k];
        const int b = t[(k + 1) % 3];
        if (++directed[{a, b}] > 1) throw MeshError("mesh is non-orientable or non-manifold (edge used twice in one direction)");
      }
    }
    edge_count_ = 0;
    boundary_edge_count_ = 0;
    for (const auto& [e, count] : directed) {
      const auto [a, b] = e;
      const bool twin = directed.count({b, a}) != 0;
      if (a < b || !twin) {
        ++edge_count_;
        neighbors_[a].push_back(b);
        neighbors_[b].push_back(a);
      }
      if (!twin) {
        ++boundary_edge_count_;
        boundary_[a] = true;
        boundary_[b] = true;
      }
    }
    for (auto& nb : neighbors_) {
      std::sort(nb.begin(), nb.end());
      nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
  }

  std::vector<Point3> vertices_;
  std::vector<Face> faces_;
  std::vector<std::vector<int>> vertex_faces_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<bool> boundary_;
  std::size_t edge_count_ = 0;
  std::size_t boundary_edge_count_ = 0;
};

// ---------------------------------------------------------------------------
// OFF input/output

namespace detail {
// Next non-empty line with '#' comments stripped.
inline bool next_off_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}
}  // namespace detail

inline TriMesh read_off(std::istream& in) {
  std::string line;
  if (!detail::next_off_line(in, line)) throw MeshError("empty OFF input");
  std::istringstream header(line);
  std::string magic;
  header >> magic;
  if (magic != "OFF") throw MeshError("OFF header missing");
  long nv = -1, nf = -1, ne = 0;
  // Counts may share the header line.
  if (!(header >> nv)) {
    if (!detail::next_off_line(in, line)) throw MeshError("OFF counts line missing");
    std::istringstream counts(line);
    if (!(counts >> nv >> nf)) throw MeshError("malformed OFF counts line");
    counts >> ne;
  } else if (!(header >> nf)) {
    throw MeshError("malformed OFF counts line");
  }
  if (nv < 0 || nf < 0) throw MeshError("negative OFF counts");
  std::vector<Point3> vertices;
  vertices.reserve(static_cast<std::size_t>(nv));
  for (long i = 0; i < nv; ++i) {
    if (!detail::next_off_line(in, line)) throw MeshError("OFF file ends inside the vertex block");
    std::istringstream ls(line);
    Point3 p;
    if (!(ls >> p.x() >> p.y() >> p.z())) throw MeshError("malformed OFF vertex line");
    vertices.push_back(p);
  }
  std::vector<Face> faces;
  faces.reserve(static_cast<std::size_t>(nf));
  for (long i = 0; i < nf; ++i) {
    if (!detail::next_off_line(in, line)) throw MeshError("OFF file ends inside the face block");
    std::istringstream ls(line);
    int arity = 0;
    Face f{};
    if (!(ls >> arity)) throw MeshError("malformed OFF face line");
    if (arity != 3) throw MeshError("only triangular OFF faces are supported");
    if (!(ls >> f[0] >> f[1] >> f[2])) throw MeshError("malformed OFF face line");
    faces.push_back(f);
  }
  return TriMesh(std::move(vertices), std::move(faces));
}

inline TriMesh read_off_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open OFF file: " + path);
  return read_off(in);
}

/// Writes ASCII OFF with every coordinate at 17 significant digits.
inline void write_off(std::ostream& out, const TriMesh& mesh) {
  out << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_faces() << ' ' << mesh.num_edges() << '\n';
  char buf[128];
  for (const Point3& p : mesh.vertices()) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", p.x(), p.y(), p.z());
    out << buf;
  }
  for (const Face& f : mesh.faces()) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

inline void write_off_file(const std::string& path, const TriMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot open OFF file for writing: " + path);
  write_off(out, mesh);
}

// ---------------------------------------------------------------------------
// Generators. All closed surfaces come out with outward-facing winding.

/// Loop-style subdivided icosahedron projected onto the sphere of `radius`.
/// Level k has 10 * 4^k + 2 vertices.
inline TriMesh icosphere(int level, double radius) {
  if (level < 0) throw ArgumentError("subdivision level must be nonnegative");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Point3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                           {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  std::vector<Face> f = {{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                         {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
                         {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
  for (auto& p : v) p.normalize();
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int id = static_cast<int>(v.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<Face> next;
    next.reserve(f.size() * 4);
    for (const Face& t : f) {
      const int a = mid(t[0], t[1]);
      const int b = mid(t[1], t[2]);
      const int c = mid(t[2], t[0]);
      next.push_back({t[0], a, c});
      next.push_back({t[1], b, a});
      next.push_back({t[2], c, b});
      next.push_back({a, b, c});
    }
    f = std::move(next);
  }
  for (auto& p : v) p *= radius;
  return TriMesh(std::move(v), std::move(f));
}

/// Triangulated disk of `radius` in the plane x3 = 0 made of concentric
/// rings spaced `spacing` apart (radius should be a multiple of spacing so
/// that every ring radius k * spacing is represented exactly). Normal +e3.
inline TriMesh planar_disk(double radius, double spacing) {
  if (radius <= 0.0 || spacing <= 0.0) throw ArgumentError("disk radius and spacing must be positive");
  const int rings = std::max(1, static_cast<int>(std::lround(radius / spacing)));
  const double dr = radius / rings;
  std::vector<Point3> v{{0, 0, 0}};
  std::vector<int> start{0};
  std::vector<int> count{1};
  for (int k = 1; k <= rings; ++k) {
    const double r = k * dr;
    const int m = std::max(6, static_cast<int>(std::lround(2.0 * M_PI * r / dr)));
    start.push_back(static_cast<int>(v.size()));
    count.push_back(m);
    for (int j = 0; j < m; ++j) {
      const double a = 2.0 * M_PI * j / m;
      v.emplace_back(r * std::cos(a), r * std::sin(a), 0.0);
    }
  }
  std::vector<Face> f;
  for (int j = 0; j < count[1]; ++j) f.push_back({0, start[1] + j, start[1] + (j + 1) % count[1]});
  // Zip consecutive rings by advancing whichever side lags in angle.
  for (int k = 1; k < rings; ++k) {
    const int m0 = count[k], m1 = count[k + 1];
    int i = 0, j = 0;
    while (i < m0 || j < m1) {
      const double ai = static_cast<double>(i + 1) / m0;
      const double aj = static_cast<double>(j + 1) / m1;
      const int p = start[k] + i % m0;
      const int q = start[k + 1] + j % m1;
      if (j < m1 && (i >= m0 || aj <= ai)) {
        f.push_back({p, q, start[k + 1] + (j + 1) % m1});
        ++j;
      } else {
        f.push_back({p, q, start[k] + (i + 1) % m0});
        ++i;
      }
    }
  }
  return TriMesh(std::move(v), std::move(f));
}

/// Open cylinder of `radius` about the x3 axis over |x3| <= half_height,
/// `around` vertices per ring and rows spaced `dz` apart. Normal points away
/// from the axis.
inline TriMesh cylinder_mesh(double radius, double half_height, int around, double dz) {
  if (radius <= 0.0 || half_height <= 0.0 || around < 3 || dz <= 0.0) throw ArgumentError("invalid cylinder mesh parameters");
  const int rows = static_cast<int>(std::lround(2.0 * half_height / dz));
  std::vector<Point3> v;
  for (int r = 0; r <= rows; ++r) {
    const double z = -half_height + 2.0 * half_height * r / rows;
    for (int j = 0; j < around; ++j) {
      // Staggered rows give near-equilateral triangles.
      const double a = 2.0 * M_PI * (j + 0.5 * (r % 2)) / around;
      v.emplace_back(radius * std::cos(a), radius * std::sin(a), z);
    }
  }
  std::vector<Face> f;
  for (int r = 0; r < rows; ++r) {
    const int b = r * around, t = (r + 1) * around;
    for (int j = 0; j < around; ++j) {
      const int j1 = (j + 1) % around;
      if (r % 2 == 0) {
        f.push_back({b + j, b + j1, t + j});
        f.push_back({b + j1, t + j1, t + j});
      } else {
        f.push_back({b + j, t + j1, t + j});
        f.push_back({b + j, b + j1, t + j1});
      }
    }
  }
  return TriMesh(std::move(v), std::move(f));
}

/// Torus of revolution about x3 with center-circle radius `major` and tube
/// radius `minor`, outward normal.
inline TriMesh torus_mesh(double major, double minor, int around_major, int around_minor) {
  if (major <= minor || minor <= 0.0 || around_major < 3 || around_minor < 3) throw ArgumentError("invalid torus mesh parameters");
  std::vector<Point3> v;
  for (int i = 0; i < around_major; ++i) {
    const double u = 2.0 * M_PI * i / around_major;
    for (int j = 0; j < around_minor; ++j) {
      const double w = 2.0 * M_PI * j / around_minor;
      const double rho = major + minor * std::cos(w);
      v.emplace_back(rho * std::cos(u), rho * std::sin(u), minor * std::sin(w));
    }
  }
  auto id = [&](int i, int j) { return (i % around_major) * around_minor + (j % around_minor); };
  std::vector<Face> f;
  for (int i = 0; i < around_major; ++i) {
    for (int j = 0; j < around_minor; ++j) {
      f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return TriMesh(std::move(v), std::move(f));
}

}  // namespace fminimal
