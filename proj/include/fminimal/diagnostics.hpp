#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fminimal/ambient.hpp"
#include "fminimal/conformal.hpp"
#include "fminimal/errors.hpp"
#include "fminimal/geometry.hpp"
#include "fminimal/mesh.hpp"
#include "fminimal/patch.hpp"
#include "fminimal/quadrature.hpp"

namespace fminimal {

/// Patch quadrature: tensor Gauss-Legendre with `order` nodes per axis on
/// `cells` sub-boxes per axis.
struct QuadratureOptions {
  int order = 8;
  int cells = 1;
};

/// Interior 3-point rule on a triangle (barycentric (2/3, 1/6, 1/6) and
/// permutations, equal weights); exact for quadratics.
inline constexpr std::array<std::array<double, 3>, 3> kTriangleRule = {{
    {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
    {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
    {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0},
}};

/// Area element sqrt(det g) at u.
inline double area_element(const ImmersedPatch& patch, const Vector& u) {
  const Matrix j = patch.jacobian(u);
  return std::sqrt(std::max(0.0, (j.transpose() * j).determinant()));
}

/// Integral over the patch of integrand(u, sqrt(det g)) du.
template <class Fn>
double integrate_patch(const ImmersedPatch& patch, const QuadratureOptions& q, Fn&& integrand) {
  double acc = 0.0;
  for_each_tensor_node(patch.box(), q.order, q.cells, [&](const Vector& u, double w) { acc += w * integrand(u); });
  return acc;
}

// ---------------------------------------------------------------------------
// Self-shrinker residual H - <x, nu>/2

/// Sup-norm of H - <x, nu>/2 over the patch quadrature nodes.
inline double shrinker_residual(const ImmersedPatch& patch, const WeightedAmbient& space, const QuadratureOptions& q = {}) {
  if (!space.is_gaussian()) throw WrongAmbient("the shrinker residual is defined in the Gaussian soliton only");
  double sup = 0.0;
  for_each_tensor_node(patch.box(), q.order, q.cells, [&](const Vector& u, double) {
    const PointGeometry pg = point_geometry(patch, u, space);
    sup = std::max(sup, std::abs(pg.mean_curv - 0.5 * pg.position.dot(pg.normal)));
  });
  return sup;
}

/// Sup-norm of H - <x, nu>/2 over interior mesh vertices (boundary vertices
/// have one-sided fits and are skipped).
inline double shrinker_residual(const TriMesh& mesh, const WeightedAmbient& space) {
  if (!space.is_gaussian()) throw WrongAmbient("the shrinker residual is defined in the Gaussian soliton only");
  const std::vector<PointGeometry> geo = vertex_geometry(mesh, space);
  double sup = 0.0;
  for (std::size_t v = 0; v < geo.size(); ++v) {
    if (mesh.boundary_flags()[v]) continue;
    sup = std::max(sup, std::abs(geo[v].mean_curv - 0.5 * geo[v].position.dot(geo[v].normal)));
  }
  return sup;
}

// ---------------------------------------------------------------------------
// Weighted volume

inline double weighted_volume(const ImmersedPatch& patch, const WeightedAmbient& space, const QuadratureOptions& q = {}) {
  return integrate_patch(patch, q, [&](const Vector& u) {
    return std::exp(-space.weight(patch.embed(u))) * area_element(patch, u);
  });
}

inline double weighted_volume(const TriMesh& mesh, const WeightedAmbient& space) {
  double acc = 0.0;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Face& t = mesh.faces()[f];
    double s = 0.0;
    for (const auto& b : kTriangleRule) {
      const Vector x = b[0] * mesh.vertex(t[0]) + b[1] * mesh.vertex(t[1]) + b[2] * mesh.vertex(t[2]);
      s += std::exp(-space.weight(x)) / 3.0;
    }
    acc += s * mesh.face_area(static_cast<int>(f));
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Weighted area bound for closed surfaces with Ric_f >= kappa > 0

struct AreaBoundRecord {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  int genus = 0;
  double min_weight = 0.0;
};

namespace detail {
inline void require_ricci_lower_bound(const WeightedAmbient& space, const Vector& x, double kappa) {
  const double lowest = Eigen::SelfAdjointEigenSolver<Matrix>(space.weight_hess(x)).eigenvalues().minCoeff();
  if (lowest < kappa - 1e-12) throw PreconditionError("Ric_f is not bounded below by kappa on the surface");
}

inline AreaBoundRecord area_bound(double lhs, double kappa, int genus, double min_f) {
  AreaBoundRecord r;
  r.lhs = lhs;
  r.genus = genus;
  r.min_weight = min_f;
  r.rhs = 16.0 * M_PI / kappa * (genus + 1.0) * std::exp(-min_f);
  r.holds = r.lhs <= r.rhs;
  return r;
}
}  // namespace detail

/// Compares Vol_f with (16 pi / kappa)(genus + 1) e^{-min f}. The genus comes
/// from `genus` when given, else from the patch's declaration.
inline AreaBoundRecord area_bound_check(const ImmersedPatch& patch, const WeightedAmbient& space, double kappa,
                                        std::optional<int> genus = std::nullopt, const QuadratureOptions& q = {}) {
  if (patch.param_dim() != 2) throw UnsupportedError("the weighted area bound is for surfaces (n = 2)");
  if (!patch.closed()) throw UnsupportedError("the weighted area bound needs a closed surface");
  if (!(kappa > 0.0)) throw PreconditionError("kappa must be positive");
  const std::optional<int> g = genus ? genus : patch.genus();
  if (!g || *g < 0) throw PreconditionError("the patch declares no genus");
  double min_f = std::numeric_limits<double>::infinity();
  for_each_tensor_node(patch.box(), q.order, q.cells, [&](const Vector& u, double) {
    const Vector x = patch.embed(u);
    detail::require_ricci_lower_bound(space, x, kappa);
    min_f = std::min(min_f, space.weight(x));
  });
  return detail::area_bound(weighted_volume(patch, space, q), kappa, *g, min_f);
}

inline AreaBoundRecord area_bound_check(const TriMesh& mesh, const WeightedAmbient& space, double kappa,
                                        std::optional<int> genus = std::nullopt) {
  if (!mesh.closed()) throw UnsupportedError("the weighted area bound needs a closed surface");
  if (!(kappa > 0.0)) throw PreconditionError("kappa must be positive");
  double min_f = std::numeric_limits<double>::infinity();
  for (const Point3& p : mesh.vertices()) {
    detail::require_ricci_lower_bound(space, p, kappa);
    min_f = std::min(min_f, space.weight(p));
  }
  return detail::area_bound(weighted_volume(mesh, space), kappa, genus ? *genus : mesh.genus(), min_f);
}

// ---------------------------------------------------------------------------
// Index-bound integrands

struct IndexBoundIntegrals {
  /// Integral of (|A|^2 + 1/2)^{n/2} e^{-|x|^2/4}.
  double selfshrinker_integral = 0.0;
  /// Integral of max{1, |A|^2 + Ric_f(nu, nu)}^{n/2} e^{-f}.
  double general_integral = 0.0;
};

inline IndexBoundIntegrals index_bound_integrand(const ImmersedPatch& patch, const WeightedAmbient& space,
                                                 const QuadratureOptions& q = {}) {
  IndexBoundIntegrals out;
  const double half_n = 0.5 * patch.param_dim();
  for_each_tensor_node(patch.box(), q.order, q.cells, [&](const Vector& u, double w) {
    const PointGeometry pg = point_geometry(patch, u, space);
    const double dv = std::sqrt(std::max(0.0, pg.first_form.determinant()));
    out.selfshrinker_integral +=
        w * dv * std::pow(pg.shape_sq + 0.5, half_n) * std::exp(-0.25 * pg.position.squaredNorm());
    out.general_integral += w * dv * std::pow(std::max(1.0, pg.stability_potential()), half_n) * std::exp(-pg.weight);
  });
  return out;
}

/// Mesh version: vertex geometry interpolated linearly to the triangle rule.
inline IndexBoundIntegrals index_bound_integrand(const TriMesh& mesh, const WeightedAmbient& space) {
  const std::vector<PointGeometry> geo = vertex_geometry(mesh, space);
  IndexBoundIntegrals out;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Face& t = mesh.faces()[f];
    const double area = mesh.face_area(static_cast<int>(f));
    for (const auto& b : kTriangleRule) {
      double a2 = 0.0, pot = 0.0;
      Vector x = Vector::Zero(3);
      for (int k = 0; k < 3; ++k) {
        a2 += b[k] * geo[t[k]].shape_sq;
        pot += b[k] * geo[t[k]].stability_potential();
        x += b[k] * mesh.vertex(t[k]);
      }
      out.selfshrinker_integral += area / 3.0 * (a2 + 0.5) * std::exp(-0.25 * x.squaredNorm());
      out.general_integral += area / 3.0 * std::max(1.0, pot) * std::exp(-space.weight(x));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Euclidean volume growth

namespace detail {

// Unweighted area of a flat triangle inside the closed ball B_R(c), by
// recursive 1-to-4 splitting of triangles that straddle the sphere.
inline double triangle_area_in_ball(const Point3& a, const Point3& b, const Point3& c, const Point3& center, double r,
                                    int depth) {
  const double area = 0.5 * (b - a).cross(c - a).norm();
  const bool ia = (a - center).norm() <= r, ib = (b - center).norm() <= r, ic = (c - center).norm() <= r;
  if (ia && ib && ic) return area;  // balls are convex
  // Closest point of the triangle to the center, bounded below by the
  // distance to the circumscribing ball of the triangle.
  const Point3 centroid = (a + b + c) / 3.0;
  const double spread = std::max({(a - centroid).norm(), (b - centroid).norm(), (c - centroid).norm()});
  if ((centroid - center).norm() - spread > r) return 0.0;
  if (depth == 0) {
    const Point3 pts[4] = {a, b, c, centroid};
    int inside = 0;
    for (const auto& p : pts) inside += (p - center).norm() <= r;
    return area * inside / 4.0;
  }
  const Point3 ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
  return triangle_area_in_ball(a, ab, ca, center, r, depth - 1) + triangle_area_in_ball(ab, b, bc, center, r, depth - 1) +
         triangle_area_in_ball(ca, bc, c, center, r, depth - 1) + triangle_area_in_ball(ab, bc, ca, center, r, depth - 1);
}

// Area of the part of a patch cell inside the ball, by adaptive bisection of
// cells on which the indicator is not constant over a 3^n sample lattice.
// Only the axes along which the indicator changes are split. Splits of a
// single axis are cheap (the straddling cells do not multiply), so they get
// the larger budget `fine`; splits of several axes draw on `depth`.
inline double cell_area_in_ball(const ImmersedPatch& patch, const ParamBox& cell, const Vector& center, double r,
                                int depth, int fine = 40) {
  const Eigen::Index n = cell.dim();
  long lattice = 1;
  for (Eigen::Index a = 0; a < n; ++a) lattice *= 3;
  std::vector<char> in(static_cast<std::size_t>(lattice));
  int inside = 0;
  for (long flat = 0; flat < lattice; ++flat) {
    Vector u(n);
    long rest = flat;
    for (Eigen::Index a = 0; a < n; ++a, rest /= 3) u[a] = cell.lo[a] + 0.5 * static_cast<double>(rest % 3) * (cell.hi[a] - cell.lo[a]);
    in[static_cast<std::size_t>(flat)] = (patch.embed(u) - center).norm() <= r;
    inside += in[static_cast<std::size_t>(flat)];
  }
  const bool uniform = inside == 0 || inside == lattice;
  std::vector<Eigen::Index> varying;
  if (!uniform) {
    long stride = 1;
    for (Eigen::Index a = 0; a < n; ++a, stride *= 3) {
      bool changes = false;
      for (long flat = 0; flat < lattice && !changes; ++flat)
        if ((flat / stride) % 3 < 2) changes = in[static_cast<std::size_t>(flat)] != in[static_cast<std::size_t>(flat + stride)];
      if (changes) varying.push_back(a);
    }
    // The sphere may cross between lattice points; split everything then.
    if (varying.empty())
      for (Eigen::Index a = 0; a < n; ++a) varying.push_back(a);
  }
  const bool single = varying.size() == 1;
  if (uniform || fine == 0 || (!single && depth == 0)) {
    double acc = 0.0;
    for_each_tensor_node(cell, 4, 1, [&](const Vector& u, double w) {
      if ((patch.embed(u) - center).norm() <= r) acc += w * area_element(patch, u);
    });
    return acc;
  }
  double acc = 0.0;
  const Vector mid = 0.5 * (cell.lo + cell.hi);
  const auto splits = static_cast<long>(varying.size());
  for (long mask = 0; mask < (1L << splits); ++mask) {
    ParamBox child{cell.lo, cell.hi};
    for (long s = 0; s < splits; ++s) {
      const Eigen::Index a = varying[static_cast<std::size_t>(s)];
      if (mask & (1L << s)) child.lo[a] = mid[a];
      else child.hi[a] = mid[a];
    }
    acc += cell_area_in_ball(patch, child, center, r, single ? depth : depth - 1, fine - 1);
  }
  return acc;
}

inline void check_growth_grid(const std::vector<Vector>& centers, const std::vector<double>& radii) {
  if (centers.empty() || radii.empty()) throw ArgumentError("volume growth needs nonempty center and radius grids");
  for (double r : radii)
    if (!(r > 0.0)) throw ArgumentError("volume growth radii must be positive");
}

}  // namespace detail

/// Unweighted area of the patch inside the ambient ball B_R(center).
inline double area_in_ball(const ImmersedPatch& patch, const Vector& center, double r, int initial_cells = 8, int depth = 8) {
  const Eigen::Index n = patch.param_dim();
  const Vector step = (patch.box().hi - patch.box().lo) / static_cast<double>(initial_cells);
  double acc = 0.0;
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  for (;;) {
    ParamBox cell{Vector(n), Vector(n)};
    for (Eigen::Index a = 0; a < n; ++a) {
      cell.lo[a] = patch.box().lo[a] + idx[a] * step[a];
      cell.hi[a] = cell.lo[a] + step[a];
    }
    acc += detail::cell_area_in_ball(patch, cell, center, r, depth);
    Eigen::Index a = 0;
    while (a < n && ++idx[a] == initial_cells) {
      idx[a] = 0;
      ++a;
    }
    if (a == n) break;
  }
  return acc;
}

inline double area_in_ball(const TriMesh& mesh, const Vector& center, double r, int depth = 6) {
  const Point3 c = center;
  double acc = 0.0;
  for (const Face& t : mesh.faces())
    acc += detail::triangle_area_in_ball(mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]), c, r, depth);
  return acc;
}

/// max over the (center, radius) grid of Area(B_R(x0) cap Sigma) / R^n.
inline double volume_growth_ratio(const ImmersedPatch& patch, const std::vector<Vector>& centers,
                                  const std::vector<double>& radii) {
  detail::check_growth_grid(centers, radii);
  double best = 0.0;
  for (const Vector& c : centers)
    for (double r : radii) best = std::max(best, area_in_ball(patch, c, r) / std::pow(r, patch.param_dim()));
  return best;
}

inline double volume_growth_ratio(const TriMesh& mesh, const std::vector<Vector>& centers, const std::vector<double>& radii) {
  detail::check_growth_grid(centers, radii);
  double best = 0.0;
  for (const Vector& c : centers)
    for (double r : radii) best = std::max(best, area_in_ball(mesh, c, r) / (r * r));
  return best;
}

// ---------------------------------------------------------------------------
// Potential of the surface Schrodinger operator

/// V = (1/3)(R_f^P / 2 + |A|^2 / 2 + |grad_S f|^2 / 8) from point geometry.
inline double espinar_V(const PointGeometry& pg, const WeightedAmbient& space) {
  if (pg.n() != 2) throw UnsupportedError("V is defined for surfaces in three-dimensional spaces");
  return (0.5 * perelman_scalar(space, pg.position) + 0.5 * pg.shape_sq + 0.125 * pg.tangential_f_grad_sq) / 3.0;
}

inline double espinar_V(const ImmersedPatch& patch, const Vector& u, const WeightedAmbient& space) {
  if (patch.param_dim() != 2) throw UnsupportedError("V is defined for surfaces in three-dimensional spaces");
  return espinar_V(point_geometry(patch, u, space), space);
}

inline double espinar_V(const TriMesh& mesh, int v, const WeightedAmbient& space) {
  return espinar_V(point_geometry(mesh, v, space), space);
}

}  // namespace fminimal
