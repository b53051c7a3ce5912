#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "fminimal/ambient.hpp"
#include "fminimal/errors.hpp"
#include "fminimal/mesh.hpp"
#include "fminimal/parallel.hpp"
#include "fminimal/patch.hpp"

namespace fminimal {

/// Extrinsic and weighted geometry of a hypersurface at one point.
///
/// Sign conventions: A(e_i, e_j) = -<D_{e_i} e_j, nu> and H = tr(g^{-1} A),
/// so the round sphere with outward normal has H > 0 and self-shrinkers
/// satisfy H = <x, nu> / 2.
struct PointGeometry {
  Vector position;
  Vector normal;
  /// Columns are the coordinate tangent vectors the forms are expressed in.
  Matrix tangent;
  Matrix first_form;
  Matrix second_form;
  double mean_curv = 0.0;
  double shape_sq = 0.0;
  double f_mean_curv = 0.0;
  /// Gauss curvature det(g^{-1} A); NaN unless n = 2.
  double gauss_curv = std::numeric_limits<double>::quiet_NaN();
  /// |grad f|^2 of the tangential projection of the ambient gradient.
  double tangential_f_grad_sq = 0.0;
  double weight = 0.0;
  /// <grad f, nu>.
  double normal_f_grad = 0.0;
  /// Ric_f(nu, nu).
  double ricci_f_nn = 0.0;

  int n() const { return static_cast<int>(first_form.rows()); }
  /// |A|^2 + Ric_f(nu, nu), the potential of the stability operator.
  double stability_potential() const { return shape_sq + ricci_f_nn; }
};

namespace detail {

inline PointGeometry finish_geometry(const Vector& x, const Matrix& tangent, const Vector& normal, const Matrix& second,
                                     const WeightedAmbient& space) {
  PointGeometry pg;
  pg.position = x;
  pg.normal = normal;
  pg.tangent = tangent;
  pg.first_form = tangent.transpose() * tangent;
  pg.second_form = 0.5 * (second + second.transpose());
  const Eigen::LDLT<Matrix> gfac(pg.first_form);
  const Matrix shape = gfac.solve(pg.second_form);  // g^{-1} A
  pg.mean_curv = shape.trace();
  pg.shape_sq = (shape * shape).trace();
  if (pg.n() == 2) pg.gauss_curv = shape.determinant();
  pg.weight = space.weight(x);
  const Vector grad = space.weight_grad(x);
  pg.normal_f_grad = grad.dot(normal);
  pg.f_mean_curv = pg.mean_curv - pg.normal_f_grad;
  pg.tangential_f_grad_sq = (grad - pg.normal_f_grad * normal).squaredNorm();
  pg.ricci_f_nn = normal.dot(space.weight_hess(x) * normal);
  return pg;
}

inline void require_full_rank(const Matrix& jacobian) {
  const Eigen::JacobiSVD<Matrix> svd(jacobian);
  if (svd.singularValues().minCoeff() <= 1e-10) throw DegenerateGeometry("tangent space is rank deficient");
}

// Unit normal completing the columns of J to a positively oriented basis.
inline Vector oriented_normal(const Matrix& jacobian, int orientation) {
  const Eigen::Index d = jacobian.rows();
  const Eigen::HouseholderQR<Matrix> qr(jacobian);
  const Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  Vector nu = q.col(d - 1);
  Matrix frame(d, d);
  frame << jacobian, nu;
  if (frame.determinant() < 0.0) nu = -nu;
  return orientation >= 0 ? nu : Vector(-nu);
}

}  // namespace detail

/// Geometry of a parametric patch at parameter point u.
inline PointGeometry point_geometry(const ImmersedPatch& patch, const Vector& u, const WeightedAmbient& space) {
  if (u.size() != patch.param_dim()) throw ContractViolation("parameter point has the wrong dimension");
  if (patch.ambient_dim() != space.dim()) throw ContractViolation("patch and ambient dimensions differ");
  const PatchSample s = patch.sample(u);
  detail::require_full_rank(s.jacobian);
  const Vector nu = detail::oriented_normal(s.jacobian, patch.orientation());
  const int n = patch.param_dim();
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = 0.0;
      for (Eigen::Index c = 0; c < nu.size(); ++c) v += s.second[c](i, j) * nu[c];
      a(i, j) = -v;
    }
  return detail::finish_geometry(s.point, s.jacobian, nu, a, space);
}

/// Area-weighted vertex normal from the incident faces' winding.
inline Point3 vertex_normal(const TriMesh& mesh, int v) {
  Point3 acc = Point3::Zero();
  for (int f : mesh.vertex_faces(v)) acc += mesh.face_cross(f);
  if (acc.norm() <= 1e-300) throw DegenerateGeometry("vertex normal is undefined");
  return acc.normalized();
}

/// Local height-function fit used for mesh curvature.
struct CurvatureFit {
  /// Polynomial degree of the height function: 2 (quadratic) or 4. Only the
  /// quadratic part enters the curvature; the quartic terms absorb the bias
  /// a pure quadratic picks up from curved neighbourhoods.
  int degree = 4;
  /// Neighbourhood size in edge rings; widened automatically when too few
  /// points are available.
  int rings = 2;
};

/// Geometry at a mesh vertex by local polynomial fitting: a height function
/// h(u, w) over the tangent plane of the area-weighted normal is fitted to
/// the ring neighbourhood by least squares, and the fitted graph is then
/// treated as a parametric chart at the vertex. The low-order part is
/// a u^2 + b u w + c w^2 + d u + e w; curvatures come from it alone.
inline PointGeometry point_geometry(const TriMesh& mesh, int v, const WeightedAmbient& space, const CurvatureFit& fit = {}) {
  if (v < 0 || static_cast<std::size_t>(v) >= mesh.num_vertices()) throw ContractViolation("vertex id out of range");
  if (space.dim() != 3) throw UnsupportedDimension("meshes live in R^3");
  if (fit.degree != 2 && fit.degree != 4) throw ArgumentError("curvature fit degree must be 2 or 4");
  const Point3 p0 = mesh.vertex(v);
  const Point3 n0 = vertex_normal(mesh, v);
  Point3 t1 = (std::abs(n0.x()) < 0.9 ? Point3::UnitX() : Point3::UnitY()).cross(n0).normalized();
  Point3 t2 = n0.cross(t1);
  // Monomials u^i w^j with 1 <= i + j <= degree; the first five are
  // u^2, u w, w^2, u, w.
  std::vector<std::pair<int, int>> powers{{2, 0}, {1, 1}, {0, 2}, {1, 0}, {0, 1}};
  for (int d = 3; d <= fit.degree; ++d)
    for (int j = 0; j <= d; ++j) powers.emplace_back(d - j, j);
  const std::size_t needed = powers.size() + 3;
  std::vector<int> nb = mesh.ring(v, fit.rings);
  for (int r = fit.rings + 1; nb.size() < needed && r <= fit.rings + 2; ++r) nb = mesh.ring(v, r);
  if (nb.size() < needed) throw DegenerateGeometry("too few neighbours for the curvature fit");

  double scale = 0.0;
  for (int w : nb) scale = std::max(scale, (mesh.vertex(w) - p0).norm());
  const auto cols = static_cast<Eigen::Index>(powers.size());
  Matrix design(static_cast<Eigen::Index>(nb.size()), cols);
  Vector rhs(static_cast<Eigen::Index>(nb.size()));
  for (std::size_t k = 0; k < nb.size(); ++k) {
    const Point3 d = (mesh.vertex(nb[k]) - p0) / scale;
    const double x = d.dot(t1), y = d.dot(t2);
    for (Eigen::Index c = 0; c < cols; ++c)
      design(static_cast<Eigen::Index>(k), c) = std::pow(x, powers[c].first) * std::pow(y, powers[c].second);
    rhs[static_cast<Eigen::Index>(k)] = d.dot(n0);
  }
  const Eigen::ColPivHouseholderQR<Matrix> qr(design);
  if (qr.rank() < cols) throw DegenerateGeometry("curvature fit is rank deficient");
  const Vector c = qr.solve(rhs);
  // Undo the length scaling: h(s x) = s h~(x).
  const double ha = c[0] / scale, hb = c[1] / scale, hc = c[2] / scale, hd = c[3], he = c[4];

  Matrix tangent(3, 2);
  tangent.col(0) = t1 + hd * n0;
  tangent.col(1) = t2 + he * n0;
  const Vector nu = (n0 - hd * t1 - he * t2).normalized();
  Matrix hess(2, 2);
  hess << 2.0 * ha, hb, hb, 2.0 * hc;
  // X_ij = hess_ij * n0, so A_ij = -hess_ij <n0, nu>.
  const Matrix a = -hess * n0.dot(nu);
  return detail::finish_geometry(p0, tangent, nu, a, space);
}

/// point_geometry at every vertex.
inline std::vector<PointGeometry> vertex_geometry(const TriMesh& mesh, const WeightedAmbient& space,
                                                  const CurvatureFit& fit = {}) {
  std::vector<PointGeometry> out(mesh.num_vertices());
  parallel_for(mesh.num_vertices(), [&](std::size_t v) { out[v] = point_geometry(mesh, static_cast<int>(v), space, fit); });
  return out;
}

/// Intrinsic Laplacian of f restricted to a patch, via the Laplace-Beltrami
/// formula g^{ij}(d_i d_j u - Gamma^k_ij d_k u) with u = f o X.
inline double surface_laplacian_of_weight(const ImmersedPatch& patch, const Vector& u, const WeightedAmbient& space) {
  const PatchSample s = patch.sample(u);
  const int n = patch.param_dim();
  const Vector grad = space.weight_grad(s.point);
  const Matrix hess = space.weight_hess(s.point);
  const Matrix& jac = s.jacobian;
  const Matrix g = jac.transpose() * jac;
  const Matrix ginv = g.inverse();
  const Vector du = jac.transpose() * grad;
  double lap = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Vector xij(s.point.size());
      for (Eigen::Index c = 0; c < xij.size(); ++c) xij[c] = s.second[c](i, j);
      const double uij = jac.col(i).dot(hess * jac.col(j)) + grad.dot(xij);
      // Gamma^k_ij = g^{kl} <X_ij, X_l>
      const Vector christoffel = ginv * (jac.transpose() * xij);
      lap += ginv(i, j) * (uij - christoffel.dot(du));
    }
  }
  return lap;
}

/// Mixed-Voronoi vertex areas: Voronoi cells inside
/// non-obtuse triangles, area/2 or area/4 splits in obtuse ones.
inline std::vector<double> mixed_vertex_areas(const TriMesh& mesh) {
  std::vector<double> area(mesh.num_vertices(), 0.0);
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Face& t = mesh.faces()[f];
    const double fa = mesh.face_area(static_cast<int>(f));
    for (int k = 0; k < 3; ++k) {
      const Point3& p = mesh.vertex(t[k]);
      const Point3& q = mesh.vertex(t[(k + 1) % 3]);
      const Point3& r = mesh.vertex(t[(k + 2) % 3]);
      const double cos_p = (q - p).normalized().dot((r - p).normalized());
      const double cos_q = (p - q).normalized().dot((r - q).normalized());
      const double cos_r = (p - r).normalized().dot((q - r).normalized());
      if (cos_p < 0.0) {
        area[t[k]] += fa / 2.0;
      } else if (cos_q < 0.0 || cos_r < 0.0) {
        area[t[k]] += fa / 4.0;
      } else {
        const double cot_q = cos_q / std::sqrt(1.0 - cos_q * cos_q);
        const double cot_r = cos_r / std::sqrt(1.0 - cos_r * cos_r);
        area[t[k]] += ((r - p).squaredNorm() * cot_q + (q - p).squaredNorm() * cot_r) / 8.0;
      }
    }
  }
  return area;
}

/// Cotangent Laplacian at a single vertex, using only its incident faces.
template <class Values>
double cotangent_laplacian_at(const TriMesh& mesh, int v, Values&& value_of) {
  double acc = 0.0;
  double area = 0.0;
  const double fv = value_of(v);
  for (int f : mesh.vertex_faces(v)) {
    const Face& t = mesh.faces()[static_cast<std::size_t>(f)];
    int k = 0;
    while (t[k] != v) ++k;
    const int i = t[(k + 1) % 3], j = t[(k + 2) % 3];
    const Point3& p = mesh.vertex(v);
    const Point3& q = mesh.vertex(i);
    const Point3& r = mesh.vertex(j);
    auto cot = [](const Point3& a, const Point3& b) { return a.dot(b) / a.cross(b).norm(); };
    const double cot_q = cot(p - q, r - q);  // angle at q faces edge (v, j)
    const double cot_r = cot(p - r, q - r);  // angle at r faces edge (v, i)
    acc += 0.5 * cot_r * (value_of(i) - fv) + 0.5 * cot_q * (value_of(j) - fv);
    const double fa = mesh.face_area(f);
    if ((q - p).dot(r - p) < 0.0) area += fa / 2.0;
    else if (cot_q < 0.0 || cot_r < 0.0) area += fa / 4.0;
    else area += ((r - p).squaredNorm() * cot_q + (q - p).squaredNorm() * cot_r) / 8.0;
  }
  return acc / area;
}

/// Cotangent discretization of the Laplace-Beltrami operator applied to
/// per-vertex values.
inline std::vector<double> cotangent_laplacian(const TriMesh& mesh, const std::vector<double>& values) {
  if (values.size() != mesh.num_vertices()) throw ArgumentError("one value per vertex expected");
  std::vector<double> acc(mesh.num_vertices(), 0.0);
  for (const Face& t : mesh.faces()) {
    for (int k = 0; k < 3; ++k) {
      const int i = t[(k + 1) % 3], j = t[(k + 2) % 3];
      const Point3& o = mesh.vertex(t[k]);
      const Point3 a = mesh.vertex(i) - o, b = mesh.vertex(j) - o;
      const double cot = a.dot(b) / a.cross(b).norm();
      acc[i] += 0.5 * cot * (values[j] - values[i]);
      acc[j] += 0.5 * cot * (values[i] - values[j]);
    }
  }
  const std::vector<double> area = mixed_vertex_areas(mesh);
  for (std::size_t v = 0; v < acc.size(); ++v) acc[v] /= area[v];
  return acc;
}

}  // namespace fminimal
