#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fminimal/ambient.hpp"
#include "fminimal/errors.hpp"
#include "fminimal/geometry.hpp"
#include "fminimal/mesh.hpp"
#include "fminimal/parallel.hpp"
#include "fminimal/patch.hpp"

namespace fminimal {

// ---------------------------------------------------------------------------
// Closed forms for the conformal metric g~ = e^{-2f/n} g on flat R^{n+1}.

/// Ricci tensor of g~ in the coordinate (g-orthonormal) frame:
/// (n-1)(Hess f / n + df (x) df / n^2 - |df|^2 g / n^2) + (Lap f / n) g.
inline Matrix conformal_ricci_tensor(const WeightedAmbient& space, const Vector& x) {
  const double n = space.n();
  const Vector grad = space.weight_grad(x);
  const Matrix hess = space.weight_hess(x);
  const Matrix id = Matrix::Identity(space.dim(), space.dim());
  return (n - 1.0) * (hess / n + grad * grad.transpose() / (n * n) - grad.squaredNorm() * id / (n * n)) +
         (hess.trace() / n) * id;
}

/// Ric~(v, v) for a g-unit vector v.
inline double conformal_ricci(const WeightedAmbient& space, const Vector& x, const Vector& v) {
  if (v.size() != space.dim()) throw ContractViolation("direction has the wrong dimension");
  if (std::abs(v.norm() - 1.0) > 1e-12) throw ContractViolation("direction must be a unit vector");
  return v.dot(conformal_ricci_tensor(space, x) * v);
}

/// Weighted scalar curvature R + 2 Lap f - |grad f|^2 (R = 0 here).
inline double perelman_scalar(const WeightedAmbient& space, const Vector& x) {
  return 2.0 * space.weight_laplacian(x) - space.weight_grad(x).squaredNorm();
}

/// Scalar curvature of g~: e^{2f/n}(R + 2 Lap f - (n-1)|grad f|^2 / n).
inline double conformal_scalar(const WeightedAmbient& space, const Vector& x) {
  const double n = space.n();
  const double f = space.weight(x);
  return std::exp(2.0 * f / n) * (2.0 * space.weight_laplacian(x) - (n - 1.0) * space.weight_grad(x).squaredNorm() / n);
}

/// The same scalar curvature written through the weighted scalar curvature: e^{2f/n}(R_f^P + |grad f|^2 / n).
inline double conformal_scalar_via_perelman(const WeightedAmbient& space, const Vector& x) {
  const double n = space.n();
  return std::exp(2.0 * space.weight(x) / n) * (perelman_scalar(space, x) + space.weight_grad(x).squaredNorm() / n);
}

/// Gaussian-soliton specialization e^{|x|^2/(2n)}(n + 1 - (n-1)|x|^2/(4n)),
/// for x in R^{n+1}.
inline double gaussian_conformal_scalar(int n, const Vector& x) {
  if (x.size() != n + 1) throw ContractViolation("point must lie in R^{n+1}");
  const double r2 = x.squaredNorm();
  return std::exp(r2 / (2.0 * n)) * (n + 1.0 - (n - 1.0) * r2 / (4.0 * n));
}

// ---------------------------------------------------------------------------
// Finite-difference curvature oracle.

struct CurvatureOracleResult {
  /// Ricci tensor of g~ in coordinates.
  Matrix ricci_matrix;
  double scalar = 0.0;
  /// The metric g~ at the point.
  Matrix metric;
  /// Richardson error estimates (max-abs over Ricci entries, and scalar).
  double ricci_error = 0.0;
  double scalar_error = 0.0;
  double step = 0.0;
  bool accuracy_warning = false;
};

namespace detail {

using MetricFn = std::function<Matrix(const Vector&)>;

// d/dy_c of a matrix-valued map by fourth-order central differences.
template <class Fn>
auto central4(const Fn& fn, const Vector& y, Eigen::Index c, double h) {
  Vector p = y;
  p[c] = y[c] + 2 * h;
  auto f2 = fn(p);
  p[c] = y[c] + h;
  auto f1 = fn(p);
  p[c] = y[c] - h;
  auto m1 = fn(p);
  p[c] = y[c] - 2 * h;
  auto m2 = fn(p);
  for (std::size_t k = 0; k < f1.size(); ++k) f1[k] = (-f2[k] + 8.0 * f1[k] - 8.0 * m1[k] + m2[k]) / (12.0 * h);
  return f1;
}

// Gamma[a](b, c) = Gamma^a_{bc}.
inline std::vector<Matrix> christoffel(const MetricFn& metric, const Vector& y, double h) {
  const Eigen::Index d = y.size();
  auto wrap = [&](const Vector& p) { return std::vector<Matrix>{metric(p)}; };
  std::vector<Matrix> dg(static_cast<std::size_t>(d));  // dg[c] = d_c g
  for (Eigen::Index c = 0; c < d; ++c) dg[c] = central4(wrap, y, c, h)[0];
  const Matrix ginv = metric(y).inverse();
  std::vector<Matrix> gamma(static_cast<std::size_t>(d), Matrix::Zero(d, d));
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b)
      for (Eigen::Index c = 0; c < d; ++c) {
        double s = 0.0;
        for (Eigen::Index e = 0; e < d; ++e) s += ginv(a, e) * (dg[b](e, c) + dg[c](e, b) - dg[e](b, c));
        gamma[a](b, c) = 0.5 * s;
      }
  return gamma;
}

inline std::pair<Matrix, double> ricci_at(const MetricFn& metric, const Vector& x, double h) {
  const Eigen::Index d = x.size();
  auto gamma_at = [&](const Vector& p) { return christoffel(metric, p, h); };
  const std::vector<Matrix> gamma = gamma_at(x);
  // dgamma[e][a](b, c) = d_e Gamma^a_{bc}
  std::vector<std::vector<Matrix>> dgamma;
  for (Eigen::Index e = 0; e < d; ++e) dgamma.push_back(central4(gamma_at, x, e, h));
  // Riemann R^a_{bcd} = d_c G^a_{db} - d_d G^a_{cb} + G^a_{ce} G^e_{db} - G^a_{de} G^e_{cb},
  // contracted to Ricci R_{bd} = R^a_{bad}.
  Matrix ric = Matrix::Zero(d, d);
  for (Eigen::Index b = 0; b < d; ++b)
    for (Eigen::Index dd = 0; dd < d; ++dd) {
      double r = 0.0;
      for (Eigen::Index a = 0; a < d; ++a) {
        r += dgamma[a][a](dd, b) - dgamma[dd][a](a, b);
        for (Eigen::Index e = 0; e < d; ++e) r += gamma[a](a, e) * gamma[e](dd, b) - gamma[a](dd, e) * gamma[e](a, b);
      }
      ric(b, dd) = r;
    }
  ric = 0.5 * (ric + ric.transpose());
  const double scalar = (metric(x).inverse() * ric).trace();
  return {ric, scalar};
}

}  // namespace detail

/// Curvature of g~ = e^{-2f/n} delta computed from the metric alone:
/// Christoffel symbols, Riemann and Ricci tensors, and scalar curvature by
/// nested fourth-order central differences, improved by Richardson
/// extrapolation over `halvings` step halvings. Independent of every
/// closed-form curvature expression in this header.
inline CurvatureOracleResult fd_curvature_oracle(const WeightedAmbient& space, const Vector& x, double step = 1e-3,
                                                int halvings = 1, double tolerance = 1e-6) {
  if (step <= 0.0 || halvings < 0) throw ArgumentError("invalid oracle step settings");
  const double n = space.n();
  const int d = space.dim();
  detail::MetricFn metric = [&space, n, d](const Vector& y) -> Matrix {
    return std::exp(-2.0 * space.weight(y) / n) * Matrix::Identity(d, d);
  };
  // Richardson tableau; nested fourth-order differences leave an error
  // series in h^4, h^6, ...
  std::vector<std::vector<std::pair<Matrix, double>>> table;
  double h = step;
  for (int k = 0; k <= halvings; ++k, h *= 0.5) {
    table.push_back({detail::ricci_at(metric, x, h)});
    double factor = 16.0;
    for (int j = 1; j <= k; ++j, factor *= 4.0) {
      const auto& fine = table[k][j - 1];
      const auto& coarse = table[k - 1][j - 1];
      table[k].push_back({fine.first + (fine.first - coarse.first) / (factor - 1.0),
                          fine.second + (fine.second - coarse.second) / (factor - 1.0)});
    }
  }
  CurvatureOracleResult out;
  out.step = step;
  out.metric = metric(x);
  const auto& best = table.back().back();
  if (halvings > 0) {
    const auto& prev = table.back()[table.back().size() - 2];
    out.ricci_error = (best.first - prev.first).cwiseAbs().maxCoeff();
    out.scalar_error = std::abs(best.second - prev.second);
  }
  out.ricci_matrix = best.first;
  out.scalar = best.second;
  const double scale = std::max({1.0, out.ricci_matrix.cwiseAbs().maxCoeff(), std::abs(out.scalar)});
  out.accuracy_warning = halvings > 0 && std::max(out.ricci_error, out.scalar_error) > tolerance * scale;
  return out;
}

// ---------------------------------------------------------------------------
// Conformal frame on a hypersurface.

/// Hypersurface quantities measured in (M, g~). A_tilde is expressed in the
/// g~-orthonormal frame e~_i = e^{f/n} e_i.
struct ConformalFrame {
  int n = 0;
  Vector point;
  Vector nu_tilde;
  Matrix A_tilde;
  double H_tilde = 0.0;
  double A_tilde_sq = 0.0;
  double ric_tilde_nn = 0.0;
  double potential_tilde = 0.0;
  double scalar_tilde = 0.0;
  /// Intrinsic Laplacian of f restricted to the surface.
  double surface_laplacian_f = 0.0;
  bool f_minimal = false;
  /// e^{2f/n}(|A|^2 + Ric_f(nu,nu) + Lap_S f / n - (n-1)|grad_S f|^2 / n^2),
  /// which equals potential_tilde on f-minimal points.
  double potential_closed_form = 0.0;
};

/// Tolerance on |H_f| below which a point is treated as f-minimal.
inline constexpr double kFMinimalTolerance = 1e-8;

inline ConformalFrame conformal_frame(const PointGeometry& pg, double surface_laplacian_f, const WeightedAmbient& space) {
  ConformalFrame cf;
  cf.n = pg.n();
  const double n = cf.n;
  const double f = pg.weight;
  const double up = std::exp(f / n);
  cf.point = pg.position;
  cf.nu_tilde = up * pg.normal;
  cf.surface_laplacian_f = surface_laplacian_f;
  cf.f_minimal = std::abs(pg.f_mean_curv) <= kFMinimalTolerance;

  const Eigen::LLT<Matrix> chol(pg.first_form);
  const Matrix linv = chol.matrixL().solve(Matrix::Identity(cf.n, cf.n));
  const Matrix a_on = linv * pg.second_form * linv.transpose();
  cf.A_tilde = up * (a_on - (pg.normal_f_grad / n) * Matrix::Identity(cf.n, cf.n));
  cf.H_tilde = up * pg.f_mean_curv;
  cf.A_tilde_sq = cf.f_minimal ? std::exp(2.0 * f / n) * (pg.shape_sq - pg.mean_curv * pg.mean_curv / n)
                               : cf.A_tilde.squaredNorm();
  cf.ric_tilde_nn = std::exp(2.0 * f / n) * pg.normal.dot(conformal_ricci_tensor(space, pg.position) * pg.normal);
  cf.potential_tilde = cf.A_tilde_sq + cf.ric_tilde_nn;
  cf.scalar_tilde = conformal_scalar(space, pg.position);
  cf.potential_closed_form = std::exp(2.0 * f / n) * (pg.shape_sq + pg.ricci_f_nn + surface_laplacian_f / n -
                                                      (n - 1.0) * pg.tangential_f_grad_sq / (n * n));
  return cf;
}

inline ConformalFrame conformal_frame(const ImmersedPatch& patch, const Vector& u, const WeightedAmbient& space) {
  return conformal_frame(point_geometry(patch, u, space), surface_laplacian_of_weight(patch, u, space), space);
}

inline ConformalFrame conformal_frame(const TriMesh& mesh, int v, const WeightedAmbient& space) {
  const double lap = cotangent_laplacian_at(mesh, v, [&](int w) { return space.weight(mesh.vertex(w)); });
  return conformal_frame(point_geometry(mesh, v, space), lap, space);
}

// ---------------------------------------------------------------------------
// Identity audit.

struct ConformalSample {
  Vector point;
  double closed_form = 0.0;
  double oracle = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;
};

struct ConformalReport {
  std::string identity_name;
  std::vector<ConformalSample> samples;
  double max_rel_err = 0.0;
  bool accuracy_warning = false;
};

struct AuditOptions {
  int samples = 50;
  double radius = 3.0;
  std::uint64_t seed = 20170101;
  double step = 1e-3;
  int halvings = 1;
};

inline ConformalSample make_sample(Vector x, double closed, double oracle) {
  ConformalSample s;
  s.point = std::move(x);
  s.closed_form = closed;
  s.oracle = oracle;
  s.abs_err = std::abs(closed - oracle);
  s.rel_err = s.abs_err / std::max(1.0, std::abs(closed));
  return s;
}

/// Compares every closed-form curvature identity with fd_curvature_oracle at
/// points drawn uniformly from the ball |x| <= radius. Ricci values are
/// reported for g~-unit directions. The Gaussian specialization is audited
/// only when the space is the Gaussian soliton.
inline std::vector<ConformalReport> audit_identities(const WeightedAmbient& space, const AuditOptions& opt = {}) {
  if (opt.samples < 1) throw ArgumentError("at least one audit sample is required");
  const int d = space.dim();
  const double n = space.n();
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vector> points, dirs;
  for (int s = 0; s < opt.samples; ++s) {
    Vector g(d), v(d);
    for (int k = 0; k < d; ++k) g[k] = normal(rng);
    for (int k = 0; k < d; ++k) v[k] = normal(rng);
    const double r = opt.radius * std::pow(unit(rng), 1.0 / d);
    points.push_back(r * g.normalized());
    dirs.push_back(v.normalized());
  }
  std::vector<CurvatureOracleResult> oracle(points.size());
  parallel_for(points.size(), [&](std::size_t i) { oracle[i] = fd_curvature_oracle(space, points[i], opt.step, opt.halvings); });

  std::vector<ConformalReport> reports;
  auto finish = [&reports](ConformalReport r) {
    for (const auto& s : r.samples) r.max_rel_err = std::max(r.max_rel_err, s.rel_err);
    reports.push_back(std::move(r));
  };
  bool warn = false;
  for (const auto& o : oracle) warn = warn || o.accuracy_warning;

  ConformalReport ricci{"ricci_conformal_change", {}, 0.0, warn};
  ConformalReport scalar{"scalar_conformal_change", {}, 0.0, warn};
  ConformalReport weighted{"scalar_via_weighted_scalar", {}, 0.0, warn};
  ConformalReport gaussian{"scalar_gaussian_specialization", {}, 0.0, warn};
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vector& x = points[i];
    const Vector& v = dirs[i];
    const double scale = std::exp(2.0 * space.weight(x) / n);
    const double gtvv = v.dot(oracle[i].metric * v);
    ricci.samples.push_back(make_sample(x, scale * conformal_ricci(space, x, v), v.dot(oracle[i].ricci_matrix * v) / gtvv));
    scalar.samples.push_back(make_sample(x, conformal_scalar(space, x), oracle[i].scalar));
    weighted.samples.push_back(make_sample(x, conformal_scalar_via_perelman(space, x), oracle[i].scalar));
    if (space.is_gaussian()) gaussian.samples.push_back(make_sample(x, gaussian_conformal_scalar(space.n(), x), oracle[i].scalar));
  }
  finish(std::move(ricci));
  finish(std::move(scalar));
  finish(std::move(weighted));
  if (space.is_gaussian()) finish(std::move(gaussian));
  return reports;
}

}  // namespace fminimal
