#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "fminimal/ambient.hpp"
#include "fminimal/diagnostics.hpp"
#include "fminimal/errors.hpp"
#include "fminimal/geometry.hpp"
#include "fminimal/mesh.hpp"

namespace fminimal {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Discretized second-variation form over the free (non-Dirichlet) degrees of
/// freedom of a piecewise-linear space. The stability operator's weak form is
/// the pencil (stiffness - potential, mass).
struct QuadraticFormSystem {
  SparseMatrix stiffness;
  SparseMatrix potential;
  SparseMatrix mass;
  /// Vertex id of each free degree of freedom, in matrix order.
  std::vector<int> free_dofs;
  /// Vertices constrained to zero.
  std::vector<int> dirichlet_dofs;
  /// Upper bound of the potential field over the free region (used for
  /// choosing a safe spectral shift).
  double potential_sup = 0.0;

  Eigen::Index size() const { return stiffness.rows(); }
  SparseMatrix form() const { return stiffness - potential; }
};

struct SpectrumResult {
  /// Lowest eigenvalues of -L_f, ascending.
  std::vector<double> eigenvalues;
  /// Number of eigenvalues below -tol_zero.
  int f_index = 0;
  double tol_zero = 0.0;
  /// Relative backward error of each eigenpair.
  std::vector<double> residuals;
  /// Mass-orthonormal eigenvectors over the free dofs (empty for separable solves).
  Matrix eigenvectors;
  std::string method;
  /// Every computed eigenvalue is negative, so the index may be larger.
  bool index_saturated = false;
  /// The separable mode cut may have excluded an eigenvalue below the last one reported.
  bool truncated = false;
};

struct SolverOptions {
  /// Free-dof count at and above which the shift-invert iteration replaces the dense solver.
  Eigen::Index dense_threshold = 3000;
  /// Overrides the default zero tolerance max(1e-6, 1e-3 |lambda_min|) when positive.
  double tol_zero = 0.0;
  double residual_target = 1e-10;
  int max_iterations = 2000;
  std::uint64_t seed = 7;
};

inline double default_tol_zero(double lambda_min) { return std::max(1e-6, 1e-3 * std::abs(lambda_min)); }

inline int count_negative(const std::vector<double>& eig, double tol_zero) {
  return static_cast<int>(std::count_if(eig.begin(), eig.end(), [&](double l) { return l < -tol_zero; }));
}

// ---------------------------------------------------------------------------
// Assembly

/// Per-point weight used inside integrals (e^{-f} or 1).
using DensityFn = std::function<double(const Vector&)>;

/// Assembles piecewise-linear stiffness, potential and mass matrices with
/// density `density` and per-vertex potential values, eliminating the
/// vertices flagged in `dirichlet` and all mesh boundary vertices. The
/// potential is interpolated linearly and integrated, together with the
/// density, by the interior 3-point triangle rule.
inline QuadraticFormSystem assemble_form(const TriMesh& mesh, const DensityFn& density,
                                         const std::vector<double>& vertex_potential, const std::vector<bool>& dirichlet) {
  const std::size_t nv = mesh.num_vertices();
  if (vertex_potential.size() != nv) throw ArgumentError("one potential value per vertex expected");
  if (!dirichlet.empty() && dirichlet.size() != nv) throw ArgumentError("Dirichlet mask must have one flag per vertex");
  QuadraticFormSystem sys;
  std::vector<int> dof(nv, -1);
  for (std::size_t v = 0; v < nv; ++v) {
    const bool fixed = mesh.boundary_flags()[v] || (!dirichlet.empty() && dirichlet[v]);
    if (fixed) {
      sys.dirichlet_dofs.push_back(static_cast<int>(v));
    } else {
      dof[v] = static_cast<int>(sys.free_dofs.size());
      sys.free_dofs.push_back(static_cast<int>(v));
    }
  }
  const auto nf = static_cast<Eigen::Index>(sys.free_dofs.size());
  std::vector<Eigen::Triplet<double>> ks, ps, ms;
  double sup = -std::numeric_limits<double>::infinity();
  for (int v : sys.free_dofs) sup = std::max(sup, vertex_potential[static_cast<std::size_t>(v)]);
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Face& t = mesh.faces()[f];
    if (dof[t[0]] < 0 && dof[t[1]] < 0 && dof[t[2]] < 0) continue;
    const double area = mesh.face_area(static_cast<int>(f));
    std::array<Point3, 3> p{mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2])};
    double wq[3], potq[3];
    double wmean = 0.0;
    for (int q = 0; q < 3; ++q) {
      const auto& b = kTriangleRule[q];
      const Vector x = b[0] * p[0] + b[1] * p[1] + b[2] * p[2];
      wq[q] = density(x);
      potq[q] = b[0] * vertex_potential[t[0]] + b[1] * vertex_potential[t[1]] + b[2] * vertex_potential[t[2]];
      wmean += wq[q] / 3.0;
    }
    // Cotangent element stiffness: K_ij = -cot(angle opposite edge ij) / 2.
    double kl[3][3] = {};
    for (int k = 0; k < 3; ++k) {
      const int i = (k + 1) % 3, j = (k + 2) % 3;
      const Point3 a = p[i] - p[k], b = p[j] - p[k];
      const double cot = a.dot(b) / a.cross(b).norm();
      kl[i][j] -= 0.5 * cot;
      kl[j][i] -= 0.5 * cot;
      kl[i][i] += 0.5 * cot;
      kl[j][j] += 0.5 * cot;
    }
    for (int i = 0; i < 3; ++i) {
      const int gi = dof[t[i]];
      if (gi < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int gj = dof[t[j]];
        if (gj < 0) continue;
        double m = 0.0, pot = 0.0;
        for (int q = 0; q < 3; ++q) {
          const double phi = kTriangleRule[q][i] * kTriangleRule[q][j] * wq[q] * area / 3.0;
          m += phi;
          pot += phi * potq[q];
        }
        ks.emplace_back(gi, gj, kl[i][j] * wmean);
        ms.emplace_back(gi, gj, m);
        ps.emplace_back(gi, gj, pot);
      }
    }
  }
  sys.stiffness.resize(nf, nf);
  sys.potential.resize(nf, nf);
  sys.mass.resize(nf, nf);
  sys.stiffness.setFromTriplets(ks.begin(), ks.end());
  sys.potential.setFromTriplets(ps.begin(), ps.end());
  sys.mass.setFromTriplets(ms.begin(), ms.end());
  sys.potential_sup = nf > 0 ? sup : 0.0;
  if (nf > 0) {
    Eigen::SimplicialLLT<SparseMatrix> llt(sys.mass);
    if (llt.info() != Eigen::Success) throw AssemblyError("mass matrix is not positive definite (degenerate mesh?)");
  }
  return sys;
}

/// |A|^2 + Ric_f(nu, nu) at every vertex.
inline std::vector<double> stability_potential(const std::vector<PointGeometry>& geo) {
  std::vector<double> out;
  out.reserve(geo.size());
  for (const auto& g : geo) out.push_back(g.stability_potential());
  return out;
}

inline DensityFn weighted_density(const WeightedAmbient& space) {
  return [&space](const Vector& x) { return std::exp(-space.weight(x)); };
}

/// Q_f(phi, phi) = int (|grad phi|^2 - (|A|^2 + Ric_f(nu,nu)) phi^2) e^{-f} dv
/// on piecewise-linear functions vanishing on the Dirichlet set.
inline QuadraticFormSystem assemble(const TriMesh& mesh, const WeightedAmbient& space, const std::vector<bool>& dirichlet = {}) {
  return assemble_form(mesh, weighted_density(space), stability_potential(vertex_geometry(mesh, space)), dirichlet);
}

/// Unweighted form int (|grad phi|^2 + (K/3 - V) phi^2) dv of the operator
/// Lap - K/3 + V.
inline QuadraticFormSystem assemble_espinar_operator(const TriMesh& mesh, const WeightedAmbient& space,
                                                     const std::vector<bool>& dirichlet = {}) {
  if (space.dim() != 3) throw UnsupportedError("the surface Schrodinger operator is defined for surfaces in three-dimensional spaces");
  const std::vector<PointGeometry> geo = vertex_geometry(mesh, space);
  std::vector<double> pot;
  pot.reserve(geo.size());
  for (const auto& g : geo) pot.push_back(espinar_V(g, space) - g.gauss_curv / 3.0);
  return assemble_form(mesh, [](const Vector&) { return 1.0; }, pot, dirichlet);
}

/// Writes a sparse matrix in MatrixMarket coordinate format.
inline void write_matrix_market(std::ostream& out, const SparseMatrix& m) {
  out << "%%MatrixMarket matrix coordinate real general\n" << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  char buf[96];
  for (Eigen::Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      std::snprintf(buf, sizeof buf, "%ld %ld %.17g\n", static_cast<long>(it.row() + 1), static_cast<long>(it.col() + 1), it.value());
      out << buf;
    }
}

// ---------------------------------------------------------------------------
// Eigen-solvers

namespace detail {

inline double backward_error(const SparseMatrix& a, const SparseMatrix& b, double anorm, double bnorm, double lambda,
                             const Vector& x) {
  const Vector r = a * x - lambda * (b * x);
  return r.norm() / ((anorm + std::abs(lambda) * bnorm) * x.norm());
}

inline SpectrumResult finish_spectrum(SpectrumResult r, const SolverOptions& opt) {
  r.tol_zero = opt.tol_zero > 0.0 ? opt.tol_zero : default_tol_zero(r.eigenvalues.empty() ? 0.0 : r.eigenvalues.front());
  r.f_index = count_negative(r.eigenvalues, r.tol_zero);
  r.index_saturated = !r.eigenvalues.empty() && r.f_index == static_cast<int>(r.eigenvalues.size());
  return r;
}

#ifdef FMINIMAL_HAVE_LAPACK
extern "C" void dsygvx_(const int* itype, const char* jobz, const char* range, const char* uplo, const int* n, double* a,
                        const int* lda, double* b, const int* ldb, const double* vl, const double* vu, const int* il,
                        const int* iu, const double* abstol, int* m, double* w, double* z, const int* ldz, double* work,
                        const int* lwork, int* iwork, int* ifail, int* info, std::size_t, std::size_t, std::size_t);

// Lowest `count` pairs only, via LAPACK's selected-range generalized driver.
inline SpectrumResult solve_dense(const SparseMatrix& a, const SparseMatrix& b, int count) {
  Matrix ad = Matrix(a);
  Matrix bd = Matrix(b);
  const int n = static_cast<int>(ad.rows());
  const int itype = 1, il = 1, iu = count;
  const double vl = 0.0, vu = 0.0, abstol = 2.0 * std::numeric_limits<double>::min();
  int found = 0, info = 0, lwork = -1;
  Vector w(n);
  Matrix z(n, count);
  std::vector<int> iwork(5 * static_cast<std::size_t>(n)), ifail(static_cast<std::size_t>(n));
  double query = 0.0;
  dsygvx_(&itype, "V", "I", "L", &n, ad.data(), &n, bd.data(), &n, &vl, &vu, &il, &iu, &abstol, &found, w.data(), z.data(),
          &n, &query, &lwork, iwork.data(), ifail.data(), &info, 1, 1, 1);
  lwork = std::max(8 * n, static_cast<int>(query));
  std::vector<double> work(static_cast<std::size_t>(lwork));
  dsygvx_(&itype, "V", "I", "L", &n, ad.data(), &n, bd.data(), &n, &vl, &vu, &il, &iu, &abstol, &found, w.data(), z.data(),
          &n, work.data(), &lwork, iwork.data(), ifail.data(), &info, 1, 1, 1);
  if (info > n) throw SolverError("dense generalized eigensolver failed: mass matrix is not positive definite");
  if (info != 0 || found != count) throw SolverError("dense generalized eigensolver failed (info " + std::to_string(info) + ")");
  SpectrumResult r;
  r.method = "dense";
  r.eigenvectors = z;
  for (int k = 0; k < count; ++k) r.eigenvalues.push_back(w[k]);
  return r;
}
#else
inline SpectrumResult solve_dense(const SparseMatrix& a, const SparseMatrix& b, int count) {
  const Matrix ad = Matrix(a);
  const Matrix bd = Matrix(b);
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(ad, bd, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) throw SolverError("dense generalized eigensolver failed (mass not positive definite?)");
  SpectrumResult r;
  r.method = "dense";
  r.eigenvectors = es.eigenvectors().leftCols(count);
  for (int k = 0; k < count; ++k) r.eigenvalues.push_back(es.eigenvalues()[k]);
  return r;
}
#endif

// Block shift-invert subspace iteration with Rayleigh-Ritz on the pencil
// (a, b). The shift sits below the whole spectrum so a - shift b is SPD.
inline SpectrumResult solve_shift_invert(const SparseMatrix& a, const SparseMatrix& b, int count, double shift,
                                         const SolverOptions& opt, double anorm, double bnorm) {
  const Eigen::Index n = a.rows();
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  for (int attempt = 0;; ++attempt) {
    ldlt.compute(a - shift * b);
    if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all()) break;
    if (attempt == 30) throw SolverError("could not find a shift making the pencil positive definite");
    shift = 2.0 * shift - 1.0;
  }
  const Eigen::Index block = std::min<Eigen::Index>(n, std::max(2 * count, count + 8));
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Matrix x(n, block);
  for (Eigen::Index j = 0; j < block; ++j)
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = uni(rng);
  SpectrumResult r;
  r.method = "shift_invert";
  for (int it = 0; it < opt.max_iterations; ++it) {
    Matrix y = ldlt.solve(b * x);
    if (ldlt.info() != Eigen::Success) throw SolverError("shift-invert solve failed");
    // b-orthonormalize the block before the small Ritz problem.
    Matrix gram = y.transpose() * (b * y);
    gram = 0.5 * (gram + gram.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> ge(gram);
    const Vector s = ge.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    y = y * ge.eigenvectors() * s.asDiagonal();
    Matrix small = y.transpose() * (a * y);
    small = 0.5 * (small + small.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> ritz(small);
    x = y * ritz.eigenvectors();
    double worst = 0.0;
    r.eigenvalues.assign(static_cast<std::size_t>(count), 0.0);
    r.residuals.assign(static_cast<std::size_t>(count), 0.0);
    for (int k = 0; k < count; ++k) {
      r.eigenvalues[k] = ritz.eigenvalues()[k];
      r.residuals[k] = backward_error(a, b, anorm, bnorm, r.eigenvalues[k], x.col(k));
      worst = std::max(worst, r.residuals[k]);
    }
    if (worst <= opt.residual_target) {
      r.eigenvectors = x.leftCols(count);
      return r;
    }
  }
  double worst = *std::max_element(r.residuals.begin(), r.residuals.end());
  if (worst > 1e-8) throw SolverError("shift-invert iteration did not converge (backward error " + std::to_string(worst) + ")");
  r.eigenvectors = x.leftCols(count);
  return r;
}

}  // namespace detail

/// Lowest `count` eigenvalues of (stiffness - potential) x = lambda mass x,
/// the Dirichlet problem for -L_f on the free region, with the f-index.
inline SpectrumResult solve_spectrum(const QuadraticFormSystem& sys, int count, const SolverOptions& opt = {}) {
  const Eigen::Index n = sys.size();
  if (count < 1) throw ArgumentError("count must be at least 1");
  if (count > n) throw ArgumentError("count exceeds the number of free degrees of freedom");
  const SparseMatrix a = sys.form();
  const double anorm = a.norm();
  const double bnorm = sys.mass.norm();
  SpectrumResult r;
  if (n < opt.dense_threshold) {
    r = detail::solve_dense(a, sys.mass, count);
    for (int k = 0; k < count; ++k)
      r.residuals.push_back(detail::backward_error(a, sys.mass, anorm, bnorm, r.eigenvalues[k], r.eigenvectors.col(k)));
  } else {
    const double shift = -std::max(0.0, sys.potential_sup) - 1.0;
    r = detail::solve_shift_invert(a, sys.mass, count, shift, opt, anorm, bnorm);
  }
  return detail::finish_spectrum(std::move(r), opt);
}

// ---------------------------------------------------------------------------
// Exhaustion by nested Dirichlet domains

struct ExhaustionResult {
  std::vector<int> indices;
  std::vector<double> lowest_eigenvalues;
  std::vector<std::size_t> free_dofs;
  bool monotone = true;
};

/// Nested domains of a disk-like mesh: vertices with |x| < R free.
inline std::vector<std::vector<bool>> ball_domains(const TriMesh& mesh, const std::vector<double>& radii) {
  std::vector<std::vector<bool>> out;
  for (double r : radii) {
    std::vector<bool> free(mesh.num_vertices());
    for (std::size_t v = 0; v < free.size(); ++v) free[v] = mesh.vertices()[v].norm() < r - 1e-9;
    out.push_back(std::move(free));
  }
  return out;
}

/// Nested slabs |x3| < h of a cylinder-like mesh.
inline std::vector<std::vector<bool>> slab_domains(const TriMesh& mesh, const std::vector<double>& heights) {
  std::vector<std::vector<bool>> out;
  for (double h : heights) {
    std::vector<bool> free(mesh.num_vertices());
    for (std::size_t v = 0; v < free.size(); ++v) free[v] = std::abs(mesh.vertices()[v].z()) < h - 1e-9;
    out.push_back(std::move(free));
  }
  return out;
}

/// f-index on each domain of an increasing family (each given by its mask of
/// free vertices). Enough eigenvalues are computed per domain to see the
/// first nonnegative one.
inline ExhaustionResult f_index_exhaustion(const TriMesh& mesh, const WeightedAmbient& space,
                                           const std::vector<std::vector<bool>>& domains, const SolverOptions& opt = {}) {
  if (domains.empty()) throw ArgumentError("exhaustion needs at least one domain");
  for (const auto& d : domains)
    if (d.size() != mesh.num_vertices()) throw ArgumentError("domain mask must have one flag per vertex");
  for (std::size_t k = 1; k < domains.size(); ++k)
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
      if (domains[k - 1][v] && !domains[k][v]) throw ArgumentError("exhaustion domains are not nested");

  const std::vector<double> potential = stability_potential(vertex_geometry(mesh, space));
  const DensityFn density = weighted_density(space);
  ExhaustionResult out;
  for (const auto& free : domains) {
    std::vector<bool> dirichlet(free.size());
    for (std::size_t v = 0; v < free.size(); ++v) dirichlet[v] = !free[v];
    const QuadraticFormSystem sys = assemble_form(mesh, density, potential, dirichlet);
    out.free_dofs.push_back(static_cast<std::size_t>(sys.size()));
    if (sys.size() == 0) {
      out.indices.push_back(0);
      out.lowest_eigenvalues.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    int count = static_cast<int>(std::min<Eigen::Index>(sys.size(), 8));
    SpectrumResult spec;
    for (;;) {
      spec = solve_spectrum(sys, count, opt);
      if (!spec.index_saturated || count == sys.size()) break;
      count = static_cast<int>(std::min<Eigen::Index>(sys.size(), 2 * count));
    }
    out.indices.push_back(spec.f_index);
    out.lowest_eigenvalues.push_back(spec.eigenvalues.front());
  }
  for (std::size_t k = 1; k < out.indices.size(); ++k) out.monotone = out.monotone && out.indices[k] >= out.indices[k - 1];
  return out;
}

// ---------------------------------------------------------------------------
// Separable solver for products S^k(r) x R^m with constant potential

/// Stability problem on S^k(r) x R^m in the Gaussian soliton, whose potential
/// |A|^2 + Ric_f(nu, nu) is constant. k = 0 means no sphere factor (a plane).
struct SeparableProblem {
  int sphere_dim = 1;
  double sphere_radius = std::sqrt(2.0);
  int line_count = 1;
  double potential_const = 1.0;
  /// Highest spherical-harmonic degree kept.
  int max_degree = 12;
  /// Highest Gaussian-line level kept per line.
  int max_level = 12;
};

struct LineSpectrumOptions {
  double initial_half_length = 4.0;
  double spacing = 0.1;
  double tolerance = 1e-8;
  double max_half_length = 256.0;
};

struct LineSpectrum {
  std::vector<double> eigenvalues;
  double half_length = 0.0;
  /// Largest eigenvalue change in the final doubling.
  double last_shift = 0.0;
};

/// Lowest `levels` Dirichlet eigenvalues of the drift Laplacian
/// -u'' + (z/2) u' on |z| <= L. Conjugating by e^{z^2/8} turns it into
/// -w'' + (z^2/16 - 1/4) w, which is discretized with a sine DVR; L is
/// doubled until no eigenvalue moves by more than the tolerance.
inline LineSpectrum line_spectrum(int levels, const LineSpectrumOptions& opt = {}) {
  if (levels < 1) throw ArgumentError("at least one line level is required");
  auto solve = [&](double half) {
    const int n = std::max(levels + 2, static_cast<int>(std::lround(2.0 * half / opt.spacing)) - 1);
    const double len = 2.0 * half;
    Matrix s(n, n);
    for (int p = 0; p < n; ++p)
      for (int j = 0; j < n; ++j) s(p, j) = std::sqrt(2.0 / (n + 1)) * std::sin(M_PI * (p + 1.0) * (j + 1.0) / (n + 1));
    Vector k2(n);
    for (int j = 0; j < n; ++j) k2[j] = std::pow(M_PI * (j + 1.0) / len, 2);
    Matrix h = s * k2.asDiagonal() * s.transpose();
    for (int p = 0; p < n; ++p) {
      const double z = -half + (p + 1.0) * len / (n + 1);
      h(p, p) += z * z / 16.0 - 0.25;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.transpose()), Eigen::EigenvaluesOnly);
    return std::vector<double>(es.eigenvalues().data(), es.eigenvalues().data() + levels);
  };
  LineSpectrum out;
  double half = opt.initial_half_length;
  std::vector<double> prev = solve(half);
  for (;;) {
    const double next_half = 2.0 * half;
    if (next_half > opt.max_half_length) throw SolverError("line spectrum did not converge under domain doubling");
    std::vector<double> cur = solve(next_half);
    double shift = 0.0;
    for (int k = 0; k < levels; ++k) shift = std::max(shift, std::abs(cur[k] - prev[k]));
    half = next_half;
    prev = std::move(cur);
    if (shift < opt.tolerance) {
      out.last_shift = shift;
      break;
    }
  }
  out.eigenvalues = std::move(prev);
  out.half_length = half;
  return out;
}

/// Multiplicity of degree-l spherical harmonics on S^k.
inline long harmonic_multiplicity(int k, int l) {
  if (k == 0) return l == 0 ? 1 : 0;
  auto binom = [](long n, long r) {
    if (r < 0 || n < r) return 0L;
    long v = 1;
    for (long i = 1; i <= r; ++i) v = v * (n - r + i) / i;
    return v;
  };
  return binom(l + k, k) - binom(l + k - 2, k);
}

/// Eigenvalues m(m + k - 1)/r^2 + mu_{j_1} + ... + mu_{j_m} - potential,
/// sorted, with the line eigenvalues mu from line_spectrum.
inline SpectrumResult separable_spectrum(const SeparableProblem& prob, int count, const SolverOptions& opt = {},
                                         const LineSpectrumOptions& line_opt = {}) {
  if (count < 1) throw ArgumentError("count must be at least 1");
  if (prob.sphere_dim < 0 || prob.line_count < 0 || prob.sphere_dim + prob.line_count < 1)
    throw ArgumentError("separable problem needs at least one factor");
  if (prob.sphere_dim > 0 && !(prob.sphere_radius > 0.0)) throw ArgumentError("sphere radius must be positive");
  const int degrees = prob.sphere_dim > 0 ? prob.max_degree : 0;
  const LineSpectrum line = prob.line_count > 0 ? line_spectrum(prob.max_level + 2, line_opt) : LineSpectrum{{0.0}, 0.0, 0.0};
  const int levels = prob.line_count > 0 ? prob.max_level : 0;

  auto sphere_eig = [&](int l) {
    return prob.sphere_dim > 0 ? l * (l + prob.sphere_dim - 1.0) / (prob.sphere_radius * prob.sphere_radius) : 0.0;
  };
  // Sums of line eigenvalues over all multi-indices with entries <= levels.
  std::vector<double> line_sums{0.0};
  for (int c = 0; c < prob.line_count; ++c) {
    std::vector<double> next;
    for (double s : line_sums)
      for (int j = 0; j <= levels; ++j) next.push_back(s + line.eigenvalues[j]);
    line_sums = std::move(next);
  }
  std::vector<double> all;
  for (int l = 0; l <= degrees; ++l) {
    const long mult = harmonic_multiplicity(prob.sphere_dim, l);
    for (long m = 0; m < mult; ++m)
      for (double s : line_sums) all.push_back(sphere_eig(l) + s - prob.potential_const);
  }
  std::sort(all.begin(), all.end());
  // Lowest value any excluded mode could take.
  double floor = std::numeric_limits<double>::infinity();
  if (prob.sphere_dim > 0) floor = std::min(floor, sphere_eig(degrees + 1) + prob.line_count * line.eigenvalues[0]);
  if (prob.line_count > 0)
    floor = std::min(floor, line.eigenvalues[levels + 1] + (prob.line_count - 1) * line.eigenvalues[0]);
  floor -= prob.potential_const;

  SpectrumResult r;
  r.method = "separable";
  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(count), all.size());
  r.eigenvalues.assign(all.begin(), all.begin() + static_cast<long>(take));
  r.residuals.assign(take, line.last_shift);
  r.truncated = take < static_cast<std::size_t>(count) || r.eigenvalues.back() >= floor;
  return detail::finish_spectrum(std::move(r), opt);
}

}  // namespace fminimal
