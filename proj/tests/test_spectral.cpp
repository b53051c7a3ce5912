#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "fminimal/catalog.hpp"
#include "fminimal/spectral.hpp"
#include "oracles.hpp"

using namespace fminimal;

namespace {

const double kSphereVolume = 16.0 * M_PI / std::exp(1.0);

TriMesh tetrahedron() {
  return TriMesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {{{0, 2, 1}}, {{0, 1, 3}}, {{0, 3, 2}}, {{1, 2, 3}}});
}

double unit_density(const Vector&) { return 1.0; }

double ones_form(const SparseMatrix& m) {
  const Vector one = Vector::Ones(m.rows());
  return one.dot(m * one);
}

double asymmetry(const SparseMatrix& m) { return Matrix(m - SparseMatrix(m.transpose())).cwiseAbs().maxCoeff(); }

// Sphere level 4 is the most expensive system; solve it once.
struct SphereFixture {
  TriMesh mesh = icosphere(4, 2.0);
  QuadraticFormSystem sys = assemble(mesh, gaussian_soliton(3));
  SpectrumResult spec = solve_spectrum(sys, 9);
};

const SphereFixture& sphere() {
  static const SphereFixture fixture;
  return fixture;
}

}  // namespace

TEST(Assembly, CotangentStiffnessOnTetrahedron) {
  const TriMesh m = tetrahedron();
  const QuadraticFormSystem sys = assemble_form(m, unit_density, std::vector<double>(4, 0.0), {});
  ASSERT_EQ(sys.size(), 4);
  // Independent element matrices from interior angles measured with acos.
  Matrix expected = Matrix::Zero(4, 4);
  for (const Face& t : m.faces()) {
    for (int k = 0; k < 3; ++k) {
      const int i = t[(k + 1) % 3], j = t[(k + 2) % 3];
      const Point3 a = m.vertex(i) - m.vertex(t[k]), b = m.vertex(j) - m.vertex(t[k]);
      const double half_cot = 0.5 / std::tan(std::acos(a.dot(b) / (a.norm() * b.norm())));
      expected(i, j) -= half_cot;
      expected(j, i) -= half_cot;
      expected(i, i) += half_cot;
      expected(j, j) += half_cot;
    }
  }
  EXPECT_LE((Matrix(sys.stiffness) - expected).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(sys.potential.nonZeros(), 16);
  EXPECT_EQ(Matrix(sys.potential).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_NEAR(ones_form(sys.mass), m.area(), 1e-14);
}

TEST(Assembly, ConstantsReproduceWeightedVolume) {
  const QuadraticFormSystem& sys = sphere().sys;
  EXPECT_NEAR(ones_form(sys.mass), kSphereVolume, 0.01 * kSphereVolume);
  EXPECT_NEAR(ones_form(sys.form()), -kSphereVolume, 0.01 * kSphereVolume);
  EXPECT_NEAR(ones_form(sys.stiffness), 0.0, 1e-10);
}

TEST(Assembly, MatricesAreSymmetric) {
  const QuadraticFormSystem& sys = sphere().sys;
  EXPECT_LE(asymmetry(sys.stiffness), 1e-12);
  EXPECT_LE(asymmetry(sys.potential), 1e-12);
  EXPECT_LE(asymmetry(sys.mass), 1e-12);
  const QuadraticFormSystem disk = assemble(planar_disk(3.0, 0.3), gaussian_soliton(3));
  EXPECT_LE(asymmetry(disk.form()), 1e-12);
}

TEST(Assembly, BoundaryIsAlwaysDirichlet) {
  const TriMesh disk = planar_disk(2.0, 0.5);
  const QuadraticFormSystem sys = assemble(disk, gaussian_soliton(3));
  for (int v : sys.dirichlet_dofs) EXPECT_TRUE(disk.boundary_flags()[static_cast<std::size_t>(v)]);
  EXPECT_EQ(sys.free_dofs.size() + sys.dirichlet_dofs.size(), disk.num_vertices());
  std::vector<bool> extra(disk.num_vertices(), false);
  extra[0] = true;
  EXPECT_EQ(assemble(disk, gaussian_soliton(3), extra).size(), static_cast<Eigen::Index>(sys.free_dofs.size()) - 1);
}

TEST(Assembly, Errors) {
  const TriMesh m = tetrahedron();
  EXPECT_THROW(assemble_form(m, unit_density, std::vector<double>(3, 0.0), {}), ArgumentError);
  EXPECT_THROW(assemble_form(m, unit_density, std::vector<double>(4, 0.0), std::vector<bool>(2)), ArgumentError);
  EXPECT_THROW(assemble_form(m, [](const Vector&) { return 0.0; }, std::vector<double>(4, 0.0), {}), AssemblyError);
}

TEST(Assembly, MatrixMarketHeader) {
  const QuadraticFormSystem sys = assemble_form(tetrahedron(), unit_density, std::vector<double>(4, 0.0), {});
  std::ostringstream out;
  write_matrix_market(out, sys.stiffness);
  std::istringstream in(out.str());
  std::string banner;
  std::getline(in, banner);
  EXPECT_EQ(banner, "%%MatrixMarket matrix coordinate real general");
  long rows = 0, cols = 0, nnz = 0;
  in >> rows >> cols >> nnz;
  EXPECT_EQ(rows, 4);
  EXPECT_EQ(nnz, sys.stiffness.nonZeros());
}

TEST(Spectrum, SphereHasIndexFour) {
  const SpectrumResult& spec = sphere().spec;
  const std::vector<double> exact = sphere_spectrum_oracle(2, 9);
  ASSERT_EQ(spec.eigenvalues.size(), 9u);
  for (std::size_t k = 0; k < exact.size(); ++k) EXPECT_NEAR(spec.eigenvalues[k], exact[k], 0.01) << k;
  EXPECT_EQ(spec.f_index, 4);
  EXPECT_FALSE(spec.index_saturated);
  for (double r : spec.residuals) EXPECT_LE(r, 1e-10);
}

TEST(Spectrum, ZeroWeightClosedMeshHasConstantKernel) {
  const TriMesh m = icosphere(3, 1.0);
  const QuadraticFormSystem sys = assemble_form(m, unit_density, std::vector<double>(m.num_vertices(), 0.0), {});
  const SpectrumResult spec = solve_spectrum(sys, 4);
  EXPECT_NEAR(spec.eigenvalues[0], 0.0, 1e-9);
  EXPECT_EQ(spec.f_index, 0);
  // The next eigenvalue approximates 2 / r^2.
  EXPECT_NEAR(spec.eigenvalues[1], 2.0, 0.05);
}

TEST(Spectrum, PlaneDiskHasIndexOne) {
  const QuadraticFormSystem sys = assemble(planar_disk(6.0, 0.3), gaussian_soliton(3));
  const SpectrumResult spec = solve_spectrum(sys, 4);
  EXPECT_NEAR(spec.eigenvalues[0], -0.5, 0.025);
  EXPECT_EQ(spec.f_index, 1);
}

TEST(Spectrum, RayleighQuotientsBoundedBelow) {
  const QuadraticFormSystem sys = assemble(icosphere(3, 2.0), gaussian_soliton(3));
  const SpectrumResult spec = solve_spectrum(sys, 6);
  const SparseMatrix a = sys.form();
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  for (int i = 0; i < 10; ++i) {
    Vector x(sys.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = g(rng);
    EXPECT_GE(x.dot(a * x) / x.dot(sys.mass * x), spec.eigenvalues[0] - 1e-10);
  }
  for (int k = 0; k < 6; ++k) {
    const Vector v = spec.eigenvectors.col(k);
    EXPECT_NEAR(v.dot(a * v) / v.dot(sys.mass * v), spec.eigenvalues[k], 1e-10);
  }
}

TEST(Spectrum, EigenvectorsAreMassOrthonormal) {
  const QuadraticFormSystem sys = assemble(icosphere(3, 2.0), gaussian_soliton(3));
  SolverOptions iterative;
  iterative.dense_threshold = 0;
  for (const SolverOptions& opt : {SolverOptions{}, iterative}) {
    const SpectrumResult spec = solve_spectrum(sys, 6, opt);
    const Matrix gram = spec.eigenvectors.transpose() * (sys.mass * spec.eigenvectors);
    EXPECT_LE((gram - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-8) << spec.method;
  }
}

TEST(Spectrum, DenseAndIterativeAgree) {
  const QuadraticFormSystem sys = assemble(icosphere(3, 2.0), gaussian_soliton(3));
  SolverOptions iterative;
  iterative.dense_threshold = 0;
  const SpectrumResult dense = solve_spectrum(sys, 9);
  const SpectrumResult iter = solve_spectrum(sys, 9, iterative);
  EXPECT_NE(dense.method, iter.method);
  for (int k = 0; k < 9; ++k) EXPECT_NEAR(dense.eigenvalues[k], iter.eigenvalues[k], 1e-8);
  EXPECT_EQ(dense.f_index, iter.f_index);
}

TEST(Spectrum, IndexStableUnderToleranceChanges) {
  const SpectrumResult& base = sphere().spec;
  for (double factor : {0.5, 2.0}) {
    SolverOptions opt;
    opt.tol_zero = factor * base.tol_zero;
    EXPECT_EQ(count_negative(base.eigenvalues, opt.tol_zero), base.f_index);
  }
  EXPECT_DOUBLE_EQ(base.tol_zero, default_tol_zero(base.eigenvalues[0]));
}

TEST(Spectrum, CountErrors) {
  const QuadraticFormSystem sys = assemble_form(tetrahedron(), unit_density, std::vector<double>(4, 0.0), {});
  EXPECT_THROW(solve_spectrum(sys, 0), ArgumentError);
  EXPECT_THROW(solve_spectrum(sys, 5), ArgumentError);
  EXPECT_NO_THROW(solve_spectrum(sys, 4));
}

TEST(Exhaustion, PlaneDisks) {
  const TriMesh disk = planar_disk(8.0, 0.4);
  const ExhaustionResult r = f_index_exhaustion(disk, gaussian_soliton(3), ball_domains(disk, {2, 4, 6, 8}));
  ASSERT_EQ(r.indices.size(), 4u);
  EXPECT_TRUE(r.monotone);
  for (std::size_t k = 1; k < 4; ++k) {
    EXPECT_GE(r.indices[k], r.indices[k - 1]);
    EXPECT_LE(r.lowest_eigenvalues[k], r.lowest_eigenvalues[k - 1] + 1e-12);
    EXPECT_GT(r.free_dofs[k], r.free_dofs[k - 1]);
  }
  EXPECT_EQ(r.indices.back(), 1);
}

TEST(Exhaustion, TruncatedCylinder) {
  const TriMesh cyl = make_entry("cylinder", {.truncation = 6.0}).mesh(3);
  const ExhaustionResult r = f_index_exhaustion(cyl, gaussian_soliton(3), slab_domains(cyl, {2, 4, 6}));
  EXPECT_TRUE(r.monotone);
  EXPECT_EQ(r.indices.back(), 4);
}

TEST(Exhaustion, RepeatedDomainIsConstant) {
  const TriMesh disk = planar_disk(4.0, 0.4);
  const auto domains = ball_domains(disk, {3, 3, 3});
  const ExhaustionResult r = f_index_exhaustion(disk, gaussian_soliton(3), domains);
  EXPECT_EQ(r.indices[0], r.indices[1]);
  EXPECT_EQ(r.indices[1], r.indices[2]);
  EXPECT_EQ(r.lowest_eigenvalues[0], r.lowest_eigenvalues[2]);
}

TEST(Exhaustion, RejectsNonNestedDomains) {
  const TriMesh disk = planar_disk(4.0, 0.5);
  EXPECT_THROW(f_index_exhaustion(disk, gaussian_soliton(3), ball_domains(disk, {3, 2})), ArgumentError);
  EXPECT_THROW(f_index_exhaustion(disk, gaussian_soliton(3), {}), ArgumentError);
  EXPECT_THROW(f_index_exhaustion(disk, gaussian_soliton(3), {std::vector<bool>(3)}), ArgumentError);
}

TEST(LineSpectrum, HermiteLevels) {
  const LineSpectrum line = line_spectrum(10);
  ASSERT_GE(line.eigenvalues.size(), 10u);
  for (int k = 0; k < 10; ++k) EXPECT_NEAR(line.eigenvalues[k], oracle::line_eigenvalue(k), 1e-6) << k;
  EXPECT_LT(line.last_shift, 1e-8);
}

TEST(Separable, MatchesProductOracle) {
  struct Case {
    int k, m;
    double pot;
  };
  for (const Case c : {Case{1, 1, 1.0}, Case{2, 1, 1.0}, Case{0, 2, 0.5}, Case{3, 0, 1.0}, Case{2, 2, 1.0}}) {
    const double r = c.k > 0 ? std::sqrt(2.0 * c.k) : 1.0;
    const SpectrumResult spec = separable_spectrum(SeparableProblem{c.k, r, c.m, c.pot, 12, 12}, 25);
    const std::vector<double> exact = oracle::product_spectrum(c.k, c.m, c.pot, 12, 12);
    ASSERT_EQ(spec.eigenvalues.size(), 25u);
    for (int i = 0; i < 25; ++i) EXPECT_NEAR(spec.eigenvalues[i], exact[i], 1e-6) << c.k << ' ' << c.m << ' ' << i;
    EXPECT_FALSE(spec.truncated);
  }
}

TEST(Separable, CatalogExamples) {
  const SpectrumResult cyl = separable_spectrum(*make_entry("cylinder").separable, 6);
  EXPECT_NEAR(cyl.eigenvalues[0], -1.0, 1e-6);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(cyl.eigenvalues[i], -0.5, 1e-6);
  EXPECT_EQ(cyl.f_index, 4);
  const SpectrumResult plane = separable_spectrum(*make_entry("plane").separable, 3);
  EXPECT_NEAR(plane.eigenvalues[0], -0.5, 1e-6);
  EXPECT_NEAR(plane.eigenvalues[1], 0.0, 1e-6);
  EXPECT_NEAR(plane.eigenvalues[2], 0.0, 1e-6);
  EXPECT_EQ(plane.f_index, 1);
  EXPECT_EQ(separable_spectrum(*make_entry("cylinder", {.n = 3, .k = 2}).separable, 10).f_index, 5);
}

TEST(Separable, HarmonicMultiplicities) {
  for (int k = 1; k <= 5; ++k)
    for (int l = 0; l <= 8; ++l) EXPECT_EQ(harmonic_multiplicity(k, l), oracle::harmonic_dim(k, l)) << k << ' ' << l;
  EXPECT_EQ(harmonic_multiplicity(2, 2), 5);
  EXPECT_EQ(harmonic_multiplicity(1, 3), 2);
}

TEST(Separable, TruncationFlag) {
  const SpectrumResult spec = separable_spectrum(SeparableProblem{1, std::sqrt(2.0), 1, 1.0, 1, 1}, 8);
  EXPECT_TRUE(spec.truncated);
  EXPECT_THROW(separable_spectrum(SeparableProblem{0, 1.0, 0, 0.0, 0, 0}, 3), ArgumentError);
  EXPECT_THROW(separable_spectrum(SeparableProblem{}, 0), ArgumentError);
}

TEST(SchrodingerOperator, SphereConstantFunction) {
  const TriMesh m = icosphere(4, 2.0);
  const QuadraticFormSystem sys = assemble_espinar_operator(m, gaussian_soliton(3));
  EXPECT_NEAR(ones_form(sys.form()), -16.0 * M_PI / 3.0, 0.01 * 16.0 * M_PI / 3.0);
  EXPECT_LT(solve_spectrum(sys, 1).eigenvalues[0], 0.0);
}

TEST(SchrodingerOperator, FlatDiskWithZeroWeightIsDirichletLaplacian) {
  const TriMesh disk = planar_disk(2.0, 0.25);
  const QuadraticFormSystem esp = assemble_espinar_operator(disk, zero_weight(3));
  const QuadraticFormSystem lap = assemble_form(disk, unit_density, std::vector<double>(disk.num_vertices(), 0.0), {});
  EXPECT_LE(Matrix(esp.form() - lap.stiffness).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_THROW(assemble_espinar_operator(disk, gaussian_soliton(4)), UnsupportedError);
}
