#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fminimal/catalog.hpp"
#include "fminimal/diagnostics.hpp"
#include "oracles.hpp"

using namespace fminimal;

namespace {

const double kSphereVolume = 16.0 * M_PI / std::exp(1.0);

ImmersedPatch unit_square() {
  ParamBox box{Vector::Constant(2, -0.5), Vector::Constant(2, 0.5)};
  return make_patch("square", 2, box, [](const auto& u) {
    using T = typename std::remove_cv_t<std::remove_reference_t<decltype(u)>>::value_type;
    return std::vector<T>{u[0], u[1], T(0.0 * u[0])};
  });
}

Vector origin() { return Vector::Zero(3); }

}  // namespace

TEST(ShrinkerResidual, SphereIsExact) {
  EXPECT_LE(shrinker_residual(*make_entry("sphere").patch, gaussian_soliton(3)), 1e-12);
  EXPECT_LE(shrinker_residual(*make_entry("cylinder").patch, gaussian_soliton(3)), 1e-12);
  EXPECT_LE(shrinker_residual(*make_entry("plane").patch, gaussian_soliton(3)), 1e-12);
}

TEST(ShrinkerResidual, TorusIsNotAShrinker) {
  const double r = shrinker_residual(*make_entry("torus").patch, gaussian_soliton(3));
  EXPECT_GT(r, 0.1);
  // Independent sup over a fine grid of the analytic residual:
  // H = 1 + cos v/(2 + cos v), <x, nu>/2 = (2 cos v + 1)/2.
  double sup = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double v = 2.0 * M_PI * i / 2000;
    sup = std::max(sup, std::abs(1.0 + std::cos(v) / (2.0 + std::cos(v)) - (2.0 * std::cos(v) + 1.0) / 2.0));
  }
  EXPECT_LE(r, sup + 1e-12);
  EXPECT_GT(r, 0.9 * sup);
}

TEST(ShrinkerResidual, RequiresGaussianAmbient) {
  EXPECT_THROW(shrinker_residual(*make_entry("sphere").patch, zero_weight(3)), WrongAmbient);
  EXPECT_THROW(shrinker_residual(icosphere(1, 2.0), zero_weight(3)), WrongAmbient);
}

TEST(ShrinkerResidual, IcosphereMeshConverges) {
  const auto space = gaussian_soliton(3);
  double prev = shrinker_residual(icosphere(2, 2.0), space);
  for (int level = 3; level <= 5; ++level) {
    const double cur = shrinker_residual(icosphere(level, 2.0), space);
    if (level == 4) EXPECT_LE(cur, 0.02);
    EXPECT_LT(cur, prev);
    prev = cur;
  }
}

TEST(WeightedVolume, SphereIsSixteenPiOverE) {
  const auto space = gaussian_soliton(3);
  EXPECT_NEAR(weighted_volume(*make_entry("sphere").patch, space, {16, 4}), kSphereVolume, 1e-9);
  EXPECT_NEAR(weighted_volume(icosphere(5, 2.0), space), kSphereVolume, 0.01 * kSphereVolume);
}

TEST(WeightedVolume, ZeroWeightIsArea) {
  EXPECT_NEAR(weighted_volume(*make_entry("sphere").patch, zero_weight(3), {16, 4}), 16.0 * M_PI, 1e-9);
  EXPECT_NEAR(weighted_volume(*make_entry("torus").patch, zero_weight(3), {16, 2}), 8.0 * M_PI * M_PI, 1e-9);
  const TriMesh m = icosphere(3, 1.0);
  EXPECT_NEAR(weighted_volume(m, zero_weight(3)), m.area(), 1e-12);
}

TEST(WeightedVolume, UnitSquareMatchesErrorFunctionProduct) {
  const double side = oracle::simpson([](double t) { return std::exp(-t * t / 4.0); }, -0.5, 0.5);
  const double closed = std::pow(2.0 * std::sqrt(M_PI) * std::erf(0.25), 2);
  EXPECT_NEAR(side * side, closed, 1e-12);
  EXPECT_NEAR(side * side, 0.95953, 1e-5);
  EXPECT_NEAR(weighted_volume(unit_square(), gaussian_soliton(3)), side * side, 1e-12);
}

TEST(WeightedVolume, InvariantUnderRotationForRadialWeight) {
  const auto space = gaussian_soliton(3);
  const ImmersedPatch torus = *make_entry("torus").patch;
  const double base = weighted_volume(torus, space, {12, 2});
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int i = 0; i < 5; ++i) {
    const Eigen::Vector3d axis = Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized();
    const Matrix q = Eigen::AngleAxisd(g(rng), axis).toRotationMatrix();
    EXPECT_NEAR(weighted_volume(rotated(torus, q), space, {12, 2}), base, 1e-10 * base);
  }
}

TEST(AreaBound, SphereHolds) {
  const auto space = gaussian_soliton(3);
  const AreaBoundRecord r = area_bound_check(*make_entry("sphere").patch, space, 0.5, std::nullopt, {16, 2});
  EXPECT_NEAR(r.lhs, kSphereVolume, 1e-9);
  EXPECT_NEAR(r.rhs, 2.0 * kSphereVolume, 1e-9);
  EXPECT_TRUE(r.holds);
  EXPECT_EQ(r.genus, 0);
  const AreaBoundRecord doubled = area_bound_check(*make_entry("sphere").patch, space, 0.5, 1, {16, 2});
  EXPECT_NEAR(doubled.rhs, 2.0 * r.rhs, 1e-9);
  EXPECT_TRUE(doubled.holds);
  const AreaBoundRecord mesh = area_bound_check(icosphere(4, 2.0), space, 0.5);
  EXPECT_NEAR(mesh.rhs, r.rhs, 1e-9);
  EXPECT_TRUE(mesh.holds);
}

TEST(AreaBound, Preconditions) {
  EXPECT_THROW(area_bound_check(*make_entry("sphere").patch, zero_weight(3), 0.5), PreconditionError);
  EXPECT_THROW(area_bound_check(icosphere(2, 2.0), zero_weight(3), 0.5), PreconditionError);
  EXPECT_THROW(area_bound_check(*make_entry("sphere").patch, gaussian_soliton(3), 0.6), PreconditionError);
  EXPECT_THROW(area_bound_check(*make_entry("plane").patch, gaussian_soliton(3), 0.5), UnsupportedError);
  EXPECT_THROW(area_bound_check(planar_disk(2.0, 0.5), gaussian_soliton(3), 0.5), UnsupportedError);
  EXPECT_THROW(area_bound_check(*make_entry("sphere", {.n = 3}).patch, gaussian_soliton(4), 0.5), UnsupportedError);
}

TEST(IndexIntegrals, SphereAndPlaneDisk) {
  const auto space = gaussian_soliton(3);
  const IndexBoundIntegrals s = index_bound_integrand(*make_entry("sphere").patch, space, {16, 2});
  EXPECT_NEAR(s.selfshrinker_integral, kSphereVolume, 1e-9);
  EXPECT_NEAR(s.general_integral, kSphereVolume, 1e-9);
  for (double radius : {1.0, 3.0, 6.0}) {
    const IndexBoundIntegrals p = index_bound_integrand(*make_entry("plane", {.truncation = radius}).patch, space, {16, 4});
    // Integrand 1/2 against e^{-r^2/4} r dr dtheta, and 1 for the general form.
    const double exact = 2.0 * M_PI * (1.0 - std::exp(-radius * radius / 4.0));
    EXPECT_NEAR(p.selfshrinker_integral, exact, 1e-9);
    EXPECT_NEAR(p.general_integral, 2.0 * exact, 1e-9);
  }
  const IndexBoundIntegrals m = index_bound_integrand(icosphere(5, 2.0), space);
  EXPECT_NEAR(m.selfshrinker_integral, kSphereVolume, 0.01 * kSphereVolume);
}

TEST(VolumeGrowth, Examples) {
  const std::vector<Vector> center{origin()};
  const ImmersedPatch plane = *make_entry("plane").patch;
  EXPECT_NEAR(volume_growth_ratio(plane, center, {1.0}), M_PI, 1e-6);
  EXPECT_NEAR(volume_growth_ratio(plane, center, {2.5, 4.0}), M_PI, 1e-6);
  const ImmersedPatch sphere = *make_entry("sphere").patch;
  EXPECT_NEAR(volume_growth_ratio(sphere, center, {10.0}), 16.0 * M_PI / 100.0, 1e-9);
  EXPECT_EQ(volume_growth_ratio(sphere, center, {1.0}), 0.0);
  EXPECT_NEAR(volume_growth_ratio(icosphere(3, 2.0), center, {10.0}), icosphere(3, 2.0).area() / 100.0, 1e-12);
  EXPECT_NEAR(volume_growth_ratio(planar_disk(6.0, 0.2), center, {3.0}), M_PI, 0.01);
}

TEST(VolumeGrowth, EmptyGridRejected) {
  const ImmersedPatch sphere = *make_entry("sphere").patch;
  EXPECT_THROW(volume_growth_ratio(sphere, {}, {1.0}), ArgumentError);
  EXPECT_THROW(volume_growth_ratio(sphere, {origin()}, {}), ArgumentError);
  EXPECT_THROW(volume_growth_ratio(icosphere(1, 2.0), {}, {1.0}), ArgumentError);
}

TEST(SchrodingerPotential, Examples) {
  const auto space = gaussian_soliton(3);
  Vector u(2);
  u << 1.0, 0.3;
  EXPECT_NEAR(espinar_V(*make_entry("sphere").patch, u, space), 5.0 / 12.0, 1e-12);
  // Plane point at |x| = 2: polar radius 2.
  u << 2.0, 0.7;
  EXPECT_NEAR(espinar_V(*make_entry("plane").patch, u, space), 0.375, 1e-12);
  EXPECT_NEAR(espinar_V(*make_entry("plane").patch, u, zero_weight(3)), 0.0, 1e-14);
  EXPECT_THROW(espinar_V(*make_entry("sphere", {.n = 3}).patch, Vector::Constant(3, 1.0), gaussian_soliton(4)),
               UnsupportedError);
  const TriMesh m = icosphere(4, 2.0);
  EXPECT_NEAR(espinar_V(m, 5, space), 5.0 / 12.0, 1e-3);
}
