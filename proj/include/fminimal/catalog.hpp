#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fminimal/errors.hpp"
#include "fminimal/geometry.hpp"
#include "fminimal/jet.hpp"
#include "fminimal/mesh.hpp"
#include "fminimal/patch.hpp"
#include "fminimal/spectral.hpp"

namespace fminimal {

/// Exact pointwise geometry of a catalog surface in the Gaussian soliton.
/// Curvature fields are absent when they vary along the surface.
struct ExactGeometry {
  std::optional<double> mean_curv;
  std::optional<double> shape_sq;
  std::optional<double> f_mean_curv;
  double f_min = 0.0;
  double f_max = 0.0;
};

struct CatalogParams {
  int n = 2;
  /// Sphere-factor dimension of a cylinder S^k x R^{n-k}.
  int k = 1;
  /// Torus radii.
  double major = 2.0;
  double minor = 1.0;
  /// Disk radius of the plane or half-height of the cylinder's flat factors.
  double truncation = 6.0;
};

struct CatalogEntry {
  std::string name;
  int n = 2;
  std::optional<ImmersedPatch> patch;
  std::optional<SeparableProblem> separable;
  ExactGeometry exact;
  std::optional<int> exact_index;
  std::optional<std::vector<double>> exact_low_spectrum;
  bool shrinker = false;
  /// Truncation used by the patch of a noncompact entry.
  std::optional<double> truncation;
  /// Triangulation at a refinement level (surfaces in R^3 only).
  std::function<TriMesh(int)> mesher;

  bool has_mesh() const { return static_cast<bool>(mesher); }
  TriMesh mesh(int level) const {
    if (!mesher) throw UnsupportedError("entry '" + name + "' has no triangulation for n = " + std::to_string(n));
    return mesher(level);
  }
};

/// Eigenvalues of -L_f on S^n(sqrt(2n)): l(l + n - 1)/(2n) - 1 repeated by the
/// dimension of degree-l harmonics, ascending, first `count`.
inline std::vector<double> sphere_spectrum_oracle(int n, int count) {
  if (n < 2) throw ContractViolation("sphere oracle needs n >= 2");
  std::vector<double> out;
  for (int l = 0; static_cast<int>(out.size()) < count; ++l) {
    const long mult = harmonic_multiplicity(n, l);
    for (long m = 0; m < mult && static_cast<int>(out.size()) < count; ++m)
      out.push_back(l * (l + n - 1.0) / (2.0 * n) - 1.0);
  }
  return out;
}

/// Shrinkers other than planes, spheres and cylinders have f-index at least
/// n + 3. No such entry ships; the check guards future additions.
inline bool index_floor_applies(const CatalogEntry& e) {
  return e.shrinker && e.name != "plane" && e.name != "sphere" && e.name != "cylinder";
}

inline bool index_floor_holds(const CatalogEntry& e, int f_index) {
  return !index_floor_applies(e) || f_index >= e.n + 3;
}

namespace detail {

// Hyperspherical coordinates on S^k(r): k-1 polar angles in (0, pi), then an
// azimuth in (0, 2 pi). Writes k + 1 coordinates starting at out[offset].
template <class T>
void sphere_coords(const std::vector<T>& u, std::size_t first, int k, double r, std::vector<T>& out) {
  using std::cos;
  using std::sin;
  T prod = 0.0 * u[first] + r;
  for (int i = 0; i < k - 1; ++i) {
    out.push_back(prod * cos(u[first + i]));
    prod = prod * sin(u[first + i]);
  }
  out.push_back(prod * cos(u[first + k - 1]));
  out.push_back(prod * sin(u[first + k - 1]));
}

inline ParamBox sphere_box(int k, int flat, double half) {
  ParamBox box{Vector(k + flat), Vector(k + flat)};
  for (int i = 0; i < k - 1; ++i) {
    box.lo[i] = 0.0;
    box.hi[i] = M_PI;
  }
  box.lo[k - 1] = 0.0;
  box.hi[k - 1] = 2.0 * M_PI;
  for (int i = k; i < k + flat; ++i) {
    box.lo[i] = -half;
    box.hi[i] = half;
  }
  return box;
}

// Flip orientation so the normal at the box center points along `outward`.
inline void orient_along(ImmersedPatch& patch, const std::function<Vector(const Vector&)>& outward) {
  const Vector u = 0.5 * (patch.box().lo + patch.box().hi) + 1e-3 * Vector::Ones(patch.param_dim());
  const PatchSample s = patch.sample(u);
  const Vector nu = oriented_normal(s.jacobian, 1);
  patch.set_orientation(nu.dot(outward(s.point)) >= 0.0 ? 1 : -1);
}

inline std::vector<double> separable_oracle_list(int k, int n) {
  // -1 once, then -1/2 with multiplicity (k + 1) + (n - k) = n + 1.
  std::vector<double> out{-1.0};
  out.insert(out.end(), static_cast<std::size_t>(n + 1), -0.5);
  return out;
}

}  // namespace detail

/// Catalog surface by name: "plane", "sphere", "cylinder" or "torus".
inline CatalogEntry make_entry(const std::string& name, const CatalogParams& p = {}) {
  if (p.n < 2) throw UnsupportedDimension("catalog surfaces need n >= 2");
  if (!(p.truncation > 0.0)) throw ArgumentError("truncation must be positive");
  const int n = p.n;
  CatalogEntry e;
  e.name = name;
  e.n = n;

  if (name == "sphere") {
    const double r = std::sqrt(2.0 * n);
    ImmersedPatch patch = make_patch("sphere", n, detail::sphere_box(n, 0, 0.0), [n, r](const auto& u) {
      std::remove_cv_t<std::remove_reference_t<decltype(u)>> out;
      detail::sphere_coords(u, 0, n, r, out);
      return out;
    });
    patch.declare_closed(0);
    detail::orient_along(patch, [](const Vector& x) { return x; });
    e.patch = std::move(patch);
    e.separable = SeparableProblem{n, r, 0, 1.0, 12, 0};
    e.exact = {std::sqrt(n / 2.0), 0.5, 0.0, n / 2.0, n / 2.0};
    e.exact_index = n + 2;
    e.exact_low_spectrum = sphere_spectrum_oracle(n, 1 + (n + 1) + static_cast<int>(harmonic_multiplicity(n, 2)));
    e.shrinker = true;
    if (n == 2) e.mesher = [r](int level) { return icosphere(level, r); };
    return e;
  }

  if (name == "cylinder") {
    const int k = p.k;
    if (k < 1 || k > n) throw ArgumentError("cylinder sphere factor k must lie in [1, n]");
    const int flat = n - k;
    const double r = std::sqrt(2.0 * k);
    const double half = p.truncation;
    ImmersedPatch patch = make_patch("cylinder", n, detail::sphere_box(k, flat, half), [k, flat, r](const auto& u) {
      std::remove_cv_t<std::remove_reference_t<decltype(u)>> out;
      detail::sphere_coords(u, 0, k, r, out);
      for (int i = 0; i < flat; ++i) out.push_back(u[static_cast<std::size_t>(k + i)]);
      return out;
    });
    detail::orient_along(patch, [k](const Vector& x) {
      Vector v = Vector::Zero(x.size());
      v.head(k + 1) = x.head(k + 1);
      return v;
    });
    if (flat == 0) patch.declare_closed(0);
    e.patch = std::move(patch);
    e.separable = SeparableProblem{k, r, flat, 1.0, 12, 12};
    e.exact = {std::sqrt(k / 2.0), 0.5, 0.0, k / 2.0, k / 2.0 + flat * half * half / 4.0};
    e.exact_index = n + 2;
    e.exact_low_spectrum = detail::separable_oracle_list(k, n);
    e.shrinker = true;
    if (flat > 0) e.truncation = half;
    if (n == 2 && k == 1) e.mesher = [r, half](int level) {
      const int around = 12 << std::max(0, level - 1);
      return cylinder_mesh(r, half, around, 2.0 * M_PI * r / around);
    };
    if (n == 2 && k == 2) e.mesher = [r](int level) { return icosphere(level, r); };
    return e;
  }

  if (name == "plane") {
    const double half = p.truncation;
    std::optional<ImmersedPatch> patch;
    if (n == 2) {
      ParamBox box{Vector(2), Vector(2)};
      box.lo << 0.0, 0.0;
      box.hi << half, 2.0 * M_PI;
      patch = make_patch("plane", 2, box, [](const auto& u) {
        using std::cos;
        using std::sin;
        using T = typename std::remove_cv_t<std::remove_reference_t<decltype(u)>>::value_type;
        return std::vector<T>{u[0] * cos(u[1]), u[0] * sin(u[1]), T(0.0 * u[0])};
      });
    } else {
      ParamBox box{Vector::Constant(n, -half), Vector::Constant(n, half)};
      patch = make_patch("plane", n, box, [n](const auto& u) {
        using T = typename std::remove_cv_t<std::remove_reference_t<decltype(u)>>::value_type;
        std::vector<T> out(u.begin(), u.end());
        out.push_back(T(0.0 * u[0]));
        (void)n;
        return out;
      });
    }
    detail::orient_along(*patch, [n](const Vector&) { return Vector(Vector::Unit(n + 1, n)); });
    e.patch = std::move(patch);
    e.separable = SeparableProblem{0, 1.0, n, 0.5, 0, 12};
    const double reach = n == 2 ? half * half : n * half * half;
    e.exact = {0.0, 0.0, 0.0, 0.0, reach / 4.0};
    e.exact_index = 1;
    std::vector<double> low{-0.5};
    low.insert(low.end(), static_cast<std::size_t>(n), 0.0);
    e.exact_low_spectrum = low;
    e.shrinker = true;
    e.truncation = half;
    if (n == 2) e.mesher = [half](int level) { return planar_disk(half, 0.8 / (1 << std::max(0, level - 1))); };
    return e;
  }

  if (name == "torus") {
    if (n != 2) throw UnsupportedDimension("the torus control lives in R^3");
    const double big = p.major, small = p.minor;
    if (!(small > 0.0) || !(big > small)) throw ArgumentError("torus radii must satisfy major > minor > 0");
    ParamBox box{Vector(2), Vector(2)};
    box.lo << 0.0, 0.0;
    box.hi << 2.0 * M_PI, 2.0 * M_PI;
    ImmersedPatch patch = make_patch("torus", 2, box, [big, small](const auto& u) {
      using std::cos;
      using std::sin;
      using T = typename std::remove_cv_t<std::remove_reference_t<decltype(u)>>::value_type;
      const T ring = big + small * cos(u[1]);
      return std::vector<T>{ring * cos(u[0]), ring * sin(u[0]), small * sin(u[1])};
    });
    patch.declare_closed(1);
    detail::orient_along(patch, [big](const Vector& x) {
      Vector c(3);
      const double rho = std::hypot(x[0], x[1]);
      c << big * x[0] / rho, big * x[1] / rho, 0.0;
      return Vector(x - c);
    });
    e.patch = std::move(patch);
    e.exact.f_min = (big - small) * (big - small) / 4.0;
    e.exact.f_max = (big + small) * (big + small) / 4.0;
    e.shrinker = false;
    e.mesher = [big, small](int level) {
      const int scale = 1 << std::max(0, level);
      return torus_mesh(big, small, 8 * scale, 4 * scale);
    };
    return e;
  }

  throw ArgumentError("unknown catalog surface '" + name + "'");
}

}  // namespace fminimal
