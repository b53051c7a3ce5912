#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "fminimal/errors.hpp"

namespace fminimal {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Provenance { closed_form, finite_difference };

inline const char* to_string(Provenance p) {
  return p == Provenance::closed_form ? "closed_form" : "finite_difference";
}

/// Which distinguished weight an ambient carries. Operations such as the
/// shrinker residual only accept `gaussian`.
enum class WeightKind { gaussian, zero, custom };

using ScalarField = std::function<double(const Vector&)>;
using VectorField = std::function<Vector(const Vector&)>;
using MatrixField = std::function<Matrix(const Vector&)>;

/// Central-difference gradient with step h along each axis.
inline Vector finite_difference_gradient(const ScalarField& f, const Vector& x, double h) {
  Vector g(x.size());
  Vector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    xp[i] = xi + h;
    const double fp = f(xp);
    xp[i] = xi - h;
    const double fm = f(xp);
    xp[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// Central-difference Hessian. The off-diagonal block is computed once and
/// mirrored, so the result is exactly symmetric.
inline Matrix finite_difference_hessian(const ScalarField& f, const Vector& x, double h) {
  const Eigen::Index d = x.size();
  Matrix hess(d, d);
  const double f0 = f(x);
  Vector y = x;
  for (Eigen::Index i = 0; i < d; ++i) {
    y[i] = x[i] + h;
    const double fp = f(y);
    y[i] = x[i] - h;
    const double fm = f(y);
    y[i] = x[i];
    hess(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
    for (Eigen::Index j = i + 1; j < d; ++j) {
      auto eval = [&](double si, double sj) {
        y[i] = x[i] + si * h;
        y[j] = x[j] + sj * h;
        const double v = f(y);
        y[i] = x[i];
        y[j] = x[j];
        return v;
      };
      const double mixed = (eval(1, 1) - eval(1, -1) - eval(-1, 1) + eval(-1, -1)) / (4.0 * h * h);
      hess(i, j) = mixed;
      hess(j, i) = mixed;
    }
  }
  return hess;
}

/// Flat Euclidean space R^dim carrying the density e^{-f}. Immutable once
/// built; all evaluators are pure.
///
/// In a flat ambient the Bakry-Emery tensor Ric + Hess f is just Hess f.
class WeightedAmbient {
 public:
  /// Default gradient step for the finite-difference fallback, scaled by max(1, |x|).
  static constexpr double kGradientStep = 1e-5;
  /// Default Hessian step for the finite-difference fallback, scaled by max(1, |x|).
  static constexpr double kHessianStep = 1e-4;

  WeightedAmbient(int dim, std::string name, WeightKind kind, ScalarField value, VectorField gradient,
                  MatrixField hessian)
      : dim_(dim),
        name_(std::move(name)),
        kind_(kind),
        provenance_(Provenance::closed_form),
        value_(std::move(value)),
        gradient_(std::move(gradient)),
        hessian_(std::move(hessian)) {
    if (dim_ < 3) throw UnsupportedDimension("ambient dimension must be at least 3 (n >= 2)");
  }

  /// Weight given by its value only; derivatives come from central differences.
  WeightedAmbient(int dim, std::string name, ScalarField value)
      : dim_(dim),
        name_(std::move(name)),
        kind_(WeightKind::custom),
        provenance_(Provenance::finite_difference),
        value_(std::move(value)) {
    if (dim_ < 3) throw UnsupportedDimension("ambient dimension must be at least 3 (n >= 2)");
    auto f = value_;
    gradient_ = [f](const Vector& x) {
      return finite_difference_gradient(f, x, kGradientStep * std::max(1.0, x.norm()));
    };
    hessian_ = [f](const Vector& x) {
      return finite_difference_hessian(f, x, kHessianStep * std::max(1.0, x.norm()));
    };
  }

  int dim() const noexcept { return dim_; }
  /// Hypersurface dimension n = dim - 1.
  int n() const noexcept { return dim_ - 1; }
  const std::string& name() const noexcept { return name_; }
  WeightKind kind() const noexcept { return kind_; }
  Provenance provenance() const noexcept { return provenance_; }
  bool is_gaussian() const noexcept { return kind_ == WeightKind::gaussian; }
  const ScalarField& value_field() const noexcept { return value_; }

  double weight(const Vector& x) const {
    check_point(x);
    const double v = value_(x);
    if (!std::isfinite(v)) throw DomainError("weight is not finite at the requested point");
    return v;
  }

  Vector weight_grad(const Vector& x) const {
    check_point(x);
    return gradient_(x);
  }

  Matrix weight_hess(const Vector& x) const {
    check_point(x);
    return hessian_(x);
  }

  /// Ambient Laplacian of f (trace of the Hessian).
  double weight_laplacian(const Vector& x) const { return weight_hess(x).trace(); }

  /// Ric_f(v, v) = v . Hess f(x) . v for a unit vector v.
  double bakry_emery_ricci(const Vector& x, const Vector& v) const {
    check_point(x);
    if (v.size() != dim_) throw ContractViolation("direction has the wrong dimension");
    if (std::abs(v.norm() - 1.0) > 1e-12) throw ContractViolation("direction must be a unit vector");
    weight(x);
    return v.dot(hessian_(x) * v);
  }

 private:
  void check_point(const Vector& x) const {
    if (x.size() != dim_) throw ContractViolation("point has the wrong dimension");
    if (!x.allFinite()) throw DomainError("point has non-finite coordinates");
  }

  int dim_;
  std::string name_;
  WeightKind kind_;
  Provenance provenance_;
  ScalarField value_;
  VectorField gradient_;
  MatrixField hessian_;
};

/// The Gaussian soliton: f = |x|^2 / 4, grad f = x / 2, Hess f = I / 2.
inline WeightedAmbient gaussian_soliton(int dim) {
  if (dim < 3) throw UnsupportedDimension("the Gaussian soliton needs dim >= 3");
  return WeightedAmbient(
      dim, "gaussian", WeightKind::gaussian, [](const Vector& x) { return 0.25 * x.squaredNorm(); },
      [](const Vector& x) -> Vector { return 0.5 * x; },
      [dim](const Vector&) -> Matrix { return 0.5 * Matrix::Identity(dim, dim); });
}

/// Unweighted Euclidean space (f identically zero).
inline WeightedAmbient zero_weight(int dim) {
  return WeightedAmbient(
      dim, "zero", WeightKind::zero, [](const Vector&) { return 0.0; },
      [dim](const Vector&) -> Vector { return Vector::Zero(dim); },
      [dim](const Vector&) -> Matrix { return Matrix::Zero(dim, dim); });
}

/// A closed-form custom weight with user-supplied derivatives.
inline WeightedAmbient custom_weight(int dim, std::string name, ScalarField value, VectorField gradient,
                                     MatrixField hessian) {
  return WeightedAmbient(dim, std::move(name), WeightKind::custom, std::move(value), std::move(gradient),
                         std::move(hessian));
}

/// A custom weight known only by value; gradient and Hessian use central differences.
inline WeightedAmbient sampled_weight(int dim, std::string name, ScalarField value) {
  return WeightedAmbient(dim, std::move(name), std::move(value));
}

}  // namespace fminimal
