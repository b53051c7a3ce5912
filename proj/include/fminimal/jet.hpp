#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace fminimal {

/// Second-order forward-mode jet: value, gradient and Hessian with respect
/// to a fixed set of seed variables. Used to differentiate parametrizations
/// exactly instead of hand-coding their derivatives.
struct Jet {
  double v = 0.0;
  Eigen::VectorXd g;
  Eigen::MatrixXd h;

  Jet() = default;
  Jet(double value, Eigen::Index vars) : v(value), g(Eigen::VectorXd::Zero(vars)), h(Eigen::MatrixXd::Zero(vars, vars)) {}

  static Jet variable(double value, Eigen::Index index, Eigen::Index vars) {
    Jet j(value, vars);
    j.g[index] = 1.0;
    return j;
  }

  Eigen::Index vars() const { return g.size(); }
};

namespace detail {
// f(a) given f, f', f'' at a.
inline Jet chain(const Jet& a, double f0, double f1, double f2) {
  Jet r;
  r.v = f0;
  r.g = f1 * a.g;
  r.h = f1 * a.h + f2 * a.g * a.g.transpose();
  return r;
}
}  // namespace detail

inline Jet operator+(const Jet& a, const Jet& b) {
  Jet r;
  r.v = a.v + b.v;
  r.g = a.g + b.g;
  r.h = a.h + b.h;
  return r;
}
inline Jet operator-(const Jet& a, const Jet& b) {
  Jet r;
  r.v = a.v - b.v;
  r.g = a.g - b.g;
  r.h = a.h - b.h;
  return r;
}
inline Jet operator-(const Jet& a) {
  Jet r;
  r.v = -a.v;
  r.g = -a.g;
  r.h = -a.h;
  return r;
}
inline Jet operator*(const Jet& a, const Jet& b) {
  Jet r;
  r.v = a.v * b.v;
  r.g = a.v * b.g + b.v * a.g;
  r.h = a.v * b.h + b.v * a.h + a.g * b.g.transpose() + b.g * a.g.transpose();
  return r;
}
inline Jet operator+(const Jet& a, double c) {
  Jet r = a;
  r.v += c;
  return r;
}
inline Jet operator+(double c, const Jet& a) { return a + c; }
inline Jet operator-(const Jet& a, double c) { return a + (-c); }
inline Jet operator-(double c, const Jet& a) { return (-a) + c; }
inline Jet operator*(const Jet& a, double c) {
  Jet r;
  r.v = a.v * c;
  r.g = a.g * c;
  r.h = a.h * c;
  return r;
}
inline Jet operator*(double c, const Jet& a) { return a * c; }
inline Jet operator/(const Jet& a, double c) { return a * (1.0 / c); }
inline Jet operator/(double c, const Jet& a) {
  const double inv = 1.0 / a.v;
  return detail::chain(a, c * inv, -c * inv * inv, 2.0 * c * inv * inv * inv);
}
inline Jet operator/(const Jet& a, const Jet& b) { return a * (1.0 / b); }

inline Jet sin(const Jet& a) { return detail::chain(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
inline Jet cos(const Jet& a) { return detail::chain(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }
inline Jet exp(const Jet& a) {
  const double e = std::exp(a.v);
  return detail::chain(a, e, e, e);
}
inline Jet sqrt(const Jet& a) {
  const double s = std::sqrt(a.v);
  return detail::chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}

}  // namespace fminimal
