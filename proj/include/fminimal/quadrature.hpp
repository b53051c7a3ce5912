#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fminimal/errors.hpp"

namespace fminimal {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1] by the Golub-Welsch eigenvalue method.
inline QuadratureRule gauss_legendre(int order) {
  if (order < 1) throw ArgumentError("quadrature order must be positive");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int k = 0; k < order; ++k) {
    rule.nodes[k] = es.eigenvalues()[k];
    const double v0 = es.eigenvectors()(0, k);
    rule.weights[k] = 2.0 * v0 * v0;
  }
  // Symmetrize to remove eigen-solver noise.
  for (int k = 0; k < order / 2; ++k) {
    const int m = order - 1 - k;
    const double x = 0.5 * (rule.nodes[m] - rule.nodes[k]);
    const double w = 0.5 * (rule.weights[m] + rule.weights[k]);
    rule.nodes[k] = -x;
    rule.nodes[m] = x;
    rule.weights[k] = w;
    rule.weights[m] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  return rule;
}

/// Axis-aligned parameter box [lo, hi].
struct ParamBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  Eigen::Index dim() const { return lo.size(); }
  double measure() const { return (hi - lo).prod(); }
  bool contains(const Eigen::VectorXd& u) const {
    return ((u - lo).array() >= 0.0).all() && ((hi - u).array() >= 0.0).all();
  }
};

/// Visit every node of the tensor Gauss-Legendre rule of `order` points per
/// axis on each of `cells`^dim equal sub-boxes. fn(u, weight).
template <class Fn>
void for_each_tensor_node(const ParamBox& box, int order, int cells, Fn&& fn) {
  const QuadratureRule rule = gauss_legendre(order);
  const Eigen::Index d = box.dim();
  const int per_axis = order * cells;
  const Eigen::VectorXd cell = (box.hi - box.lo) / static_cast<double>(cells);
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  Eigen::VectorXd u(d);
  for (;;) {
    double w = 1.0;
    for (Eigen::Index a = 0; a < d; ++a) {
      const int c = idx[a] / order;
      const int q = idx[a] % order;
      const double half = 0.5 * cell[a];
      u[a] = box.lo[a] + (c + 0.5) * cell[a] + half * rule.nodes[q];
      w *= half * rule.weights[q];
    }
    fn(static_cast<const Eigen::VectorXd&>(u), w);
    Eigen::Index a = 0;
    while (a < d && ++idx[a] == per_axis) {
      idx[a] = 0;
      ++a;
    }
    if (a == d) break;
  }
}

}  // namespace fminimal
