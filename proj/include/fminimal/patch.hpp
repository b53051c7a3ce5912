#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fminimal/ambient.hpp"
#include "fminimal/errors.hpp"
#include "fminimal/jet.hpp"
#include "fminimal/quadrature.hpp"

namespace fminimal {

/// Position and first/second parameter derivatives of an immersion at one
/// parameter point. second[a](i, j) = d^2 X_a / du_i du_j.
struct PatchSample {
  Vector point;
  Matrix jacobian;
  std::vector<Matrix> second;
};

/// A side of the parameter box: `axis`, and `upper` selects hi over lo.
struct BoxFace {
  int axis = 0;
  bool upper = false;
};

/// A parametric hypersurface chart X: box subset R^n -> R^{n+1}.
///
/// Patches carry no global topology, so closedness and genus are declared by
/// whoever builds them. The unit normal is the one completing the tangent
/// frame to a positively oriented basis, flipped when `orientation` is -1.
class ImmersedPatch {
 public:
  using Evaluator = std::function<PatchSample(const Vector&)>;
  using PointMap = std::function<Vector(const Vector&)>;

  ImmersedPatch(std::string name, int param_dim, ParamBox box, PointMap embed, Evaluator evaluate)
      : name_(std::move(name)),
        n_(param_dim),
        box_(std::move(box)),
        embed_(std::move(embed)),
        evaluate_(std::move(evaluate)) {
    if (n_ < 1) throw ArgumentError("patch parameter dimension must be positive");
    if (box_.dim() != n_) throw ArgumentError("parameter box dimension mismatch");
    if (((box_.hi - box_.lo).array() <= 0.0).any()) throw ArgumentError("parameter box must have positive extent");
  }

  const std::string& name() const noexcept { return name_; }
  int param_dim() const noexcept { return n_; }
  int ambient_dim() const noexcept { return n_ + 1; }
  const ParamBox& box() const noexcept { return box_; }

  Vector embed(const Vector& u) const { return embed_(u); }
  Matrix jacobian(const Vector& u) const { return evaluate_(u).jacobian; }
  std::vector<Matrix> second_deriv(const Vector& u) const { return evaluate_(u).second; }
  PatchSample sample(const Vector& u) const { return evaluate_(u); }

  int orientation() const noexcept { return orientation_; }
  bool closed() const noexcept { return closed_; }
  std::optional<int> genus() const noexcept { return genus_; }
  const std::vector<BoxFace>& boundary_faces() const noexcept { return boundary_faces_; }

  ImmersedPatch& set_orientation(int sign) {
    orientation_ = sign >= 0 ? 1 : -1;
    return *this;
  }
  ImmersedPatch& declare_closed(int genus) {
    closed_ = true;
    genus_ = genus;
    boundary_faces_.clear();
    return *this;
  }
  ImmersedPatch& declare_boundary(std::vector<BoxFace> faces) {
    closed_ = false;
    boundary_faces_ = std::move(faces);
    return *this;
  }
  ImmersedPatch& declare_genus(int genus) {
    genus_ = genus;
    return *this;
  }

 private:
  std::string name_;
  int n_;
  ParamBox box_;
  PointMap embed_;
  Evaluator evaluate_;
  int orientation_ = 1;
  bool closed_ = false;
  std::optional<int> genus_;
  std::vector<BoxFace> boundary_faces_;
};

/// Build a patch from a parametrization written generically over its scalar
/// type: `map(const std::vector<T>& u) -> std::vector<T>` of length n + 1.
/// Derivatives are obtained exactly by evaluating the map on second-order jets.
template <class Map>
ImmersedPatch make_patch(std::string name, int param_dim, ParamBox box, Map map) {
  auto shared = std::make_shared<Map>(std::move(map));
  auto embed = [shared](const Vector& u) -> Vector {
    std::vector<double> in(u.data(), u.data() + u.size());
    const std::vector<double> out = (*shared)(in);
    return Eigen::Map<const Vector>(out.data(), static_cast<Eigen::Index>(out.size()));
  };
  auto evaluate = [shared, param_dim](const Vector& u) -> PatchSample {
    std::vector<Jet> in;
    in.reserve(static_cast<std::size_t>(param_dim));
    for (int i = 0; i < param_dim; ++i) in.push_back(Jet::variable(u[i], i, param_dim));
    const std::vector<Jet> out = (*shared)(in);
    const auto d = static_cast<Eigen::Index>(out.size());
    PatchSample s;
    s.point.resize(d);
    s.jacobian.resize(d, param_dim);
    s.second.reserve(out.size());
    for (Eigen::Index a = 0; a < d; ++a) {
      s.point[a] = out[a].v;
      s.jacobian.row(a) = out[a].g.transpose();
      s.second.push_back(out[a].h);
    }
    return s;
  };
  return ImmersedPatch(std::move(name), param_dim, std::move(box), std::move(embed), std::move(evaluate));
}

/// The same patch moved by an ambient rotation (or any orthogonal map) Q.
inline ImmersedPatch rotated(const ImmersedPatch& patch, const Matrix& q) {
  if (q.rows() != patch.ambient_dim() || q.cols() != patch.ambient_dim())
    throw ArgumentError("rotation has the wrong size");
  auto base = std::make_shared<ImmersedPatch>(patch);
  auto embed = [base, q](const Vector& u) -> Vector { return q * base->embed(u); };
  auto evaluate = [base, q](const Vector& u) -> PatchSample {
    PatchSample s = base->sample(u);
    PatchSample r;
    r.point = q * s.point;
    r.jacobian = q * s.jacobian;
    for (Eigen::Index a = 0; a < q.rows(); ++a) {
      Matrix h = Matrix::Zero(s.second[0].rows(), s.second[0].cols());
      for (Eigen::Index b = 0; b < q.cols(); ++b) h += q(a, b) * s.second[b];
      r.second.push_back(std::move(h));
    }
    return r;
  };
  ImmersedPatch out(patch.name(), patch.param_dim(), patch.box(), std::move(embed), std::move(evaluate));
  // A reflection reverses the frame orientation; keep the geometric normal.
  out.set_orientation(q.determinant() < 0 ? -patch.orientation() : patch.orientation());
  if (patch.closed()) out.declare_closed(patch.genus().value_or(0));
  else out.declare_boundary(patch.boundary_faces());
  if (patch.genus()) out.declare_genus(*patch.genus());
  return out;
}

}  // namespace fminimal
