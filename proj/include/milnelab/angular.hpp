#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace milnelab {

/// Midpoint-offset angular quadrature on [-pi, pi): nodes at
/// -pi + (j + 1/2) 2pi/n with uniform weights 2pi/n.  Construction rejects
/// counts whose offset grid would place a node on sin(phi) = 0 or
/// cos(phi) = 0 (n must be a positive multiple of 4, n >= 8).
class AngularQuadrature {
 public:
  explicit AngularQuadrature(int n_angles) {
    if (n_angles < 8 || n_angles % 2 != 0)
      throw std::invalid_argument("AngularQuadrature: need even n >= 8");
    nodes_.resize(n_angles);
    weights_ = Eigen::ArrayXd::Constant(n_angles, 2.0 * M_PI / n_angles);
    for (int j = 0; j < n_angles; ++j)
      nodes_[j] = -M_PI + (j + 0.5) * 2.0 * M_PI / n_angles;
    for (int j = 0; j < n_angles; ++j)
      if (std::abs(std::sin(nodes_[j])) < 1e-12 ||
          std::abs(std::cos(nodes_[j])) < 1e-12)
        throw std::invalid_argument(
            "AngularQuadrature: offset grid has a grazing or polar node; "
            "use a multiple of 4");
  }

  int size() const { return static_cast<int>(nodes_.size()); }
  const Eigen::ArrayXd& nodes() const { return nodes_; }
  const Eigen::ArrayXd& weights() const { return weights_; }
  double node(int j) const { return nodes_[j]; }
  double weight(int j) const { return weights_[j]; }

 private:
  Eigen::ArrayXd nodes_;
  Eigen::ArrayXd weights_;
};

/// (1/2pi) sum_j w_j f_j over the full circle.
template <typename Derived>
double angular_average(const Eigen::ArrayBase<Derived>& f,
                       const AngularQuadrature& quad) {
  if (f.size() != quad.size())
    throw std::invalid_argument("angular_average: length mismatch");
  return (f * quad.weights()).sum() / (2.0 * M_PI);
}

/// Diffusive-reflection moment P f = -1/2 int_{sin phi < 0} f sin phi dphi
/// of a boundary trace given on the full angular grid.
template <typename Derived>
double half_moment(const Eigen::ArrayBase<Derived>& f,
                   const AngularQuadrature& quad) {
  if (f.size() != quad.size())
    throw std::invalid_argument("half_moment: length mismatch");
  double acc = 0.0;
  for (int j = 0; j < quad.size(); ++j) {
    const double s = std::sin(quad.node(j));
    if (s < 0.0) acc -= 0.5 * quad.weight(j) * f[j] * s;
  }
  return acc;
}

/// <g, f> = int g f dphi with the quadrature weights.
template <typename DerivedA, typename DerivedB>
double angular_inner(const Eigen::ArrayBase<DerivedA>& g,
                     const Eigen::ArrayBase<DerivedB>& f,
                     const AngularQuadrature& quad) {
  return (g * f * quad.weights()).sum();
}

template <typename Derived>
double sup_norm(const Eigen::ArrayBase<Derived>& f) {
  return f.size() == 0 ? 0.0 : f.abs().maxCoeff();
}

/// L2 norm over the angular circle: ( int |f|^2 dphi )^{1/2}.
template <typename Derived>
double l2_norm(const Eigen::ArrayBase<Derived>& f,
               const AngularQuadrature& quad) {
  if (f.size() != quad.size())
    throw std::invalid_argument("l2_norm: length mismatch");
  return std::sqrt((f.square() * quad.weights()).sum());
}

}  // namespace milnelab
