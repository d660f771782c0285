#pragma once

#include <Eigen/Dense>

#include "milnelab/angular.hpp"

namespace milnelab {

/// Boundary-layer coordinate grid on [0, L]: geometrically graded spacings
/// near eta = 0 (ratio r), uniform tail once the spacing reaches its cap.
class RadialGrid {
 public:
  RadialGrid(int n_nodes, double length, double grading_ratio = 1.15,
             double first_spacing = 5e-3);

  int size() const { return static_cast<int>(nodes_.size()); }
  double length() const { return nodes_[nodes_.size() - 1]; }
  const Eigen::ArrayXd& nodes() const { return nodes_; }
  double node(int i) const { return nodes_[i]; }

  /// Largest i with nodes[i] <= x (x clamped to [0, L]).
  int cell_of(double x) const;

 private:
  Eigen::ArrayXd nodes_;
};

/// Polar grid of the unit disk plus a velocity-angle quadrature.  Radial
/// nodes are graded toward the boundary ring r = 1 (which is always present,
/// as is the center r = 0); theta nodes are uniform on [-pi, pi).
class DiskGrid {
 public:
  DiskGrid(int n_r, int n_theta, AngularQuadrature velocity,
           double boundary_spacing = 2e-3, double grading_ratio = 1.15);

  int n_r() const { return static_cast<int>(r_.size()); }
  int n_theta() const { return n_theta_; }
  int n_vel() const { return velocity_.size(); }
  const Eigen::ArrayXd& r() const { return r_; }
  const Eigen::ArrayXd& theta() const { return theta_; }
  const AngularQuadrature& velocity() const { return velocity_; }

  /// Flat index of (i_r, k_theta, j_vel), velocity fastest.
  int index(int i, int k, int j) const {
    return (i * n_theta_ + k) * velocity_.size() + j;
  }
  int field_size() const { return n_r() * n_theta_ * velocity_.size(); }

  /// Largest radial cell index i with r[i] <= x.
  int radial_cell_of(double x) const;

 private:
  Eigen::ArrayXd r_;
  Eigen::ArrayXd theta_;
  int n_theta_;
  AngularQuadrature velocity_;
};

/// Shared helper: n+1 geometrically graded then uniform spacings covering
/// [0, length] exactly.
Eigen::ArrayXd graded_nodes(int n_nodes, double length, double first_spacing,
                            double ratio);

}  // namespace milnelab
