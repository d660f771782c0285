#include "milnelab/grids.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace milnelab {

Eigen::ArrayXd graded_nodes(int n_nodes, double length, double first_spacing,
                            double ratio) {
  if (n_nodes < 2) throw std::invalid_argument("graded_nodes: need >= 2 nodes");
  if (!(length > 0.0) || !(first_spacing > 0.0) || !(ratio >= 1.0))
    throw std::invalid_argument("graded_nodes: bad parameters");
  const int n_cells = n_nodes - 1;

  // Choose the number of graded cells m so the remaining uniform cells are
  // at least as wide as the last graded one.
  std::vector<double> spacing;
  spacing.reserve(n_cells);
  double pos = 0.0, d = first_spacing;
  int m = 0;
  while (m < n_cells - 1) {
    const double rest = length - (pos + d);
    const int left = n_cells - (m + 1);
    if (rest <= 0.0) break;
    if (left == 0) break;
    if (rest / left < d * ratio) break;
    spacing.push_back(d);
    pos += d;
    d *= ratio;
    ++m;
  }
  const int left = n_cells - m;
  const double uniform = (length - pos) / left;
  if (!(uniform > 0.0))
    throw std::invalid_argument("graded_nodes: grid over-constrained");
  for (int k = 0; k < left; ++k) spacing.push_back(uniform);

  Eigen::ArrayXd nodes(n_nodes);
  nodes[0] = 0.0;
  for (int i = 0; i < n_cells; ++i) nodes[i + 1] = nodes[i] + spacing[i];
  nodes[n_cells] = length;  // close exactly
  return nodes;
}

RadialGrid::RadialGrid(int n_nodes, double length, double grading_ratio,
                       double first_spacing) {
  if (first_spacing > 1e-2)
    throw std::invalid_argument("RadialGrid: first spacing must be <= 1e-2");
  if (length < 25.0)
    throw std::invalid_argument("RadialGrid: slab length must be >= 25");
  nodes_ = graded_nodes(n_nodes, length, first_spacing, grading_ratio);
}

int RadialGrid::cell_of(double x) const {
  const double* begin = nodes_.data();
  const double* end = begin + nodes_.size();
  const double* it = std::upper_bound(begin, end, x);
  int i = static_cast<int>(it - begin) - 1;
  return std::clamp(i, 0, static_cast<int>(nodes_.size()) - 2);
}

DiskGrid::DiskGrid(int n_r, int n_theta, AngularQuadrature velocity,
                   double boundary_spacing, double grading_ratio)
    : n_theta_(n_theta), velocity_(std::move(velocity)) {
  if (n_theta < 4) throw std::invalid_argument("DiskGrid: n_theta >= 4");
  // Grade in the wall distance 1 - r, then mirror so r = 1 is the first ring.
  const Eigen::ArrayXd mu = graded_nodes(n_r, 1.0, boundary_spacing, grading_ratio);
  r_.resize(n_r);
  for (int i = 0; i < n_r; ++i) r_[i] = 1.0 - mu[n_r - 1 - i];
  r_[0] = 0.0;
  r_[n_r - 1] = 1.0;
  theta_.resize(n_theta);
  for (int k = 0; k < n_theta; ++k)
    theta_[k] = -M_PI + k * (2.0 * M_PI / n_theta);
}

int DiskGrid::radial_cell_of(double x) const {
  const double* begin = r_.data();
  const double* end = begin + r_.size();
  const double* it = std::upper_bound(begin, end, x);
  int i = static_cast<int>(it - begin) - 1;
  return std::clamp(i, 0, static_cast<int>(r_.size()) - 2);
}

}  // namespace milnelab
