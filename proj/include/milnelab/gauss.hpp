#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace milnelab {

/// Gauss-Legendre rule on [-1,1] plus the spectral cumulative-integration
/// matrix C: given samples m_k = mu(x_k), (C m)_k approximates
/// integral from -1 to x_k of the degree-(n-1) interpolant of mu.
struct GaussRule {
  Eigen::ArrayXd nodes;    // ascending in (-1,1)
  Eigen::ArrayXd weights;  // positive, sum to 2
  Eigen::MatrixXd cumulative;

  explicit GaussRule(int n);

  /// Integrate f over [a,b] with this rule.
  template <typename F>
  double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double acc = 0.0;
    for (int k = 0; k < nodes.size(); ++k)
      acc += weights[k] * f(mid + half * nodes[k]);
    return half * acc;
  }
};

/// Shared default rules, built once.
const GaussRule& gauss7();
const GaussRule& gauss15();

/// Adaptive Gauss quadrature of f on [a,b]: bisects panels until the
/// 15-point value is within tol of the sum of the two half-panel values.
double adaptive_gauss(const std::function<double(double)>& f, double a,
                      double b, double abs_tol, int max_depth = 48);

/// Adaptive quadrature of f on [a,inf) for exponentially decaying f.
/// Marches unit panels until the running increment falls below tol.
double adaptive_gauss_semi_infinite(const std::function<double(double)>& f,
                                    double a, double abs_tol,
                                    double panel = 1.0);

}  // namespace milnelab
