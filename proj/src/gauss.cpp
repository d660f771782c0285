#include "milnelab/gauss.hpp"

namespace milnelab {

namespace {

// Legendre P_n and derivative at x.
void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace

GaussRule::GaussRule(int n) {
  if (n < 2) throw std::invalid_argument("GaussRule: order must be >= 2");
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess, Newton iterations.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p, dp;
    for (int it = 0; it < 64; ++it) {
      legendre(n, x, p, dp);
      const double dx = -p / dp;
      x += dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(n, x, p, dp);
    nodes[n - 1 - i] = x;
    weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }

  // Cumulative matrix via the Legendre basis.  mu(x) ~ sum_l c_l P_l(x),
  // c_l = (2l+1)/2 sum_k w_k mu_k P_l(x_k), and
  // int_{-1}^{x} P_l = (P_{l+1}(x) - P_{l-1}(x)) / (2l+1) for l >= 1.
  Eigen::MatrixXd P(n, n);  // P(l, k) = P_l(x_k)
  for (int k = 0; k < n; ++k) {
    P(0, k) = 1.0;
    if (n > 1) P(1, k) = nodes[k];
    for (int l = 2; l < n; ++l)
      P(l, k) =
          ((2.0 * l - 1.0) * nodes[k] * P(l - 1, k) - (l - 1.0) * P(l - 2, k)) /
          l;
  }
  Eigen::MatrixXd Pn1(n, 1);  // P_n(x_k) for the l = n-1 antiderivative
  for (int k = 0; k < n; ++k) {
    double p, dp;
    legendre(n, nodes[k], p, dp);
    Pn1(k, 0) = p;
  }
  cumulative = Eigen::MatrixXd::Zero(n, n);
  for (int l = 0; l < n; ++l) {
    Eigen::RowVectorXd proj =
        (0.5 * (2.0 * l + 1.0)) *
        (P.row(l).array() * weights.transpose().array()).matrix();
    for (int k = 0; k < n; ++k) {
      double anti;  // int_{-1}^{x_k} P_l
      if (l == 0) {
        anti = nodes[k] + 1.0;
      } else {
        const double p_up = (l + 1 < n) ? P(l + 1, k) : Pn1(k, 0);
        // P_{l+1}(-1) - P_{l-1}(-1) = 0, so no boundary constant.
        anti = (p_up - P(l - 1, k)) / (2.0 * l + 1.0);
      }
      cumulative.row(k) += anti * proj;
    }
  }
}

const GaussRule& gauss7() {
  static const GaussRule rule(7);
  return rule;
}

const GaussRule& gauss15() {
  static const GaussRule rule(15);
  return rule;
}

namespace {

double adaptive_rec(const std::function<double(double)>& f, double a, double b,
                    double whole, double tol, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = gauss15().integrate(f, a, mid);
  const double right = gauss15().integrate(f, mid, b);
  const double delta = left + right - whole;
  if (std::abs(delta) <= tol || depth <= 0) return left + right;
  return adaptive_rec(f, a, mid, left, 0.5 * tol, depth - 1) +
         adaptive_rec(f, mid, b, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_gauss(const std::function<double(double)>& f, double a,
                      double b, double abs_tol, int max_depth) {
  if (!(b > a)) return 0.0;
  const double whole = gauss15().integrate(f, a, b);
  return adaptive_rec(f, a, b, whole, abs_tol, max_depth);
}

double adaptive_gauss_semi_infinite(const std::function<double(double)>& f,
                                    double a, double abs_tol, double panel) {
  double acc = 0.0;
  double lo = a;
  int quiet = 0;
  for (int k = 0; k < 100000; ++k) {
    const double hi = lo + panel;
    const double piece = adaptive_gauss(f, lo, hi, abs_tol * 0.25);
    acc += piece;
    lo = hi;
    if (std::abs(piece) < abs_tol * 0.5)
      ++quiet;
    else
      quiet = 0;
    if (quiet >= 3) break;
  }
  return acc;
}

}  // namespace milnelab
