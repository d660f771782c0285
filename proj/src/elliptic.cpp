#include "milnelab/elliptic.hpp"

#include <cmath>
#include <stdexcept>

#include "milnelab/gauss.hpp"

namespace milnelab {

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209008240;

// Kahan-compensated sum of series terms produced by `next`.
template <typename Next>
double kahan_series(Next&& next, int max_terms = 400) {
  double sum = 0.0, comp = 0.0;
  for (int m = 0; m < max_terms; ++m) {
    const double term = next(m);
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    if (std::abs(term) < 1e-18 * (std::abs(sum) + 1e-300) && m > 2) break;
  }
  return sum;
}

}  // namespace

double bessel_i(int k, double x) {
  if (k < 0) k = -k;
  if (x == 0.0) return k == 0 ? 1.0 : 0.0;
  const double q = 0.25 * x * x;
  double t0 = 1.0;  // (x/2)^k / k!
  for (int j = 1; j <= k; ++j) t0 *= 0.5 * x / j;
  double term = t0;
  int m = 0;
  return kahan_series([&](int) {
    const double out = term;
    ++m;
    term *= q / (static_cast<double>(m) * (m + k));
    return out;
  });
}

double bessel_i_prime(int k, double x) {
  if (k == 0) return bessel_i(1, x);
  if (x == 0.0) return k == 1 ? 0.5 : 0.0;
  return 0.5 * (bessel_i(k - 1, x) + bessel_i(k + 1, x));
}

double bessel_i_second(int k, double x) {
  // From the modified Bessel equation; x = 0 by the series limit.
  if (x == 0.0) {
    if (k == 0) return 0.5;
    if (k == 2) return 0.25;
    return 0.0;
  }
  return -bessel_i_prime(k, x) / x +
         (1.0 + static_cast<double>(k) * k / (x * x)) * bessel_i(k, x);
}

double bessel_k0(double x) {
  if (!(x > 0.0)) throw std::domain_error("bessel_k0: x must be > 0");
  const double q = 0.25 * x * x;
  double term = 1.0, harmonic = 0.0;
  int m = 0;
  const double series = kahan_series([&](int) {
    ++m;
    term *= q / (static_cast<double>(m) * m);
    harmonic += 1.0 / m;
    return term * harmonic;
  });
  return -(std::log(0.5 * x) + kEulerGamma) * bessel_i(0, x) + series;
}

double bessel_k1(double x) {
  if (!(x > 0.0)) throw std::domain_error("bessel_k1: x must be > 0");
  const double q = 0.25 * x * x;
  double term = 1.0;  // (x^2/4)^m / (m! (m+1)!)
  double h_m = 0.0, h_m1 = 1.0;
  int m = 0;
  const double series = kahan_series([&](int) {
    const double out = term * (2.0 * kEulerGamma - h_m - h_m1);
    ++m;
    term *= q / (static_cast<double>(m) * (m + 1));
    h_m += 1.0 / m;
    h_m1 += 1.0 / (m + 1);
    return out;
  });
  return std::log(0.5 * x) * bessel_i(1, x) + 1.0 / x + 0.25 * x * series;
}

FourierBoundaryData FourierBoundaryData::constant(double c) {
  FourierBoundaryData d;
  d.cos_coeff = Eigen::ArrayXd::Zero(1);
  d.sin_coeff = Eigen::ArrayXd::Zero(1);
  d.cos_coeff[0] = 2.0 * c;  // a_0/2 convention
  return d;
}

FourierBoundaryData FourierBoundaryData::from_function(
    const std::function<double(double)>& f, int max_mode) {
  if (max_mode < 0) throw std::invalid_argument("from_function: max_mode >= 0");
  const int n = std::max(256, 8 * (max_mode + 1));
  FourierBoundaryData d;
  d.cos_coeff = Eigen::ArrayXd::Zero(max_mode + 1);
  d.sin_coeff = Eigen::ArrayXd::Zero(max_mode + 1);
  for (int j = 0; j < n; ++j) {
    const double theta = -M_PI + (j + 0.5) * 2.0 * M_PI / n;
    const double v = f(theta) * (2.0 / n);
    for (int k = 0; k <= max_mode; ++k) {
      d.cos_coeff[k] += v * std::cos(k * theta);
      if (k > 0) d.sin_coeff[k] += v * std::sin(k * theta);
    }
  }
  return d;
}

double FourierBoundaryData::evaluate(double theta) const {
  double acc = 0.5 * cos_coeff[0];
  for (int k = 1; k <= max_mode(); ++k)
    acc += cos_coeff[k] * std::cos(k * theta) +
           sin_coeff[k] * std::sin(k * theta);
  return acc;
}

double InteriorSolution::radial_mode(int k, double r, int deriv) const {
  if (kind_ == Kind::laplace_dirichlet) {
    // r^k, normalized so the trace at r = 1 is 1.
    switch (deriv) {
      case 0:
        return std::pow(r, k);
      case 1:
        return k == 0 ? 0.0 : k * std::pow(r, k - 1);
      default:
        return k <= 1 ? 0.0 : static_cast<double>(k) * (k - 1) * std::pow(r, k - 2);
    }
  }
  // I_k(r) / I_k'(1): unit Neumann trace.
  const double denom = bessel_i_prime(k, 1.0);
  switch (deriv) {
    case 0:
      return bessel_i(k, r) / denom;
    case 1:
      return bessel_i_prime(k, r) / denom;
    default:
      return bessel_i_second(k, r) / denom;
  }
}

double InteriorSolution::particular(double r, int deriv) const {
  if (part_r_.size() == 0) return 0.0;
  const int n = static_cast<int>(part_r_.size());
  const double h = part_r_[1] - part_r_[0];
  int i = std::min(static_cast<int>(r / h), n - 2);
  if (i < 0) i = 0;
  const double t = (r - part_r_[i]) / h;
  const double v0 = part_v_[i], v1 = part_v_[i + 1];
  const double d0 = part_d_[i], d1 = part_d_[i + 1];
  const double t2 = t * t, t3 = t2 * t;
  if (deriv == 0)
    return v0 * (2 * t3 - 3 * t2 + 1) + v1 * (-2 * t3 + 3 * t2) +
           h * (d0 * (t3 - 2 * t2 + t) + d1 * (t3 - t2));
  if (deriv == 1)
    return (v0 * (6 * t2 - 6 * t) + v1 * (-6 * t2 + 6 * t)) / h +
           d0 * (3 * t2 - 4 * t + 1) + d1 * (3 * t2 - 2 * t);
  // From the ODE: u'' = s - u'/r + u.
  const double up = particular(r, 1);
  const double u = particular(r, 0);
  return (r > 1e-12 ? source_(r) - up / r + u : 0.5 * (source_(0.0) + u));
}

double InteriorSolution::value(double r, double theta) const {
  double acc = 0.5 * mode_cos_[0] * radial_mode(0, r, 0);
  for (int k = 1; k < mode_cos_.size(); ++k) {
    const double rad = radial_mode(k, r, 0);
    acc += rad * (mode_cos_[k] * std::cos(k * theta) +
                  mode_sin_[k] * std::sin(k * theta));
  }
  return acc + particular(r, 0);
}

double InteriorSolution::value_xy(double x, double y) const {
  return value(std::hypot(x, y), std::atan2(y, x));
}

Eigen::Vector2d InteriorSolution::gradient(double x, double y) const {
  const double r = std::hypot(x, y);
  if (r < 1e-12) {
    // Only the k = 1 modes contribute at the center.
    Eigen::Vector2d g(0.0, 0.0);
    if (mode_cos_.size() > 1) {
      const double scale = kind_ == Kind::laplace_dirichlet
                               ? 1.0
                               : 0.5 / bessel_i_prime(1, 1.0);
      g[0] = mode_cos_[1] * scale;
      g[1] = mode_sin_[1] * scale;
    }
    return g;
  }
  const double theta = std::atan2(y, x);
  double dr = 0.5 * mode_cos_[0] * radial_mode(0, r, 1) + particular(r, 1);
  double dt_over_r = 0.0;
  for (int k = 1; k < mode_cos_.size(); ++k) {
    const double rad = radial_mode(k, r, 0);
    const double radp = radial_mode(k, r, 1);
    const double c = std::cos(k * theta), s = std::sin(k * theta);
    dr += radp * (mode_cos_[k] * c + mode_sin_[k] * s);
    dt_over_r += rad * k * (-mode_cos_[k] * s + mode_sin_[k] * c) / r;
  }
  const double ct = std::cos(theta), st = std::sin(theta);
  return Eigen::Vector2d(dr * ct - dt_over_r * st, dr * st + dt_over_r * ct);
}

double InteriorSolution::pde_residual(double r, double theta) const {
  if (r < 1e-9) r = 1e-9;
  double lap = 0.0, val = 0.0;
  for (int k = 0; k < mode_cos_.size(); ++k) {
    const double ang = k == 0 ? 0.5 * mode_cos_[0]
                              : mode_cos_[k] * std::cos(k * theta) +
                                    mode_sin_[k] * std::sin(k * theta);
    const double R = radial_mode(k, r, 0);
    const double Rp = radial_mode(k, r, 1);
    const double Rpp = radial_mode(k, r, 2);
    lap += ang * (Rpp + Rp / r - static_cast<double>(k) * k / (r * r) * R);
    val += ang * R;
  }
  lap += particular(r, 2) + particular(r, 1) / r;
  val += particular(r, 0);
  if (kind_ == Kind::laplace_dirichlet) return lap;
  const double s = source_ ? source_(r) : 0.0;
  return lap - val - s;
}

InteriorSolution solve_laplace_dirichlet(const FourierBoundaryData& data) {
  InteriorSolution sol;
  sol.kind_ = InteriorSolution::Kind::laplace_dirichlet;
  sol.data_ = data;
  sol.mode_cos_ = data.cos_coeff;
  sol.mode_sin_ = data.sin_coeff;
  return sol;
}

InteriorSolution solve_modified_helmholtz_neumann(
    const FourierBoundaryData& neumann_data,
    std::function<double(double)> radial_source) {
  InteriorSolution sol;
  sol.kind_ = InteriorSolution::Kind::modified_helmholtz_neumann;
  sol.data_ = neumann_data;
  sol.mode_cos_ = neumann_data.cos_coeff;
  sol.mode_sin_ = neumann_data.sin_coeff;
  sol.source_ = std::move(radial_source);
  if (sol.source_) {
    // Particular radial solution u_p = I0(r) P(r) - K0(r) Q(r) with
    // P = int_0^r K0 t s dt, Q = int_0^r I0 t s dt; regular at the center.
    const int n = 1024;
    sol.part_r_.resize(n + 1);
    sol.part_v_.resize(n + 1);
    sol.part_d_.resize(n + 1);
    double P = 0.0, Q = 0.0;
    sol.part_r_[0] = 0.0;
    sol.part_v_[0] = 0.0;
    sol.part_d_[0] = 0.0;
    for (int i = 1; i <= n; ++i) {
      const double a = static_cast<double>(i - 1) / n;
      const double b = static_cast<double>(i) / n;
      P += adaptive_gauss(
          [&](double t) { return bessel_k0(std::max(t, 1e-14)) * t * sol.source_(t); },
          a, b, 1e-14);
      Q += adaptive_gauss([&](double t) { return bessel_i(0, t) * t * sol.source_(t); },
                          a, b, 1e-14);
      sol.part_r_[i] = b;
      sol.part_v_[i] = bessel_i(0, b) * P - bessel_k0(b) * Q;
      sol.part_d_[i] = bessel_i(1, b) * P + bessel_k1(b) * Q;
    }
    // Remove the particular Neumann trace through the k = 0 mode.
    sol.mode_cos_[0] -= 2.0 * sol.part_d_[n];
  }
  return sol;
}

}  // namespace milnelab
