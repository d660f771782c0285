#pragma once

// Test-only reference integrators, independent of the library quadrature.

#include <cmath>
#include <functional>

namespace oracles {

// Adaptive Simpson on [a, b].
inline double simpson_rec(const std::function<double(double)>& f, double a,
                          double b, double fa, double fm, double fb,
                          double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-12) {
  if (!(b > a)) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60);
}

// Semi-infinite integral of an exponentially decaying integrand.
inline double integrate_to_infinity(const std::function<double(double)>& f,
                                    double a, double tol = 1e-12) {
  double acc = 0.0;
  int quiet = 0;
  for (int k = 0; k < 10000; ++k) {
    const double piece = integrate(f, a + k, a + k + 1.0, tol * 0.1);
    acc += piece;
    if (std::abs(piece) < tol)
      ++quiet;
    else
      quiet = 0;
    if (quiet >= 3) break;
  }
  return acc;
}

}  // namespace oracles
