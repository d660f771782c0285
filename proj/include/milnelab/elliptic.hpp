#pragma once

#include <Eigen/Dense>
#include <functional>

namespace milnelab {

/// Truncated Fourier series on the boundary circle:
/// f(theta) = a_0/2 + sum_{k>=1} a_k cos(k theta) + b_k sin(k theta).
struct FourierBoundaryData {
  Eigen::ArrayXd cos_coeff;  // a_0 .. a_K
  Eigen::ArrayXd sin_coeff;  // b_0 (unused) .. b_K

  static FourierBoundaryData constant(double c);
  static FourierBoundaryData from_function(const std::function<double(double)>& f,
                                           int max_mode);
  int max_mode() const { return static_cast<int>(cos_coeff.size()) - 1; }
  double evaluate(double theta) const;
};

/// Modified Bessel I_k by ascending power series (Kahan-compensated).
/// Valid for the disk range x in [0, 1], k <= 64.
double bessel_i(int k, double x);
double bessel_i_prime(int k, double x);
double bessel_i_second(int k, double x);
double bessel_k0(double x);
double bessel_k1(double x);

/// Spectral interior solution on the unit disk: either the harmonic
/// extension of Dirichlet data or the modified Helmholtz solution
/// (Laplacian u - u = source) with Neumann data, mode by mode.
class InteriorSolution {
 public:
  enum class Kind { laplace_dirichlet, modified_helmholtz_neumann };

  double value(double r, double theta) const;
  double value_xy(double x, double y) const;
  /// Cartesian gradient by exact modal differentiation.
  Eigen::Vector2d gradient(double x, double y) const;
  /// PDE residual (Laplacian u, resp. Laplacian u - u - source) from
  /// analytic second derivatives of the modal functions.
  double pde_residual(double r, double theta) const;

  Kind kind() const { return kind_; }
  const FourierBoundaryData& data() const { return data_; }

 private:
  friend InteriorSolution solve_laplace_dirichlet(const FourierBoundaryData&);
  friend InteriorSolution solve_modified_helmholtz_neumann(
      const FourierBoundaryData&, std::function<double(double)>);

  Kind kind_ = Kind::laplace_dirichlet;
  FourierBoundaryData data_;           // the given boundary data
  Eigen::ArrayXd mode_cos_, mode_sin_; // solved modal coefficients
  std::function<double(double)> source_;  // radial profile or empty
  // Particular radial solution for the k = 0 source (tabulated dense).
  Eigen::ArrayXd part_r_, part_v_, part_d_, part_dd_;

  double radial_mode(int k, double r, int deriv) const;
  double particular(double r, int deriv) const;
};

InteriorSolution solve_laplace_dirichlet(const FourierBoundaryData& data);

/// Neumann problem for Laplacian u - u = source(r) (radial source only;
/// theta-dependent volume sources are not supported).
InteriorSolution solve_modified_helmholtz_neumann(
    const FourierBoundaryData& neumann_data,
    std::function<double(double)> radial_source = nullptr);

}  // namespace milnelab
