#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace milnelab {

/// Boundary-data mini-language shared by the CLI and the solvers:
///   const:<c>          constant c
///   cos:<k>[:shift]    cos(k phi) + shift
///   table:<path>       two-column CSV (angle, value), periodic linear interp
struct BoundarySpec {
  std::string text;
  std::function<double(double)> eval;

  static BoundarySpec parse(const std::string& text);
  static BoundarySpec constant(double c);
  static BoundarySpec cosine(int k, double shift = 0.0);

  double operator()(double phi) const { return eval(phi); }
};

}  // namespace milnelab
