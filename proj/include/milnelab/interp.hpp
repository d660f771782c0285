#pragma once

#include <Eigen/Dense>
#include <algorithm>

namespace milnelab {

/// Weights of 4-point (cubic Lagrange) interpolation at x on an ascending
/// node set; degrades to the available points near the ends.
struct InterpStencil {
  int index[4] = {0, 0, 0, 0};
  double weight[4] = {0.0, 0.0, 0.0, 0.0};
  int count = 0;
};

inline InterpStencil cubic_stencil(const Eigen::ArrayXd& nodes, double x) {
  const int n = static_cast<int>(nodes.size());
  InterpStencil st;
  if (n == 1) {
    st.index[0] = 0;
    st.weight[0] = 1.0;
    st.count = 1;
    return st;
  }
  const double* begin = nodes.data();
  int cell = static_cast<int>(std::upper_bound(begin, begin + n, x) - begin) - 1;
  cell = std::clamp(cell, 0, n - 2);
  int lo = std::clamp(cell - 1, 0, n - 4 < 0 ? 0 : n - 4);
  const int count = std::min(4, n);
  for (int a = 0; a < count; ++a) {
    double w = 1.0;
    for (int b = 0; b < count; ++b) {
      if (a == b) continue;
      w *= (x - nodes[lo + b]) / (nodes[lo + a] - nodes[lo + b]);
    }
    st.index[a] = lo + a;
    st.weight[a] = w;
  }
  st.count = count;
  return st;
}

inline double interp_cubic(const Eigen::ArrayXd& nodes,
                           const Eigen::ArrayXd& values, double x) {
  const InterpStencil st = cubic_stencil(nodes, x);
  double acc = 0.0;
  for (int a = 0; a < st.count; ++a) acc += st.weight[a] * values[st.index[a]];
  return acc;
}

inline double interp_linear(const Eigen::ArrayXd& nodes,
                            const Eigen::ArrayXd& values, double x) {
  const int n = static_cast<int>(nodes.size());
  const double* begin = nodes.data();
  int cell = static_cast<int>(std::upper_bound(begin, begin + n, x) - begin) - 1;
  cell = std::clamp(cell, 0, n - 2);
  const double t = (x - nodes[cell]) / (nodes[cell + 1] - nodes[cell]);
  return values[cell] + t * (values[cell + 1] - values[cell]);
}

}  // namespace milnelab
