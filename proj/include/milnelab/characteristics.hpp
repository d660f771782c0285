#pragma once

#include <functional>
#include <limits>

#include "milnelab/force_field.hpp"

namespace milnelab {

inline constexpr double kInfiniteSlab = std::numeric_limits<double>::infinity();

/// Conserved data of the characteristic through (eta, phi):
/// energy E = cos(phi) e^{-V(eta)} and the turning coordinate eta_plus
/// (+infinity when the characteristic never turns, i.e. |E| < e^{-V_inf}).
struct Characteristic {
  double energy = 0.0;
  double eta_plus = kInfiniteSlab;
};

Characteristic characteristic_of(const ForceField& field, double eta, double phi);

/// Angle of the characteristic through (phi, eta) at coordinate eta_src,
/// principal value in [0, pi).  Requires eta_src <= eta_plus.
double phi_prime(const ForceField& field, double phi, double eta, double eta_src);

/// Turning coordinate of the characteristic through (eta, phi);
/// +infinity sentinel when it never turns.
double eta_plus(const ForceField& field, double eta, double phi);

/// Optical depth int_{eta_lo}^{eta_hi} 1/sin(phi'(phi, eta, xi)) d xi.
/// The inverse-square-root endpoint singularity at eta_plus is resolved by
/// the substitution s = sqrt(eta_plus - xi).  Requires eta_hi <= eta_plus.
double g_weight(const ForceField& field, double phi, double eta, double eta_lo,
                double eta_hi);

/// Backward characteristic trace from (eta, phi) to the boundary eta = 0.
///
/// Emits one quadrature node per call of `visit(xi, angle, weight)` such that
/// the in-scatter integral of a source H along the path is
///   sum_k weight_k * H(xi_k, angle_k),
/// with the attenuation exp(-(1+lambda) tau) folded into the weights.
/// For sin(phi) < 0 the path ascends to the turning point (or reflects
/// specularly at a finite slab length) before descending to the boundary.
struct TraceResult {
  bool hits_boundary = false;
  double attenuation = 0.0;    // exp(-(1+lambda) * total optical depth)
  double boundary_angle = 0.0; // phi'(phi, eta, 0), valid when hits_boundary
};

struct TraceOptions {
  double slab_length = kInfiniteSlab;  // finite => specular closure
  double lambda = 0.0;                 // penalty parameter, scales attenuation
  double tau_cutoff = 46.0;            // stop once (1+lambda) tau exceeds this
  double dtau_target = 0.7;            // target optical depth per panel
  double max_panel = 1.5;              // cap on panel length in xi
  bool need_angles = true;             // emit node angles (acos per node)
};

using NodeVisitor = std::function<void(double xi, double angle, double weight)>;

TraceResult trace_path(const ForceField& field, double eta, double phi,
                       const TraceOptions& opt, const NodeVisitor& visit);

/// Boundary operator (A h)(eta, phi) on the infinite slab:
/// Case I  (sin phi > 0):              h(phi'(0)) exp(-G_{eta,0});
/// Case II (sin phi < 0, no turning):  0;
/// Case III(sin phi < 0, turning):     h(phi'(0)) exp(-G_{eta+,0}-G_{eta+,eta}).
double apply_A(const ForceField& field, const std::function<double(double)>& h,
               double eta, double phi);

/// Volume operator (T H)(eta, phi) on the infinite slab via the
/// case-respective characteristic integral.
double apply_T(const ForceField& field,
               const std::function<double(double, double)>& H, double eta,
               double phi);

}  // namespace milnelab
