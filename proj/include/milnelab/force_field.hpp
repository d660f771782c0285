#pragma once

#include <Eigen/Dense>

#include "milnelab/cutoff.hpp"

namespace milnelab {

enum class ForceMode { geometric, none };

/// Geometric force F(eps;eta) = -eps psi(eps eta) / (1 - eps eta) and its
/// potential V = -int_0^eta F.  V depends on eta only through mu = eps*eta,
/// so the potential is cached once as a function of mu: closed form on the
/// cutoff plateau, Hermite-interpolated table (exact slopes) across the
/// transition band, constant V_infinity beyond the support.
class ForceField {
 public:
  ForceField(double epsilon, ForceMode mode,
             CutoffSpec cutoff = CutoffSpec::outer(),
             CutoffSpec cutoff_inner = CutoffSpec::inner());

  double epsilon() const { return eps_; }
  ForceMode mode() const { return mode_; }
  const CutoffSpec& cutoff() const { return cutoff_; }
  const CutoffSpec& cutoff_inner() const { return cutoff_inner_; }

  /// F(eps; eta) <= 0.
  double force(double eta) const;
  /// V(eps; eta), monotone non-decreasing, V(0) = 0.
  double potential(double eta) const;
  /// V as a function of mu = eps*eta (shared across eps).
  double potential_mu(double mu) const;
  /// lim_{eta->inf} V; 0 in mode none.
  double v_infinity() const { return mode_ == ForceMode::none ? 0.0 : v_inf_; }

  /// Outer cutoff psi(eps*eta) as used by the force.
  double psi(double eta) const {
    return mode_ == ForceMode::none ? 0.0 : eval_cutoff(cutoff_, eps_ * eta);
  }
  /// Inner cutoff psi0(eps*eta) used to localize boundary layers.
  double psi0(double eta) const { return eval_cutoff(cutoff_inner_, eps_ * eta); }

  /// Inverse of V restricted to [0, V_infinity]: smallest mu with
  /// potential_mu(mu) = target.  target > V_infinity has no solution.
  double invert_potential_mu(double target) const;

 private:
  double eps_;
  ForceMode mode_;
  CutoffSpec cutoff_;
  CutoffSpec cutoff_inner_;
  double v_inf_ = 0.0;
  double v_plateau_ = 0.0;  // V at the plateau end
  // Transition-band table in mu with exact Hermite slopes.
  Eigen::ArrayXd table_mu_;
  Eigen::ArrayXd table_v_;
};

inline double eval_force(const ForceField& field, double eta) {
  return field.force(eta);
}
inline double eval_potential(const ForceField& field, double eta) {
  return field.potential(eta);
}

}  // namespace milnelab
