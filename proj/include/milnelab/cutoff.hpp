#pragma once

#include <cmath>
#include <stdexcept>

namespace milnelab {

enum class Smoothness { C1_cubic, C2_quintic };

/// Plateau/support cutoff: 1 on [0, plateau_end], 0 beyond support_end,
/// monotone smoothstep transition in between.
struct CutoffSpec {
  double plateau_end = 0.5;
  double support_end = 0.75;
  Smoothness smoothness = Smoothness::C2_quintic;

  static CutoffSpec outer(Smoothness s = Smoothness::C2_quintic) {
    return CutoffSpec{0.5, 0.75, s};
  }
  static CutoffSpec inner(Smoothness s = Smoothness::C2_quintic) {
    return CutoffSpec{0.25, 0.375, s};
  }
};

inline double eval_cutoff(const CutoffSpec& spec, double mu) {
  if (mu < 0.0) throw std::domain_error("eval_cutoff: mu must be >= 0");
  if (mu <= spec.plateau_end) return 1.0;
  if (mu >= spec.support_end) return 0.0;
  const double t = (mu - spec.plateau_end) / (spec.support_end - spec.plateau_end);
  switch (spec.smoothness) {
    case Smoothness::C1_cubic:
      return 1.0 - t * t * (3.0 - 2.0 * t);
    case Smoothness::C2_quintic:
    default:
      return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
  }
}

/// d/dmu of the cutoff; zero outside the transition band.
inline double eval_cutoff_derivative(const CutoffSpec& spec, double mu) {
  if (mu < 0.0) throw std::domain_error("eval_cutoff_derivative: mu must be >= 0");
  if (mu <= spec.plateau_end || mu >= spec.support_end) return 0.0;
  const double w = spec.support_end - spec.plateau_end;
  const double t = (mu - spec.plateau_end) / w;
  switch (spec.smoothness) {
    case Smoothness::C1_cubic:
      return -6.0 * t * (1.0 - t) / w;
    case Smoothness::C2_quintic:
    default:
      return -30.0 * t * t * (1.0 - t) * (1.0 - t) / w;
  }
}

}  // namespace milnelab
