#include "milnelab/force_field.hpp"

#include <stdexcept>

#include "milnelab/gauss.hpp"

namespace milnelab {

namespace {
constexpr int kTableIntervals = 4096;
}

ForceField::ForceField(double epsilon, ForceMode mode, CutoffSpec cutoff,
                       CutoffSpec cutoff_inner)
    : eps_(epsilon), mode_(mode), cutoff_(cutoff), cutoff_inner_(cutoff_inner) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("ForceField: epsilon must lie in (0,1)");
  if (!(cutoff_inner_.support_end <= cutoff_.plateau_end))
    throw std::invalid_argument(
        "ForceField: inner cutoff support must nest inside the outer plateau");
  if (mode_ == ForceMode::none) return;

  const double a = cutoff_.plateau_end;
  const double b = cutoff_.support_end;
  v_plateau_ = -std::log1p(-a);

  const auto integrand = [this](double m) {
    return eval_cutoff(cutoff_, m) / (1.0 - m);
  };
  table_mu_.resize(kTableIntervals + 1);
  table_v_.resize(kTableIntervals + 1);
  const double h = (b - a) / kTableIntervals;
  table_mu_[0] = a;
  table_v_[0] = v_plateau_;
  for (int i = 1; i <= kTableIntervals; ++i) {
    table_mu_[i] = a + i * h;
    table_v_[i] =
        table_v_[i - 1] + gauss15().integrate(integrand, table_mu_[i - 1], table_mu_[i]);
  }
  v_inf_ = table_v_[kTableIntervals];
}

double ForceField::force(double eta) const {
  if (eta < 0.0) throw std::domain_error("ForceField::force: eta must be >= 0");
  if (mode_ == ForceMode::none) return 0.0;
  const double mu = eps_ * eta;
  if (mu >= cutoff_.support_end) return 0.0;
  return -eps_ * eval_cutoff(cutoff_, mu) / (1.0 - mu);
}

double ForceField::potential_mu(double mu) const {
  if (mu < 0.0) throw std::domain_error("ForceField::potential: eta must be >= 0");
  if (mode_ == ForceMode::none) return 0.0;
  if (mu <= cutoff_.plateau_end) return -std::log1p(-mu);
  if (mu >= cutoff_.support_end) return v_inf_;
  const double a = cutoff_.plateau_end;
  const double h = (cutoff_.support_end - a) / kTableIntervals;
  int i = static_cast<int>((mu - a) / h);
  if (i >= kTableIntervals) i = kTableIntervals - 1;
  const double x0 = table_mu_[i];
  const double t = (mu - x0) / h;
  // Hermite cubic with exact slopes psi(mu)/(1-mu).
  const double v0 = table_v_[i], v1 = table_v_[i + 1];
  const double d0 = eval_cutoff(cutoff_, x0) / (1.0 - x0);
  const double x1 = table_mu_[i + 1];
  const double d1 = eval_cutoff(cutoff_, x1) / (1.0 - x1);
  const double t2 = t * t, t3 = t2 * t;
  return v0 * (2 * t3 - 3 * t2 + 1) + v1 * (-2 * t3 + 3 * t2) +
         h * (d0 * (t3 - 2 * t2 + t) + d1 * (t3 - t2));
}

double ForceField::potential(double eta) const { return potential_mu(eps_ * eta); }

double ForceField::invert_potential_mu(double target) const {
  if (mode_ == ForceMode::none) {
    if (target > 0.0)
      throw std::domain_error("invert_potential_mu: target above V_infinity");
    return 0.0;
  }
  if (target < 0.0 || target > v_inf_)
    throw std::domain_error("invert_potential_mu: target outside [0, V_inf]");
  if (target <= v_plateau_) return -std::expm1(-target);
  double lo = cutoff_.plateau_end, hi = cutoff_.support_end;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (potential_mu(mid) < target)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-15) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace milnelab
