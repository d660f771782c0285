#include "milnelab/characteristics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "milnelab/gauss.hpp"

namespace milnelab {

namespace {

struct PanelCtx {
  const ForceField* field = nullptr;
  double energy = 0.0;   // signed E = cos(phi) e^{-V(eta)}
  double v_base = 0.0;   // V(eta)
  double sin2_base = 0.0;
  double cos2_base = 0.0;
  double eta_turn = kInfiniteSlab;
  double v_turn = 0.0;   // V(eta_turn) = -ln|E| when finite
  double lam1 = 1.0;     // 1 + lambda
  double tau = 0.0;      // accumulated optical depth from the evaluation point
  bool dead = false;
  bool mu_only = false;  // accumulate tau, emit nothing (g_weight)
  double len_floor = 1e-12;
  const TraceOptions* opt = nullptr;
  const NodeVisitor* visit = nullptr;
};

// sin^2(phi') = sin^2(phi) - cos^2(phi) expm1(2 (V(xi) - V(eta))) avoids the
// cancellation of 1 - cos^2 for grazing base angles.
double sin_regular(const PanelCtx& ctx, double xi) {
  const double dv = ctx.field->potential(xi) - ctx.v_base;
  const double s2 = ctx.sin2_base - ctx.cos2_base * std::expm1(2.0 * dv);
  return std::sqrt(std::max(s2, 1e-28));
}

// Stable sin(phi') near the turning point via dV = V(eta_turn) - V(xi).
double sin_near_turn(const PanelCtx& ctx, double xi) {
  const double dv = std::max(ctx.v_turn - ctx.field->potential(xi), 0.0);
  return std::sqrt(std::max(-std::expm1(-2.0 * dv), 1e-28));
}

// One quadrature panel along the path.  For sqrt panels the parameter is
// s = sqrt(eta_turn - xi); otherwise the parameter is xi itself.  p0 -> p1
// is path order (tau increases from p0 to p1).
void process_panel(PanelCtx& ctx, bool sqrt_block, double p0, double p1,
                   double angle_sign) {
  if (ctx.dead || p0 == p1) return;
  const GaussRule& gr = gauss15();
  const int n = static_cast<int>(gr.nodes.size());
  const double half = 0.5 * (p1 - p0);
  const double mid = 0.5 * (p0 + p1);

  Eigen::ArrayXd g(n), xi(n), cz(n);
  for (int k = 0; k < n; ++k) {
    const double p = mid + half * gr.nodes[k];
    double x, jac, sn;
    if (sqrt_block) {
      x = ctx.eta_turn - p * p;
      if (x < 0.0) x = 0.0;
      jac = std::abs(half) * 2.0 * std::abs(p);
      sn = sin_near_turn(ctx, x);
      cz[k] = (ctx.energy >= 0.0 ? 1.0 : -1.0) *
              std::exp(-(ctx.v_turn - ctx.field->potential(x)));
    } else {
      x = p;
      jac = std::abs(half);
      sn = sin_regular(ctx, x);
      cz[k] = ctx.energy * std::exp(ctx.field->potential(x));
    }
    xi[k] = x;
    g[k] = jac / sn;
  }

  const Eigen::VectorXd tau_local = gr.cumulative * g.matrix();
  const double dtau = (gr.weights * g).sum();

  if (!ctx.mu_only) {
    for (int k = 0; k < n; ++k) {
      const double att = std::exp(-ctx.lam1 * (ctx.tau + tau_local[k]));
      const double w = gr.weights[k] * g[k] * att;
      if (!(w > 1e-300)) continue;
      double angle = 0.0;
      if (ctx.opt->need_angles) {
        const double c = std::clamp(cz[k], -1.0, 1.0);
        angle = angle_sign * std::acos(c);
      }
      (*ctx.visit)(xi[k], angle, w);
    }
  }

  ctx.tau += dtau;
  if (!ctx.mu_only && ctx.lam1 * ctx.tau > ctx.opt->tau_cutoff) ctx.dead = true;
}

// Width of the sqrt-substitution block around a turning point.
double turn_block_width(const PanelCtx& ctx) {
  const double vprime = -ctx.field->force(ctx.eta_turn);
  return std::clamp(0.125 / std::max(vprime, 1e-3), 0.5, 4.0);
}

// Dyadic sqrt panels from s_hi down to s_lo (path order ascending in xi).
void sqrt_panels_down(PanelCtx& ctx, double s_hi, double s_lo,
                      double angle_sign) {
  double e = s_hi;
  while (e * 0.5 > s_lo && e > s_hi / 32.0) {
    process_panel(ctx, true, e, e * 0.5, angle_sign);
    e *= 0.5;
  }
  process_panel(ctx, true, e, s_lo, angle_sign);
}

// Dyadic sqrt panels from s_lo up to s_hi (path order descending in xi).
void sqrt_panels_up(PanelCtx& ctx, double s_lo, double s_hi,
                    double angle_sign) {
  std::vector<std::pair<double, double>> panels;
  double e = s_hi;
  while (e * 0.5 > s_lo && e > s_hi / 32.0) {
    panels.emplace_back(e, e * 0.5);
    e *= 0.5;
  }
  panels.emplace_back(e, s_lo);
  for (auto it = panels.rbegin(); it != panels.rend(); ++it)
    process_panel(ctx, true, it->second, it->first, angle_sign);
}

std::vector<double> seams(const PanelCtx& ctx) {
  std::vector<double> s;
  if (ctx.field->mode() == ForceMode::geometric) {
    s.push_back(ctx.field->cutoff().plateau_end / ctx.field->epsilon());
    s.push_back(ctx.field->cutoff().support_end / ctx.field->epsilon());
  }
  return s;
}

// Regular panels from x_lo up to x_hi; if to_turn, x_hi is the turning
// point (or close to it) and the final stretch runs in the sqrt variable.
void walk_ascending(PanelCtx& ctx, double x_lo, double x_hi, bool to_turn,
                    double angle_sign) {
  if (ctx.dead || x_hi <= x_lo) return;
  double reg_end = x_hi;
  double s_end = 0.0;
  if (to_turn) {
    reg_end = std::max(
        x_lo, std::min(x_hi, ctx.eta_turn - turn_block_width(ctx)));
    s_end = std::sqrt(std::max(ctx.eta_turn - x_hi, 0.0));
  }
  const auto brk = seams(ctx);
  double pos = x_lo;
  int guard = 0;
  while (pos < reg_end - 1e-13 && !ctx.dead) {
    if (++guard > 200000) throw std::runtime_error("trace_path: panel overflow");
    const double sn = sin_regular(ctx, pos);
    const double floor = std::max(ctx.len_floor, pos * 1e-13);
    double len = std::min(ctx.opt->max_panel,
                          std::max(ctx.opt->dtau_target * sn, floor));
    double stop = reg_end;
    for (double b : brk)
      if (b > pos + 1e-13 && b < stop) stop = b;
    len = std::min(len, stop - pos);
    process_panel(ctx, false, pos, pos + len, angle_sign);
    pos += len;
  }
  if (to_turn && !ctx.dead) {
    const double s_start = std::sqrt(std::max(ctx.eta_turn - pos, 0.0));
    if (s_start > s_end) sqrt_panels_down(ctx, s_start, s_end, angle_sign);
  }
}

// Regular panels from x_hi down to x_lo; if from_turn, x_hi is the turning
// point and the first stretch runs in the sqrt variable.
void walk_descending(PanelCtx& ctx, double x_hi, double x_lo, bool from_turn,
                     double angle_sign) {
  if (ctx.dead || x_hi <= x_lo) return;
  double pos = x_hi;
  if (from_turn) {
    const double width = std::min(turn_block_width(ctx), x_hi - x_lo);
    const double block_lo = x_hi - width;
    sqrt_panels_up(ctx, std::sqrt(std::max(ctx.eta_turn - x_hi, 0.0)),
                   std::sqrt(std::max(ctx.eta_turn - block_lo, 0.0)),
                   angle_sign);
    pos = block_lo;
  }
  const auto brk = seams(ctx);
  int guard = 0;
  while (pos > x_lo + 1e-13 && !ctx.dead) {
    if (++guard > 200000) throw std::runtime_error("trace_path: panel overflow");
    const double sn = sin_regular(ctx, pos);
    const double floor = std::max(ctx.len_floor, pos * 1e-13);
    double len = std::min(ctx.opt->max_panel,
                          std::max(ctx.opt->dtau_target * sn, floor));
    double stop = x_lo;
    for (double b : brk)
      if (b < pos - 1e-13 && b > stop) stop = b;
    len = std::min(len, pos - stop);
    process_panel(ctx, false, pos, pos - len, angle_sign);
    pos -= len;
  }
}

PanelCtx make_ctx(const ForceField& field, double eta, double phi,
                  const TraceOptions& opt) {
  PanelCtx ctx;
  ctx.field = &field;
  ctx.v_base = field.potential(eta);
  ctx.energy = std::cos(phi) * std::exp(-ctx.v_base);
  const double sp = std::sin(phi), cp = std::cos(phi);
  ctx.sin2_base = sp * sp;
  ctx.cos2_base = cp * cp;
  const Characteristic ch = characteristic_of(field, eta, phi);
  ctx.eta_turn = ch.eta_plus;
  ctx.v_turn =
      std::isfinite(ch.eta_plus) ? -std::log(std::abs(ctx.energy)) : 0.0;
  ctx.lam1 = 1.0 + opt.lambda;
  ctx.opt = &opt;
  return ctx;
}

}  // namespace

Characteristic characteristic_of(const ForceField& field, double eta,
                                 double phi) {
  if (eta < 0.0) throw std::domain_error("characteristic_of: eta must be >= 0");
  Characteristic ch;
  ch.energy = std::cos(phi) * std::exp(-field.potential(eta));
  const double a = std::abs(ch.energy);
  if (a <= 0.0) return ch;  // eta_plus = +inf
  const double target = -std::log(a);
  if (target > field.v_infinity() + 1e-15) return ch;
  const double mu =
      field.invert_potential_mu(std::min(std::max(target, 0.0), field.v_infinity()));
  const double e =
      field.mode() == ForceMode::none ? 0.0 : mu / field.epsilon();
  ch.eta_plus = std::max(eta, e);
  return ch;
}

double phi_prime(const ForceField& field, double phi, double eta,
                 double eta_src) {
  const double arg =
      std::cos(phi) * std::exp(field.potential(eta_src) - field.potential(eta));
  if (std::abs(arg) > 1.0 + 1e-9)
    throw std::domain_error(
        "phi_prime: eta_src beyond the turning point of the characteristic");
  return std::acos(std::clamp(arg, -1.0, 1.0));
}

double eta_plus(const ForceField& field, double eta, double phi) {
  return characteristic_of(field, eta, phi).eta_plus;
}

double g_weight(const ForceField& field, double phi, double eta, double eta_lo,
                double eta_hi) {
  if (eta_lo > eta_hi)
    throw std::domain_error("g_weight: eta_lo must be <= eta_hi");
  if (eta_lo == eta_hi) return 0.0;
  TraceOptions opt;
  PanelCtx ctx = make_ctx(field, eta, phi, opt);
  if (eta_hi > ctx.eta_turn + 1e-9)
    throw std::domain_error("g_weight: interval crosses the turning point");
  ctx.mu_only = true;
  ctx.len_floor = std::max(1e-12, (eta_hi - eta_lo) / 4096.0);
  const bool to_turn =
      std::isfinite(ctx.eta_turn) && (ctx.eta_turn - eta_hi) < 0.25;
  walk_ascending(ctx, eta_lo, std::min(eta_hi, ctx.eta_turn), to_turn, 1.0);
  return ctx.tau;
}

TraceResult trace_path(const ForceField& field, double eta, double phi,
                       const TraceOptions& opt, const NodeVisitor& visit) {
  const double sp = std::sin(phi);
  if (std::abs(sp) < 1e-14)
    throw std::domain_error("trace_path: grazing angle sin(phi) = 0");
  PanelCtx ctx = make_ctx(field, eta, phi, opt);
  ctx.visit = &visit;

  if (sp > 0.0) {
    walk_descending(ctx, eta, 0.0, false, 1.0);
  } else {
    const double L = opt.slab_length;
    if (ctx.eta_turn <= L) {
      walk_ascending(ctx, eta, ctx.eta_turn, true, -1.0);
      walk_descending(ctx, ctx.eta_turn, 0.0, true, 1.0);
    } else if (std::isfinite(L)) {
      walk_ascending(ctx, eta, L, false, -1.0);
      walk_descending(ctx, L, 0.0, false, 1.0);
    } else {
      walk_ascending(ctx, eta, eta + opt.tau_cutoff + 1.0, false, -1.0);
      return {false, 0.0, 0.0};
    }
  }

  TraceResult res;
  res.hits_boundary = true;
  res.attenuation = ctx.dead ? 0.0 : std::exp(-ctx.lam1 * ctx.tau);
  res.boundary_angle = phi_prime(field, phi, eta, 0.0);
  return res;
}

double apply_A(const ForceField& field, const std::function<double(double)>& h,
               double eta, double phi) {
  TraceOptions opt;
  opt.need_angles = false;
  static const NodeVisitor ignore = [](double, double, double) {};
  const TraceResult res = trace_path(field, eta, phi, opt, ignore);
  if (!res.hits_boundary || res.attenuation <= 0.0) return 0.0;
  return h(res.boundary_angle) * res.attenuation;
}

double apply_T(const ForceField& field,
               const std::function<double(double, double)>& H, double eta,
               double phi) {
  TraceOptions opt;
  double acc = 0.0;
  trace_path(field, eta, phi, opt,
             [&](double xi, double angle, double w) { acc += w * H(xi, angle); });
  return acc;
}

}  // namespace milnelab
