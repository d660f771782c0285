#include "milnelab/milne.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "milnelab/gauss.hpp"
#include "milnelab/interp.hpp"

namespace milnelab {

namespace {

struct SolverQuad {
  Eigen::ArrayXd nodes;
  Eigen::ArrayXd weights;
};

SolverQuad uniform_rule(const AngularQuadrature& q) {
  return {q.nodes(), q.weights()};
}

// Gauss panels packed geometrically toward the grazing directions phi = 0,
// +-pi; half-octave steps keep the attenuation transition resolved.
SolverQuad graded_rule(double phi_min = 1e-6, int per_panel = 14,
                       double octave_step = 1.4142135623730951) {
  const GaussRule rule(per_panel);
  std::vector<double> edges;
  edges.push_back(0.0);
  for (double e = phi_min; e < M_PI / 2.0; e *= octave_step)
    edges.push_back(e);
  edges.push_back(M_PI / 2.0);
  const size_t half = edges.size();
  for (size_t k = half; k-- > 0;) edges.push_back(M_PI - edges[k]);
  // edges now covers [0, pi] symmetrically; panels are consecutive pairs.
  std::vector<double> nodes, weights;
  for (size_t p = 0; p + 1 < edges.size(); ++p) {
    const double a = edges[p], b = edges[p + 1];
    if (!(b > a)) continue;
    for (int k = 0; k < per_panel; ++k) {
      const double x = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[k];
      nodes.push_back(x);                    // upper half-range
      weights.push_back(0.5 * (b - a) * rule.weights[k]);
    }
  }
  const size_t m = nodes.size();
  SolverQuad sq;
  sq.nodes.resize(2 * m);
  sq.weights.resize(2 * m);
  for (size_t k = 0; k < m; ++k) {
    sq.nodes[k] = nodes[k];
    sq.weights[k] = weights[k];
    sq.nodes[m + k] = -nodes[k];
    sq.weights[m + k] = weights[k];
  }
  return sq;
}

SolverQuad make_solver_quad(const MilneConfig& cfg, const AngularQuadrature& q) {
  return cfg.rule == SolverRule::uniform ? uniform_rule(q) : graded_rule();
}

void parallel_rows(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  std::mutex err_mutex;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

struct Kernel {
  Eigen::MatrixXd K;
  Eigen::VectorXd b;
};

// Dense matrix of the averaged fixed-point map fbar -> avg(T fbar) plus the
// data vector avg(A h + T S), both on the radial grid.
Kernel assemble(const MilneProblem& pb, const RadialGrid& grid,
                const SolverQuad& sq, double lambda) {
  const int n = grid.size();
  const int m = static_cast<int>(sq.nodes.size());
  Kernel ker{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
  TraceOptions opt;
  opt.slab_length = grid.length();
  opt.lambda = lambda;
  opt.dtau_target = pb.config.path_dtau;
  opt.need_angles = pb.has_source();

  parallel_rows(n, pb.config.threads, [&](int i) {
    Eigen::VectorXd krow = Eigen::VectorXd::Zero(n);
    double bi = 0.0;
    const double eta_i = grid.node(i);
    for (int j = 0; j < m; ++j) {
      const double wq = sq.weights[j] / (2.0 * M_PI);
      const NodeVisitor visit = [&](double xi, double angle, double w) {
        if (pb.has_source()) bi += wq * w * pb.S(xi, angle);
        const InterpStencil st = cubic_stencil(grid.nodes(), xi);
        for (int a = 0; a < st.count; ++a)
          krow[st.index[a]] += wq * w * st.weight[a];
      };
      const TraceResult res = trace_path(pb.force, eta_i, sq.nodes[j], opt, visit);
      if (res.hits_boundary && res.attenuation > 0.0)
        bi += wq * res.attenuation * pb.h(res.boundary_angle);
    }
    ker.K.row(i) = krow.transpose();
    ker.b[i] = bi;
  });
  return ker;
}

// Trace the solution value at one point against a tabulated isotropic part.
double eval_point(const MilneProblem& pb, const RadialGrid& grid,
                  const Eigen::ArrayXd& fbar, double eta, double phi,
                  double lambda) {
  TraceOptions opt;
  opt.slab_length = grid.length();
  opt.lambda = lambda;
  opt.dtau_target = pb.config.path_dtau;
  opt.need_angles = pb.has_source();
  double acc = 0.0;
  const NodeVisitor visit = [&](double xi, double angle, double w) {
    double src = interp_cubic(grid.nodes(), fbar, xi);
    if (pb.has_source()) src += pb.S(xi, angle);
    acc += w * src;
  };
  const TraceResult res = trace_path(pb.force, eta, phi, opt, visit);
  if (res.hits_boundary && res.attenuation > 0.0)
    acc += res.attenuation * pb.h(res.boundary_angle);
  return acc;
}

Eigen::ArrayXXd sweep_field(const MilneProblem& pb, const RadialGrid& grid,
                            const AngularQuadrature& quad,
                            const Eigen::ArrayXd& fbar, double lambda) {
  Eigen::ArrayXXd f(grid.size(), quad.size());
  parallel_rows(grid.size(), pb.config.threads, [&](int i) {
    for (int j = 0; j < quad.size(); ++j)
      f(i, j) = eval_point(pb, grid, fbar, grid.node(i), quad.node(j), lambda);
  });
  return f;
}

Eigen::VectorXd sweep_average(const MilneProblem& pb, const RadialGrid& grid,
                              const SolverQuad& sq, const Eigen::ArrayXd& fbar,
                              double lambda) {
  Eigen::VectorXd out(grid.size());
  parallel_rows(grid.size(), pb.config.threads, [&](int i) {
    double acc = 0.0;
    for (int j = 0; j < sq.nodes.size(); ++j)
      acc += sq.weights[j] *
             eval_point(pb, grid, fbar, grid.node(i), sq.nodes[j], lambda);
    out[i] = acc / (2.0 * M_PI);
  });
  return out;
}

void validate(const MilneProblem& pb) {
  const double slack = 1.0 + 1e-9;
  for (int k = 0; k < 64; ++k) {
    const double phi = (k + 0.5) * M_PI / 64.0;
    if (std::abs(pb.h(phi)) > pb.bound_M * slack + 1e-12)
      throw std::invalid_argument("MilneProblem: |h| exceeds the declared bound M");
  }
  if (pb.has_source()) {
    if (!(pb.decay_K > 0.0))
      throw std::invalid_argument("MilneProblem: source decay rate K must be > 0");
    for (double eta : {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0}) {
      for (int k = 0; k < 16; ++k) {
        const double phi = -M_PI + (k + 0.5) * 2.0 * M_PI / 16.0;
        if (std::abs(pb.S(eta, phi)) >
            pb.source_M * std::exp(-pb.decay_K * eta) * slack + 1e-12)
          throw std::invalid_argument(
              "MilneProblem: |S| exceeds the declared decay envelope");
      }
    }
  }
}

// Anderson mixing on the fixed point x = G(x), window m.
Eigen::VectorXd anderson_solve(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& G, int dim,
    double tol, int max_iter, std::vector<double>& history, bool& converged) {
  const int window = 10;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd gx = G(x);
  Eigen::VectorXd res = gx - x;
  std::vector<Eigen::VectorXd> dx_hist, dr_hist;
  converged = false;
  for (int it = 0; it < max_iter; ++it) {
    const double rn = res.cwiseAbs().maxCoeff();
    history.push_back(rn);
    if (!std::isfinite(rn)) throw std::runtime_error("solver produced NaN");
    if (rn < tol) {
      converged = true;
      break;
    }
    Eigen::VectorXd x_new;
    const int mh = static_cast<int>(dx_hist.size());
    if (mh == 0) {
      x_new = gx;
    } else {
      Eigen::MatrixXd R(dim, mh);
      for (int c = 0; c < mh; ++c) R.col(c) = dr_hist[c];
      const Eigen::VectorXd gamma =
          R.colPivHouseholderQr().solve(res);
      x_new = x + res;
      for (int c = 0; c < mh; ++c)
        x_new -= gamma[c] * (dx_hist[c] + dr_hist[c]);
    }
    const Eigen::VectorXd gx_new = G(x_new);
    const Eigen::VectorXd res_new = gx_new - x_new;
    dx_hist.push_back(x_new - x);
    dr_hist.push_back(res_new - res);
    if (static_cast<int>(dx_hist.size()) > window) {
      dx_hist.erase(dx_hist.begin());
      dr_hist.erase(dr_hist.begin());
    }
    x = x_new;
    gx = gx_new;
    res = res_new;
  }
  return x;
}

}  // namespace

MilneSolution solve_inflow(const MilneProblem& pb) {
  validate(pb);
  const MilneConfig& cfg = pb.config;
  RadialGrid grid(cfg.n_eta, cfg.slab_length, cfg.grading_ratio,
                  cfg.first_spacing);
  AngularQuadrature quad(cfg.n_angles);
  const SolverQuad sq = make_solver_quad(cfg, quad);
  const double lambda = cfg.lambda;

  MilneSolution sol(grid, quad, pb);
  const int n = grid.size();

  Eigen::VectorXd fbar;
  if (cfg.mode == SolverMode::accelerated) {
    const auto G = [&](const Eigen::VectorXd& x) {
      return sweep_average(pb, grid, sq, x.array(), lambda);
    };
    bool ok = false;
    fbar = anderson_solve(G, n, cfg.tolerance, cfg.max_iterations,
                          sol.residual_history, ok);
    sol.converged = ok;
    sol.iterations = static_cast<int>(sol.residual_history.size());
    sol.residual = sol.residual_history.empty() ? 0.0 : sol.residual_history.back();
  } else {
    const Kernel ker = assemble(pb, grid, sq, lambda);
    if (cfg.mode == SolverMode::direct) {
      fbar = Eigen::PartialPivLU<Eigen::MatrixXd>(
                 Eigen::MatrixXd::Identity(n, n) - ker.K)
                 .solve(ker.b);
      sol.iterations = 1;
      sol.residual =
          ((Eigen::MatrixXd::Identity(n, n) - ker.K) * fbar - ker.b)
              .cwiseAbs()
              .maxCoeff();
      sol.converged = sol.residual < std::max(cfg.tolerance, 1e-12) * 100.0;
      sol.residual_history.push_back(sol.residual);
    } else {  // damped Picard iteration on the penalized operators
      fbar = Eigen::VectorXd::Zero(n);
      sol.converged = false;
      for (int it = 0; it < cfg.max_iterations; ++it) {
        const Eigen::VectorXd next = ker.b + ker.K * fbar;
        const double rn = (next - fbar).cwiseAbs().maxCoeff();
        sol.residual_history.push_back(rn);
        fbar = next;
        if (!std::isfinite(rn)) throw std::runtime_error("solver produced NaN");
        if (rn < cfg.tolerance) {
          sol.converged = true;
          break;
        }
      }
      sol.iterations = static_cast<int>(sol.residual_history.size());
      sol.residual = sol.residual_history.back();
    }
  }
  if (!fbar.allFinite()) throw std::runtime_error("solver produced NaN");

  sol.fbar = fbar.array();
  sol.f = sweep_field(pb, grid, quad, sol.fbar, lambda);

  // f_infinity from the beta moment at the slab end; angular average as the
  // secondary estimate.
  const Eigen::ArrayXd sinv = quad.nodes().sin();
  const Eigen::ArrayXd last = sol.f.row(n - 1).transpose();
  sol.f_infinity = (last * sinv.square() * quad.weights()).sum() / M_PI;
  sol.f_infinity_secondary = angular_average(last, quad);
  const double tail_tol =
      10.0 * std::max(cfg.tolerance, std::exp(-0.5 * grid.length()));
  sol.tail_flagged =
      std::abs(sol.f_infinity - sol.f_infinity_secondary) >
      tail_tol * (1.0 + std::abs(sol.f_infinity));

  decompose_qr(sol);
  compute_diagnostics(sol);
  sol.decay = fit_decay_rate(sol);
  return sol;
}

CompatibilityReport check_compatibility(const MilneProblem& pb) {
  CompatibilityReport rep;
  const double tol = 1e-12 * (1.0 + std::abs(pb.bound_M));
  double defect =
      adaptive_gauss([&](double phi) { return pb.h(phi) * std::sin(phi); }, 0.0,
                     M_PI, tol);
  if (pb.has_source()) {
    const auto angular = [&](double s) {
      return adaptive_gauss([&](double phi) { return pb.S(s, phi); }, -M_PI,
                            M_PI, tol);
    };
    defect += adaptive_gauss_semi_infinite(
        [&](double s) { return std::exp(-pb.force.potential(s)) * angular(s); },
        0.0, tol);
  }
  rep.defect = defect;
  rep.pass = std::abs(defect) <= pb.config.compatibility_tol * (1.0 + pb.bound_M);
  return rep;
}

MilneSolution solve_diffusive(const MilneProblem& pb) {
  if (pb.kind != MilneBoundaryKind::diffusive)
    throw std::invalid_argument("solve_diffusive: boundary kind is not diffusive");
  const CompatibilityReport rep = check_compatibility(pb);
  if (!rep.pass) throw CompatibilityError(rep.defect);
  MilneSolution sol = solve_inflow(pb);
  sol.compatibility_defect = rep.defect;
  sol.p_residual = sol.p_moment_dense();
  sol.p_flagged = std::abs(sol.p_residual) > pb.config.p_residual_tol;
  return sol;
}

double MilneSolution::eval(double eta, double phi) const {
  return eval_point(problem, grid, fbar, eta, phi, problem.config.lambda);
}

namespace {

// Adaptive quadrature with dyadic panels packed toward both interval ends;
// the trace has boundary layers of every width near the grazing directions,
// which a single adaptive pass can under-resolve.
double integrate_grazing_aware(const std::function<double(double)>& f,
                               double a, double b, double abs_tol) {
  const double w0 = 1e-7 * (b - a);
  std::vector<double> edges;
  edges.push_back(0.0);
  for (double e = w0; e < 0.5 * (b - a); e *= 2.0) edges.push_back(e);
  edges.push_back(0.5 * (b - a));
  double acc = 0.0;
  const double tol = abs_tol / (2.0 * static_cast<double>(edges.size()));
  for (size_t k = 0; k + 1 < edges.size(); ++k) {
    acc += adaptive_gauss(f, a + edges[k], a + edges[k + 1], tol);
    acc += adaptive_gauss(f, b - edges[k + 1], b - edges[k], tol);
  }
  return acc;
}

}  // namespace

double MilneSolution::flux_moment_dense(double eta, double abs_tol) const {
  const auto f = [&](double phi) { return eval(eta, phi) * std::sin(phi); };
  return integrate_grazing_aware(f, 0.0, M_PI, 0.5 * abs_tol) +
         integrate_grazing_aware(f, -M_PI, 0.0, 0.5 * abs_tol);
}

double MilneSolution::p_moment_dense(double abs_tol) const {
  return -0.5 * integrate_grazing_aware(
                    [&](double phi) { return eval(0.0, phi) * std::sin(phi); },
                    -M_PI, 0.0, abs_tol);
}

void decompose_qr(MilneSolution& sol) {
  const int n = sol.grid.size();
  sol.q.resize(n);
  sol.r.resize(n, sol.quad.size());
  for (int i = 0; i < n; ++i) {
    const Eigen::ArrayXd row = sol.f.row(i).transpose();
    sol.q[i] = angular_average(row, sol.quad);
    sol.r.row(i) = (row - sol.q[i]).transpose();
  }
}

void compute_diagnostics(MilneSolution& sol) {
  const int n = sol.grid.size();
  const AngularQuadrature& quad = sol.quad;
  const Eigen::ArrayXd sinv = quad.nodes().sin();
  const Eigen::ArrayXd cos2v = (2.0 * quad.nodes()).cos();
  DiagnosticsTrace& d = sol.diagnostics;
  d.alpha.resize(n);
  d.beta.resize(n);
  d.orthogonality_residual.resize(n);
  d.weighted_flux.resize(n);
  d.beta_ode_residual.resize(n);

  Eigen::ArrayXd dval(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::ArrayXd row = sol.f.row(i).transpose();
    const Eigen::ArrayXd rrow = sol.r.row(i).transpose();
    d.alpha[i] = 0.5 * angular_inner(row, row * sinv, quad);
    d.beta[i] = angular_inner(sinv.square(), row, quad);
    d.orthogonality_residual[i] = angular_average(sinv * rrow, quad);
    d.weighted_flux[i] =
        std::exp(-sol.problem.force.potential(sol.grid.node(i))) *
        angular_average(sinv * row, quad);
    double src = 0.0;
    if (sol.problem.has_source()) {
      Eigen::ArrayXd srow(quad.size());
      for (int j = 0; j < quad.size(); ++j)
        srow[j] = sol.problem.S(sol.grid.node(i), quad.node(j));
      src = angular_inner(sinv, srow, quad);
    }
    dval[i] = sol.problem.force.force(sol.grid.node(i)) *
                  angular_inner(cos2v, rrow, quad) +
              src;
  }
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - 1);
    const int hi = std::min(n - 1, i + 1);
    const double slope = (d.beta[hi] - d.beta[lo]) /
                         (sol.grid.node(hi) - sol.grid.node(lo));
    d.beta_ode_residual[i] = std::abs(slope - dval[i]);
  }
}

DecayFit fit_decay_rate(const Eigen::ArrayXd& eta, const Eigen::ArrayXXd& f,
                        double f_infinity, double noise_floor) {
  const double L = eta[eta.size() - 1];
  const double lo = 0.5 * L, hi = 0.9 * L;
  std::vector<double> xs, ys;
  for (int i = 0; i < eta.size(); ++i) {
    if (eta[i] < lo || eta[i] > hi) continue;
    const double d = (f.row(i) - f_infinity).abs().maxCoeff();
    if (d > noise_floor) {
      xs.push_back(eta[i]);
      ys.push_back(std::log(d));
    }
  }
  DecayFit fit;
  if (xs.size() < 3) {
    // Tail at the noise floor: report the floor-implied bound.
    fit.is_lower_bound = true;
    double d0 = 0.0;
    for (int i = 0; i < eta.size(); ++i)
      d0 = std::max(d0, (f.row(i) - f_infinity).abs().maxCoeff());
    fit.rate = d0 > noise_floor && noise_floor > 0.0
                   ? std::log(d0 / noise_floor) / hi
                   : 0.0;
    return fit;
  }
  const int m = static_cast<int>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = 0; k < m; ++k) {
    sx += xs[k];
    sy += ys[k];
    sxx += xs[k] * xs[k];
    sxy += xs[k] * ys[k];
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  fit.rate = -slope;
  return fit;
}

DecayFit fit_decay_rate(const MilneSolution& sol) {
  const double floor =
      std::max(1e-12, 10.0 * std::abs(sol.residual));
  return fit_decay_rate(sol.grid.nodes(), sol.f, sol.f_infinity, floor);
}

AuxOdeSolution::AuxOdeSolution(const ForceField& force,
                               std::function<double(double)> s_q,
                               double length, int n_table)
    : force_(force), s_q_(std::move(s_q)) {
  eta_.resize(n_table + 1);
  value_.resize(n_table + 1);
  const double h = length / n_table;
  for (int i = 0; i <= n_table; ++i) eta_[i] = i * h;

  const auto weighted = [this](double y) {
    return std::exp(-force_.potential(y)) * 2.0 * s_q_(y);
  };
  // I(eta) = int_eta^inf e^{-V} 2 S_Q, accumulated from the far end.
  Eigen::ArrayXd I(n_table + 1);
  I[n_table] = adaptive_gauss_semi_infinite(weighted, length, 1e-13);
  for (int i = n_table; i-- > 0;)
    I[i] = I[i + 1] + adaptive_gauss(weighted, eta_[i], eta_[i + 1], 1e-14);
  for (int i = 0; i <= n_table; ++i)
    value_[i] = -std::exp(force_.potential(eta_[i])) * I[i];
  a0_ = value_[0];
}

double AuxOdeSolution::derivative(double eta) const {
  const double a = (*this)(eta);
  return -force_.force(eta) * a + 2.0 * s_q_(eta);
}

double AuxOdeSolution::operator()(double eta) const {
  if (eta <= 0.0) return value_[0];
  const int n = static_cast<int>(eta_.size());
  if (eta >= eta_[n - 1]) {
    // Beyond the table the potential is flat; fall back to the tail integral.
    return -std::exp(force_.potential(eta)) *
           adaptive_gauss_semi_infinite(
               [this](double y) {
                 return std::exp(-force_.potential(y)) * 2.0 * s_q_(y);
               },
               eta, 1e-13);
  }
  const double h = eta_[1] - eta_[0];
  int i = std::min(static_cast<int>(eta / h), n - 2);
  const double t = (eta - eta_[i]) / h;
  const double v0 = value_[i], v1 = value_[i + 1];
  const double d0 = -force_.force(eta_[i]) * v0 + 2.0 * s_q_(eta_[i]);
  const double d1 = -force_.force(eta_[i + 1]) * v1 + 2.0 * s_q_(eta_[i + 1]);
  const double t2 = t * t, t3 = t2 * t;
  return v0 * (2 * t3 - 3 * t2 + 1) + v1 * (-2 * t3 + 3 * t2) +
         h * (d0 * (t3 - 2 * t2 + t) + d1 * (t3 - t2));
}

AuxOdeSolution solve_aux_ode(const std::function<double(double)>& s_q,
                             const ForceField& force, double length,
                             int n_table) {
  return AuxOdeSolution(force, s_q, length, n_table);
}

GeneralSourceResult solve_general_source(const MilneProblem& pb,
                                         GeneralSourceMode mode) {
  GeneralSourceResult out{solve_inflow(pb), 0.0, false, false};
  if (mode != GeneralSourceMode::decomposition || !pb.has_source()) return out;

  // Tabulate the isotropic part S_Q = bar S on a fine uniform grid.
  const double L = pb.config.slab_length;
  const int nt = 2048;
  auto sbar_nodes = std::make_shared<Eigen::ArrayXd>(nt + 1);
  auto sbar_vals = std::make_shared<Eigen::ArrayXd>(nt + 1);
  for (int i = 0; i <= nt; ++i) {
    const double s = i * L / nt;
    (*sbar_nodes)[i] = s;
    (*sbar_vals)[i] =
        adaptive_gauss([&](double phi) { return pb.S(s, phi); }, -M_PI, M_PI,
                       1e-13) /
        (2.0 * M_PI);
  }
  const auto s_q = [sbar_nodes, sbar_vals](double eta) {
    if (eta >= (*sbar_nodes)[sbar_nodes->size() - 1]) return 0.0;
    return interp_cubic(*sbar_nodes, *sbar_vals, eta);
  };

  // f1: boundary data with the mean-free source part.
  MilneProblem p1 = pb;
  p1.S = [S = pb.S, s_q](double eta, double phi) {
    return S(eta, phi) - s_q(eta);
  };
  p1.source_M = 2.0 * pb.source_M;
  const MilneSolution f1 = solve_inflow(p1);

  // f2 = a(eta) sin(phi) with a from the auxiliary ODE.
  const AuxOdeSolution aux(pb.force, s_q, L);

  // f3: remainder problem with closed-form source and boundary -a0 sin(phi).
  MilneProblem p3 = pb;
  const double a0 = aux.a0();
  p3.h = [a0](double phi) { return -a0 * std::sin(phi); };
  p3.bound_M = std::abs(a0) + 1e-12;
  p3.S = [aux_copy = aux, s_q, force = pb.force](double eta, double phi) {
    const double a = aux_copy(eta);
    return (s_q(eta) - force.force(eta) * a) * std::cos(2.0 * phi) -
           a * std::sin(phi);
  };
  p3.source_M = 8.0 * (pb.source_M + std::abs(a0) + 1.0);
  const MilneSolution f3 = solve_inflow(p3);

  // Assemble the decomposition on the common grid and compare.
  double gap = 0.0;
  for (int i = 0; i < out.solution.grid.size(); ++i) {
    const double a = aux(out.solution.grid.node(i));
    for (int j = 0; j < out.solution.quad.size(); ++j) {
      const double composed =
          f1.f(i, j) + a * std::sin(out.solution.quad.node(j)) + f3.f(i, j);
      gap = std::max(gap, std::abs(composed - out.solution.f(i, j)));
    }
  }
  out.decomposition_gap = gap;
  out.verified = true;
  out.flagged = gap > 10.0 * pb.config.cross_check_tol;
  return out;
}

}  // namespace milnelab
