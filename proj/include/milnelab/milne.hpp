#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "milnelab/angular.hpp"
#include "milnelab/characteristics.hpp"
#include "milnelab/force_field.hpp"
#include "milnelab/grids.hpp"

namespace milnelab {

enum class MilneBoundaryKind { inflow, diffusive };
enum class SolverMode { direct, damped, accelerated };

/// Angular rule used inside the fixed-point kernel.  `uniform` matches the
/// module AngularQuadrature; `graded` packs Gauss panels dyadically toward
/// the grazing directions and is used where acceptance tolerances are
/// tighter than the uniform rule can deliver.
enum class SolverRule { uniform, graded };

struct MilneConfig {
  int n_eta = 400;
  double slab_length = 30.0;
  double grading_ratio = 1.15;
  double first_spacing = 5e-3;
  int n_angles = 64;
  SolverMode mode = SolverMode::direct;
  SolverRule rule = SolverRule::uniform;
  double lambda = 0.0;       // transport penalty; damped mode iterates it
  double tolerance = 1e-10;  // fixed-point / linear-solve residual
  double compatibility_tol = 1e-8;
  double p_residual_tol = 1e-6;
  double cross_check_tol = 1e-5;
  double path_dtau = 0.7;  // optical depth per characteristic panel
  int max_iterations = 20000;
  int threads = 0;  // 0 = hardware concurrency
};

/// Half-space boundary-layer problem for one theta slice.
struct MilneProblem {
  ForceField force;
  std::function<double(double)> h;                  // data on sin(phi) > 0
  std::function<double(double, double)> S;          // S(eta, phi); may be null
  double bound_M = 1.0;                             // declared |h| bound
  double source_M = 0.0;                            // declared |S| amplitude
  double decay_K = 1.0;                             // declared source decay
  MilneBoundaryKind kind = MilneBoundaryKind::inflow;
  MilneConfig config;

  bool has_source() const { return static_cast<bool>(S) && source_M != 0.0; }
};

struct DiagnosticsTrace {
  Eigen::ArrayXd alpha;  // 1/2 int f^2 sin phi dphi
  Eigen::ArrayXd beta;   // int f sin^2 phi dphi
  // Normalized moments (1/2pi) int . dphi, so the general-source identity
  // reads orthogonality_residual(eta) = -int_eta^inf e^{V(eta)-V(y)} Sbar dy
  // with Sbar the angular average of S.
  Eigen::ArrayXd orthogonality_residual;
  Eigen::ArrayXd weighted_flux;
  Eigen::ArrayXd beta_ode_residual;  // |d beta/d eta - D(eta)|
};

struct DecayFit {
  double rate = 0.0;
  bool is_lower_bound = false;  // tail at the noise floor; rate is a bound
};

class MilneSolution {
 public:
  RadialGrid grid;
  AngularQuadrature quad;
  MilneProblem problem;

  Eigen::ArrayXXd f;    // n_eta x n_angles
  Eigen::ArrayXd fbar;  // converged isotropic component on the grid
  Eigen::ArrayXd q;     // angular average per eta node
  Eigen::ArrayXXd r;    // f - q
  double f_infinity = 0.0;
  double f_infinity_secondary = 0.0;
  bool tail_flagged = false;

  DiagnosticsTrace diagnostics;
  DecayFit decay;

  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  std::vector<double> residual_history;

  // Diffusive bookkeeping (meaningful when kind == diffusive).
  double compatibility_defect = 0.0;
  double p_residual = 0.0;
  bool p_flagged = false;

  /// Evaluate the solution at an arbitrary point by tracing the
  /// characteristic against the converged isotropic component.
  double eval(double eta, double phi) const;
  /// int f(eta, phi) sin(phi) dphi by adaptive quadrature of eval().
  double flux_moment_dense(double eta, double abs_tol = 1e-9) const;
  /// -1/2 int_{sin phi<0} f(0, phi) sin phi dphi (diffusive moment).
  double p_moment_dense(double abs_tol = 1e-9) const;

  MilneSolution(RadialGrid g, AngularQuadrature qd, MilneProblem pb)
      : grid(std::move(g)), quad(std::move(qd)), problem(std::move(pb)) {}
};

struct CompatibilityReport {
  bool pass = false;
  double defect = 0.0;
};

/// Raised when a diffusive solve is asked for incompatible data.
class CompatibilityError : public std::runtime_error {
 public:
  explicit CompatibilityError(double defect)
      : std::runtime_error("diffusive boundary data violates the "
                           "compatibility condition"),
        defect_(defect) {}
  double defect() const { return defect_; }

 private:
  double defect_;
};

CompatibilityReport check_compatibility(const MilneProblem& problem);

MilneSolution solve_inflow(const MilneProblem& problem);
MilneSolution solve_diffusive(const MilneProblem& problem);

/// a(eta) solving -a' - F a + 2 S_Q = 0 with a(0) chosen so a -> 0 at
/// infinity; tabulated with exact-slope Hermite interpolation.
class AuxOdeSolution {
 public:
  AuxOdeSolution(const ForceField& force,
                 std::function<double(double)> s_q, double length,
                 int n_table = 2048);
  double operator()(double eta) const;
  double a0() const { return a0_; }
  double derivative(double eta) const;  // -F a + 2 S_Q

 private:
  ForceField force_;
  std::function<double(double)> s_q_;
  double a0_ = 0.0;
  Eigen::ArrayXd eta_, value_;
};

AuxOdeSolution solve_aux_ode(const std::function<double(double)>& s_q,
                             const ForceField& force, double length,
                             int n_table = 2048);

enum class GeneralSourceMode { direct, decomposition };

struct GeneralSourceResult {
  MilneSolution solution;          // the returned (direct-route) solution
  double decomposition_gap = 0.0;  // sup |direct - decomposition| when verified
  bool verified = false;
  bool flagged = false;  // gap beyond 10x cross-check tolerance
};

GeneralSourceResult solve_general_source(
    const MilneProblem& problem,
    GeneralSourceMode mode = GeneralSourceMode::direct);

/// Least-squares exponential rate of sup_phi |f - f_inf| over the tail
/// window [L/2, 0.9 L]; values below the noise floor are excluded.
DecayFit fit_decay_rate(const Eigen::ArrayXd& eta, const Eigen::ArrayXXd& f,
                        double f_infinity, double noise_floor);
DecayFit fit_decay_rate(const MilneSolution& sol);

/// Exact pointwise hydrodynamic/microscopic split of a converged solution.
void decompose_qr(MilneSolution& sol);
/// Diagnostics with the module quadrature; fills sol.diagnostics.
void compute_diagnostics(MilneSolution& sol);

}  // namespace milnelab
