#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "milnelab/milne.hpp"
#include "oracles.hpp"

using namespace milnelab;

namespace {

MilneConfig coarse_config() {
  MilneConfig cfg;
  cfg.n_eta = 160;
  cfg.n_angles = 32;
  cfg.slab_length = 30.0;
  return cfg;
}

MilneProblem make_problem(double eps, ForceMode mode,
                          std::function<double(double)> h, double M,
                          MilneConfig cfg = coarse_config()) {
  MilneProblem pb{ForceField(eps, mode), std::move(h), nullptr, M, 0.0, 1.0,
                  MilneBoundaryKind::inflow, cfg};
  return pb;
}

double quad_tol(int n_angles) { return 5.0 * std::pow(2.0 * M_PI / n_angles, 2); }

}  // namespace

TEST_CASE("constants are exact fixed points") {
  for (ForceMode mode : {ForceMode::geometric, ForceMode::none}) {
    const auto pb = make_problem(0.1, mode, [](double) { return 7.0; }, 7.0);
    const MilneSolution sol = solve_inflow(pb);
    CHECK(sol.converged);
    CHECK((sol.f - 7.0).abs().maxCoeff() < 1e-10);
    CHECK(sol.f_infinity == doctest::Approx(7.0).epsilon(1e-10));
    CHECK(sol.r.abs().maxCoeff() < 1e-10);
    CHECK(sol.q.minCoeff() > 7.0 - 1e-10);
    // Diffusive kind: zero data gives the zero solution.
    MilneProblem pz = pb;
    pz.kind = MilneBoundaryKind::diffusive;
    pz.h = [](double) { return 0.0; };
    pz.bound_M = 1.0;
    const MilneSolution zs = solve_diffusive(pz);
    CHECK(zs.f.abs().maxCoeff() < 1e-10);
    CHECK(std::abs(zs.p_residual) < 1e-10);
  }
}

TEST_CASE("maximum principle for cos(phi)+2") {
  for (ForceMode mode : {ForceMode::geometric, ForceMode::none}) {
    const auto pb = make_problem(
        0.1, mode, [](double phi) { return std::cos(phi) + 2.0; }, 3.0);
    const MilneSolution sol = solve_inflow(pb);
    const double tol = quad_tol(pb.config.n_angles);
    CHECK(sol.converged);
    CHECK(sol.f.minCoeff() >= 1.0 - tol);
    CHECK(sol.f.maxCoeff() <= 3.0 + tol);
    CHECK(sol.q[0] >= 1.5 - tol);
    CHECK(sol.q[0] <= 2.5 + tol);
    CHECK(sol.f_infinity >= 1.5 - tol);
    CHECK(sol.f_infinity <= 2.5 + tol);
    CHECK_FALSE(sol.tail_flagged);
  }
}

TEST_CASE("cos(3phi) wall average stays below 1/2") {
  const auto pb = make_problem(
      0.1, ForceMode::none, [](double phi) { return std::cos(3.0 * phi); }, 1.0);
  const MilneSolution sol = solve_inflow(pb);
  CHECK(sol.q[0] <= 0.5 + quad_tol(pb.config.n_angles));
}

TEST_CASE("orthogonality and weighted flux identities") {
  for (ForceMode mode : {ForceMode::geometric, ForceMode::none}) {
    const auto pb = make_problem(
        0.1, mode, [](double phi) { return std::cos(phi) + 2.0; }, 3.0);
    const MilneSolution sol = solve_inflow(pb);
    const double tol = quad_tol(pb.config.n_angles);
    CHECK(sol.diagnostics.orthogonality_residual.abs().maxCoeff() < tol);
    const Eigen::ArrayXd& wf = sol.diagnostics.weighted_flux;
    CHECK((wf - wf[0]).abs().maxCoeff() < tol);
    // alpha and beta sanity for a constant field.
    const auto pc = make_problem(0.1, mode, [](double) { return 2.0; }, 2.0);
    const MilneSolution cs = solve_inflow(pc);
    CHECK(cs.diagnostics.alpha.abs().maxCoeff() < 1e-9);
    CHECK((cs.diagnostics.beta - 2.0 * M_PI).abs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("compatibility defects") {
  auto pb = make_problem(0.1, ForceMode::geometric, [](double) { return 1.0; },
                         1.0);
  pb.kind = MilneBoundaryKind::diffusive;
  const CompatibilityReport r1 = check_compatibility(pb);
  CHECK_FALSE(r1.pass);
  CHECK(r1.defect == doctest::Approx(2.0).epsilon(1e-11));

  pb.h = [](double phi) { return std::cos(phi); };
  const CompatibilityReport r2 = check_compatibility(pb);
  CHECK(r2.pass);
  CHECK(std::abs(r2.defect) < 1e-10);

  pb.h = [](double phi) { return std::cos(3.0 * phi); };
  const CompatibilityReport r3 = check_compatibility(pb);
  CHECK(r3.pass);
  CHECK(std::abs(r3.defect) < 1e-10);
}

TEST_CASE("diffusive solve accepts cos(3phi) and rejects constants") {
  auto pb = make_problem(0.1, ForceMode::geometric,
                         [](double phi) { return std::cos(3.0 * phi); }, 1.0);
  pb.kind = MilneBoundaryKind::diffusive;
  const MilneSolution sol = solve_diffusive(pb);
  CHECK(std::abs(sol.compatibility_defect) < 1e-10);
  CHECK(std::abs(sol.p_residual) < 2e-3);  // coarse grid; tightened in acceptance

  auto bad = make_problem(0.1, ForceMode::geometric, [](double) { return 1.0; },
                          1.0);
  bad.kind = MilneBoundaryKind::diffusive;
  CHECK_THROWS_AS(solve_diffusive(bad), CompatibilityError);
  try {
    solve_diffusive(bad);
  } catch (const CompatibilityError& e) {
    CHECK(e.defect() == doctest::Approx(2.0).epsilon(1e-11));
  }
}

TEST_CASE("decay fit: synthetic, solved, and floor branch") {
  // Synthetic exponential: rate 1.0 within 5%.
  const RadialGrid grid(200, 30.0);
  const AngularQuadrature quad(16);
  Eigen::ArrayXXd f(grid.size(), quad.size());
  for (int i = 0; i < grid.size(); ++i)
    for (int j = 0; j < quad.size(); ++j)
      f(i, j) = 4.0 + std::exp(-grid.node(i)) * std::sin(quad.node(j));
  const DecayFit synth = fit_decay_rate(grid.nodes(), f, 4.0, 1e-13);
  CHECK_FALSE(synth.is_lower_bound);
  CHECK(synth.rate == doctest::Approx(1.0).epsilon(0.05));

  const auto pb = make_problem(
      0.1, ForceMode::none, [](double phi) { return std::cos(phi) + 2.0; }, 3.0);
  const MilneSolution sol = solve_inflow(pb);
  CHECK_FALSE(sol.decay.is_lower_bound);
  CHECK(sol.decay.rate > 0.0);

  // Constant field sits at the noise floor: lower-bound branch.
  Eigen::ArrayXXd c = Eigen::ArrayXXd::Constant(grid.size(), quad.size(), 4.0);
  const DecayFit flat = fit_decay_rate(grid.nodes(), c, 4.0, 1e-13);
  CHECK(flat.is_lower_bound);
}

TEST_CASE("auxiliary ODE") {
  const ForceField none(0.1, ForceMode::none);
  const AuxOdeSolution zero =
      solve_aux_ode([](double) { return 0.0; }, none, 30.0);
  CHECK(std::abs(zero(0.0)) < 1e-13);
  CHECK(std::abs(zero(7.3)) < 1e-13);

  const AuxOdeSolution a =
      solve_aux_ode([](double eta) { return std::exp(-eta); }, none, 30.0);
  for (double eta : {0.0, 0.5, 1.0, 3.0, 10.0})
    CHECK(a(eta) == doctest::Approx(-2.0 * std::exp(-eta)).epsilon(1e-9));

  // Tail bound |a(L)| <= 2 sup|S_Q| e^{-K L} / K.
  const ForceField geo(0.1, ForceMode::geometric);
  const AuxOdeSolution b =
      solve_aux_ode([](double eta) { return std::exp(-0.5 * eta); }, geo, 30.0);
  CHECK(std::abs(b(30.0)) <= 2.0 * std::exp(-0.5 * 30.0) / 0.5 + 1e-12);
}

TEST_CASE("general source: identity and cross-modes") {
  // Pure isotropic source, no force: <sin phi, r>(eta) = -e^{-eta}.
  MilneProblem pb{ForceField(0.1, ForceMode::none),
                  [](double) { return 0.0; },
                  [](double eta, double) { return std::exp(-eta); },
                  0.0,
                  1.0,
                  1.0,
                  MilneBoundaryKind::inflow,
                  coarse_config()};
  const MilneSolution sol = solve_inflow(pb);
  CHECK(sol.converged);
  for (double eta : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    const double got = sol.flux_moment_dense(eta) / (2.0 * M_PI);
    CHECK(std::abs(got + std::exp(-eta)) < 1e-4);
  }
  // Grid-level diagnostic against the same identity.
  for (int i = 0; i < sol.grid.size(); i += 16) {
    const double expected = -std::exp(-sol.grid.node(i));
    CHECK(std::abs(sol.diagnostics.orthogonality_residual[i] - expected) <
          quad_tol(pb.config.n_angles));
  }

  // A source with vanishing mean leaves solve_inflow untouched.
  MilneProblem podd = pb;
  podd.S = [](double eta, double phi) {
    return std::exp(-eta) * std::cos(phi + 0.4);
  };
  const GeneralSourceResult direct =
      solve_general_source(podd, GeneralSourceMode::direct);
  const MilneSolution plain = solve_inflow(podd);
  CHECK((direct.solution.f - plain.f).abs().maxCoeff() == 0.0);

  // Mixed source: decomposition route agrees with the direct one.
  MilneProblem pmix = pb;
  pmix.h = [](double phi) { return 0.5 * std::cos(phi); };
  pmix.bound_M = 0.5;
  pmix.S = [](double eta, double phi) {
    return std::exp(-eta) * (1.0 + 0.5 * std::sin(phi));
  };
  pmix.source_M = 1.5;
  const GeneralSourceResult both =
      solve_general_source(pmix, GeneralSourceMode::decomposition);
  CHECK(both.verified);
  CHECK_FALSE(both.flagged);
  CHECK(both.decomposition_gap <= 10.0 * pmix.config.cross_check_tol);
}

TEST_CASE("solver modes agree") {
  auto pb = make_problem(0.1, ForceMode::geometric,
                         [](double phi) { return std::cos(phi) + 2.0; }, 3.0);
  pb.config.n_eta = 100;
  pb.config.n_angles = 16;
  const MilneSolution direct = solve_inflow(pb);

  // Damped iteration of the penalized system agrees with its factorization.
  MilneProblem pen = pb;
  pen.config.lambda = 0.05;
  const MilneSolution pen_direct = solve_inflow(pen);
  MilneProblem damped = pen;
  damped.config.mode = SolverMode::damped;
  damped.config.max_iterations = 5000;
  const MilneSolution dsol = solve_inflow(damped);
  CHECK(dsol.converged);
  CHECK((dsol.fbar - pen_direct.fbar).abs().maxCoeff() < 1e-8);

  MilneProblem accel = pb;
  accel.config.mode = SolverMode::accelerated;
  accel.config.max_iterations = 600;
  accel.config.tolerance = 1e-9;
  const MilneSolution asol = solve_inflow(accel);
  CHECK(asol.converged);
  CHECK(asol.iterations < 400);
  CHECK((asol.fbar - direct.fbar).abs().maxCoeff() < 1e-7);
}

TEST_CASE("beta-moment f_infinity versus tail average") {
  const auto pb = make_problem(
      0.1, ForceMode::geometric, [](double phi) { return std::cos(phi) + 2.0; },
      3.0);
  const MilneSolution sol = solve_inflow(pb);
  CHECK(sol.f_infinity ==
        doctest::Approx(sol.f_infinity_secondary).epsilon(1e-6));
  // Brute-force fine-grid oracle: the band holds on refinement.
  MilneProblem fine = pb;
  fine.config.n_eta = 320;
  fine.config.n_angles = 64;
  const MilneSolution ref = solve_inflow(fine);
  CHECK(std::abs(ref.f_infinity - sol.f_infinity) < 5e-4);
}

TEST_CASE("grid refinement stability of the wall average") {
  auto pb = make_problem(0.1, ForceMode::geometric,
                         [](double phi) { return std::cos(phi) + 2.0; }, 3.0);
  pb.config.n_eta = 100;
  pb.config.n_angles = 16;
  const double coarse = solve_inflow(pb).q[0];
  pb.config.n_eta = 200;
  pb.config.n_angles = 32;
  pb.config.first_spacing = 2.5e-3;
  const double fine = solve_inflow(pb).q[0];
  CHECK(std::abs(coarse - fine) < 4.0 * quad_tol(16));
}

TEST_CASE("problem validation rejects bad declarations") {
  auto pb = make_problem(0.1, ForceMode::none,
                         [](double phi) { return std::cos(phi) + 2.0; }, 0.5);
  CHECK_THROWS_AS(solve_inflow(pb), std::invalid_argument);
  MilneProblem ps = make_problem(0.1, ForceMode::none,
                                 [](double) { return 0.0; }, 1.0);
  ps.S = [](double, double) { return 1.0; };  // no decay
  ps.source_M = 1.0;
  ps.decay_K = 2.0;
  CHECK_THROWS_AS(solve_inflow(ps), std::invalid_argument);
}
