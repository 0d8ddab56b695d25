#include <doctest.h>

#include <random>

#include "pfrac/solvers.hpp"
#include "support.hpp"

using namespace pfrac;
using namespace testsupport;

namespace {

SparseSymmetric diag_matrix(const std::vector<double>& d) {
  const int n = static_cast<int>(d.size());
  std::vector<std::pair<int, int>> entries;
  for (int i = 0; i < n; ++i) entries.emplace_back(i, i);
  SparseSymmetric s = build_sym_pattern(n, entries);
  for (int i = 0; i < n; ++i) s.values[i] = d[i];
  return s;
}

}  // namespace

TEST_CASE("inertia correction: positive definite system needs no shift") {
  SolverConfig cfg;
  auto j = diag_matrix({2.0, 1.0, 5.0});
  auto res = inertia_corrected_direction(j, {2.0, 1.0, 5.0}, 0.0, cfg);
  CHECK(res.tau == 0.0);
  CHECK(res.factorizations == 1);
  CHECK(res.tau_trail == std::vector<double>{0.0});
  // Pure Newton direction: (J)^{-1}(-R) = -(1,1,1).
  for (double v : res.delta) CHECK(v == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("inertia correction trace with tau_prev = 0") {
  SolverConfig cfg;
  auto j = diag_matrix({1.0, -1.0});
  auto res = inertia_corrected_direction(j, {1.0, 1.0}, 0.0, cfg);
  // Hand trace: 0 fails; tau_bar = 1e-4 fails; *100 = 1e-2 fails
  // (-1+0.01 < 0); *100 = 1 gives a zero pivot (not positive definite);
  // *100 = 100 succeeds.
  const std::vector<double> expected{0.0, 1e-4, 1e-2, 1.0, 100.0};
  CHECK(res.tau_trail == expected);
  CHECK(res.tau == 100.0);
  CHECK(res.factorizations == 5);
  // delta^T (-R) > 0: descent for the shifted system.
  CHECK(res.delta[0] * -1.0 + res.delta[1] * -1.0 > 0.0);
}

TEST_CASE("inertia correction trace with tau_prev = 0.5") {
  SolverConfig cfg;
  auto j = diag_matrix({1.0, -1.0});
  auto res = inertia_corrected_direction(j, {1.0, 1.0}, 0.5, cfg);
  const double t1 = std::max(1e-20, (1.0 / 3.0) * 0.5);
  std::vector<double> expected{0.0, t1};
  double t = t1;
  while (t - 1.0 <= 0.0 || std::abs(t - 1.0) < 1e-30) {  // until -1 + t > 0 strictly
    t *= 8.0;
    expected.push_back(t);
  }
  CHECK(res.tau_trail == expected);
  CHECK(res.tau == t);
  // First escalation multiplies by kappa_plus = 8 (not kappa_bar_plus).
  REQUIRE(expected.size() >= 3);
  CHECK(expected[2] == 8.0 * t1);
}

TEST_CASE("corrected directions are descent directions") {
  SolverConfig cfg;
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 12;
    std::vector<double> d(n), r(n);
    for (int i = 0; i < n; ++i) {
      d[i] = u(rng);  // indefinite diagonal
      r[i] = u(rng);
    }
    auto j = diag_matrix(d);
    auto res = inertia_corrected_direction(j, r, trial % 2 ? 0.25 : 0.0, cfg);
    double dot = 0.0;
    for (int i = 0; i < n; ++i) dot += res.delta[i] * (-r[i]);
    if (res.tau > 0.0) CHECK(dot > 0.0);  // delta^T (J+tau I) delta > 0 => delta^T(-R) > 0
  }
}

TEST_CASE("armijo backtracking on a quadratic energy") {
  // Single element, every displacement DOF fixed except one; at d = 0 the
  // energy is exactly quadratic in that DOF.
  const Mesh mesh = rectangle_mesh(1, 1);
  const auto mat = make_material(210000.0, 0.3, 2.7, 0.024, 0.01);
  const auto zero = [](double) { return 0.0; };
  DirichletMap bc;
  for (int dof = 0; dof < 8; ++dof) {
    if (dof == 4) continue;  // free: x-displacement of node 2
    bc.dofs.push_back(dof);
    bc.values.push_back(zero);
  }
  Assembler asmb(mesh, mat, bc);
  REQUIRE(asmb.free_u_count() == 1);
  SolverConfig cfg;

  State s = State::zero(4);
  const double u0 = 1e-3;
  s.U[4] = u0;

  const int nred = asmb.reduced_size();
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(nred);

  // Overshooting step -3*u0: E(-2 u0) > E(u0), one contraction gives
  // alpha = 0.5 and E(-u0/2) < E(u0).
  delta[0] = -3.0 * u0;
  auto ls = armijo_backtrack(asmb, s, delta, cfg);
  CHECK(ls.alpha == 0.5);
  CHECK(ls.backtracks == 1);
  CHECK_FALSE(ls.hit_cap);

  // Decreasing first trial keeps alpha = 1.
  delta[0] = -0.5 * u0;
  ls = armijo_backtrack(asmb, s, delta, cfg);
  CHECK(ls.alpha == 1.0);
  CHECK(ls.backtracks == 0);

  // Zero direction: equal energy, strict-increase test is false.
  delta[0] = 0.0;
  ls = armijo_backtrack(asmb, s, delta, cfg);
  CHECK(ls.alpha == 1.0);
  CHECK(ls.backtracks == 0);
}

TEST_CASE("extrapolation weights") {
  // Uniform steps: d~ = 2 d^{n-1} - d^{n-2}.
  auto [w1, w2] = extrapolation_weights(3.0, 2.0, 1.0);
  CHECK(w1 == 2.0);
  CHECK(w2 == 1.0);
  // Startup: constant extrapolation.
  auto [s1, s2] = extrapolation_weights(1.0, 0.0, 0.0);
  CHECK(s1 == 1.0);
  CHECK(s2 == 0.0);
  // Non-uniform steps.
  auto [a1, a2] = extrapolation_weights(4.0, 3.0, 1.0);
  CHECK(a1 == doctest::Approx(1.5));
  CHECK(a2 == doctest::Approx(0.5));
  // Stagnant damage: weights sum to 1, so d~ = d^{n-1} when the two
  // history fields coincide.
  CHECK(a1 - a2 == doctest::Approx(1.0));
}

namespace {

Problem toy_problem(const Mesh& mesh, const MaterialParams& mat, double total) {
  Problem p;
  p.mesh = &mesh;
  p.mat = mat;
  const auto zero = [](double) { return 0.0; };
  p.bcs = {{"bottom_edge", 0, zero},
           {"bottom_edge", 1, zero},
           {"top_edge", 1, [total](double t) { return total * t; }}};
  p.reaction_set = "top_edge";
  p.reaction_component = 1;
  p.applied_magnitude = [total](double t) { return total * t; };
  return p;
}

}  // namespace

TEST_CASE("load stepping bookkeeping") {
  const Mesh mesh = rectangle_mesh(2, 2);
  const auto mat = make_material(210000.0, 0.3, 2.7, 0.024, 0.01);
  SolverConfig cfg;

  // n = 50 to 0.01 mm: uniform increments of 2e-4 mm.
  {
    RunOptions opt;
    opt.increments = 50;
    auto p = toy_problem(mesh, mat, 0.01);
    // Elastic-only portion: stop early via a small total to keep it fast.
    p = toy_problem(mesh, mat, 1e-5);
    p.applied_magnitude = [](double t) { return 0.01 * t; };
    auto reports = run_load_stepping(p, SolverKind::modified_newton, cfg, opt);
    REQUIRE(reports.size() == 50);
    for (int k = 0; k < 50; ++k)
      CHECK(reports[k].applied == doctest::Approx(2e-4 * (k + 1)).epsilon(1e-12));
    long cum = 0;
    for (const auto& r : reports) {
      CHECK(r.iterations >= 0);
      cum += r.iterations;
      CHECK(cum >= 0);
      CHECK(r.converged);
    }
  }

  // Zero loading: each increment settles the tiny penalty-balanced
  // damage offset of the AT1 source term (one Newton correction, order
  // tol_ir^2) and the reaction stays exactly zero.
  {
    RunOptions opt;
    opt.increments = 3;
    auto p = toy_problem(mesh, mat, 0.0);
    for (SolverKind kind : {SolverKind::alternating, SolverKind::quasi_monolithic, SolverKind::modified_newton}) {
      State last = State::zero(mesh.node_count());
      RunOptions o = opt;
      o.on_step = [&](const State& s, const StepReport&) { last = s; };
      auto reports = run_load_stepping(p, kind, cfg, o);
      REQUIRE(reports.size() == 3);
      for (const auto& r : reports) {
        CHECK(r.converged);
        CHECK(r.iterations <= 2);
        CHECK(r.reaction == 0.0);
      }
      CHECK(last.D.cwiseAbs().maxCoeff() < 1e-3);  // drift stays order tol_ir^2 per step
    }
  }
}

TEST_CASE("elastic increments stay uncorrected and solvers agree after damage onset") {
  // Homogeneous AT1 response on a tiny patch pulled past the elastic
  // limit: both implicit solvers and the corrected quasi-monolithic
  // scheme must land on the same solution.
  const Mesh mesh = rectangle_mesh(2, 1, 1.0, 1.0);
  const auto mat = make_material(210000.0, 0.3, 2.7, 0.024, 0.01);
  SolverConfig cfg;
  cfg.tol_qm = 1e-4;
  const double total = 0.02;  // elastic limit is near 0.0122
  RunOptions opt;
  opt.increments = 10;

  std::vector<State> finals;
  std::vector<std::vector<StepReport>> reps;
  for (SolverKind kind : {SolverKind::alternating, SolverKind::modified_newton, SolverKind::quasi_monolithic}) {
    State last = State::zero(mesh.node_count());
    RunOptions o = opt;
    o.on_step = [&](const State& s, const StepReport&) { last = s; };
    auto p = toy_problem(mesh, mat, total);
    reps.push_back(run_load_stepping(p, kind, cfg, o));
    finals.push_back(last);
    for (const auto& r : reps.back()) CHECK(r.converged);
  }

  // Damage grew somewhere.
  CHECK(finals[1].D.maxCoeff() > 0.05);
  // Modified Newton on the convex early increments: no inertia correction.
  CHECK(reps[1][0].ic_iterations == 0);
  CHECK(reps[1][0].last_tau == 0.0);

  // Cross-solver agreement within 10 * tol.
  for (size_t a = 0; a + 1 < finals.size(); ++a) {
    CHECK((finals[a].U - finals[a + 1].U).cwiseAbs().maxCoeff() < 10.0 * cfg.tol);
    CHECK((finals[a].D - finals[a + 1].D).cwiseAbs().maxCoeff() < 10.0 * cfg.tol);
  }

  // Irreversibility within the penalty margin at every increment was
  // checked by construction (D only grew); validate the final state.
  CHECK((finals[1].D - finals[1].D_prev).minCoeff() > -0.05);
}

TEST_CASE("original quasi-monolithic scheme skips the correction loop") {
  const Mesh mesh = rectangle_mesh(2, 1);
  const auto mat = make_material(210000.0, 0.3, 2.7, 0.024, 0.01);
  SolverConfig cfg;
  cfg.max_qm_corrections = 0;
  auto p = toy_problem(mesh, mat, 0.02);
  RunOptions opt;
  opt.increments = 8;
  auto reports = run_load_stepping(p, SolverKind::quasi_monolithic, cfg, opt);
  REQUIRE(reports.size() == 8);
  for (const auto& r : reports) {
    CHECK(r.converged);
    CHECK(r.qm_corrections == 0);
  }
}

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.rho = 1.5;
  CHECK_THROWS(cfg.validate());
  cfg.rho = 0.5;
  cfg.ic.kappa_minus = 1.0;
  CHECK_THROWS(cfg.validate());
}
