#include "pfrac/solvers.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace pfrac {

namespace {

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

}  // namespace

void SolverConfig::validate() const {
  if (!(tol > 0.0 && tol_in > 0.0 && tol_qm > 0.0)) throw std::invalid_argument("solver: tolerances must be positive");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("solver: rho must be in (0, 1)");
  if (!(ic.kappa_plus > 1.0)) throw std::invalid_argument("solver: kappa_plus must exceed 1");
  if (!(ic.kappa_minus > 0.0 && ic.kappa_minus < 1.0)) throw std::invalid_argument("solver: kappa_minus must be in (0, 1)");
  if (!(ic.kappa_bar_plus > 1.0)) throw std::invalid_argument("solver: kappa_bar_plus must exceed 1");
  if (!(ic.tau_bar > ic.tau_bar_min && ic.tau_bar_min > 0.0))
    throw std::invalid_argument("solver: tau_bar > tau_bar_min > 0 required");
  if (max_newton_iters < 1 || max_backtracks < 1 || max_qm_corrections < 0)
    throw std::invalid_argument("solver: iteration caps must be positive");
}

SolverKind solver_from_name(const std::string& name) {
  if (name == "am") return SolverKind::alternating;
  if (name == "qm") return SolverKind::quasi_monolithic;
  if (name == "mn") return SolverKind::modified_newton;
  throw std::invalid_argument("unknown solver '" + name + "' (expected am, qm or mn)");
}

std::string solver_name(SolverKind k) {
  switch (k) {
    case SolverKind::alternating: return "am";
    case SolverKind::quasi_monolithic: return "qm";
    case SolverKind::modified_newton: return "mn";
  }
  return "?";
}

DirectionResult inertia_corrected_direction(const LdltSymbolic& symbolic, LdltFactor& factor,
                                            const SparseSymmetric& j, const std::vector<double>& r,
                                            double tau_prev, const SolverConfig& cfg) {
  const int n = j.n;
  DirectionResult out;
  auto positive_definite = [&](double tau) {
    factor.factorize(symbolic, j, tau);
    ++out.factorizations;
    out.tau_trail.push_back(tau);
    return !factor.failed() && factor.inertia().positive_definite(n);
  };

  double tau = 0.0;
  if (!positive_definite(0.0)) {
    tau = tau_prev == 0.0 ? cfg.ic.tau_bar : std::max(cfg.ic.tau_bar_min, cfg.ic.kappa_minus * tau_prev);
    while (!positive_definite(tau)) {
      tau *= tau_prev == 0.0 ? cfg.ic.kappa_bar_plus : cfg.ic.kappa_plus;
      if (tau > cfg.ic.tau_ceiling)
        throw std::runtime_error("inertia correction: shift exceeded the ceiling");
    }
  }
  std::vector<double> b(r.size());
  for (size_t i = 0; i < r.size(); ++i) b[i] = -r[i];
  out.delta = factor.solve(j, b);
  out.tau = tau;
  return out;
}

DirectionResult inertia_corrected_direction(const SparseSymmetric& j, const std::vector<double>& r,
                                            double tau_prev, const SolverConfig& cfg) {
  LdltSymbolic symbolic(j);
  LdltFactor factor;
  return inertia_corrected_direction(symbolic, factor, j, r, tau_prev, cfg);
}

LineSearchResult armijo_backtrack(const Assembler& asmb, const State& state,
                                  const Eigen::VectorXd& delta, const SolverConfig& cfg) {
  LineSearchResult res;
  const double e0 = asmb.total_energy(state);
  double alpha = 1.0;
  int i = 0;
  while (true) {
    State trial = state;
    asmb.apply_stacked_step(trial, delta, alpha);
    const double e = asmb.total_energy(trial);
    const bool increase = !(e <= e0);  // non-finite trial energies keep backtracking
    if (!increase) break;
    if (i >= cfg.max_backtracks) {
      res.hit_cap = true;
      break;
    }
    alpha *= cfg.rho;
    ++i;
  }
  res.alpha = alpha;
  res.backtracks = i;
  return res;
}

SolverSession::SolverSession(Assembler& asmb, SolverConfig cfg) : asmb_(asmb), cfg_(cfg) {
  cfg_.validate();
}

StepReport SolverSession::modified_newton_step(State& state) {
  Timer timer;
  StepReport rep;
  Eigen::VectorXd ru, rd;
  while (true) {
    asmb_.residual(state, AssemblyMode::full, nullptr, ru, rd);
    const Eigen::VectorXd r = asmb_.reduce_stacked(ru, rd);
    rep.residual_inf = inf_norm(r);
    if (rep.residual_inf <= cfg_.tol) {
      rep.converged = true;
      break;
    }
    if (rep.iterations >= cfg_.max_newton_iters) {
      rep.message = "modified Newton: iteration cap reached";
      break;
    }
    const SparseSymmetric& j = asmb_.jacobian_full_reduced(state);
    if (!full_symbolic_) full_symbolic_.emplace(j);
    DirectionResult dir = inertia_corrected_direction(*full_symbolic_, full_factor_, j, to_std(r), tau_prev_, cfg_);
    rep.factorizations += dir.factorizations;
    tau_prev_ = dir.tau;
    rep.last_tau = dir.tau;
    if (dir.tau > 0.0) ++rep.ic_iterations;

    const Eigen::VectorXd delta = to_eigen(dir.delta);
    const LineSearchResult ls = armijo_backtrack(asmb_, state, delta, cfg_);
    if (ls.hit_cap && rep.message.empty()) rep.message = "line search hit the backtrack cap";
    asmb_.apply_stacked_step(state, delta, ls.alpha);
    ++rep.iterations;
  }
  rep.wall_time_s = timer.seconds();
  return rep;
}

StepReport SolverSession::staggered_step(State& state) {
  Timer timer;
  StepReport rep;
  const int nfu = asmb_.free_u_count();
  Eigen::VectorXd ru, rd;

  auto rd_norm = [&]() {
    asmb_.residual(state, AssemblyMode::full, nullptr, ru, rd);
    return inf_norm(rd);
  };
  auto ru_free_norm = [&]() {
    double m = 0.0;
    for (int k = 0; k < nfu; ++k) m = std::max(m, std::abs(ru[asmb_.free_u()[k]]));
    return m;
  };

  double best_outer = std::numeric_limits<double>::infinity();
  long stalled = 0;
  bool warned = false;

  double outer = rd_norm();
  rep.residual_inf = outer;
  while (outer > cfg_.tol) {
    if (rep.iterations >= cfg_.max_newton_iters) {
      rep.message = "staggered: iteration cap reached";
      rep.wall_time_s = timer.seconds();
      return rep;
    }
    // Damage sub-problem at fixed displacements.
    while (inf_norm(rd) > cfg_.tol_in) {
      const SparseSymmetric& jdd = asmb_.jacobian_dd(state);
      if (!dd_symbolic_) dd_symbolic_.emplace(jdd);
      dd_factor_.factorize(*dd_symbolic_, jdd, 0.0);
      if (dd_factor_.failed() || dd_factor_.inertia().n_zero > 0) {
        rep.message = "staggered: singular damage Jacobian";
        rep.wall_time_s = timer.seconds();
        return rep;
      }
      std::vector<double> b(asmb_.nodes());
      for (int i = 0; i < asmb_.nodes(); ++i) b[i] = -rd[i];
      const auto delta = dd_factor_.solve(jdd, b);
      for (int i = 0; i < asmb_.nodes(); ++i) state.D[i] += delta[i];
      ++rep.iterations;
      asmb_.residual(state, AssemblyMode::full, nullptr, ru, rd);
      if (rep.iterations >= cfg_.max_newton_iters) break;
    }
    // Displacement sub-problem at fixed damage.
    while (ru_free_norm() > cfg_.tol_in) {
      const SparseSymmetric& juu = asmb_.jacobian_uu_reduced(state);
      if (!uu_symbolic_) uu_symbolic_.emplace(juu);
      uu_factor_.factorize(*uu_symbolic_, juu, 0.0);
      if (uu_factor_.failed() || uu_factor_.inertia().n_zero > 0) {
        rep.message = "staggered: singular displacement Jacobian";
        rep.wall_time_s = timer.seconds();
        return rep;
      }
      std::vector<double> b(nfu);
      for (int k = 0; k < nfu; ++k) b[k] = -ru[asmb_.free_u()[k]];
      const auto delta = uu_factor_.solve(juu, b);
      for (int k = 0; k < nfu; ++k) state.U[asmb_.free_u()[k]] += delta[k];
      ++rep.iterations;
      asmb_.residual(state, AssemblyMode::full, nullptr, ru, rd);
      if (rep.iterations >= cfg_.max_newton_iters) break;
    }
    outer = inf_norm(rd);
    rep.residual_inf = outer;
    // Stagnation guard: warn when the outer residual stops improving.
    if (outer < best_outer * (1.0 - 1e-12)) {
      best_outer = outer;
      stalled = 0;
    } else if (++stalled >= 200 && !warned) {
      rep.message = "staggered: outer residual stagnating";
      warned = true;
    }
  }
  rep.converged = true;
  rep.wall_time_s = timer.seconds();
  return rep;
}

std::pair<double, double> extrapolation_weights(double t, double t_prev, double t_prev2) {
  if (!(t_prev > t_prev2)) return {1.0, 0.0};
  const double dt_hist = t_prev - t_prev2;
  return {(t - t_prev2) / dt_hist, (t - t_prev) / dt_hist};
}

StepReport SolverSession::quasi_monolithic_step(State& state) {
  Timer timer;
  StepReport rep;

  const auto [w1, w2] = extrapolation_weights(state.t, state.t_prev, state.t_prev2);

  Eigen::VectorXd ru, rd;
  auto newton_solve = [&](const Eigen::VectorXd& d_tilde) -> bool {
    while (true) {
      asmb_.residual(state, AssemblyMode::quasi_mono, &d_tilde, ru, rd);
      const Eigen::VectorXd r = asmb_.reduce_stacked(ru, rd);
      rep.residual_inf = inf_norm(r);
      if (rep.residual_inf <= cfg_.tol) return true;
      if (rep.iterations >= cfg_.max_newton_iters) {
        rep.message = "quasi-monolithic: iteration cap reached";
        return false;
      }
      const CscMatrix& j = asmb_.jacobian_qm_reduced(state, d_tilde);
      qm_lu_.factorize(j);
      if (qm_lu_.singular()) {
        rep.message = "quasi-monolithic: singular Jacobian";
        return false;
      }
      std::vector<double> b(r.size());
      for (Eigen::Index i = 0; i < r.size(); ++i) b[i] = -r[i];
      const auto delta = qm_lu_.solve(b);
      asmb_.apply_stacked_step(state, to_eigen(delta), 1.0);
      ++rep.iterations;
    }
  };

  Eigen::VectorXd d_tilde = w1 * state.D_prev - w2 * state.D_prev2;
  Eigen::VectorXd d_last = state.D_prev;
  if (!newton_solve(d_tilde)) {
    rep.wall_time_s = timer.seconds();
    return rep;
  }

  // Extrapolation correction loop on the damage iterates.
  while (cfg_.max_qm_corrections > 0) {
    const double change = (state.D - d_last).norm();
    if (change <= cfg_.tol_qm) break;
    if (rep.qm_corrections >= cfg_.max_qm_corrections) {
      rep.qm_cap_hit = true;
      rep.message = "quasi-monolithic: correction-loop cap reached";
      rep.wall_time_s = timer.seconds();
      return rep;
    }
    d_tilde = w1 * state.D - w2 * d_last;
    d_last = state.D;
    ++rep.qm_corrections;
    if (!newton_solve(d_tilde)) {
      rep.wall_time_s = timer.seconds();
      return rep;
    }
  }
  rep.converged = true;
  rep.wall_time_s = timer.seconds();
  return rep;
}

StepReport SolverSession::step(SolverKind kind, State& state) {
  switch (kind) {
    case SolverKind::alternating: return staggered_step(state);
    case SolverKind::quasi_monolithic: return quasi_monolithic_step(state);
    case SolverKind::modified_newton: return modified_newton_step(state);
  }
  throw std::logic_error("unknown solver kind");
}

std::vector<StepReport> run_load_stepping(const Problem& problem, SolverKind kind,
                                          const SolverConfig& cfg, const RunOptions& options) {
  if (!problem.mesh) throw std::invalid_argument("run_load_stepping: missing mesh");
  if (options.increments < 1) throw std::invalid_argument("run_load_stepping: increments must be >= 1");
  const DirichletMap dirichlet = extract_dirichlet_dofs(*problem.mesh, problem.bcs);
  Assembler asmb(*problem.mesh, problem.mat, dirichlet);
  SolverSession session(asmb, cfg);

  State state = State::zero(problem.mesh->node_count());
  std::vector<StepReport> reports;
  reports.reserve(options.increments);

  for (int inc = 1; inc <= options.increments; ++inc) {
    state.D_prev2 = state.D_prev;
    state.D_prev = state.D;
    state.t_prev2 = state.t_prev;
    state.t_prev = state.t;
    state.t = static_cast<double>(inc) / options.increments;
    asmb.impose_dirichlet(state, state.t);

    StepReport rep = session.step(kind, state);
    rep.increment = inc;
    rep.applied = problem.applied_magnitude ? problem.applied_magnitude(state.t) : state.t;
    if (!problem.reaction_set.empty()) {
      // The reaction is extracted from the residual form the solver
      // actually drove to zero.
      if (kind == SolverKind::quasi_monolithic) {
        Eigen::VectorXd d_used;
        if (cfg.max_qm_corrections > 0) {
          // Converged correction loop: the damage iterates have stagnated
          // and the final extrapolation coincides with the solution.
          d_used = state.D;
        } else {
          const auto [w1, w2] = extrapolation_weights(state.t, state.t_prev, state.t_prev2);
          d_used = w1 * state.D_prev - w2 * state.D_prev2;
        }
        rep.reaction = asmb.reaction_force(state, problem.reaction_set, problem.reaction_component,
                                           AssemblyMode::quasi_mono, &d_used);
      } else {
        rep.reaction = asmb.reaction_force(state, problem.reaction_set, problem.reaction_component);
      }
    }
    reports.push_back(rep);
    if (options.on_step) options.on_step(state, reports.back());
    if (!rep.converged && !options.continue_on_failure) break;
  }
  return reports;
}

}  // namespace pfrac
