#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pfrac/assembly.hpp"
#include "pfrac/ldlt.hpp"
#include "pfrac/lusolve.hpp"

namespace pfrac {

/// Inertia-correction parameters (IPOPT defaults).
struct InertiaCorrection {
  double kappa_plus = 8.0;
  double kappa_minus = 1.0 / 3.0;
  double kappa_bar_plus = 100.0;
  double tau_bar = 1e-4;
  double tau_bar_min = 1e-20;
  double tau_ceiling = 1e40;
};

struct SolverConfig {
  double tol = 1e-4;       // residual L-inf tolerance
  double tol_in = 1e-5;    // inner Newton tolerance (staggered)
  double tol_qm = 0.01;    // extrapolation-loop L2 tolerance
  double rho = 0.5;        // line-search contraction
  InertiaCorrection ic;
  long max_newton_iters = 100000;   // per increment
  int max_backtracks = 60;
  int max_qm_corrections = 500;     // 0: original quasi-monolithic scheme

  void validate() const;
};

struct StepReport {
  int increment = 0;
  double applied = 0.0;        // prescribed displacement magnitude (mm)
  long iterations = 0;         // corrections made to (u, d)
  long ic_iterations = 0;      // iterations that required tau > 0
  long qm_corrections = 0;     // extrapolation-loop replays
  double reaction = 0.0;       // signed reaction force (N)
  double wall_time_s = 0.0;
  double residual_inf = 0.0;
  double last_tau = 0.0;
  long factorizations = 0;     // includes the tau-search factorizations
  bool converged = false;
  bool qm_cap_hit = false;
  std::string message;
};

enum class SolverKind { alternating, quasi_monolithic, modified_newton };

SolverKind solver_from_name(const std::string& name);  // am | qm | mn
std::string solver_name(SolverKind k);

/// Modified Newton direction: factorize J + tau*I until the inertia is
/// all-positive, escalating tau per the inertia-correction schedule, then
/// solve for the step. tau_trail records every shift tried.
struct DirectionResult {
  std::vector<double> delta;
  double tau = 0.0;
  long factorizations = 0;
  std::vector<double> tau_trail;
};

DirectionResult inertia_corrected_direction(const LdltSymbolic& symbolic, LdltFactor& factor,
                                            const SparseSymmetric& j, const std::vector<double>& r,
                                            double tau_prev, const SolverConfig& cfg);

/// One-shot convenience overload (builds the symbolic analysis).
DirectionResult inertia_corrected_direction(const SparseSymmetric& j, const std::vector<double>& r,
                                            double tau_prev, const SolverConfig& cfg);

/// Linear-extrapolation weights d~ = w1 * d^{n-1} - w2 * d^{n-2}; constant
/// extrapolation (1, 0) at the first increment where only one history
/// field exists.
std::pair<double, double> extrapolation_weights(double t, double t_prev, double t_prev2);

/// Backtracking line-search on the regularized energy: halve alpha until
/// the energy no longer increases (strict-decrease loop condition).
struct LineSearchResult {
  double alpha = 1.0;
  int backtracks = 0;
  bool hit_cap = false;
};

LineSearchResult armijo_backtrack(const Assembler& asmb, const State& state,
                                  const Eigen::VectorXd& delta, const SolverConfig& cfg);

/// One solver run: owns the per-pattern symbolic caches and the carried
/// inertia-correction shift. A session drives one state exclusively.
class SolverSession {
 public:
  SolverSession(Assembler& asmb, SolverConfig cfg);

  StepReport staggered_step(State& state);
  StepReport quasi_monolithic_step(State& state);
  StepReport modified_newton_step(State& state);
  StepReport step(SolverKind kind, State& state);

  const SolverConfig& config() const { return cfg_; }

 private:
  Assembler& asmb_;
  SolverConfig cfg_;
  std::optional<LdltSymbolic> full_symbolic_, uu_symbolic_, dd_symbolic_;
  LdltFactor full_factor_, uu_factor_, dd_factor_;
  LuSolver qm_lu_;
  double tau_prev_ = 0.0;
};

/// Benchmark problem driven by uniform displacement increments.
struct Problem {
  const Mesh* mesh = nullptr;
  MaterialParams mat;
  std::vector<BcSpec> bcs;
  std::string reaction_set;
  int reaction_component = 1;
  std::function<double(double)> applied_magnitude;  // |prescribed| at pseudo-time t
};

struct RunOptions {
  int increments = 50;
  bool continue_on_failure = false;
  // Called after every increment with the converged (or flagged) state.
  std::function<void(const State&, const StepReport&)> on_step;
};

std::vector<StepReport> run_load_stepping(const Problem& problem, SolverKind kind,
                                          const SolverConfig& cfg, const RunOptions& options);

}  // namespace pfrac
