#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "pfrac/bc.hpp"
#include "pfrac/material.hpp"
#include "pfrac/mesh.hpp"
#include "pfrac/sparse.hpp"

namespace pfrac {

/// Nodal unknowns of one pseudo-time increment plus the two previous
/// damage fields needed by the penalty term and the extrapolation.
struct State {
  Eigen::VectorXd U;       // 2m displacement coefficients (mm)
  Eigen::VectorXd D;       // m damage coefficients
  Eigen::VectorXd D_prev;  // d^{n-1}
  Eigen::VectorXd D_prev2; // d^{n-2}
  double t = 0.0, t_prev = 0.0, t_prev2 = 0.0;

  static State zero(int nodes) {
    State s;
    s.U = Eigen::VectorXd::Zero(2 * nodes);
    s.D = Eigen::VectorXd::Zero(nodes);
    s.D_prev = Eigen::VectorXd::Zero(nodes);
    s.D_prev2 = Eigen::VectorXd::Zero(nodes);
    return s;
  }
};

/// full: degradation uses the unknown damage field (symmetric Jacobian).
/// quasi_mono: the momentum block uses the extrapolated field instead and
/// the u-d coupling block vanishes (unsymmetric system).
enum class AssemblyMode { full, quasi_mono };

/// Element assembly over 2x2 Gauss quadrature with Dirichlet reduction
/// baked in. Patterns are built once per (mesh, boundary conditions);
/// repeated assemblies overwrite cached value arrays. Assembly is
/// deterministic; PFRAC_THREADS > 1 enables a deterministic per-thread
/// partition merged in thread order.
class Assembler {
 public:
  Assembler(const Mesh& mesh, const MaterialParams& mat, const DirichletMap& dirichlet);

  int nodes() const { return m_; }
  int free_u_count() const { return static_cast<int>(free_u_.size()); }
  int reduced_size() const { return free_u_count() + m_; }
  const std::vector<int>& free_u() const { return free_u_; }
  const DirichletMap& dirichlet() const { return dirichlet_; }
  const Mesh& mesh() const { return *mesh_; }
  const MaterialParams& material() const { return mat_; }

  /// Sets the prescribed displacement values for pseudo-time t.
  void impose_dirichlet(State& state, double t) const;

  /// Unreduced residuals (Ru of size 2m, Rd of size m). In quasi_mono
  /// mode d_tilde replaces the damage field inside the degradation factor
  /// of the momentum residual only.
  void residual(const State& state, AssemblyMode mode, const Eigen::VectorXd* d_tilde,
                Eigen::VectorXd& ru, Eigen::VectorXd& rd) const;

  /// Full regularized energy including the gradient term and the penalty,
  /// times thickness.
  double total_energy(const State& state) const;

  /// Reduced stacked residual [Ru at free u dofs; Rd].
  Eigen::VectorXd reduce_stacked(const Eigen::VectorXd& ru, const Eigen::VectorXd& rd) const;

  /// U_free += alpha * delta[0..nfu), D += alpha * delta[nfu..nfu+m).
  void apply_stacked_step(State& state, const Eigen::VectorXd& delta, double alpha) const;

  /// Reduced stacked Jacobians (value arrays cached per pattern).
  const SparseSymmetric& jacobian_full_reduced(const State& state);
  const CscMatrix& jacobian_qm_reduced(const State& state, const Eigen::VectorXd& d_tilde);
  const SparseSymmetric& jacobian_uu_reduced(const State& state);
  const SparseSymmetric& jacobian_dd(const State& state);

  /// Sum of unreduced momentum-residual entries over one component of a
  /// boundary set (the discrete reaction force).
  double reaction_force(const State& state, const std::string& set, int component,
                        AssemblyMode mode = AssemblyMode::full,
                        const Eigen::VectorXd* d_tilde = nullptr) const;

 private:
  struct GaussPoint {
    double n[4];
    double dndx[4][2];
    double jxw;
  };
  struct Kernel;
  void element_loop(const State& state, AssemblyMode mode, const Eigen::VectorXd* d_tilde,
                    bool want_residual, bool want_energy, int jacobian_kind,
                    Eigen::VectorXd* ru, Eigen::VectorXd* rd, double* energy) const;

  const Mesh* mesh_;
  MaterialParams mat_;
  DirichletMap dirichlet_;
  int m_ = 0;
  std::vector<int> free_u_;       // ascending free u-dof indices
  std::vector<int> red_u_;        // u dof -> reduced index or -1
  std::vector<GaussPoint> gauss_;       // 4 per element
  mutable SparseSymmetric full_sym_;    // reduced stacked, lower
  mutable CscMatrix qm_;                // reduced stacked, unsymmetric (no ud block)
  mutable SparseSymmetric uu_;          // reduced uu block
  mutable SparseSymmetric dd_;          // dd block
};

/// Linear system reduction for prescribed values: solves of J x = -R with
/// x fixed to g(t) on the constrained DOFs. Returns the reduced matrix,
/// the adjusted right-hand side and the recovery map.
struct ReducedSystem {
  CscMatrix matrix;
  std::vector<double> rhs;
  std::vector<int> free_index;          // reduced position -> full dof
  std::vector<double> prescribed;       // full-size template with g(t) filled in

  /// Reinserts prescribed values around a reduced solution.
  std::vector<double> recover(const std::vector<double>& reduced_solution) const;
};

ReducedSystem apply_dirichlet_reduction(const CscMatrix& j, const std::vector<double>& r,
                                        const DirichletMap& bc, double t);

}  // namespace pfrac
