#pragma once

#include <memory>
#include <vector>

#include "pfrac/sparse.hpp"

namespace pfrac {

/// Counts of positive, negative and null eigenvalues.
struct InertiaTriplet {
  int n_pos = 0;
  int n_neg = 0;
  int n_zero = 0;

  bool positive_definite(int n) const { return n_pos == n; }
};

/// Symbolic data shared by all factorizations of one sparsity pattern:
/// the fill-reducing permutation and the permuted-lower gather map.
class LdltSymbolic {
 public:
  explicit LdltSymbolic(const SparseSymmetric& pattern);

  int n() const { return n_; }
  const std::vector<int>& perm() const { return perm_; }  // old -> new

 private:
  friend class LdltFactor;
  int n_ = 0;
  std::vector<int> perm_;               // old -> new
  std::vector<int> iperm_;              // new -> old
  std::vector<int> pl_col_ptr_;         // permuted lower pattern
  std::vector<int> pl_row_idx_;
  std::vector<int> pl_src_;             // source offset in A.values per permuted entry
  std::vector<int> pl_diag_;            // offset of the diagonal entry per column
};

/// LDL^T factorization of A + tau*I with the inertia of the factored
/// matrix. Columns whose 1x1 pivot fails the threshold test are delayed
/// and finished by a dense Bunch-Kaufman factorization with 1x1/2x2
/// pivots, so the inertia is reliable for indefinite matrices.
class LdltFactor {
 public:
  LdltFactor() = default;

  /// Numeric factorization. Reuses internal storage across calls with the
  /// same symbolic object (the tau search path).
  void factorize(const LdltSymbolic& symbolic, const SparseSymmetric& a, double tau);

  /// True if the factorization produced non-finite values or exceeded the
  /// delayed-block capacity; distinct from an indefinite result.
  bool failed() const { return failed_; }
  const InertiaTriplet& inertia() const { return inertia_; }
  int n() const { return n_; }
  double shift() const { return tau_; }
  int delayed_count() const { return static_cast<int>(delayed_.size()); }

  /// Solves (A + tau*I) x = b with one step of iterative refinement.
  /// Throws std::runtime_error if the factor is singular (n_zero > 0)
  /// or failed.
  std::vector<double> solve(const SparseSymmetric& a, const std::vector<double>& b) const;

 private:
  void solve_factored(std::vector<double>& xp) const;
  std::vector<double>& gather_buffer_();

  int n_ = 0;
  double tau_ = 0.0;
  bool failed_ = false;
  InertiaTriplet inertia_;
  const LdltSymbolic* symbolic_ = nullptr;

  // Accepted columns, stored per permuted column index. The sorted
  // below-diagonal structure over accepted rows lives in li_/lx_; entries
  // at delayed rows are kept separately per column in dcols_ (they belong
  // to the trailing block of the reordered elimination).
  std::vector<int> col_start_;   // size n+1 into li_/lx_ (delayed columns empty)
  std::vector<int> li_;
  std::vector<double> lx_;
  std::vector<std::vector<std::pair<int, double>>> dcols_;
  std::vector<double> diag_;     // accepted 1x1 pivots
  std::vector<uint8_t> is_delayed_;
  std::vector<int> delayed_;     // permuted indices, increasing

  // Dense Bunch-Kaufman tail over the delayed block.
  std::vector<double> tail_;     // nd x nd column-major factor
  std::vector<int> tail_piv_;    // LAPACK-style ipiv encoding
  std::vector<int> tail_map_;    // dense index -> permuted index

  // Couplings of delayed columns to later rows, bucketed per row.
  struct Pending {
    int row;
    double value;
    int next;
  };
  std::vector<Pending> pending_;
  std::vector<int> pending_heads_;

  // Scratch reused between factorizations.
  std::vector<double> work_, gather_;
  std::vector<long long> stamp_;
  std::vector<int> pattern_, head_, next_, ptr_;
  long long stamp_value_ = 0;
};

/// One-shot convenience: symbolic + numeric factorization of A + tau*I.
struct LdltResult {
  std::shared_ptr<LdltSymbolic> symbolic;
  LdltFactor factor;
};

LdltResult ldlt_factorize(const SparseSymmetric& a, double tau);

/// Solve through a factor produced by ldlt_factorize.
std::vector<double> ldlt_solve(const LdltResult& f, const SparseSymmetric& a, const std::vector<double>& b);

}  // namespace pfrac
