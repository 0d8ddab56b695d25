#pragma once

#include <memory>
#include <vector>

#include "pfrac/sparse.hpp"

namespace pfrac {

/// Sparse LU with partial pivoting for the unsymmetric quasi-monolithic
/// Jacobian. Symbolic analysis is done once per pattern and reused.
class LuSolver {
 public:
  LuSolver();
  ~LuSolver();
  LuSolver(LuSolver&&) noexcept;
  LuSolver& operator=(LuSolver&&) noexcept;

  /// Factorize the square CSC matrix. Throws on structural problems;
  /// singular() reports numerical singularity instead of throwing.
  void factorize(const CscMatrix& a);

  bool singular() const { return singular_; }

  /// Solve A x = b; throws if the factorization is singular or absent.
  std::vector<double> solve(const std::vector<double>& b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  bool singular_ = false;
  bool analyzed_ = false;
  int n_ = 0;
};

/// One-shot convenience solve.
std::vector<double> lu_solve(const CscMatrix& a, const std::vector<double>& b);

}  // namespace pfrac
