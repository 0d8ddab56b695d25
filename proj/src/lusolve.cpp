#include "pfrac/lusolve.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <stdexcept>

namespace pfrac {

struct LuSolver::Impl {
  Eigen::SparseLU<Eigen::SparseMatrix<double, Eigen::ColMajor, int>> lu;
};

LuSolver::LuSolver() : impl_(std::make_unique<Impl>()) {}
LuSolver::~LuSolver() = default;
LuSolver::LuSolver(LuSolver&&) noexcept = default;
LuSolver& LuSolver::operator=(LuSolver&&) noexcept = default;

void LuSolver::factorize(const CscMatrix& a) {
  if (a.rows != a.cols) throw std::invalid_argument("lu: matrix must be square");
  n_ = a.rows;
  const Eigen::Map<const Eigen::SparseMatrix<double, Eigen::ColMajor, int>> map(
      a.rows, a.cols, a.nnz(), a.col_ptr.data(), a.row_idx.data(), a.values.data());
  Eigen::SparseMatrix<double, Eigen::ColMajor, int> m = map;
  if (!analyzed_) {
    impl_->lu.analyzePattern(m);
    analyzed_ = true;
  }
  impl_->lu.factorize(m);
  singular_ = impl_->lu.info() != Eigen::Success;
}

std::vector<double> LuSolver::solve(const std::vector<double>& b) const {
  if (!analyzed_) throw std::runtime_error("lu_solve: no factorization");
  if (singular_) throw std::runtime_error("lu_solve: matrix is singular");
  if (static_cast<int>(b.size()) != n_) throw std::invalid_argument("lu_solve: dimension mismatch");
  Eigen::Map<const Eigen::VectorXd> bv(b.data(), b.size());
  Eigen::VectorXd x = impl_->lu.solve(bv);
  return std::vector<double>(x.data(), x.data() + x.size());
}

std::vector<double> lu_solve(const CscMatrix& a, const std::vector<double>& b) {
  LuSolver s;
  s.factorize(a);
  return s.solve(b);
}

}  // namespace pfrac
