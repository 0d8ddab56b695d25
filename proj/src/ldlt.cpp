#include "pfrac/ldlt.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pfrac {

namespace {

constexpr double kPivotAlpha = 0.01;       // threshold pivot acceptance
constexpr double kZeroRel = 1e-12;         // relative zero-pivot threshold
constexpr int kMaxDelayed = 4096;          // dense-tail capacity guard
const double kBkAlpha = (1.0 + std::sqrt(17.0)) / 8.0;

// Dense Bunch-Kaufman LDL^T with partial pivoting on a full column-major
// matrix. Produces a unit-lower factor stored in place, LAPACK-style ipiv
// (>= 0: 1x1 pivot with row swap; two equal negatives -(p+1): 2x2 pivot
// with row k+1 swapped against p) and accumulates the inertia with the
// given zero threshold.
class DenseBk {
 public:
  void factorize(std::vector<double>& a, int n, double ztol, InertiaTriplet& inertia, bool& failed) {
    n_ = n;
    a_ = &a;
    ipiv_.assign(n, 0);
    auto A = [&](int i, int j) -> double& { return a[static_cast<size_t>(j) * n + i]; };

    int k = 0;
    while (k < n) {
      double lam = 0.0;
      int r = k;
      for (int i = k + 1; i < n; ++i) {
        const double v = std::abs(A(i, k));
        if (v > lam) {
          lam = v;
          r = i;
        }
      }
      const double akk = std::abs(A(k, k));
      bool two_by_two = false;
      int swap_with = k;
      if (lam == 0.0 || akk >= kBkAlpha * lam) {
        // 1x1, no swap
      } else {
        double sigma = 0.0;
        for (int i = k; i < n; ++i) {
          if (i == r) continue;
          sigma = std::max(sigma, std::abs(A(i, r)));
        }
        if (akk * sigma >= kBkAlpha * lam * lam) {
          // 1x1, no swap
        } else if (std::abs(A(r, r)) >= kBkAlpha * sigma) {
          swap_with = r;  // 1x1 after swapping k <-> r
        } else {
          two_by_two = true;
        }
      }

      if (!two_by_two) {
        if (swap_with != k) swap_full(k, swap_with);
        ipiv_[k] = swap_with;
        const double d = A(k, k);
        count_pivot(d, ztol, inertia);
        if (std::abs(d) > 0.0) {
          const double inv = 1.0 / d;
          for (int i = k + 1; i < n; ++i) A(i, k) *= inv;
          for (int j = k + 1; j < n; ++j) {
            const double cj = A(j, k) * d;
            if (cj == 0.0) continue;
            for (int i = k + 1; i < n; ++i) A(i, j) -= A(i, k) * cj;
          }
        } else {
          // Exactly singular pivot with a zero column; nothing to eliminate.
          for (int i = k + 1; i < n; ++i) {
            if (A(i, k) != 0.0) {
              failed = true;  // zero pivot but nonzero column: cannot proceed
              return;
            }
          }
        }
        ++k;
      } else {
        if (r != k + 1) swap_full(k + 1, r);
        ipiv_[k] = -(r + 1);
        ipiv_[k + 1] = -(r + 1);
        const double d11 = A(k, k), d21 = A(k + 1, k), d22 = A(k + 1, k + 1);
        const double det = d11 * d22 - d21 * d21;
        count_block(d11, d21, d22, ztol, inertia);
        if (det == 0.0) {
          failed = true;
          return;
        }
        const double i11 = d22 / det, i22 = d11 / det, i21 = -d21 / det;
        for (int i = k + 2; i < n; ++i) {
          const double c1 = A(i, k), c2 = A(i, k + 1);
          A(i, k) = c1 * i11 + c2 * i21;
          A(i, k + 1) = c1 * i21 + c2 * i22;
        }
        for (int j = k + 2; j < n; ++j) {
          const double cj1 = A(j, k) * d11 + A(j, k + 1) * d21;
          const double cj2 = A(j, k) * d21 + A(j, k + 1) * d22;
          if (cj1 == 0.0 && cj2 == 0.0) continue;
          for (int i = k + 2; i < n; ++i) A(i, j) -= A(i, k) * cj1 + A(i, k + 1) * cj2;
        }
        k += 2;
      }
    }
    for (double v : a) {
      if (!std::isfinite(v)) {
        failed = true;
        return;
      }
    }
  }

  const std::vector<int>& ipiv() const { return ipiv_; }

  // Solve with the factor held in a (as produced by factorize).
  static void solve(const std::vector<double>& a, const std::vector<int>& ipiv, int n, double* x) {
    auto A = [&](int i, int j) -> double { return a[static_cast<size_t>(j) * n + i]; };
    int k = 0;
    while (k < n) {
      if (ipiv[k] >= 0) {
        std::swap(x[k], x[ipiv[k]]);
        for (int i = k + 1; i < n; ++i) x[i] -= A(i, k) * x[k];
        ++k;
      } else {
        const int p = -(ipiv[k] + 1);
        std::swap(x[k + 1], x[p]);
        for (int i = k + 2; i < n; ++i) x[i] -= A(i, k) * x[k] + A(i, k + 1) * x[k + 1];
        k += 2;
      }
    }
    k = 0;
    while (k < n) {
      if (ipiv[k] >= 0) {
        x[k] /= A(k, k);
        ++k;
      } else {
        const double d11 = A(k, k), d21 = A(k + 1, k), d22 = A(k + 1, k + 1);
        const double det = d11 * d22 - d21 * d21;
        const double b1 = x[k], b2 = x[k + 1];
        x[k] = (d22 * b1 - d21 * b2) / det;
        x[k + 1] = (d11 * b2 - d21 * b1) / det;
        k += 2;
      }
    }
    k = n - 1;
    while (k >= 0) {
      if (ipiv[k] >= 0) {
        double s = x[k];
        for (int i = k + 1; i < n; ++i) s -= A(i, k) * x[i];
        x[k] = s;
        std::swap(x[k], x[ipiv[k]]);
        --k;
      } else {
        const int p = -(ipiv[k] + 1);
        double s0 = x[k - 1], s1 = x[k];
        for (int i = k + 1; i < n; ++i) {
          s0 -= A(i, k - 1) * x[i];
          s1 -= A(i, k) * x[i];
        }
        x[k - 1] = s0;
        x[k] = s1;
        std::swap(x[k], x[p]);
        k -= 2;
      }
    }
  }

 private:
  void swap_full(int p, int q) {
    auto& a = *a_;
    const int n = n_;
    for (int i = 0; i < n; ++i) std::swap(a[static_cast<size_t>(p) * n + i], a[static_cast<size_t>(q) * n + i]);
    for (int j = 0; j < n; ++j) std::swap(a[static_cast<size_t>(j) * n + p], a[static_cast<size_t>(j) * n + q]);
  }

  static void count_pivot(double d, double ztol, InertiaTriplet& t) {
    if (std::abs(d) <= ztol)
      ++t.n_zero;
    else if (d > 0.0)
      ++t.n_pos;
    else
      ++t.n_neg;
  }

  static void count_block(double d11, double d21, double d22, double ztol, InertiaTriplet& t) {
    const double mean = 0.5 * (d11 + d22);
    const double rad = std::hypot(0.5 * (d11 - d22), d21);
    count_pivot(mean + rad, ztol, t);
    count_pivot(mean - rad, ztol, t);
  }

  int n_ = 0;
  std::vector<double>* a_ = nullptr;
  std::vector<int> ipiv_;
};

}  // namespace

LdltSymbolic::LdltSymbolic(const SparseSymmetric& pattern) : n_(pattern.n) {
  const int n = n_;
  // Fill-reducing ordering (AMD), mirroring the SimplicialCholesky usage.
  Eigen::SparseMatrix<double, Eigen::ColMajor, int> alow(n, n);
  {
    std::vector<Eigen::Triplet<double, int>> trips;
    trips.reserve(pattern.nnz());
    for (int c = 0; c < n; ++c)
      for (int p = pattern.col_ptr[c]; p < pattern.col_ptr[c + 1]; ++p)
        trips.emplace_back(pattern.row_idx[p], c, 1.0);
    alow.setFromTriplets(trips.begin(), trips.end());
  }
  Eigen::AMDOrdering<int> amd;
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> pinv;
  amd(alow.selfadjointView<Eigen::Lower>(), pinv);
  perm_.resize(n);
  iperm_.resize(n);
  if (pinv.size() == n) {
    const auto p = pinv.inverse().eval();
    for (int i = 0; i < n; ++i) perm_[i] = p.indices()(i);
  } else {
    for (int i = 0; i < n; ++i) perm_[i] = i;
  }
  for (int i = 0; i < n; ++i) iperm_[perm_[i]] = i;

  // Permuted lower-triangle pattern with a gather map into the source values.
  struct Ent {
    int r, c, src;
  };
  std::vector<Ent> ents;
  ents.reserve(pattern.nnz());
  for (int c = 0; c < n; ++c) {
    for (int p = pattern.col_ptr[c]; p < pattern.col_ptr[c + 1]; ++p) {
      int nr = perm_[pattern.row_idx[p]];
      int nc = perm_[c];
      if (nr < nc) std::swap(nr, nc);
      ents.push_back({nr, nc, p});
    }
  }
  std::sort(ents.begin(), ents.end(), [](const Ent& a, const Ent& b) {
    return a.c != b.c ? a.c < b.c : a.r < b.r;
  });
  pl_col_ptr_.assign(n + 1, 0);
  pl_row_idx_.resize(ents.size());
  pl_src_.resize(ents.size());
  pl_diag_.assign(n, -1);
  for (size_t s = 0; s < ents.size(); ++s) {
    pl_col_ptr_[ents[s].c + 1]++;
    pl_row_idx_[s] = ents[s].r;
    pl_src_[s] = ents[s].src;
    if (ents[s].r == ents[s].c) pl_diag_[ents[s].c] = static_cast<int>(s);
  }
  for (int c = 0; c < n; ++c) pl_col_ptr_[c + 1] += pl_col_ptr_[c];
  for (int c = 0; c < n; ++c)
    if (pl_diag_[c] < 0) throw std::invalid_argument("ldlt: every diagonal entry must be present in the pattern");
}

void LdltFactor::factorize(const LdltSymbolic& symbolic, const SparseSymmetric& a, double tau) {
  const int n = symbolic.n_;
  n_ = n;
  tau_ = tau;
  symbolic_ = &symbolic;
  failed_ = false;
  inertia_ = InertiaTriplet{};

  // Gather shifted values in permuted-lower order.
  std::vector<double>& pv = gather_buffer_();
  pv.resize(symbolic.pl_src_.size());
  double amax = 0.0;
  for (size_t s = 0; s < pv.size(); ++s) pv[s] = a.values[symbolic.pl_src_[s]];
  for (int c = 0; c < n; ++c) pv[symbolic.pl_diag_[c]] += tau;
  for (double v : pv) amax = std::max(amax, std::abs(v));
  const double zero_abs = kZeroRel * amax;

  work_.assign(n, 0.0);
  if (stamp_.size() != static_cast<size_t>(n)) {
    stamp_.assign(n, 0);
    stamp_value_ = 0;
  }
  head_.assign(n, -1);
  next_.assign(n, -1);
  ptr_.assign(n, 0);
  col_start_.assign(n + 1, 0);
  li_.clear();
  lx_.clear();
  dcols_.assign(n, {});
  diag_.assign(n, 0.0);
  is_delayed_.assign(n, 0);
  delayed_.clear();
  pending_heads_.assign(n, -1);
  pending_.clear();

  pattern_.clear();
  pattern_.reserve(n);
  std::vector<std::pair<int, double>> fired;  // columns consumed at this step

  for (int j = 0; j < n; ++j) {
    ++stamp_value_;
    pattern_.clear();
    fired.clear();
    double djj = 0.0;

    // Scatter column j of the shifted permuted matrix (rows >= j).
    for (int s = symbolic.pl_col_ptr_[j]; s < symbolic.pl_col_ptr_[j + 1]; ++s) {
      const int r = symbolic.pl_row_idx_[s];
      const double v = pv[s];
      if (r == j) {
        djj += v;
      } else {
        work_[r] = v;
        stamp_[r] = stamp_value_;
        pattern_.push_back(r);
      }
    }
    // Couplings to already-delayed columns live in those columns' original
    // patterns; they were bucketed per row when the delay happened.
    for (int e = pending_heads_[j]; e != -1; e = pending_[e].next) {
      const int r = pending_[e].row;
      if (stamp_[r] != stamp_value_) {
        stamp_[r] = stamp_value_;
        work_[r] = 0.0;
        pattern_.push_back(r);
      }
      work_[r] += pending_[e].value;
    }

    // Apply updates from accepted columns whose next structural row is j.
    int i = head_[j];
    head_[j] = -1;
    while (i != -1) {
      const int inext = next_[i];
      const int p = ptr_[i];
      const int pend = col_start_[i + 1];
      const double lji = lx_[p];
      const double f = diag_[i] * lji;
      fired.emplace_back(i, lji);
      djj -= f * lji;
      for (int q = p + 1; q < pend; ++q) {
        const int r = li_[q];
        if (stamp_[r] != stamp_value_) {
          stamp_[r] = stamp_value_;
          work_[r] = 0.0;
          pattern_.push_back(r);
        }
        work_[r] -= f * lx_[q];
      }
      // Entries at delayed rows belong to the trailing block and keep
      // receiving updates after their structural position was passed.
      for (const auto& [r, lrv] : dcols_[i]) {
        if (stamp_[r] != stamp_value_) {
          stamp_[r] = stamp_value_;
          work_[r] = 0.0;
          pattern_.push_back(r);
        }
        work_[r] -= f * lrv;
      }
      ptr_[i] = p + 1;
      if (p + 1 < pend) {
        const int rn = li_[p + 1];
        next_[i] = head_[rn];
        head_[rn] = i;
      }
      i = inext;
    }

    double maxoff = 0.0;
    for (int r : pattern_) maxoff = std::max(maxoff, std::abs(work_[r]));
    if (!std::isfinite(djj) || !std::isfinite(maxoff)) {
      failed_ = true;
      return;
    }

    const bool accept = std::abs(djj) > std::max(kPivotAlpha * maxoff, zero_abs);
    if (accept) {
      diag_[j] = djj;
      if (djj > 0.0)
        ++inertia_.n_pos;
      else
        ++inertia_.n_neg;
      const double inv = 1.0 / djj;
      std::sort(pattern_.begin(), pattern_.end());
      const int lstart = static_cast<int>(li_.size());
      for (int r : pattern_) {
        if (r > j && !is_delayed_[r]) {
          li_.push_back(r);
          lx_.push_back(work_[r] * inv);
        } else {
          dcols_[j].emplace_back(r, work_[r] * inv);
        }
      }
      col_start_[j + 1] = static_cast<int>(li_.size());
      ptr_[j] = lstart;
      if (lstart < col_start_[j + 1]) {
        const int rn = li_[lstart];
        next_[j] = head_[rn];
        head_[rn] = j;
      }
    } else {
      is_delayed_[j] = 1;
      delayed_.push_back(j);
      col_start_[j + 1] = static_cast<int>(li_.size());
      // The fired columns' entries at this row move to their delayed
      // coupling lists; the linked-list cursor has already passed them.
      for (const auto& [ic, lval] : fired) dcols_[ic].emplace_back(j, lval);
      // Bucket this column's own couplings to later rows for when those
      // columns are processed.
      for (int s = symbolic.pl_col_ptr_[j]; s < symbolic.pl_col_ptr_[j + 1]; ++s) {
        const int r = symbolic.pl_row_idx_[s];
        if (r == j) continue;
        pending_.push_back({j, pv[s], pending_heads_[r]});
        pending_heads_[r] = static_cast<int>(pending_.size()) - 1;
      }
    }
  }

  // Drop stale lower entries that migrated to the delayed coupling lists.
  const int nd = static_cast<int>(delayed_.size());
  if (nd > 0) {
    int out = 0;
    int start = 0;
    for (int j = 0; j < n; ++j) {
      const int end = col_start_[j + 1];
      for (int q = start; q < end; ++q) {
        if (is_delayed_[li_[q]]) continue;
        li_[out] = li_[q];
        lx_[out] = lx_[q];
        ++out;
      }
      start = end;
      col_start_[j + 1] = out;
    }
    li_.resize(out);
    lx_.resize(out);
  }

  // Dense Bunch-Kaufman tail over the delayed block.
  tail_.clear();
  tail_piv_.clear();
  tail_map_ = delayed_;
  if (nd > kMaxDelayed) {
    failed_ = true;
    return;
  }
  if (nd > 0) {
    std::vector<int> dense_of(n, -1);
    for (int c = 0; c < nd; ++c) dense_of[delayed_[c]] = c;
    tail_.assign(static_cast<size_t>(nd) * nd, 0.0);
    auto S = [&](int i, int j) -> double& { return tail_[static_cast<size_t>(j) * nd + i]; };
    // Shifted matrix restricted to the delayed set.
    for (int c = 0; c < nd; ++c) {
      const int j = delayed_[c];
      for (int s = symbolic.pl_col_ptr_[j]; s < symbolic.pl_col_ptr_[j + 1]; ++s) {
        const int r = symbolic.pl_row_idx_[s];
        if (dense_of[r] < 0) continue;
        S(dense_of[r], c) = pv[s];
        if (r != j) S(c, dense_of[r]) = pv[s];
      }
    }
    // Subtract contributions of the accepted columns.
    std::vector<std::pair<int, double>> hits;
    for (int jcol = 0; jcol < n; ++jcol) {
      if (is_delayed_[jcol] || dcols_[jcol].empty()) continue;
      hits.clear();
      for (const auto& [r, lv] : dcols_[jcol]) hits.emplace_back(dense_of[r], lv);
      const double d = diag_[jcol];
      for (const auto& [pi, lvi] : hits)
        for (const auto& [qi, lvq] : hits) S(pi, qi) -= lvi * d * lvq;
    }
    DenseBk bk;
    const double zt = kZeroRel * std::max(amax, 0.0);
    bk.factorize(tail_, nd, zt, inertia_, failed_);
    tail_piv_ = bk.ipiv();
    if (failed_) return;
  }
}

void LdltFactor::solve_factored(std::vector<double>& xp) const {
  const int n = n_;
  // Forward: unit lower factor; delayed columns are identity columns and
  // delayed-row entries belong to the trailing block.
  for (int j = 0; j < n; ++j) {
    if (is_delayed_[j]) continue;
    const double xj = xp[j];
    if (xj == 0.0) continue;
    for (int q = col_start_[j]; q < col_start_[j + 1]; ++q) xp[li_[q]] -= lx_[q] * xj;
    for (const auto& [r, lv] : dcols_[j]) xp[r] -= lv * xj;
  }
  // Block diagonal.
  const int nd = static_cast<int>(tail_map_.size());
  if (nd > 0) {
    std::vector<double> xd(nd);
    for (int c = 0; c < nd; ++c) xd[c] = xp[tail_map_[c]];
    DenseBk::solve(tail_, tail_piv_, nd, xd.data());
    for (int c = 0; c < nd; ++c) xp[tail_map_[c]] = xd[c];
  }
  for (int j = 0; j < n; ++j)
    if (!is_delayed_[j]) xp[j] /= diag_[j];
  // Backward.
  for (int j = n - 1; j >= 0; --j) {
    if (is_delayed_[j]) continue;
    double s = xp[j];
    for (int q = col_start_[j]; q < col_start_[j + 1]; ++q) s -= lx_[q] * xp[li_[q]];
    for (const auto& [r, lv] : dcols_[j]) s -= lv * xp[r];
    xp[j] = s;
  }
}

std::vector<double> LdltFactor::solve(const SparseSymmetric& a, const std::vector<double>& b) const {
  if (failed_) throw std::runtime_error("ldlt_solve: factorization failed");
  if (inertia_.n_zero > 0) throw std::runtime_error("ldlt_solve: factor is singular (n_zero > 0)");
  if (static_cast<int>(b.size()) != n_) throw std::invalid_argument("ldlt_solve: dimension mismatch");
  const auto& perm = symbolic_->perm_;
  std::vector<double> xp(n_);
  for (int i = 0; i < n_; ++i) xp[perm[i]] = b[i];
  solve_factored(xp);
  std::vector<double> x(n_);
  for (int i = 0; i < n_; ++i) x[i] = xp[perm[i]];

  // One step of iterative refinement on A + tau*I.
  std::vector<double> r(n_);
  sym_multiply(a, x.data(), r.data());
  for (int i = 0; i < n_; ++i) r[i] = b[i] - (r[i] + tau_ * x[i]);
  for (int i = 0; i < n_; ++i) xp[perm[i]] = r[i];
  solve_factored(xp);
  for (int i = 0; i < n_; ++i) x[i] += xp[perm[i]];
  return x;
}

std::vector<double>& LdltFactor::gather_buffer_() {
  return gather_;
}

LdltResult ldlt_factorize(const SparseSymmetric& a, double tau) {
  LdltResult res;
  res.symbolic = std::make_shared<LdltSymbolic>(a);
  res.factor.factorize(*res.symbolic, a, tau);
  return res;
}

std::vector<double> ldlt_solve(const LdltResult& f, const SparseSymmetric& a, const std::vector<double>& b) {
  return f.factor.solve(a, b);
}

}  // namespace pfrac
