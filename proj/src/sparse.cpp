#include "pfrac/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pfrac {

int CscMatrix::find(int r, int c) const {
  const auto begin = row_idx.begin() + col_ptr[c];
  const auto end = row_idx.begin() + col_ptr[c + 1];
  auto it = std::lower_bound(begin, end, r);
  if (it == end || *it != r) return -1;
  return static_cast<int>(it - row_idx.begin());
}

double SparseSymmetric::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

void sym_multiply(const SparseSymmetric& a, const double* x, double* y) {
  std::fill(y, y + a.n, 0.0);
  for (int j = 0; j < a.n; ++j) {
    const double xj = x[j];
    for (int p = a.col_ptr[j]; p < a.col_ptr[j + 1]; ++p) {
      const int r = a.row_idx[p];
      const double v = a.values[p];
      y[r] += v * xj;
      if (r != j) y[j] += v * x[r];
    }
  }
}

CscMatrix build_pattern(int rows, int cols, std::vector<std::pair<int, int>>& entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.second != b.second ? a.second < b.second : a.first < b.first; });
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
  CscMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.col_ptr.assign(cols + 1, 0);
  m.row_idx.reserve(entries.size());
  for (const auto& [r, c] : entries) {
    if (r < 0 || r >= rows || c < 0 || c >= cols) throw std::out_of_range("build_pattern: index out of range");
    m.col_ptr[c + 1]++;
    m.row_idx.push_back(r);
  }
  for (int c = 0; c < cols; ++c) m.col_ptr[c + 1] += m.col_ptr[c];
  m.values.assign(m.row_idx.size(), 0.0);
  return m;
}

SparseSymmetric build_sym_pattern(int n, std::vector<std::pair<int, int>>& entries) {
  for (auto& [r, c] : entries) {
    if (r < c) std::swap(r, c);
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.second != b.second ? a.second < b.second : a.first < b.first; });
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
  SparseSymmetric m;
  m.n = n;
  m.col_ptr.assign(n + 1, 0);
  m.row_idx.reserve(entries.size());
  for (const auto& [r, c] : entries) {
    if (r < 0 || r >= n || c < 0) throw std::out_of_range("build_sym_pattern: index out of range");
    m.col_ptr[c + 1]++;
    m.row_idx.push_back(r);
  }
  for (int c = 0; c < n; ++c) m.col_ptr[c + 1] += m.col_ptr[c];
  m.values.assign(m.row_idx.size(), 0.0);
  return m;
}

}  // namespace pfrac
