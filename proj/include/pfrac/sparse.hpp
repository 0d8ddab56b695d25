#pragma once

#include <cstdint>
#include <vector>

namespace pfrac {

/// Compressed sparse column matrix, sorted row indices per column,
/// no duplicates.
struct CscMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> col_ptr;  // size cols+1
  std::vector<int> row_idx;  // size nnz
  std::vector<double> values;

  int nnz() const { return static_cast<int>(row_idx.size()); }
  void set_zero() { std::fill(values.begin(), values.end(), 0.0); }

  /// Offset of entry (r, c); -1 if not in the pattern.
  int find(int r, int c) const;
};

/// Symmetric matrix stored as the lower triangle in CSC form.
struct SparseSymmetric {
  int n = 0;
  std::vector<int> col_ptr;
  std::vector<int> row_idx;  // row >= column
  std::vector<double> values;

  int nnz() const { return static_cast<int>(row_idx.size()); }
  void set_zero() { std::fill(values.begin(), values.end(), 0.0); }
  double max_abs() const;
};

/// y = A x for the symmetric matrix (both triangles applied).
void sym_multiply(const SparseSymmetric& a, const double* x, double* y);

/// Builds a deduplicated sorted CSC pattern from coordinate entries.
CscMatrix build_pattern(int rows, int cols, std::vector<std::pair<int, int>>& entries);

/// Lower-triangle pattern from coordinate entries of a symmetric matrix
/// (entries may be given in either triangle).
SparseSymmetric build_sym_pattern(int n, std::vector<std::pair<int, int>>& entries);

}  // namespace pfrac
