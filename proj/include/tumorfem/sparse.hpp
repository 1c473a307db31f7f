#ifndef TUMORFEM_SPARSE_HPP
#define TUMORFEM_SPARSE_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "tumorfem/errors.hpp"

namespace tumorfem {

/// Compressed sparse row matrix. Assembled operators here are symmetric;
/// symmetry is a property of the values, not enforced by the format.
struct SparseMatrix {
  int n_rows = 0;
  int n_cols = 0;
  std::vector<int> row_offsets; // size n_rows + 1
  std::vector<int> col_indices;
  std::vector<double> values;

  double at(int i, int j) const {
    for (int k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
      if (col_indices[k] == j) return values[k];
    return 0.0;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }

  /// max_ij |A_ij - A_ji|; zero for exactly symmetric values.
  double max_asymmetry() const {
    double m = 0.0;
    for (int i = 0; i < n_rows; ++i)
      for (int k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
        m = std::max(m, std::abs(values[k] - at(col_indices[k], i)));
    return m;
  }

  std::vector<double> diagonal() const {
    std::vector<double> d(n_rows, 0.0);
    for (int i = 0; i < n_rows; ++i) d[i] = at(i, i);
    return d;
  }
};

/// Scatter-add accumulator. Finalization sorts triplets by (row, col) and, for
/// duplicates, by value bit pattern, so the assembled matrix is independent of
/// the element visit order (deterministic floating-point accumulation).
class SparseBuilder {
public:
  SparseBuilder(int n_rows, int n_cols) : n_rows_(n_rows), n_cols_(n_cols) {}

  void add(int row, int col, double value) { triplets_.push_back({row, col, value}); }

  SparseMatrix finalize() {
    std::sort(triplets_.begin(), triplets_.end(), [](const Triplet& a, const Triplet& b) {
      if (a.row != b.row) return a.row < b.row;
      if (a.col != b.col) return a.col < b.col;
      return std::bit_cast<std::uint64_t>(a.value) < std::bit_cast<std::uint64_t>(b.value);
    });
    SparseMatrix m;
    m.n_rows = n_rows_;
    m.n_cols = n_cols_;
    m.row_offsets.assign(n_rows_ + 1, 0);
    std::size_t k = 0;
    for (int row = 0; row < n_rows_; ++row) {
      m.row_offsets[row] = static_cast<int>(m.col_indices.size());
      while (k < triplets_.size() && triplets_[k].row == row) {
        const int col = triplets_[k].col;
        double sum = 0.0;
        while (k < triplets_.size() && triplets_[k].row == row && triplets_[k].col == col)
          sum += triplets_[k++].value;
        m.col_indices.push_back(col);
        m.values.push_back(sum);
      }
    }
    m.row_offsets[n_rows_] = static_cast<int>(m.col_indices.size());
    return m;
  }

private:
  struct Triplet {
    int row, col;
    double value;
  };
  int n_rows_, n_cols_;
  std::vector<Triplet> triplets_;
};

inline std::vector<double> matvec(const SparseMatrix& a, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != a.n_cols)
    fail(errc::shape_error, "matvec: vector length " + std::to_string(x.size()) + " vs " +
                                std::to_string(a.n_cols) + " columns");
  std::vector<double> y(a.n_rows, 0.0);
  for (int i = 0; i < a.n_rows; ++i) {
    double s = 0.0;
    for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) s += a.values[k] * x[a.col_indices[k]];
    y[i] = s;
  }
  return y;
}

/// C = A + s * B on identical dimensions (sparsity patterns may differ).
inline SparseMatrix sparse_add(const SparseMatrix& a, const SparseMatrix& b, double s = 1.0) {
  if (a.n_rows != b.n_rows || a.n_cols != b.n_cols) fail(errc::shape_error, "sparse_add: dimension mismatch");
  SparseBuilder builder(a.n_rows, a.n_cols);
  for (int i = 0; i < a.n_rows; ++i)
    for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) builder.add(i, a.col_indices[k], a.values[k]);
  for (int i = 0; i < b.n_rows; ++i)
    for (int k = b.row_offsets[i]; k < b.row_offsets[i + 1]; ++k) builder.add(i, b.col_indices[k], s * b.values[k]);
  return builder.finalize();
}

/// Adds d[i] to the diagonal; d must have one entry per row.
inline SparseMatrix sparse_add_diagonal(const SparseMatrix& a, const std::vector<double>& d) {
  if (static_cast<int>(d.size()) != a.n_rows) fail(errc::shape_error, "sparse_add_diagonal: length mismatch");
  SparseBuilder builder(a.n_rows, a.n_cols);
  for (int i = 0; i < a.n_rows; ++i)
    for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) builder.add(i, a.col_indices[k], a.values[k]);
  for (int i = 0; i < a.n_rows; ++i) builder.add(i, i, d[i]);
  return builder.finalize();
}

} // namespace tumorfem

#endif
