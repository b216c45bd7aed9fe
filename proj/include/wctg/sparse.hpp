#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wctg/matrix.hpp"

namespace wctg {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

// Compressed-row matrix. Entries within a row are sorted by column, with no
// duplicate coordinates and no explicit zeros.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  // Duplicates are summed; entries that end up exactly zero are dropped.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> triplets);
  static SparseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::size_t> col_index() const { return col_index_; }
  std::span<const double> values() const { return values_; }

  // Column indices / values of one row.
  std::span<const std::size_t> row_cols(std::size_t r) const {
    return {col_index_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }
  std::span<const double> row_values(std::size_t r) const {
    return {values_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }

  // 0 when the coordinate is not stored.
  double at(std::size_t r, std::size_t c) const;

  std::vector<Triplet> triplets() const;
  std::vector<double> row_sums() const;
  SparseMatrix transpose() const;
  // Rows [begin, end) as a (end-begin) x cols matrix.
  SparseMatrix row_block(std::size_t begin, std::size_t end) const;
  Matrix to_dense() const;

  // this * x
  Matrix multiply(const Matrix& x) const;
  // this^T * x
  Matrix transpose_multiply(const Matrix& x) const;

  bool is_symmetric() const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_index_;
  std::vector<double> values_;
};

}  // namespace wctg
