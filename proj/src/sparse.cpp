#include "wctg/sparse.hpp"

#include <algorithm>
#include <string>

#include "wctg/errors.hpp"

namespace wctg {

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols)
      throw ShapeError("sparse entry (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                       ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.row_ptr_.assign(rows + 1, 0);
  m.col_index_.reserve(triplets.size());
  m.values_.reserve(triplets.size());

  std::size_t i = 0;
  while (i < triplets.size()) {
    const std::size_t r = triplets[i].row;
    const std::size_t c = triplets[i].col;
    double sum = 0.0;
    for (; i < triplets.size() && triplets[i].row == r && triplets[i].col == c; ++i)
      sum += triplets[i].value;
    if (sum == 0.0) continue;
    m.col_index_.push_back(c);
    m.values_.push_back(sum);
    ++m.row_ptr_[r + 1];
  }
  for (std::size_t r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, n, std::move(t));
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
  auto cols = row_cols(r);
  auto it = std::lower_bound(cols.begin(), cols.end(), c);
  if (it == cols.end() || *it != c) return 0.0;
  return values_[row_ptr_[r] + static_cast<std::size_t>(it - cols.begin())];
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      out.push_back({r, col_index_[k], values_[k]});
  return out;
}

std::vector<double> SparseMatrix::row_sums() const {
  std::vector<double> sums(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) sums[r] += values_[k];
  return sums;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (const auto& e : triplets()) t.push_back({e.col, e.row, e.value});
  return from_triplets(cols_, rows_, std::move(t));
}

SparseMatrix SparseMatrix::row_block(std::size_t begin, std::size_t end) const {
  if (begin > end || end > rows_) throw ShapeError("row_block: bad range");
  SparseMatrix m;
  m.rows_ = end - begin;
  m.cols_ = cols_;
  m.row_ptr_.assign(m.rows_ + 1, 0);
  const std::size_t first = row_ptr_[begin];
  for (std::size_t r = begin; r < end; ++r) m.row_ptr_[r - begin + 1] = row_ptr_[r + 1] - first;
  m.col_index_.assign(col_index_.begin() + first, col_index_.begin() + row_ptr_[end]);
  m.values_.assign(values_.begin() + first, values_.begin() + row_ptr_[end]);
  return m;
}

Matrix SparseMatrix::to_dense() const {
  Matrix d(rows_, cols_);
  for (const auto& e : triplets()) d(e.row, e.col) = e.value;
  return d;
}

Matrix SparseMatrix::multiply(const Matrix& x) const {
  if (x.rows() != cols_)
    throw ShapeError("spmm: " + std::to_string(rows_) + "x" + std::to_string(cols_) + " * " +
                     shape_string(x));
  Matrix out(rows_, x.cols());
  for (std::size_t r = 0; r < rows_; ++r) {
    auto out_row = out.row(r);
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const double w = values_[k];
      auto x_row = x.row(col_index_[k]);
      for (std::size_t j = 0; j < x.cols(); ++j) out_row[j] += w * x_row[j];
    }
  }
  return out;
}

Matrix SparseMatrix::transpose_multiply(const Matrix& x) const {
  if (x.rows() != rows_)
    throw ShapeError("spmm^T: " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                     "^T * " + shape_string(x));
  Matrix out(cols_, x.cols());
  for (std::size_t r = 0; r < rows_; ++r) {
    auto x_row = x.row(r);
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const double w = values_[k];
      auto out_row = out.row(col_index_[k]);
      for (std::size_t j = 0; j < x.cols(); ++j) out_row[j] += w * x_row[j];
    }
  }
  return out;
}

bool SparseMatrix::is_symmetric() const {
  if (rows_ != cols_) return false;
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      if (at(col_index_[k], r) != values_[k]) return false;
  return true;
}

}  // namespace wctg
