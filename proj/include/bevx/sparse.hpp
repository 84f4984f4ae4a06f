#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "bevx/tensor.hpp"

namespace bevx {

// CSR matrix whose stored entries are all exactly one.
class SparseBinaryMatrix {
 public:
  SparseBinaryMatrix() : row_offsets_(1, 0) {}
  // Empty (all-zero) rows x cols matrix.
  SparseBinaryMatrix(std::size_t rows, std::size_t cols);
  // Validates the CSR invariants; throws ValidationError on violation.
  SparseBinaryMatrix(std::size_t rows, std::size_t cols,
                     std::vector<std::size_t> row_offsets,
                     std::vector<std::size_t> col_indices);

  // Builds from (row, col) coordinates in any order; duplicates collapse.
  static SparseBinaryMatrix from_coordinates(
      std::size_t rows, std::size_t cols,
      std::vector<std::pair<std::size_t, std::size_t>> coords);
  // Nonzero pattern of a rank-2 tensor.
  static SparseBinaryMatrix from_dense(const Tensor& dense);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return col_indices_.size(); }
  double density() const;

  std::span<const std::size_t> row_offsets() const { return row_offsets_; }
  std::span<const std::size_t> col_indices() const { return col_indices_; }
  std::span<const std::size_t> row(std::size_t r) const {
    return std::span<const std::size_t>(col_indices_).subspan(
        row_offsets_[r], row_offsets_[r + 1] - row_offsets_[r]);
  }

  bool contains(std::size_t r, std::size_t c) const;

  // Returns a copy with entry (r, c) toggled.
  SparseBinaryMatrix with_flipped(std::size_t r, std::size_t c) const;

  friend bool operator==(const SparseBinaryMatrix&,
                         const SparseBinaryMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_offsets_;
  std::vector<std::size_t> col_indices_;
};

Tensor densify(const SparseBinaryMatrix& s);

// s (m x k, binary) times b (k x n).
Tensor spmm(const SparseBinaryMatrix& s, const Tensor& b);
// Same product with b given as a row-major (s.cols() x b_cols) buffer.
Tensor spmm(const SparseBinaryMatrix& s, std::span<const float> b, std::size_t b_cols);

// True when every nonzero of `inner` is also a nonzero of `outer`.
bool is_contained(const SparseBinaryMatrix& inner, const SparseBinaryMatrix& outer);

}  // namespace bevx
