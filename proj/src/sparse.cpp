#include "bevx/sparse.hpp"

#include <algorithm>

#include "bevx/error.hpp"
#include "bevx/parallel.hpp"

namespace bevx {

SparseBinaryMatrix::SparseBinaryMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), row_offsets_(rows + 1, 0) {}

SparseBinaryMatrix::SparseBinaryMatrix(std::size_t rows, std::size_t cols,
                                       std::vector<std::size_t> row_offsets,
                                       std::vector<std::size_t> col_indices)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)) {
  if (row_offsets_.size() != rows_ + 1) {
    throw ValidationError("row_offsets must have rows+1 = " + std::to_string(rows_ + 1) +
                          " entries, got " + std::to_string(row_offsets_.size()));
  }
  if (row_offsets_.front() != 0) throw ValidationError("row_offsets[0] must be 0");
  if (row_offsets_.back() != col_indices_.size()) {
    throw ValidationError("row_offsets[rows] must equal nnz");
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    if (row_offsets_[r + 1] < row_offsets_[r]) {
      throw ValidationError("row_offsets decrease at row " + std::to_string(r));
    }
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      if (col_indices_[k] >= cols_) {
        throw ValidationError("column index " + std::to_string(col_indices_[k]) +
                              " out of range in row " + std::to_string(r));
      }
      if (k > row_offsets_[r] && col_indices_[k] <= col_indices_[k - 1]) {
        throw ValidationError("column indices not strictly increasing in row " +
                              std::to_string(r));
      }
    }
  }
}

SparseBinaryMatrix SparseBinaryMatrix::from_coordinates(
    std::size_t rows, std::size_t cols,
    std::vector<std::pair<std::size_t, std::size_t>> coords) {
  for (const auto& [r, c] : coords) {
    if (r >= rows || c >= cols) {
      throw IndexError("coordinate (" + std::to_string(r) + ", " + std::to_string(c) +
                       ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
  SparseBinaryMatrix m(rows, cols);
  m.col_indices_.reserve(coords.size());
  for (const auto& [r, c] : coords) {
    ++m.row_offsets_[r + 1];
    m.col_indices_.push_back(c);
  }
  for (std::size_t r = 0; r < rows; ++r) m.row_offsets_[r + 1] += m.row_offsets_[r];
  return m;
}

SparseBinaryMatrix SparseBinaryMatrix::from_dense(const Tensor& dense) {
  if (dense.rank() != 2) throw DimensionError("from_dense expects a matrix, got " + to_string(dense.shape()));
  const std::size_t rows = dense.dim(0), cols = dense.dim(1);
  SparseBinaryMatrix m(rows, cols);
  auto d = dense.data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (d[r * cols + c] != 0.0f) m.col_indices_.push_back(c);
    }
    m.row_offsets_[r + 1] = m.col_indices_.size();
  }
  return m;
}

double SparseBinaryMatrix::density() const {
  if (rows_ == 0 || cols_ == 0) return 0.0;
  return double(nnz()) / (double(rows_) * double(cols_));
}

bool SparseBinaryMatrix::contains(std::size_t r, std::size_t c) const {
  if (r >= rows_) return false;
  auto cols = row(r);
  return std::binary_search(cols.begin(), cols.end(), c);
}

SparseBinaryMatrix SparseBinaryMatrix::with_flipped(std::size_t r, std::size_t c) const {
  if (r >= rows_ || c >= cols_) {
    throw IndexError("flip (" + std::to_string(r) + ", " + std::to_string(c) + ") out of range");
  }
  SparseBinaryMatrix m = *this;
  auto begin = m.col_indices_.begin() + static_cast<std::ptrdiff_t>(m.row_offsets_[r]);
  auto end = m.col_indices_.begin() + static_cast<std::ptrdiff_t>(m.row_offsets_[r + 1]);
  auto it = std::lower_bound(begin, end, c);
  std::ptrdiff_t delta;
  if (it != end && *it == c) {
    m.col_indices_.erase(it);
    delta = -1;
  } else {
    m.col_indices_.insert(it, c);
    delta = 1;
  }
  for (std::size_t k = r + 1; k <= rows_; ++k) {
    m.row_offsets_[k] = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(m.row_offsets_[k]) + delta);
  }
  return m;
}

Tensor densify(const SparseBinaryMatrix& s) {
  Tensor out({std::max<std::size_t>(s.rows(), 1), std::max<std::size_t>(s.cols(), 1)});
  for (std::size_t r = 0; r < s.rows(); ++r) {
    for (std::size_t c : s.row(r)) out[r * s.cols() + c] = 1.0f;
  }
  return out;
}

Tensor spmm(const SparseBinaryMatrix& s, const Tensor& b) {
  if (b.rank() != 2 || s.cols() != b.dim(0)) {
    throw DimensionError("spmm shape mismatch: sparse " + std::to_string(s.rows()) + "x" +
                         std::to_string(s.cols()) + " times " + to_string(b.shape()));
  }
  return spmm(s, b.data(), b.dim(1));
}

Tensor spmm(const SparseBinaryMatrix& s, std::span<const float> b, std::size_t b_cols) {
  if (b_cols == 0 || b.size() != s.cols() * b_cols) {
    throw DimensionError("spmm shape mismatch: sparse " + std::to_string(s.rows()) + "x" +
                         std::to_string(s.cols()) + " times buffer of " +
                         std::to_string(b.size()) + " values with " + std::to_string(b_cols) +
                         " columns");
  }
  const std::size_t n = b_cols;
  Tensor out({s.rows(), n});
  auto O = out.data();
  parallel_for(s.rows(), [&](std::size_t r0, std::size_t r1) {
    for (std::size_t r = r0; r < r1; ++r) {
      float* orow = O.data() + r * n;
      for (std::size_t c : s.row(r)) {
        const float* brow = b.data() + c * n;
        for (std::size_t j = 0; j < n; ++j) orow[j] += brow[j];
      }
    }
  });
  return out;
}

bool is_contained(const SparseBinaryMatrix& inner, const SparseBinaryMatrix& outer) {
  if (inner.rows() != outer.rows() || inner.cols() != outer.cols()) {
    throw DimensionError("containment needs equal shapes");
  }
  for (std::size_t r = 0; r < inner.rows(); ++r) {
    auto a = inner.row(r);
    auto b = outer.row(r);
    if (!std::includes(b.begin(), b.end(), a.begin(), a.end())) return false;
  }
  return true;
}

}  // namespace bevx
