#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bevx {

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);
std::size_t element_count(const Shape& shape);

// Dense row-major fp32 array; the last axis varies fastest.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> data);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape), 0.0f); }
  static Tensor ones(Shape shape) { return Tensor(std::move(shape), 1.0f); }
  static Tensor identity(std::size_t n);
  // Rank-2 tensor from nested rows; all rows must have the same length.
  static Tensor matrix(std::initializer_list<std::initializer_list<float>> rows);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  const std::vector<float>& values() const { return data_; }

  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  // Flat offset of a multi-index.
  std::size_t offset(std::initializer_list<std::size_t> index) const;
  float& at(std::initializer_list<std::size_t> index) { return data_[offset(index)]; }
  float at(std::initializer_list<std::size_t> index) const { return data_[offset(index)]; }

  // Zero-copy view change: same data, new extents with equal element count.
  Tensor reshaped(Shape shape) const&;
  Tensor reshaped(Shape shape) &&;

  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<float> data_;
};

// Axis permutation (generalized transpose); out.shape[i] = in.shape[perm[i]].
Tensor permute(const Tensor& t, std::span<const std::size_t> perm);

Tensor matmul(const Tensor& a, const Tensor& b);

// Elementwise product. `b` may have lower rank or extent-1 axes; it is
// aligned to the trailing axes of `a` and stretched.
Tensor hadamard(const Tensor& a, const Tensor& b);

// out[s] = sum of values[i] over rows with targets[i] == s, accumulated in
// ascending input order. Rows without a target are dropped.
Tensor scatter_add(const Tensor& values,
                   std::span<const std::optional<std::size_t>> targets,
                   std::size_t out_cells);

Tensor reduce_sum(const Tensor& t, std::size_t axis);

// Max-norm relative difference: max|a-b| / max(max|a|, max|b|).
// Returns 0 when both tensors are identically zero.
double max_relative_difference(const Tensor& a, const Tensor& b);

}  // namespace bevx
