#include "bevx/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bevx/error.hpp"
#include "bevx/parallel.hpp"

namespace bevx {

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

namespace {

void require_positive(const Shape& shape) {
  for (std::size_t e : shape) {
    if (e == 0) throw DimensionError("tensor extents must be positive, got " + to_string(shape));
  }
}

}  // namespace

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)) {
  require_positive(shape_);
  data_.assign(element_count(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  require_positive(shape_);
  if (element_count(shape_) != data_.size()) {
    throw DimensionError("shape " + to_string(shape_) + " needs " +
                         std::to_string(element_count(shape_)) + " values, got " +
                         std::to_string(data_.size()));
  }
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = 1.0f;
  return t;
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<float>> rows) {
  std::size_t m = rows.size();
  std::size_t n = m ? rows.begin()->size() : 0;
  std::vector<float> data;
  data.reserve(m * n);
  for (const auto& r : rows) {
    if (r.size() != n) throw DimensionError("ragged matrix literal");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Tensor({m, n}, std::move(data));
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw IndexError("index rank " + std::to_string(index.size()) + " for tensor " +
                     to_string(shape_));
  }
  std::size_t off = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= shape_[axis]) {
      throw IndexError("index " + std::to_string(i) + " out of range on axis " +
                       std::to_string(axis) + " of " + to_string(shape_));
    }
    off = off * shape_[axis] + i;
    ++axis;
  }
  return off;
}

Tensor Tensor::reshaped(Shape shape) const& {
  Tensor copy = *this;
  return std::move(copy).reshaped(std::move(shape));
}

Tensor Tensor::reshaped(Shape shape) && {
  require_positive(shape);
  if (element_count(shape) != data_.size()) {
    throw DimensionError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
  }
  shape_ = std::move(shape);
  return std::move(*this);
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

Tensor permute(const Tensor& t, std::span<const std::size_t> perm) {
  const std::size_t rank = t.rank();
  if (perm.size() != rank) throw DimensionError("permutation rank mismatch for " + to_string(t.shape()));
  std::vector<bool> seen(rank, false);
  Shape out_shape(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    if (perm[i] >= rank || seen[perm[i]]) throw DimensionError("invalid axis permutation");
    seen[perm[i]] = true;
    out_shape[i] = t.dim(perm[i]);
  }
  // Input strides, reordered to output axis order.
  std::vector<std::size_t> in_stride(rank, 1);
  for (std::size_t i = rank; i-- > 1;) in_stride[i - 1] = in_stride[i] * t.dim(i);
  std::vector<std::size_t> stride(rank);
  for (std::size_t i = 0; i < rank; ++i) stride[i] = in_stride[perm[i]];

  Tensor out(out_shape);
  std::vector<std::size_t> idx(rank, 0);
  auto src = t.data();
  auto dst = out.data();
  std::size_t in_off = 0;
  for (std::size_t o = 0; o < dst.size(); ++o) {
    dst[o] = src[in_off];
    for (std::size_t ax = rank; ax-- > 0;) {
      ++idx[ax];
      in_off += stride[ax];
      if (idx[ax] < out_shape[ax]) break;
      in_off -= stride[ax] * out_shape[ax];
      idx[ax] = 0;
    }
  }
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul shape mismatch: " + to_string(a.shape()) + " x " +
                         to_string(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out({m, n});
  auto A = a.data();
  auto B = b.data();
  auto O = out.data();
  parallel_for(m, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t i = r0; i < r1; ++i) {
      float* orow = O.data() + i * n;
      for (std::size_t p = 0; p < k; ++p) {
        const float aip = A[i * k + p];
        if (aip == 0.0f) continue;
        const float* brow = B.data() + p * n;
        for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
      }
    }
  }, 16);
  return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  const std::size_t ra = a.rank(), rb = b.rank();
  auto incompatible = [&] {
    return DimensionError("hadamard shape mismatch: " + to_string(a.shape()) + " vs " +
                          to_string(b.shape()));
  };
  if (rb > ra) throw incompatible();
  // b's strides in a's index space; 0 on stretched or missing axes.
  std::vector<std::size_t> bstride(ra, 0);
  std::size_t s = 1;
  for (std::size_t i = 0; i < rb; ++i) {
    std::size_t bax = rb - 1 - i;
    std::size_t aax = ra - 1 - i;
    if (b.dim(bax) == a.dim(aax)) {
      bstride[aax] = s;
    } else if (b.dim(bax) != 1) {
      throw incompatible();
    }
    s *= b.dim(bax);
  }
  Tensor out = a;
  auto O = out.data();
  auto B = b.data();
  if (a.shape() == b.shape()) {
    for (std::size_t i = 0; i < O.size(); ++i) O[i] *= B[i];
    return out;
  }
  std::vector<std::size_t> idx(ra, 0);
  std::size_t boff = 0;
  for (std::size_t i = 0; i < O.size(); ++i) {
    O[i] *= B[boff];
    for (std::size_t ax = ra; ax-- > 0;) {
      ++idx[ax];
      boff += bstride[ax];
      if (idx[ax] < a.dim(ax)) break;
      boff -= bstride[ax] * a.dim(ax);
      idx[ax] = 0;
    }
  }
  return out;
}

Tensor scatter_add(const Tensor& values,
                   std::span<const std::optional<std::size_t>> targets,
                   std::size_t out_cells) {
  if (values.rank() != 2 || targets.size() != values.dim(0)) {
    throw DimensionError("scatter_add expects p x C values with p targets, got " +
                         to_string(values.shape()) + " and " +
                         std::to_string(targets.size()) + " targets");
  }
  const std::size_t c = values.dim(1);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] && *targets[i] >= out_cells) {
      throw IndexError("scatter target " + std::to_string(*targets[i]) + " of row " +
                       std::to_string(i) + " is outside " + std::to_string(out_cells) + " cells");
    }
  }
  Tensor out({out_cells, c});
  auto V = values.data();
  auto O = out.data();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!targets[i]) continue;
    float* orow = O.data() + *targets[i] * c;
    const float* vrow = V.data() + i * c;
    for (std::size_t j = 0; j < c; ++j) orow[j] += vrow[j];
  }
  return out;
}

Tensor reduce_sum(const Tensor& t, std::size_t axis) {
  if (axis >= t.rank()) {
    throw DimensionError("reduce axis " + std::to_string(axis) + " out of range for " +
                         to_string(t.shape()));
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= t.dim(i);
  for (std::size_t i = axis + 1; i < t.rank(); ++i) inner *= t.dim(i);
  const std::size_t extent = t.dim(axis);
  Shape out_shape;
  for (std::size_t i = 0; i < t.rank(); ++i) {
    if (i != axis) out_shape.push_back(t.dim(i));
  }
  if (out_shape.empty()) out_shape.push_back(1);
  Tensor out(out_shape);
  auto src = t.data();
  auto dst = out.data();
  for (std::size_t o = 0; o < outer; ++o) {
    float* drow = dst.data() + o * inner;
    for (std::size_t e = 0; e < extent; ++e) {
      const float* srow = src.data() + (o * extent + e) * inner;
      for (std::size_t i = 0; i < inner; ++i) drow[i] += srow[i];
    }
  }
  return out;
}

double max_relative_difference(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("cannot compare " + to_string(a.shape()) + " with " + to_string(b.shape()));
  }
  double diff = 0.0, scale = 0.0;
  auto A = a.data();
  auto B = b.data();
  for (std::size_t i = 0; i < A.size(); ++i) {
    diff = std::max(diff, std::abs(double(A[i]) - double(B[i])));
    scale = std::max({scale, std::abs(double(A[i])), std::abs(double(B[i]))});
  }
  return scale == 0.0 ? 0.0 : diff / scale;
}

}  // namespace bevx
