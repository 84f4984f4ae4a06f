#pragma once

#include <optional>
#include <vector>

#include "bevx/geometry.hpp"
#include "bevx/sparse.hpp"
#include "bevx/tensor.hpp"

namespace bevx {

// Per-column outer product: features W x C, depths W x N_d -> W x N_d x C,
// out[w, d, c] = depths[w, d] * features[w, c].
Tensor lift(const Tensor& features, const Tensor& depths);

// Full-height lift: features N_c x H_I x W_I x C, depths N_c x H_I x W_I x N_d
// -> N_c x H_I x W_I x N_d x C.
Tensor lift_full(const Tensor& features, const Tensor& depths);

// Destination cell of every frustum point in flat (camera, column, bin)
// order; absent outside the grid or behind the camera.
std::vector<std::optional<std::size_t>> splat_targets(const FrustumGeometry& frustum,
                                                      const BevGrid& grid);

// Scatter-add splat of a W x N_d x C lifted tensor; returns S x C.
Tensor splat_reference(const Tensor& lifted, const FrustumGeometry& frustum,
                       const BevGrid& grid);

// Binary S x (W * N_d) matrix with entry (s, (n * W_I + w) * N_d + d) set
// iff point (n, w, d) lies in cell s.
SparseBinaryMatrix build_ftm(const FrustumGeometry& frustum, const BevGrid& grid);

// F_BEV = M_FT * F_inter with the lifted tensor viewed as (W * N_d) x C.
Tensor vt_ftm(const Tensor& lifted, const SparseBinaryMatrix& ftm);

}  // namespace bevx
