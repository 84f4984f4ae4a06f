#include "bevx/reference.hpp"

#include "bevx/error.hpp"
#include "bevx/parallel.hpp"

namespace bevx {

Tensor lift(const Tensor& features, const Tensor& depths) {
  if (features.rank() != 2 || depths.rank() != 2 || features.dim(0) != depths.dim(0)) {
    throw DimensionError("lift expects W x C features and W x N_d depths, got " +
                         to_string(features.shape()) + " and " + to_string(depths.shape()));
  }
  const std::size_t w_count = features.dim(0), c = features.dim(1), nd = depths.dim(1);
  Tensor out({w_count, nd, c});
  auto F = features.data();
  auto D = depths.data();
  auto O = out.data();
  parallel_for(w_count, [&](std::size_t w0, std::size_t w1) {
    for (std::size_t w = w0; w < w1; ++w) {
      const float* f = F.data() + w * c;
      for (std::size_t d = 0; d < nd; ++d) {
        const float p = D[w * nd + d];
        float* o = O.data() + (w * nd + d) * c;
        for (std::size_t j = 0; j < c; ++j) o[j] = p * f[j];
      }
    }
  }, 8);
  return out;
}

Tensor lift_full(const Tensor& features, const Tensor& depths) {
  if (features.rank() != 4 || depths.rank() != 4) {
    throw DimensionError("lift_full expects rank-4 features and depths, got " +
                         to_string(features.shape()) + " and " + to_string(depths.shape()));
  }
  for (std::size_t i = 0; i < 3; ++i) {
    if (features.dim(i) != depths.dim(i)) {
      throw DimensionError("lift_full leading extents differ: " + to_string(features.shape()) +
                           " vs " + to_string(depths.shape()));
    }
  }
  const std::size_t pixels = features.dim(0) * features.dim(1) * features.dim(2);
  Tensor flat = lift(features.reshaped({pixels, features.dim(3)}),
                     depths.reshaped({pixels, depths.dim(3)}));
  return std::move(flat).reshaped(
      {features.dim(0), features.dim(1), features.dim(2), depths.dim(3), features.dim(3)});
}

std::vector<std::optional<std::size_t>> splat_targets(const FrustumGeometry& frustum,
                                                      const BevGrid& grid) {
  std::vector<std::optional<std::size_t>> targets(frustum.point_count());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!frustum.in_front(i)) continue;
    auto [x, y] = frustum.point(i);
    targets[i] = locate(grid, x, y);
  }
  return targets;
}

namespace {

void check_lifted(const Tensor& lifted, const FrustumGeometry& frustum) {
  if (lifted.rank() != 3 || lifted.dim(0) != frustum.rays() ||
      lifted.dim(1) != frustum.depth_bins()) {
    throw DimensionError("lifted tensor " + to_string(lifted.shape()) + " does not match frustum " +
                         std::to_string(frustum.rays()) + " rays x " +
                         std::to_string(frustum.depth_bins()) + " bins");
  }
}

}  // namespace

Tensor splat_reference(const Tensor& lifted, const FrustumGeometry& frustum,
                       const BevGrid& grid) {
  check_lifted(lifted, frustum);
  const auto targets = splat_targets(frustum, grid);
  return scatter_add(lifted.reshaped({frustum.point_count(), lifted.dim(2)}), targets,
                     grid.cell_count());
}

SparseBinaryMatrix build_ftm(const FrustumGeometry& frustum, const BevGrid& grid) {
  const auto targets = splat_targets(frustum, grid);
  // Counting sort by row; columns come out ascending within each row.
  const std::size_t rows = grid.cell_count();
  std::vector<std::size_t> offsets(rows + 1, 0);
  for (const auto& t : targets) {
    if (t) ++offsets[*t + 1];
  }
  for (std::size_t r = 0; r < rows; ++r) offsets[r + 1] += offsets[r];
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  std::vector<std::size_t> cols(offsets.back());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i]) cols[cursor[*targets[i]]++] = i;
  }
  return SparseBinaryMatrix(rows, targets.size(), std::move(offsets), std::move(cols));
}

Tensor vt_ftm(const Tensor& lifted, const SparseBinaryMatrix& ftm) {
  if (lifted.rank() != 3 || ftm.cols() != lifted.dim(0) * lifted.dim(1)) {
    throw DimensionError("FTM with " + std::to_string(ftm.cols()) +
                         " columns cannot transport lifted tensor " + to_string(lifted.shape()));
  }
  return spmm(ftm, lifted.data(), lifted.dim(2));
}

}  // namespace bevx
