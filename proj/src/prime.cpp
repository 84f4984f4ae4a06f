#include "bevx/prime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bevx/error.hpp"
#include "bevx/reference.hpp"
#include "bevx/transform.hpp"

namespace bevx {

namespace {

constexpr double kNormTolerance = 1e-5;

}  // namespace

PrimeAttention::PrimeAttention(Tensor weights) : weights_(std::move(weights)) {
  if (weights_.rank() != 3) {
    throw DimensionError("attention must be N_c x H_I x W_I, got " + to_string(weights_.shape()));
  }
  const std::size_t nc = weights_.dim(0), h = weights_.dim(1), w = weights_.dim(2);
  for (std::size_t n = 0; n < nc; ++n) {
    for (std::size_t col = 0; col < w; ++col) {
      double sum = 0.0;
      for (std::size_t r = 0; r < h; ++r) {
        float v = weights_[(n * h + r) * w + col];
        if (!(v >= 0.0f) || !std::isfinite(v)) {
          throw ValidationError("attention weights must be finite and non-negative");
        }
        sum += v;
      }
      if (std::abs(sum - 1.0) > kNormTolerance) {
        throw ValidationError("attention for camera " + std::to_string(n) + ", column " +
                              std::to_string(col) + " sums to " + std::to_string(sum) +
                              ", expected 1");
      }
    }
  }
}

PrimeAttention PrimeAttention::softmax(const Tensor& logits) {
  if (logits.rank() != 3) {
    throw DimensionError("attention logits must be N_c x H_I x W_I, got " + to_string(logits.shape()));
  }
  const std::size_t nc = logits.dim(0), h = logits.dim(1), w = logits.dim(2);
  Tensor out(logits.shape());
  for (std::size_t n = 0; n < nc; ++n) {
    for (std::size_t col = 0; col < w; ++col) {
      float peak = -std::numeric_limits<float>::infinity();
      for (std::size_t r = 0; r < h; ++r) peak = std::max(peak, logits[(n * h + r) * w + col]);
      double sum = 0.0;
      for (std::size_t r = 0; r < h; ++r) sum += std::exp(double(logits[(n * h + r) * w + col] - peak));
      for (std::size_t r = 0; r < h; ++r) {
        out[(n * h + r) * w + col] =
            float(std::exp(double(logits[(n * h + r) * w + col] - peak)) / sum);
      }
    }
  }
  return PrimeAttention(std::move(out));
}

PrimeAttention PrimeAttention::one_hot(std::size_t cameras, std::size_t height,
                                       std::size_t width, std::size_t row) {
  if (row >= height) throw IndexError("one-hot attention row out of range");
  Tensor t({cameras, height, width});
  for (std::size_t n = 0; n < cameras; ++n) {
    for (std::size_t col = 0; col < width; ++col) t[(n * height + row) * width + col] = 1.0f;
  }
  return PrimeAttention(std::move(t));
}

RefineMap RefineMap::identity(std::size_t channels) {
  return {Tensor::identity(channels), Tensor::zeros({channels})};
}

Tensor prime_depth(const Tensor& depth, const PrimeAttention& attn) {
  const Tensor& a = attn.weights();
  if (depth.rank() != 4 || depth.dim(0) != a.dim(0) || depth.dim(1) != a.dim(1) ||
      depth.dim(2) != a.dim(2)) {
    throw DimensionError("depth " + to_string(depth.shape()) + " does not match attention " +
                         to_string(a.shape()));
  }
  const std::size_t nc = depth.dim(0), h = depth.dim(1), w = depth.dim(2), nd = depth.dim(3);
  Tensor out({nc, w, nd});
  auto D = depth.data();
  auto O = out.data();
  for (std::size_t n = 0; n < nc; ++n) {
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t col = 0; col < w; ++col) {
        const float weight = a[(n * h + r) * w + col];
        const float* src = D.data() + ((n * h + r) * w + col) * nd;
        float* dst = O.data() + (n * w + col) * nd;
        for (std::size_t d = 0; d < nd; ++d) dst[d] += weight * src[d];
      }
    }
  }
  return out;
}

namespace {

void check_refine(const RefineMap& refine, std::size_t in_channels) {
  if (refine.matrix.rank() != 2 || refine.bias.rank() != 1 ||
      refine.bias.dim(0) != refine.matrix.dim(0) || refine.matrix.dim(1) != in_channels) {
    throw DimensionError("refine map " + to_string(refine.matrix.shape()) + " + " +
                         to_string(refine.bias.shape()) + " does not accept " +
                         std::to_string(in_channels) + " channels");
  }
  if (!refine.matrix.all_finite() || !refine.bias.all_finite()) {
    throw ValidationError("refine map has non-finite entries");
  }
}

// rows x C_in -> rows x C'
Tensor apply_refine(const Tensor& rows, const RefineMap& refine) {
  const std::array<std::size_t, 2> perm{1, 0};
  Tensor out = matmul(rows, permute(refine.matrix, perm));
  const std::size_t c = out.dim(1);
  for (std::size_t i = 0; i < out.dim(0); ++i) {
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] += refine.bias[j];
  }
  return out;
}

}  // namespace

Tensor prime_feature(const Tensor& feature, const Tensor& pos_embed, const RefineMap& refine) {
  if (feature.rank() != 4 || pos_embed.rank() != 3 || pos_embed.dim(0) != feature.dim(1) ||
      pos_embed.dim(1) != feature.dim(2) || pos_embed.dim(2) != feature.dim(3)) {
    throw DimensionError("feature " + to_string(feature.shape()) + " and position embedding " +
                         to_string(pos_embed.shape()) + " disagree");
  }
  const std::size_t nc = feature.dim(0), h = feature.dim(1), w = feature.dim(2), c = feature.dim(3);
  check_refine(refine, c);
  Tensor pooled({nc * w, c}, -std::numeric_limits<float>::infinity());
  auto F = feature.data();
  auto P = pos_embed.data();
  auto M = pooled.data();
  for (std::size_t n = 0; n < nc; ++n) {
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t col = 0; col < w; ++col) {
        const float* f = F.data() + ((n * h + r) * w + col) * c;
        const float* p = P.data() + (r * w + col) * c;
        float* m = M.data() + (n * w + col) * c;
        for (std::size_t j = 0; j < c; ++j) m[j] = std::max(m[j], f[j] + p[j]);
      }
    }
  }
  return apply_refine(pooled, refine).reshaped({nc, w, refine.out_channels()});
}

namespace {

DiscrepancyStats discrepancy(const Tensor& full, const Tensor& compressed, std::size_t* occupied) {
  DiscrepancyStats stats;
  stats.global_relative = max_relative_difference(full, compressed);
  const std::size_t cells = full.dim(0), c = full.dim(1);
  std::size_t count = 0;
  double total = 0.0;
  for (std::size_t s = 0; s < cells; ++s) {
    double diff = 0.0, scale = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      double a = full[s * c + j], b = compressed[s * c + j];
      diff = std::max(diff, std::abs(a - b));
      scale = std::max({scale, std::abs(a), std::abs(b)});
    }
    if (scale == 0.0) continue;
    ++count;
    const double rel = diff / scale;
    total += rel;
    stats.max_relative = std::max(stats.max_relative, rel);
  }
  stats.mean_relative = count ? total / double(count) : 0.0;
  if (occupied) *occupied = count;
  return stats;
}

}  // namespace

AblationReport full_vs_prime_ablation(const Scene& scene, const Tensor& feature,
                                      const Tensor& depth, const PrimeAttention& attn,
                                      const RefineMap& refine) {
  const CameraRig& rig = scene.rig;
  const std::size_t nc = rig.camera_count(), h = rig.feature_height(), w = rig.feature_width();
  if (feature.rank() != 4 || feature.dim(0) != nc || feature.dim(1) != h || feature.dim(2) != w) {
    throw DimensionError("feature " + to_string(feature.shape()) + " does not match the rig");
  }
  const std::size_t c = feature.dim(3);
  if (depth.rank() != 4 || depth.dim(0) != nc || depth.dim(1) != h || depth.dim(2) != w ||
      depth.dim(3) != scene.depth.count) {
    throw DimensionError("depth " + to_string(depth.shape()) + " does not match the scene");
  }
  check_refine(refine, c);
  const std::size_t nd = depth.dim(3);
  const DepthBins bins = scene.bins();
  const BevGrid grid = scene.grid();
  const Tensor& a = attn.weights();
  if (a.shape() != Shape{nc, h, w}) {
    throw DimensionError("attention " + to_string(a.shape()) + " does not match the rig");
  }

  Tensor full({grid.cell_count(), refine.out_channels()});
  for (std::size_t r = 0; r < h; ++r) {
    Tensor row_feat({nc * w, c});
    Tensor row_depth({nc * w, nd});
    for (std::size_t n = 0; n < nc; ++n) {
      for (std::size_t col = 0; col < w; ++col) {
        const std::size_t pix = (n * h + r) * w + col;
        const std::size_t ray = n * w + col;
        std::copy_n(feature.data().begin() + pix * c, c, row_feat.data().begin() + ray * c);
        const float weight = a[pix];
        for (std::size_t d = 0; d < nd; ++d) row_depth[ray * nd + d] = weight * depth[pix * nd + d];
      }
    }
    const Tensor bev = splat_reference(lift(apply_refine(row_feat, refine), row_depth),
                                       generate_frustum(rig, bins, r), grid);
    for (std::size_t i = 0; i < full.size(); ++i) full[i] += bev[i];
  }

  const Tensor pf = prime_feature(feature, Tensor::zeros({h, w, c}), refine)
                        .reshaped({nc * w, refine.out_channels()});
  const Tensor pd = prime_depth(depth, attn).reshaped({nc * w, nd});
  const FrustumGeometry frustum = generate_frustum(rig, bins, scene.row());
  const Tensor exact = vt_ftm(lift(pf, pd), build_ftm(frustum, grid));
  const Tensor mvt = vt_matrixvt(pf, pd, build_ring_ray(frustum, grid));

  AblationReport report;
  report.compression = discrepancy(full, exact, &report.occupied_cells);
  report.matrixvt = discrepancy(full, mvt, nullptr);
  return report;
}

}  // namespace bevx
