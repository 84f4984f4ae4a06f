#pragma once

#include <cstddef>

#include "bevx/scene.hpp"
#include "bevx/tensor.hpp"

namespace bevx {

// Non-negative N_c x H_I x W_I weights, normalized over the height axis.
class PrimeAttention {
 public:
  // Throws ValidationError if any weight is negative or a column does not
  // sum to 1 within 1e-5.
  explicit PrimeAttention(Tensor weights);

  // Softmax over the height axis of arbitrary N_c x H_I x W_I logits.
  static PrimeAttention softmax(const Tensor& logits);
  // All mass on one row.
  static PrimeAttention one_hot(std::size_t cameras, std::size_t height, std::size_t width,
                                std::size_t row);

  const Tensor& weights() const { return weights_; }

 private:
  Tensor weights_;
};

// Linear stand-in for the refinement convolutions: out = matrix * in + bias.
struct RefineMap {
  Tensor matrix;  // C' x C_in
  Tensor bias;    // C'

  static RefineMap identity(std::size_t channels);
  std::size_t out_channels() const { return matrix.dim(0); }
  std::size_t in_channels() const { return matrix.dim(1); }
};

// out[n, w, d] = sum_h attn[n, h, w] * depth[n, h, w, d]
Tensor prime_depth(const Tensor& depth, const PrimeAttention& attn);

// Column max-pool of (feature + pos_embed) over height, then refine.
// feature N_c x H_I x W_I x C, pos_embed H_I x W_I x C -> N_c x W_I x C'.
Tensor prime_feature(const Tensor& feature, const Tensor& pos_embed, const RefineMap& refine);

struct DiscrepancyStats {
  double mean_relative = 0;    // mean over occupied cells of the per-cell relative difference
  double max_relative = 0;     // worst occupied cell
  double global_relative = 0;  // max-norm over the whole BEV map
};

struct AblationReport {
  // Full path vs the compressed inputs transported by the exact compressed FTM.
  DiscrepancyStats compression;
  // Full path vs the compressed inputs transported by MatrixVT; adds the
  // ring/ray cross terms on top of the compression error.
  DiscrepancyStats matrixvt;
  std::size_t occupied_cells = 0;
};

// Compares the full-height lift-splat against the compressed paths on the
// same inputs. The full path weights each row's lifted features by the
// attention so both sides carry the same depth mass, applies the refine map
// per pixel, and splats row h with the frustum of row h. Position embedding
// is zero on both sides.
AblationReport full_vs_prime_ablation(const Scene& scene, const Tensor& feature,
                                      const Tensor& depth, const PrimeAttention& attn,
                                      const RefineMap& refine);

}  // namespace bevx
