#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "bevx/geometry.hpp"
#include "bevx/sparse.hpp"
#include "bevx/tensor.hpp"

namespace bevx {

// Polar factorization of the feature transporting matrix.
//   ring: S x N_d, cell s receives depth bin d from some ray
//   ray:  S x W,   cell s receives column (n, w) at some depth bin
struct RingRayPair {
  SparseBinaryMatrix ring;
  SparseBinaryMatrix ray;

  std::size_t cells() const { return ring.rows(); }
  std::size_t depth_bins() const { return ring.cols(); }
  std::size_t rays() const { return ray.cols(); }

  friend bool operator==(const RingRayPair&, const RingRayPair&) = default;
};

RingRayPair build_ring_ray(const FrustumGeometry& frustum, const BevGrid& grid);

// Lift-then-decompose pipeline: intermediate = ring * F_inter^T, masked by
// the ray matrix and summed over columns. Evaluated in row blocks so the
// S x (W * C) intermediate is never fully resident.
Tensor vt_composed(const Tensor& lifted, const RingRayPair& rr);

// (ray (.) (ring * D^T)) * F without materializing the lift. The ray mask is
// applied while accumulating: only (s, w) with ray[s, w] = 1 are evaluated.
Tensor vt_matrixvt(const Tensor& features, const Tensor& depths, const RingRayPair& rr);

// Same product through explicit tensor_core calls: spmm, dense Hadamard
// with the densified ray matrix, then matmul. Allocates S x W.
Tensor vt_matrixvt_unfused(const Tensor& features, const Tensor& depths, const RingRayPair& rr);

// S x (W * N_d) matrix with entry (s, w * N_d + d) = ring[s, d] * ray[s, w].
SparseBinaryMatrix effective_ftm(const RingRayPair& rr);

struct FidelityReport {
  std::size_t ftm_nnz = 0;
  std::size_t effective_nnz = 0;
  std::size_t spurious = 0;  // effective entries absent from the exact FTM
  bool contained = false;    // exact FTM <= effective FTM
  double spurious_rate() const {
    return effective_nnz ? double(spurious) / double(effective_nnz) : 0.0;
  }
};

FidelityReport compare_ftm(const SparseBinaryMatrix& ftm, const SparseBinaryMatrix& effective);

struct CostReport {
  std::uint64_t flops_composed = 0;
  std::uint64_t flops_reformulated = 0;
  std::uint64_t mem_params_full_ftm = 0;
  std::uint64_t mem_params_ringray = 0;
  // Lifted tensor W_I * N_d * C, its W_I * N_d point targets, and the
  // W_I * C * S intermediate feature of the composed pipeline.
  std::uint64_t mem_lifted = 0;
  std::uint64_t mem_point_targets = 0;
  std::uint64_t mem_composed_intermediate = 0;
  double reduction_flops = 0;
  double saving_memory = 0;
  // W_I * N_d / (W_I + N_d)
  double param_reduction = 0;
};

// Per-camera cost formulas; throws ValidationError on a zero dimension.
CostReport cost_model(std::uint64_t channels, std::uint64_t depth_bins,
                      std::uint64_t feature_width, std::uint64_t bev_h, std::uint64_t bev_w);

// Ring/ray cache: ring.bxs, ray.bxs and manifest.json holding the scene hash.
void save_ring_ray(const std::filesystem::path& dir, const RingRayPair& rr,
                   std::uint64_t scene_hash);
// nullopt when the directory holds no cache or a cache for another scene.
std::optional<RingRayPair> load_ring_ray(const std::filesystem::path& dir,
                                         std::uint64_t scene_hash);

}  // namespace bevx
