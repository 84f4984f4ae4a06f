#include "bevx/transform.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "bevx/error.hpp"
#include "bevx/io.hpp"
#include "bevx/parallel.hpp"
#include "bevx/reference.hpp"

namespace bevx {

RingRayPair build_ring_ray(const FrustumGeometry& frustum, const BevGrid& grid) {
  const auto targets = splat_targets(frustum, grid);
  const std::size_t nd = frustum.depth_bins();
  std::vector<std::pair<std::size_t, std::size_t>> ring, ray;
  ring.reserve(targets.size());
  ray.reserve(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!targets[i]) continue;
    ring.emplace_back(*targets[i], i % nd);
    ray.emplace_back(*targets[i], i / nd);
  }
  return {SparseBinaryMatrix::from_coordinates(grid.cell_count(), nd, std::move(ring)),
          SparseBinaryMatrix::from_coordinates(grid.cell_count(), frustum.rays(), std::move(ray))};
}

namespace {

void check_pair(const RingRayPair& rr) {
  if (rr.ring.rows() != rr.ray.rows()) {
    throw DimensionError("ring has " + std::to_string(rr.ring.rows()) + " rows but ray has " +
                         std::to_string(rr.ray.rows()));
  }
}

void check_inputs(const Tensor& features, const Tensor& depths, const RingRayPair& rr) {
  check_pair(rr);
  if (features.rank() != 2 || depths.rank() != 2 || features.dim(0) != rr.rays() ||
      depths.dim(0) != rr.rays() || depths.dim(1) != rr.depth_bins()) {
    throw DimensionError("MatrixVT expects W x C features and W x N_d depths with W = " +
                         std::to_string(rr.rays()) + ", N_d = " +
                         std::to_string(rr.depth_bins()) + "; got " +
                         to_string(features.shape()) + " and " + to_string(depths.shape()));
  }
}

SparseBinaryMatrix row_slice(const SparseBinaryMatrix& m, std::size_t r0, std::size_t r1) {
  auto offsets = m.row_offsets();
  auto cols = m.col_indices();
  std::vector<std::size_t> off(r1 - r0 + 1);
  for (std::size_t r = r0; r <= r1; ++r) off[r - r0] = offsets[r] - offsets[r0];
  std::vector<std::size_t> idx(cols.begin() + static_cast<std::ptrdiff_t>(offsets[r0]),
                               cols.begin() + static_cast<std::ptrdiff_t>(offsets[r1]));
  return SparseBinaryMatrix(r1 - r0, m.cols(), std::move(off), std::move(idx));
}

constexpr std::size_t kComposedBlockFloats = std::size_t{1} << 22;

}  // namespace

Tensor vt_composed(const Tensor& lifted, const RingRayPair& rr) {
  check_pair(rr);
  if (lifted.rank() != 3 || lifted.dim(0) != rr.rays() || lifted.dim(1) != rr.depth_bins()) {
    throw DimensionError("lifted tensor " + to_string(lifted.shape()) + " does not match ring/ray " +
                         std::to_string(rr.rays()) + " rays x " + std::to_string(rr.depth_bins()) +
                         " bins");
  }
  const std::size_t w_count = lifted.dim(0), c = lifted.dim(2);
  const std::size_t s_count = rr.cells();
  // N_d x (W * C) view of the transposed lift.
  const std::array<std::size_t, 3> perm{1, 0, 2};
  const Tensor transposed = permute(lifted, perm);

  Tensor out({s_count, c});
  const std::size_t block = std::max<std::size_t>(1, kComposedBlockFloats / (w_count * c));
  for (std::size_t s0 = 0; s0 < s_count; s0 += block) {
    const std::size_t s1 = std::min(s_count, s0 + block);
    const std::size_t rows = s1 - s0;
    Tensor inter = spmm(row_slice(rr.ring, s0, s1), transposed.data(), w_count * c)
                       .reshaped({rows, w_count, c});
    const Tensor mask = densify(row_slice(rr.ray, s0, s1)).reshaped({rows, w_count, 1});
    const Tensor partial = reduce_sum(hadamard(inter, mask), 1);
    std::copy(partial.data().begin(), partial.data().end(), out.data().begin() + s0 * c);
  }
  return out;
}

Tensor vt_matrixvt(const Tensor& features, const Tensor& depths, const RingRayPair& rr) {
  check_inputs(features, depths, rr);
  const std::size_t nd = depths.dim(1), c = features.dim(1);
  Tensor out({rr.cells(), c});
  auto F = features.data();
  auto D = depths.data();
  auto O = out.data();
  parallel_for(rr.cells(), [&](std::size_t s0, std::size_t s1) {
    for (std::size_t s = s0; s < s1; ++s) {
      auto rays = rr.ray.row(s);
      if (rays.empty()) continue;
      auto bins = rr.ring.row(s);
      float* orow = O.data() + s * c;
      for (std::size_t w : rays) {
        const float* drow = D.data() + w * nd;
        float weight = 0.0f;
        for (std::size_t d : bins) weight += drow[d];
        if (weight == 0.0f) continue;
        const float* frow = F.data() + w * c;
        for (std::size_t j = 0; j < c; ++j) orow[j] += weight * frow[j];
      }
    }
  });
  return out;
}

Tensor vt_matrixvt_unfused(const Tensor& features, const Tensor& depths, const RingRayPair& rr) {
  check_inputs(features, depths, rr);
  const std::array<std::size_t, 2> perm{1, 0};
  const Tensor weights = hadamard(spmm(rr.ring, permute(depths, perm)), densify(rr.ray));
  return matmul(weights, features);
}

SparseBinaryMatrix effective_ftm(const RingRayPair& rr) {
  check_pair(rr);
  const std::size_t nd = rr.depth_bins();
  std::vector<std::size_t> offsets(rr.cells() + 1, 0);
  std::vector<std::size_t> cols;
  for (std::size_t s = 0; s < rr.cells(); ++s) {
    auto bins = rr.ring.row(s);
    for (std::size_t w : rr.ray.row(s)) {
      for (std::size_t d : bins) cols.push_back(w * nd + d);
    }
    offsets[s + 1] = cols.size();
  }
  return SparseBinaryMatrix(rr.cells(), rr.rays() * nd, std::move(offsets), std::move(cols));
}

FidelityReport compare_ftm(const SparseBinaryMatrix& ftm, const SparseBinaryMatrix& effective) {
  if (ftm.rows() != effective.rows() || ftm.cols() != effective.cols()) {
    throw DimensionError("FTM shapes differ");
  }
  FidelityReport report;
  report.ftm_nnz = ftm.nnz();
  report.effective_nnz = effective.nnz();
  report.contained = true;
  for (std::size_t r = 0; r < ftm.rows(); ++r) {
    auto exact = ftm.row(r);
    auto eff = effective.row(r);
    std::size_t shared = 0;
    auto a = exact.begin();
    auto b = eff.begin();
    while (a != exact.end() && b != eff.end()) {
      if (*a == *b) {
        ++shared;
        ++a;
        ++b;
      } else if (*a < *b) {
        report.contained = false;
        ++a;
      } else {
        ++b;
      }
    }
    if (a != exact.end()) report.contained = false;
    report.spurious += eff.size() - shared;
  }
  return report;
}

CostReport cost_model(std::uint64_t channels, std::uint64_t depth_bins,
                      std::uint64_t feature_width, std::uint64_t bev_h, std::uint64_t bev_w) {
  if (channels == 0 || depth_bins == 0 || feature_width == 0 || bev_h == 0 || bev_w == 0) {
    throw ValidationError("cost model dimensions must all be positive");
  }
  const std::uint64_t cells = bev_h * bev_w;
  CostReport r;
  r.flops_composed = 2 * feature_width * channels * depth_bins * cells;
  r.flops_reformulated = 2 * (channels + depth_bins + 1) * feature_width * cells;
  r.mem_params_full_ftm = feature_width * depth_bins * cells;
  r.mem_params_ringray = (feature_width + depth_bins) * cells;
  r.mem_lifted = feature_width * depth_bins * channels;
  r.mem_point_targets = feature_width * depth_bins;
  r.mem_composed_intermediate = feature_width * channels * cells;
  r.reduction_flops = double(r.flops_composed) / double(r.flops_reformulated);
  r.saving_memory = 1.0 - double(r.mem_params_ringray) / double(r.mem_params_full_ftm);
  r.param_reduction = double(feature_width * depth_bins) / double(feature_width + depth_bins);
  return r;
}

namespace {

std::string hash_hex(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace

void save_ring_ray(const std::filesystem::path& dir, const RingRayPair& rr,
                   std::uint64_t scene_hash) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create cache directory " + dir.string() + ": " + ec.message());
  io::save_sparse(dir / "ring.bxs", rr.ring);
  io::save_sparse(dir / "ray.bxs", rr.ray);
  nlohmann::json manifest{{"scene_hash", hash_hex(scene_hash)},
                          {"ring", "ring.bxs"},
                          {"ray", "ray.bxs"},
                          {"cells", rr.cells()},
                          {"depth_bins", rr.depth_bins()},
                          {"rays", rr.rays()}};
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot write cache manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

std::optional<RingRayPair> load_ring_ray(const std::filesystem::path& dir,
                                         std::uint64_t scene_hash) {
  std::ifstream in(dir / "manifest.json");
  if (!in) return std::nullopt;
  nlohmann::json manifest;
  try {
    in >> manifest;
    if (manifest.at("scene_hash").get<std::string>() != hash_hex(scene_hash)) return std::nullopt;
    RingRayPair rr{io::load_sparse(dir / manifest.at("ring").get<std::string>()),
                   io::load_sparse(dir / manifest.at("ray").get<std::string>())};
    check_pair(rr);
    return rr;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad cache manifest in " + dir.string() + ": " + e.what());
  }
}

}  // namespace bevx
