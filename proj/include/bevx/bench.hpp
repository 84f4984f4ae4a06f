#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bevx/scene.hpp"
#include "bevx/transform.hpp"

namespace bevx {

enum class Backend { scatter, ftm, ringray_composed, matrixvt };

std::string_view backend_name(Backend b);
// Throws UsageError listing the valid names.
Backend parse_backend(std::string_view name);
std::vector<Backend> parse_backends(std::string_view comma_list);

struct TransformSetting {
  std::string name;
  std::size_t channels = 0;
  std::size_t feature_height = 0;
  std::size_t feature_width = 0;
  std::size_t bev_h = 0;
  std::size_t bev_w = 0;
  std::size_t cameras = 0;
  std::size_t depth_bins = 0;
};

// S1..S6.
const std::vector<TransformSetting>& builtin_settings();
// The scene's own extents, named "scene".
TransformSetting scene_setting(const Scene& scene);
// Resolves S1..S6 or "scene"; throws UsageError otherwise.
TransformSetting resolve_setting(const Scene& scene, std::string_view name);
std::vector<TransformSetting> resolve_settings(const Scene& scene, std::string_view comma_list);

// Scene with the rig resampled to the setting's feature grid and the BEV
// grid and depth bins resized; extents and depth range stay the same.
// Throws UsageError when the camera counts differ.
Scene apply_setting(const Scene& scene, const TransformSetting& setting);

// Intermediate-variable count for one backend under the per-camera formulas:
//   scatter          lifted tensor + one target per lifted point
//   ftm              W_I * N_d * S
//   ringray_composed (W_I + N_d) * S + W_I * C * S
//   matrixvt         (W_I + N_d) * S
std::uint64_t intermediate_params(Backend backend, const CostReport& cost);

struct BenchRecord {
  std::string setting;
  Backend backend = Backend::matrixvt;
  double median_s = 0;
  double p10_s = 0;
  double p90_s = 0;
  std::uint64_t intermediate_params = 0;
  std::size_t repeats = 0;

  friend bool operator==(const BenchRecord&, const BenchRecord&) = default;
};

struct BenchOptions {
  std::vector<TransformSetting> settings;
  std::vector<Backend> backends;
  std::size_t repeats = 20;
  std::size_t warmup = 2;
  std::uint64_t seed = 7;
  // Prepare matrices and inputs for all settings concurrently. Timed
  // regions always run one at a time.
  bool parallel = false;
  std::optional<std::filesystem::path> cache_dir;
};

// Records in (setting, backend) input order. Throws UsageError when
// repeats < 3 or a list is empty.
std::vector<BenchRecord> run_bench(const Scene& scene, const BenchOptions& options);

// Linear-interpolated quantile of unsorted samples, q in [0, 1].
double quantile(std::vector<double> samples, double q);

std::string emit_csv(const std::vector<BenchRecord>& records);
std::vector<BenchRecord> parse_csv(std::string_view text);
std::string emit_json(const std::vector<BenchRecord>& records);

struct CheckOptions {
  std::size_t trials = 50;
  std::uint64_t seed = 7;
  // Clears the first stored ring entry before checking.
  bool corrupt_ring = false;
  bool zero_features = false;
};

struct TrialResult {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double ftm_vs_splat = 0;
  double matrixvt_vs_composed = 0;
  double matrixvt_vs_effective_ftm = 0;
  bool contained = false;
  bool passed = false;
};

struct CheckReport {
  std::vector<TrialResult> trials;
  double spurious_rate = 0;
  std::size_t ftm_nnz = 0;
  std::size_t effective_nnz = 0;
  bool passed = false;

  std::optional<std::uint64_t> first_failed_seed() const;
  std::string text() const;
};

inline constexpr double kCheckTolerance = 1e-5;

CheckReport run_check(const Scene& scene, const CheckOptions& options);

// Per-trial seed derived from the run seed.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial);

}  // namespace bevx
