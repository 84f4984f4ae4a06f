#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "bevx/geometry.hpp"

namespace bevx {

struct DepthConfig {
  double min = 2.0;
  double max = 58.0;
  std::size_t count = 112;
};

struct BevConfig {
  double extent = 51.2;
  std::size_t h_cells = 128;
  std::size_t w_cells = 128;
};

// Parsed scene config document:
//   { "cameras": [{"intrinsics": [9], "rotation": [9], "translation": [3]}],
//     "feature_width", "feature_height", "image_stride",
//     "depth": {"min", "max", "count"}, "bev": {"extent", "h_cells", "w_cells"},
//     "reference_row" (optional), "channels" (optional) }
struct Scene {
  CameraRig rig;
  DepthConfig depth;
  BevConfig bev;
  std::optional<std::size_t> reference_row;
  std::size_t channels = 16;

  std::size_t row() const { return reference_row.value_or(default_reference_row(rig)); }
  DepthBins bins() const { return make_depth_bins(depth.min, depth.max, depth.count); }
  BevGrid grid() const { return make_bev_grid(bev.extent, bev.h_cells, bev.w_cells); }
  FrustumGeometry frustum() const { return generate_frustum(rig, bins(), row()); }
};

Scene parse_scene(const std::string& json_text);
Scene load_scene(const std::filesystem::path& path);
std::string dump_scene(const Scene& scene);

// FNV-1a over the canonical JSON dump; identifies cached matrices.
std::uint64_t scene_hash(const Scene& scene);

}  // namespace bevx
