#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace bevx {

using Vec3 = std::array<double, 3>;
// Row-major 3x3.
using Mat3 = std::array<double, 9>;

Vec3 mul(const Mat3& m, const Vec3& v);
Mat3 mul(const Mat3& a, const Mat3& b);
Mat3 transpose(const Mat3& m);
double determinant(const Mat3& m);
// Throws GeometryError when |det| is below 1e-12.
Mat3 inverse(const Mat3& m);

// Camera axes (x right, y down, z forward) to ego axes (x forward, y left,
// z up), rotated by `yaw` radians about the ego z axis.
Mat3 forward_mount(double yaw);

struct Camera {
  Mat3 intrinsics{};   // pixels
  Mat3 rotation{};     // camera -> ego
  Vec3 translation{};  // meters, ego frame
};

// Pinhole rig. Validates intrinsics shape and rotation orthonormality on
// construction (GeometryError).
class CameraRig {
 public:
  CameraRig(std::vector<Camera> cameras, std::size_t feature_width,
            std::size_t feature_height, double image_stride);

  std::size_t camera_count() const { return cameras_.size(); }
  const std::vector<Camera>& cameras() const { return cameras_; }
  std::size_t feature_width() const { return feature_width_; }
  std::size_t feature_height() const { return feature_height_; }
  double image_stride() const { return image_stride_; }
  // N_c * W_I: number of compressed feature columns across all cameras.
  std::size_t column_count() const { return cameras_.size() * feature_width_; }

  // Same cameras and image, resampled to a different feature grid; the
  // stride is rescaled so the feature grid still covers the same pixels.
  CameraRig resampled(std::size_t feature_width, std::size_t feature_height) const;

 private:
  std::vector<Camera> cameras_;
  std::size_t feature_width_;
  std::size_t feature_height_;
  double image_stride_;
};

struct DepthBins {
  double d_min = 0;
  double d_max = 0;
  std::vector<double> centers;

  std::size_t count() const { return centers.size(); }
  double spacing() const { return (d_max - d_min) / double(centers.size()); }
};

DepthBins make_depth_bins(double d_min, double d_max, std::size_t n);

// Ego-frame ground-plane (x, y) of every (camera, column, depth bin).
class FrustumGeometry {
 public:
  FrustumGeometry(std::size_t cameras, std::size_t columns, std::vector<double> depths);

  std::size_t cameras() const { return cameras_; }
  std::size_t columns() const { return columns_; }
  std::size_t depth_bins() const { return depths_.size(); }
  // N_c * W_I.
  std::size_t rays() const { return cameras_ * columns_; }
  std::size_t point_count() const { return rays() * depths_.size(); }
  // Forward (planar) depth of each bin.
  std::span<const double> depths() const { return depths_; }

  // Flat point index (n * W_I + w) * N_d + d, i.e. depth fastest.
  std::size_t index(std::size_t camera, std::size_t column, std::size_t bin) const {
    return (camera * columns_ + column) * depths_.size() + bin;
  }
  std::array<double, 2> point(std::size_t i) const { return {xy_[2 * i], xy_[2 * i + 1]}; }
  void set_point(std::size_t i, double x, double y) {
    xy_[2 * i] = x;
    xy_[2 * i + 1] = y;
  }
  // False for points with non-positive forward depth.
  bool in_front(std::size_t i) const { return depths_[i % depths_.size()] > 0.0; }

 private:
  std::size_t cameras_;
  std::size_t columns_;
  std::vector<double> depths_;
  std::vector<double> xy_;
};

// Ground points for pixel row `reference_row`, one per (camera, column, bin).
FrustumGeometry generate_frustum(const CameraRig& rig, const DepthBins& bins,
                                 std::size_t reference_row);
inline std::size_t default_reference_row(const CameraRig& rig) { return rig.feature_height() / 2; }

// Forward pinhole projection of an ego-frame point at the given height (z);
// returns pixel (u, v).
std::array<double, 2> project(const Camera& cam, const Vec3& ego_point);

struct CellRect {
  double x0, y0, x1, y1;  // half-open [x0, x1) x [y0, y1)
};

// H_B x W_B grid of square cells; row h runs along y, column w along x.
class BevGrid {
 public:
  BevGrid(std::size_t h_cells, std::size_t w_cells, double x_min, double y_min,
          double cell_size);

  std::size_t h_cells() const { return h_cells_; }
  std::size_t w_cells() const { return w_cells_; }
  std::size_t cell_count() const { return h_cells_ * w_cells_; }
  double x_min() const { return x_min_; }
  double y_min() const { return y_min_; }
  double cell_size() const { return cell_size_; }

  double x_edge(std::size_t w) const { return x_min_ + double(w) * cell_size_; }
  double y_edge(std::size_t h) const { return y_min_ + double(h) * cell_size_; }
  CellRect rect(std::size_t cell) const;

 private:
  std::size_t h_cells_;
  std::size_t w_cells_;
  double x_min_;
  double y_min_;
  double cell_size_;
};

// Square cells of side 2*extent/w_cells, centered on the ego origin; with
// h_cells == w_cells this is [-extent, extent)^2.
BevGrid make_bev_grid(double extent, std::size_t h_cells, std::size_t w_cells);

// Row-major cell index h * W_B + w of the half-open cell containing (x, y).
std::optional<std::size_t> locate(const BevGrid& grid, double x, double y);

}  // namespace bevx
