#include "bevx/geometry.hpp"

#include <cmath>

#include "bevx/error.hpp"

namespace bevx {

Vec3 mul(const Mat3& m, const Vec3& v) {
  return {m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
          m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
          m[6] * v[0] + m[7] * v[1] + m[8] * v[2]};
}

Mat3 mul(const Mat3& a, const Mat3& b) {
  Mat3 out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) out[i * 3 + j] += a[i * 3 + k] * b[k * 3 + j];
  return out;
}

Mat3 transpose(const Mat3& m) {
  return {m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]};
}

double determinant(const Mat3& m) {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

Mat3 inverse(const Mat3& m) {
  double det = determinant(m);
  if (std::abs(det) < 1e-12) throw GeometryError("singular 3x3 matrix");
  double inv = 1.0 / det;
  return {(m[4] * m[8] - m[5] * m[7]) * inv, (m[2] * m[7] - m[1] * m[8]) * inv,
          (m[1] * m[5] - m[2] * m[4]) * inv, (m[5] * m[6] - m[3] * m[8]) * inv,
          (m[0] * m[8] - m[2] * m[6]) * inv, (m[2] * m[3] - m[0] * m[5]) * inv,
          (m[3] * m[7] - m[4] * m[6]) * inv, (m[1] * m[6] - m[0] * m[7]) * inv,
          (m[0] * m[4] - m[1] * m[3]) * inv};
}

Mat3 forward_mount(double yaw) {
  const Mat3 base{0, 0, 1, -1, 0, 0, 0, -1, 0};
  const double c = std::cos(yaw), s = std::sin(yaw);
  const Mat3 rz{c, -s, 0, s, c, 0, 0, 0, 1};
  return mul(rz, base);
}

namespace {

void validate_camera(const Camera& cam, std::size_t i) {
  const auto& k = cam.intrinsics;
  const std::string where = "camera " + std::to_string(i) + ": ";
  if (!(k[0] > 0.0) || !(k[4] > 0.0)) throw GeometryError(where + "focal lengths must be positive");
  if (k[3] != 0.0 || k[6] != 0.0 || k[7] != 0.0 || k[8] != 1.0) {
    throw GeometryError(where + "intrinsics must have the form [[fx,s,cx],[0,fy,cy],[0,0,1]]");
  }
  const Mat3 rtr = mul(transpose(cam.rotation), cam.rotation);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      double expected = r == c ? 1.0 : 0.0;
      if (std::abs(rtr[r * 3 + c] - expected) > 1e-6) {
        throw GeometryError(where + "rotation is not orthonormal");
      }
    }
  }
  for (double v : cam.translation) {
    if (!std::isfinite(v)) throw GeometryError(where + "non-finite translation");
  }
}

}  // namespace

CameraRig::CameraRig(std::vector<Camera> cameras, std::size_t feature_width,
                     std::size_t feature_height, double image_stride)
    : cameras_(std::move(cameras)),
      feature_width_(feature_width),
      feature_height_(feature_height),
      image_stride_(image_stride) {
  if (cameras_.empty()) throw GeometryError("rig has no cameras");
  if (feature_width_ == 0 || feature_height_ == 0) throw GeometryError("feature grid must be non-empty");
  if (!(image_stride_ > 0.0)) throw GeometryError("image_stride must be positive");
  for (std::size_t i = 0; i < cameras_.size(); ++i) validate_camera(cameras_[i], i);
}

CameraRig CameraRig::resampled(std::size_t feature_width, std::size_t feature_height) const {
  if (feature_width == 0 || feature_height == 0) throw GeometryError("feature grid must be non-empty");
  double stride = image_stride_ * double(feature_width_) / double(feature_width);
  return CameraRig(cameras_, feature_width, feature_height, stride);
}

DepthBins make_depth_bins(double d_min, double d_max, std::size_t n) {
  if (n == 0) throw ValidationError("depth bin count must be positive");
  if (!(d_min < d_max)) {
    throw ValidationError("depth range must satisfy d_min < d_max, got [" +
                          std::to_string(d_min) + ", " + std::to_string(d_max) + "]");
  }
  DepthBins bins{d_min, d_max, std::vector<double>(n)};
  const double step = (d_max - d_min) / double(n);
  for (std::size_t i = 0; i < n; ++i) bins.centers[i] = d_min + (double(i) + 0.5) * step;
  return bins;
}

FrustumGeometry::FrustumGeometry(std::size_t cameras, std::size_t columns,
                                 std::vector<double> depths)
    : cameras_(cameras), columns_(columns), depths_(std::move(depths)) {
  if (cameras_ == 0 || columns_ == 0 || depths_.empty()) {
    throw DimensionError("frustum extents must be positive");
  }
  xy_.assign(point_count() * 2, 0.0);
}

FrustumGeometry generate_frustum(const CameraRig& rig, const DepthBins& bins,
                                 std::size_t reference_row) {
  if (reference_row >= rig.feature_height()) {
    throw GeometryError("reference_row " + std::to_string(reference_row) +
                        " outside feature height " + std::to_string(rig.feature_height()));
  }
  FrustumGeometry out(rig.camera_count(), rig.feature_width(), bins.centers);
  const double stride = rig.image_stride();
  const double v = (double(reference_row) + 0.5) * stride;
  for (std::size_t n = 0; n < rig.camera_count(); ++n) {
    const Camera& cam = rig.cameras()[n];
    const Mat3 kinv = inverse(cam.intrinsics);
    for (std::size_t w = 0; w < rig.feature_width(); ++w) {
      const double u = (double(w) + 0.5) * stride;
      const Vec3 ray = mul(kinv, Vec3{u, v, 1.0});
      // Ego-frame direction of a unit-forward-depth step.
      const Vec3 dir = mul(cam.rotation, Vec3{ray[0] / ray[2], ray[1] / ray[2], 1.0});
      for (std::size_t d = 0; d < bins.count(); ++d) {
        const double z = bins.centers[d];
        out.set_point(out.index(n, w, d), cam.translation[0] + z * dir[0],
                      cam.translation[1] + z * dir[1]);
      }
    }
  }
  return out;
}

std::array<double, 2> project(const Camera& cam, const Vec3& ego_point) {
  const Vec3 rel{ego_point[0] - cam.translation[0], ego_point[1] - cam.translation[1],
                 ego_point[2] - cam.translation[2]};
  const Vec3 pc = mul(transpose(cam.rotation), rel);
  const Vec3 px = mul(cam.intrinsics, pc);
  return {px[0] / px[2], px[1] / px[2]};
}

BevGrid::BevGrid(std::size_t h_cells, std::size_t w_cells, double x_min, double y_min,
                 double cell_size)
    : h_cells_(h_cells), w_cells_(w_cells), x_min_(x_min), y_min_(y_min), cell_size_(cell_size) {
  if (h_cells_ == 0 || w_cells_ == 0) throw ValidationError("BEV grid needs at least one cell per axis");
  if (!(cell_size_ > 0.0) || !std::isfinite(cell_size_)) throw ValidationError("cell_size must be positive");
}

CellRect BevGrid::rect(std::size_t cell) const {
  if (cell >= cell_count()) throw IndexError("cell " + std::to_string(cell) + " out of range");
  const std::size_t h = cell / w_cells_, w = cell % w_cells_;
  return {x_edge(w), y_edge(h), x_edge(w + 1), y_edge(h + 1)};
}

BevGrid make_bev_grid(double extent, std::size_t h_cells, std::size_t w_cells) {
  if (!(extent > 0.0)) throw ValidationError("BEV extent must be positive");
  if (h_cells == 0 || w_cells == 0) throw ValidationError("BEV grid needs at least one cell per axis");
  const double cell = 2.0 * extent / double(w_cells);
  return BevGrid(h_cells, w_cells, -extent, -0.5 * cell * double(h_cells), cell);
}

namespace {

// Index i with edge(i) <= v < edge(i+1), using the same edge formula as
// BevGrid::rect so boundary ties resolve identically.
template <class Edge>
std::optional<std::size_t> locate_axis(double v, std::size_t cells, double origin, double cell,
                                       Edge edge) {
  if (!(v >= edge(0)) || !(v < edge(cells))) return std::nullopt;
  double guess = std::floor((v - origin) / cell);
  std::size_t i = guess < 0 ? 0 : std::min<std::size_t>(cells - 1, std::size_t(guess));
  while (i > 0 && v < edge(i)) --i;
  while (i + 1 < cells && v >= edge(i + 1)) ++i;
  return i;
}

}  // namespace

std::optional<std::size_t> locate(const BevGrid& grid, double x, double y) {
  auto w = locate_axis(x, grid.w_cells(), grid.x_min(), grid.cell_size(),
                       [&](std::size_t i) { return grid.x_edge(i); });
  if (!w) return std::nullopt;
  auto h = locate_axis(y, grid.h_cells(), grid.y_min(), grid.cell_size(),
                       [&](std::size_t i) { return grid.y_edge(i); });
  if (!h) return std::nullopt;
  return *h * grid.w_cells() + *w;
}

}  // namespace bevx
