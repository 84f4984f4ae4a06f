// Random scene generators and brute-force oracles shared by the unit and
// acceptance suites. Nothing here calls into the transform kernels under
// test; the oracles work from geometry and plain loops only.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "bevx/geometry.hpp"
#include "bevx/scene.hpp"
#include "bevx/sparse.hpp"
#include "bevx/tensor.hpp"

namespace bevx::testing {

using Rng = std::mt19937_64;

inline Tensor random_tensor(Shape shape, Rng& rng, float lo = -1.0f, float hi = 1.0f) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<float> dist(lo, hi);
  for (float& v : t.data()) v = dist(rng);
  return t;
}

// Rows of a rank-2 tensor normalized to the probability simplex (softmax).
inline Tensor random_simplex_rows(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor t({rows, cols});
  std::normal_distribution<double> normal(0.0, 1.5);
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<double> e(cols);
    double sum = 0.0;
    for (auto& v : e) {
      v = std::exp(normal(rng));
      sum += v;
    }
    for (std::size_t c = 0; c < cols; ++c) t[r * cols + c] = float(e[c] / sum);
  }
  return t;
}

inline SparseBinaryMatrix random_sparse(std::size_t rows, std::size_t cols, double density, Rng& rng) {
  std::bernoulli_distribution keep(density);
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (keep(rng)) coords.emplace_back(r, c);
  return SparseBinaryMatrix::from_coordinates(rows, cols, std::move(coords));
}

inline Mat3 rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {c, 0, s, 0, 1, 0, -s, 0, c};
}

struct RigSpec {
  std::size_t cameras = 6;
  std::size_t feature_width = 8;
  std::size_t feature_height = 4;
  double image_stride = 16.0;
  double max_pitch_deg = 5.0;
  double max_offset_m = 2.0;
};

// Cameras spread around the ego vehicle with jittered yaw, small pitch,
// random focal length and principal point.
inline CameraRig random_rig(const RigSpec& spec, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double width_px = double(spec.feature_width) * spec.image_stride;
  const double height_px = double(spec.feature_height) * spec.image_stride;
  std::vector<Camera> cams;
  for (std::size_t n = 0; n < spec.cameras; ++n) {
    const double yaw = 2.0 * std::numbers::pi * (double(n) + 0.3 * (unit(rng) - 0.5)) /
                       double(spec.cameras);
    const double pitch = (2.0 * unit(rng) - 1.0) * spec.max_pitch_deg * std::numbers::pi / 180.0;
    const double f = width_px * (0.6 + 0.6 * unit(rng));
    Camera cam;
    cam.intrinsics = {f, 0, width_px * (0.45 + 0.1 * unit(rng)), 0, f,
                      height_px * (0.45 + 0.1 * unit(rng)), 0, 0, 1};
    cam.rotation = mul(forward_mount(yaw), rot_y(pitch));
    cam.translation = {(2 * unit(rng) - 1) * spec.max_offset_m, (2 * unit(rng) - 1) * spec.max_offset_m,
                       1.5};
    cams.push_back(cam);
  }
  return CameraRig(std::move(cams), spec.feature_width, spec.feature_height, spec.image_stride);
}

inline Scene make_scene(CameraRig rig, DepthConfig depth, BevConfig bev, std::size_t channels = 8) {
  return Scene{std::move(rig), depth, bev, std::nullopt, channels};
}

// Single forward-facing camera at the origin with one column on the optical
// axis: its ground ray is the +x axis.
inline Scene single_ray_scene(std::size_t bins = 8, double d_max = 8.0, double extent = 8.0,
                              std::size_t cells = 16) {
  Camera cam{{1, 0, 0.5, 0, 1, 0.5, 0, 0, 1}, forward_mount(0.0), {0, 0, 0}};
  return make_scene(CameraRig({cam}, 1, 1, 1.0), {0.0, d_max, bins}, {extent, cells, cells}, 4);
}

// ---- oracles -------------------------------------------------------------

inline Tensor matmul_oracle(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += double(a[i * k + p]) * double(b[p * n + j]);
      out[i * n + j] = float(acc);
    }
  return out;
}

// Exhaustive scan over every cell rectangle.
inline std::optional<std::size_t> locate_scan(const BevGrid& grid, double x, double y) {
  std::optional<std::size_t> hit;
  for (std::size_t s = 0; s < grid.cell_count(); ++s) {
    const CellRect r = grid.rect(s);
    if (x >= r.x0 && x < r.x1 && y >= r.y0 && y < r.y1) {
      if (hit) return std::nullopt;  // overlap would break the partition
      hit = s;
    }
  }
  return hit;
}

inline bool in_cell(const FrustumGeometry& f, std::size_t i, const CellRect& r) {
  if (!f.in_front(i)) return false;
  auto [x, y] = f.point(i);
  return x >= r.x0 && x < r.x1 && y >= r.y0 && y < r.y1;
}

struct DenseRingRay {
  Tensor ring;  // S x N_d
  Tensor ray;   // S x W
};

// Literal generation loop: for every cell, every (camera, column, bin).
inline DenseRingRay ring_ray_oracle(const FrustumGeometry& f, const BevGrid& grid) {
  const std::size_t S = grid.cell_count(), nd = f.depth_bins(), W = f.rays();
  DenseRingRay out{Tensor({S, nd}), Tensor({S, W})};
  for (std::size_t hb = 0; hb < grid.h_cells(); ++hb)
    for (std::size_t wb = 0; wb < grid.w_cells(); ++wb) {
      const std::size_t s = hb * grid.w_cells() + wb;
      const CellRect r = grid.rect(s);
      for (std::size_t n = 0; n < f.cameras(); ++n)
        for (std::size_t wi = 0; wi < f.columns(); ++wi)
          for (std::size_t d = 0; d < nd; ++d)
            if (in_cell(f, f.index(n, wi, d), r)) {
              out.ring[s * nd + d] = 1.0f;
              out.ray[s * W + n * f.columns() + wi] = 1.0f;
            }
    }
  return out;
}

// Dense S x (W * N_d) membership matrix.
inline Tensor ftm_oracle(const FrustumGeometry& f, const BevGrid& grid) {
  const std::size_t S = grid.cell_count(), P = f.point_count();
  Tensor out({S, P});
  for (std::size_t s = 0; s < S; ++s) {
    const CellRect r = grid.rect(s);
    for (std::size_t i = 0; i < P; ++i)
      if (in_cell(f, i, r)) out[s * P + i] = 1.0f;
  }
  return out;
}

// Per-point sequential accumulation in double precision.
inline Tensor splat_oracle(const Tensor& lifted, const FrustumGeometry& f, const BevGrid& grid) {
  const std::size_t c = lifted.dim(2), S = grid.cell_count();
  std::vector<double> acc(S * c, 0.0);
  for (std::size_t i = 0; i < f.point_count(); ++i) {
    if (!f.in_front(i)) continue;
    auto [x, y] = f.point(i);
    auto cell = locate_scan(grid, x, y);
    if (!cell) continue;
    for (std::size_t j = 0; j < c; ++j) acc[*cell * c + j] += lifted[i * c + j];
  }
  Tensor out({S, c});
  for (std::size_t k = 0; k < acc.size(); ++k) out[k] = float(acc[k]);
  return out;
}

inline Tensor lift_oracle(const Tensor& features, const Tensor& depths) {
  const std::size_t W = features.dim(0), C = features.dim(1), nd = depths.dim(1);
  Tensor out({W, nd, C});
  for (std::size_t w = 0; w < W; ++w)
    for (std::size_t d = 0; d < nd; ++d)
      for (std::size_t c = 0; c < C; ++c) out[(w * nd + d) * C + c] = depths[w * nd + d] * features[w * C + c];
  return out;
}

}  // namespace bevx::testing
