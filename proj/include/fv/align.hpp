// fusionvision - RGB-D object isolation and 3D box extraction
// SPDX-License-Identifier: Apache-2.0

#ifndef FV_ALIGN_HPP
#define FV_ALIGN_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "fv/core.hpp"

namespace fv {

/// Lifts pixel (u, v) with optical-axis depth z to camera coordinates.
inline Vec3 backproject(double u, double v, double z, const CameraIntrinsics& k) {
  if (!(z > 0.0)) {
    throw InvalidDepthError("backproject: depth must be > 0");
  }
  return {(u - k.cx()) * z / k.fx(), (v - k.cy()) * z / k.fy(), z};
}

/// Continuous pixel coordinates of a camera-space point.
inline Vec2 project(const Vec3& p, const CameraIntrinsics& k) {
  if (!(p.z() > 0.0)) {
    throw BehindCameraError("project: point is not in front of the camera");
  }
  return {k.fx() * p.x() / p.z() + k.cx(), k.fy() * p.y() / p.z() + k.cy()};
}

namespace detail {

// Half-pixel ties round up. Floating error in the back-project / transform /
// project chain is ~1e-13 px, so a value meant to be an exact half (for
// example a 12.5 px disparity) may land a hair below it; the slack keeps
// such ties on the same side for every pixel.
inline constexpr double kRoundingSlack = 1e-9;

inline long nearest_pixel(double x) {
  return static_cast<long>(std::floor(x + 0.5 + kRoundingSlack));
}

inline std::optional<std::uint16_t> quantize_depth(double z, double scale) {
  const double units = std::round(z / scale);
  if (!(units >= 1.0) || units > std::numeric_limits<std::uint16_t>::max()) {
    return std::nullopt;
  }
  return static_cast<std::uint16_t>(units);
}

}  // namespace detail

/// Re-renders a depth frame into the color camera.
///
/// Every valid depth pixel is lifted with `depth_k`, moved by `depth_to_color`
/// and splatted to the nearest color pixel. When several source pixels land
/// on the same target the smallest z wins, so the result does not depend on
/// iteration order. Targets that receive nothing stay invalid; no hole
/// filling is performed.
inline DepthFrame align_depth_to_color(const DepthFrame& depth,
                                       const CameraIntrinsics& depth_k,
                                       const CameraIntrinsics& color_k,
                                       const RigidTransform& depth_to_color) {
  if (depth.width() != depth_k.width() || depth.height() != depth_k.height()) {
    throw ShapeError("align: depth frame size does not match depth intrinsics");
  }
  const int out_w = color_k.width();
  const int out_h = color_k.height();
  constexpr double kEmpty = std::numeric_limits<double>::infinity();
  std::vector<double> zbuf(static_cast<std::size_t>(out_w) * out_h, kEmpty);

  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      if (!depth.valid(u, v)) continue;
      const Vec3 p = depth_to_color * backproject(u, v, depth.meters(u, v), depth_k);
      if (!(p.z() > 0.0)) continue;
      const Vec2 uv = project(p, color_k);
      const long tu = detail::nearest_pixel(uv.x());
      const long tv = detail::nearest_pixel(uv.y());
      if (tu < 0 || tv < 0 || tu >= out_w || tv >= out_h) continue;
      double& slot = zbuf[static_cast<std::size_t>(tv) * out_w + tu];
      if (p.z() < slot) slot = p.z();
    }
  }

  std::vector<std::uint16_t> out(zbuf.size(), 0);
  for (std::size_t i = 0; i < zbuf.size(); ++i) {
    if (zbuf[i] == kEmpty) continue;
    if (auto q = detail::quantize_depth(zbuf[i], depth.depth_scale())) out[i] = *q;
  }
  return DepthFrame(out_w, out_h, std::move(out), depth.depth_scale());
}

/// Restricts a color-domain mask to pixels that carry aligned depth.
inline BinaryMask align_mask_to_depth_domain(const BinaryMask& mask,
                                             const DepthFrame& aligned_depth) {
  if (!mask.same_shape(aligned_depth.width(), aligned_depth.height())) {
    throw ShapeError("mask and aligned depth differ in size");
  }
  std::vector<std::uint8_t> bits(mask.size());
  const auto& depth = aligned_depth.data();
  for (std::size_t i = 0; i < bits.size(); ++i) {
    bits[i] = (mask[i] && depth[i] != 0) ? 1 : 0;
  }
  return BinaryMask(mask.width(), mask.height(), std::move(bits));
}

}  // namespace fv

#endif  // FV_ALIGN_HPP
