// fusionvision - RGB-D object isolation and 3D box extraction
// SPDX-License-Identifier: Apache-2.0

#ifndef FV_CLOUD_HPP
#define FV_CLOUD_HPP

#include <optional>
#include <string>
#include <vector>

#include "fv/align.hpp"
#include "fv/cloudproc.hpp"
#include "fv/core.hpp"

namespace fv {

/// One point per pixel that has valid depth and (if given) a set mask bit,
/// in row-major pixel order.
inline PointCloud depth_to_cloud(const DepthFrame& depth, const CameraIntrinsics& k,
                                 const BinaryMask* mask = nullptr,
                                 const ColorFrame* color = nullptr) {
  const int w = depth.width();
  const int h = depth.height();
  if (k.width() != w || k.height() != h) {
    throw ShapeError("depth_to_cloud: intrinsics do not match depth frame size");
  }
  if (mask && !mask->same_shape(w, h)) {
    throw ShapeError("depth_to_cloud: mask does not match depth frame size");
  }
  if (color && (color->width() != w || color->height() != h)) {
    throw ShapeError("depth_to_cloud: color frame does not match depth frame size");
  }

  std::vector<Vec3> points;
  std::vector<Rgb> colors;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (!depth.valid(u, v)) continue;
      if (mask && !mask->at(u, v)) continue;
      points.push_back(backproject(u, v, depth.meters(u, v), k));
      if (color) colors.push_back(color->at(u, v));
    }
  }
  if (color) return PointCloud(std::move(points), std::move(colors));
  return PointCloud(std::move(points));
}

inline PointCloud depth_to_cloud(const DepthFrame& depth, const CameraIntrinsics& k,
                                 const std::optional<BinaryMask>& mask,
                                 const std::optional<ColorFrame>& color) {
  return depth_to_cloud(depth, k, mask ? &*mask : nullptr, color ? &*color : nullptr);
}

struct ExtractOptions {
  /// Objects whose cloud has fewer points are dropped with a warning.
  std::size_t min_points = 1;
};

/// Builds one labeled cloud per detection from its (already depth-restricted)
/// mask. Boxes are fitted to the raw object clouds.
inline std::vector<LabeledCloud> extract_objects(
    const DepthFrame& aligned_depth, const CameraIntrinsics& color_k,
    const std::vector<Detection2D>& detections, const std::vector<BinaryMask>& masks,
    const ColorFrame* color = nullptr, const ExtractOptions& options = {},
    std::vector<std::string>* warnings = nullptr) {
  if (detections.size() != masks.size()) {
    throw ShapeError("extract_objects: detections and masks differ in length");
  }
  const std::size_t min_points = std::max<std::size_t>(options.min_points, 1);
  std::vector<LabeledCloud> objects;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    PointCloud cloud = depth_to_cloud(aligned_depth, color_k, &masks[i], color);
    const auto& det = detections[i];
    if (cloud.size() < min_points) {
      if (warnings) {
        warnings->push_back("object " + std::to_string(i) + " (" + det.label() +
                            ") has " + std::to_string(cloud.size()) +
                            " points, below min_points=" + std::to_string(min_points) +
                            "; skipped");
      }
      continue;
    }
    Aabb3 box = compute_aabb(cloud);
    objects.emplace_back(det.label(), det.class_id(), std::move(cloud), box);
  }
  return objects;
}

}  // namespace fv

#endif  // FV_CLOUD_HPP
