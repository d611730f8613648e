// fusionvision - RGB-D object isolation and 3D box extraction
// SPDX-License-Identifier: Apache-2.0

#ifndef FV_SYNTH_BUNDLE_HPP
#define FV_SYNTH_BUNDLE_HPP

#include <algorithm>
#include <climits>
#include <optional>
#include <vector>

#include "fv/io/bundle.hpp"
#include "fv/io/documents.hpp"
#include "fv/synth.hpp"

namespace fv::synth {

struct SyntheticCapture {
  io::FrameBundle bundle;
  std::vector<io::BoxRecord> gt_boxes;  // bounded primitives that are visible
  std::vector<std::size_t> primitive_of_detection;
};

/// Tight pixel rectangle [x1, x2) x [y1, y2) around the set bits.
inline std::optional<PixelBox> mask_bounds(const BinaryMask& m) {
  int x1 = INT_MAX, y1 = INT_MAX, x2 = -1, y2 = -1;
  for (int v = 0; v < m.height(); ++v) {
    for (int u = 0; u < m.width(); ++u) {
      if (!m.at(u, v)) continue;
      x1 = std::min(x1, u);
      y1 = std::min(y1, v);
      x2 = std::max(x2, u);
      y2 = std::max(y2, v);
    }
  }
  if (x2 < 0) return std::nullopt;
  return PixelBox{double(x1), double(y1), double(x2 + 1), double(y2 + 1)};
}

/// Scene coordinates are the color camera frame. The color view provides
/// masks and detections (a perfect detector/segmenter, confidence 1); the
/// depth camera sees the scene through `depth_to_color`, and noise is applied
/// to its frame only.
inline SyntheticCapture synthesize(const SceneSpec& scene, const io::Calibration& calib,
                                   const NoiseSpec& noise = {}) {
  const auto& kc = calib.color;
  const Render color_view = render(scene, kc, calib.depth_scale);
  DepthFrame depth =
      render(scene, calib.depth, calib.depth_scale, calib.depth_to_color).depth;
  depth = inject_noise(depth, noise);

  SyntheticCapture out{io::FrameBundle{render_color(scene, color_view.ids, kc.width(), kc.height()),
                                       std::move(depth), kc, calib.depth, calib.depth_to_color,
                                       {}, {}},
                       {}, {}};
  for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
    const auto& prim = scene.primitives[i];
    BinaryMask mask = mask_from_ids(color_view.ids, kc.width(), kc.height(), static_cast<int>(i));
    const auto bounds = mask_bounds(mask);
    if (!bounds) continue;
    if (!std::holds_alternative<Plane>(prim.shape)) {
      out.gt_boxes.push_back({prim.label, prim.class_id, ground_truth_aabb(prim), mask.count()});
    }
    out.bundle.detections.emplace_back(prim.class_id, prim.label, 1.0, *bounds);
    out.bundle.masks.push_back(std::move(mask));
    out.primitive_of_detection.push_back(i);
  }
  return out;
}

}  // namespace fv::synth

#endif  // FV_SYNTH_BUNDLE_HPP
