// fusionvision - RGB-D object isolation and 3D box extraction
// SPDX-License-Identifier: Apache-2.0

// A frame bundle is the recorded input of one capture:
//
//   <dir>/calib.json        fv-calib/1
//   <dir>/depth.png         16-bit depth in units of depth_scale
//   <dir>/color.png         optional 8-bit RGB
//   <dir>/detections.json   optional fv-det/1 (absent = no detections)
//   <dir>/masks/mask_NNN.png or mask_NNN.json (fv-rle/1), one per detection,
//                           in the color camera's pixel grid

#ifndef FV_IO_BUNDLE_HPP
#define FV_IO_BUNDLE_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "fv/core.hpp"
#include "fv/io/documents.hpp"
#include "fv/io/png.hpp"

namespace fv::io {

class IoError : public Error {
 public:
  using Error::Error;
};

namespace fs = std::filesystem;

inline Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline std::string read_text(const fs::path& path) {
  const Bytes b = read_file(path);
  return std::string(b.begin(), b.end());
}

inline void write_file(const fs::path& path, const Bytes& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

inline void write_text(const fs::path& path, const std::string& text) {
  write_file(path, Bytes(text.begin(), text.end()));
}

struct FrameBundle {
  std::optional<ColorFrame> color;
  DepthFrame depth;
  CameraIntrinsics intrinsics_color;
  CameraIntrinsics intrinsics_depth;
  RigidTransform extrinsics;  // depth -> color
  std::vector<Detection2D> detections;
  std::vector<BinaryMask> masks;  // parallel to detections

  Calibration calibration() const {
    return {intrinsics_color, intrinsics_depth, depth.depth_scale(), extrinsics};
  }

  void validate() const {
    if (depth.width() != intrinsics_depth.width() || depth.height() != intrinsics_depth.height()) {
      throw ShapeError("bundle: depth frame size does not match depth intrinsics");
    }
    if (color && (color->width() != intrinsics_color.width() ||
                  color->height() != intrinsics_color.height())) {
      throw ShapeError("bundle: color frame size does not match color intrinsics");
    }
    if (masks.size() != detections.size()) {
      throw ShapeError("bundle: " + std::to_string(masks.size()) + " masks for " +
                       std::to_string(detections.size()) + " detections");
    }
    for (std::size_t i = 0; i < masks.size(); ++i) {
      if (!masks[i].same_shape(intrinsics_color.width(), intrinsics_color.height())) {
        throw ShapeError("bundle: mask " + std::to_string(i) +
                         " does not match the color frame size");
      }
    }
  }
};

inline std::string mask_stem(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "mask_%03zu", i);
  return buf;
}

inline bool is_bundle_dir(const fs::path& dir) {
  return fs::is_regular_file(dir / "calib.json") && fs::is_regular_file(dir / "depth.png");
}

inline FrameBundle load_bundle(const fs::path& dir) {
  const Calibration calib = parse_calibration(read_text(dir / "calib.json"));
  DepthFrame depth = load_depth_png(read_file(dir / "depth.png"), calib.depth_scale);
  std::optional<ColorFrame> color;
  if (fs::exists(dir / "color.png")) color = load_color_png(read_file(dir / "color.png"));
  const std::pair<int, int> color_size{calib.color.width(), calib.color.height()};
  std::vector<Detection2D> dets;
  if (fs::exists(dir / "detections.json")) {
    dets = parse_detections(read_text(dir / "detections.json"), color_size);
  }
  std::vector<BinaryMask> masks;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const fs::path png = dir / "masks" / (mask_stem(i) + ".png");
    const fs::path rle = dir / "masks" / (mask_stem(i) + ".json");
    if (fs::exists(png)) {
      masks.push_back(load_mask(read_file(png), color_size));
    } else if (fs::exists(rle)) {
      masks.push_back(rle_decode(read_text(rle), color_size));
    } else {
      throw IoError("bundle: missing mask for detection " + std::to_string(i) + " (" +
                    png.string() + ")");
    }
  }
  FrameBundle b{std::move(color), std::move(depth), calib.color, calib.depth,
                calib.depth_to_color, std::move(dets), std::move(masks)};
  b.validate();
  return b;
}

inline void save_bundle(const FrameBundle& b, const fs::path& dir, bool rle_masks = false) {
  b.validate();
  fs::create_directories(dir / "masks");
  write_text(dir / "calib.json", write_calibration(b.calibration()));
  write_file(dir / "depth.png", save_depth_png(b.depth));
  if (b.color) write_file(dir / "color.png", save_color_png(*b.color));
  write_text(dir / "detections.json", write_detections(b.detections));
  for (std::size_t i = 0; i < b.masks.size(); ++i) {
    if (rle_masks) {
      write_text(dir / "masks" / (mask_stem(i) + ".json"), rle_encode(b.masks[i]));
    } else {
      write_file(dir / "masks" / (mask_stem(i) + ".png"), save_mask_png(b.masks[i]));
    }
  }
}

}  // namespace fv::io

#endif  // FV_IO_BUNDLE_HPP
