// fusionvision - RGB-D object isolation and 3D box extraction
// SPDX-License-Identifier: Apache-2.0

// Structured-text documents exchanged with detectors, segmenters and
// downstream consumers. Every document carries a versioned "schema" tag.
//
//   fv-calib/1  camera intrinsics, depth scale, depth->color extrinsics
//   fv-det/1    2D detections
//   fv-rle/1    run-length encoded binary mask
//   fv-box/1    per-object 3D boxes
//   fv-scene/1  synthetic scene description
//   fv-noise/1  synthetic depth noise

#ifndef FV_IO_DOCUMENTS_HPP
#define FV_IO_DOCUMENTS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fv/core.hpp"
#include "fv/synth.hpp"

namespace fv::io {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kCalibSchema = "fv-calib/1";
inline constexpr std::string_view kDetSchema = "fv-det/1";
inline constexpr std::string_view kRleSchema = "fv-rle/1";
inline constexpr std::string_view kBoxSchema = "fv-box/1";
inline constexpr std::string_view kSceneSchema = "fv-scene/1";
inline constexpr std::string_view kNoiseSchema = "fv-noise/1";

namespace detail {

/// Field access that reports the dotted path of whatever is wrong.
class Reader {
 public:
  explicit Reader(std::string doc) : doc_(std::move(doc)) {}

  Json parse(std::string_view text) const {
    try {
      return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(doc_ + ": malformed document: " + e.what());
    }
  }

  void schema(const Json& j, std::string_view expected) const {
    if (!j.is_object()) fail("", "expected an object");
    const auto& s = field(j, "schema", "schema");
    if (!s.is_string() || s.get<std::string>() != expected) {
      fail("schema", "expected \"" + std::string(expected) + "\"");
    }
  }

  const Json& field(const Json& obj, const char* key, const std::string& path) const {
    if (!obj.is_object()) fail(parent(path), "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path, "missing");
    return *it;
  }

  bool has(const Json& obj, const char* key) const {
    return obj.is_object() && obj.contains(key);
  }

  double number(const Json& obj, const char* key, const std::string& path) const {
    const auto& v = field(obj, key, path);
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  std::int64_t integer(const Json& obj, const char* key, const std::string& path) const {
    const auto& v = field(obj, key, path);
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<std::int64_t>();
  }

  int int32(const Json& obj, const char* key, const std::string& path) const {
    const auto v = integer(obj, key, path);
    if (v < INT32_MIN || v > INT32_MAX) fail(path, "integer out of range");
    return static_cast<int>(v);
  }

  std::string string(const Json& obj, const char* key, const std::string& path) const {
    const auto& v = field(obj, key, path);
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const Json& obj, const char* key, const std::string& path) const {
    const auto& v = field(obj, key, path);
    if (!v.is_boolean()) fail(path, "expected true or false");
    return v.get<bool>();
  }

  const Json& array(const Json& obj, const char* key, const std::string& path,
                    std::optional<std::size_t> length = std::nullopt) const {
    const auto& v = field(obj, key, path);
    if (!v.is_array()) fail(path, "expected an array");
    if (length && v.size() != *length) {
      fail(path, "expected " + std::to_string(*length) + " elements");
    }
    return v;
  }

  std::vector<double> numbers(const Json& obj, const char* key, const std::string& path,
                              std::size_t length) const {
    const auto& arr = array(obj, key, path, length);
    std::vector<double> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_number()) fail(path + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(arr[i].get<double>());
    }
    return out;
  }

  Vec3 vec3(const Json& obj, const char* key, const std::string& path) const {
    const auto v = numbers(obj, key, path, 3);
    return {v[0], v[1], v[2]};
  }

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw ParseError(doc_ + ": field '" + (path.empty() ? "<root>" : path) + "': " + what);
  }

 private:
  static std::string parent(const std::string& path) {
    const auto dot = path.rfind('.');
    return dot == std::string::npos ? std::string() : path.substr(0, dot);
  }

  std::string doc_;
};

inline Json vec3_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Calibration

struct Calibration {
  CameraIntrinsics color;
  CameraIntrinsics depth;
  double depth_scale = DepthFrame::kDefaultScale;
  /// Maps depth-camera coordinates into color-camera coordinates.
  RigidTransform depth_to_color;
};

namespace detail {

inline CameraIntrinsics intrinsics_from(const Reader& r, const Json& j, const std::string& path) {
  return CameraIntrinsics(r.number(j, "fx", path + ".fx"), r.number(j, "fy", path + ".fy"),
                          r.number(j, "cx", path + ".cx"), r.number(j, "cy", path + ".cy"),
                          r.int32(j, "width", path + ".width"),
                          r.int32(j, "height", path + ".height"));
}

inline Json intrinsics_json(const CameraIntrinsics& k) {
  Json j;
  j["fx"] = k.fx();
  j["fy"] = k.fy();
  j["cx"] = k.cx();
  j["cy"] = k.cy();
  j["width"] = k.width();
  j["height"] = k.height();
  return j;
}

}  // namespace detail

inline Calibration parse_calibration(std::string_view text) {
  const detail::Reader r("calibration");
  const Json j = r.parse(text);
  r.schema(j, kCalibSchema);
  auto color = detail::intrinsics_from(r, r.field(j, "color", "color"), "color");
  auto depth = detail::intrinsics_from(r, r.field(j, "depth", "depth"), "depth");
  double scale = DepthFrame::kDefaultScale;
  if (r.has(j, "depth_scale")) {
    scale = r.number(j, "depth_scale", "depth_scale");
    if (!(scale > 0.0)) throw ValidationError("calibration: depth_scale must be > 0");
  }
  const auto& ext = r.field(j, "extrinsics", "extrinsics");
  const auto rot = r.numbers(ext, "rotation", "extrinsics.rotation", 9);
  const Vec3 t = r.vec3(ext, "translation", "extrinsics.translation");
  Mat3 rm;
  rm << rot[0], rot[1], rot[2], rot[3], rot[4], rot[5], rot[6], rot[7], rot[8];
  return {color, depth, scale, RigidTransform(rm, t)};
}

inline std::string write_calibration(const Calibration& c) {
  Json j;
  j["schema"] = kCalibSchema;
  j["color"] = detail::intrinsics_json(c.color);
  j["depth"] = detail::intrinsics_json(c.depth);
  j["depth_scale"] = c.depth_scale;
  Json rot = Json::array();
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) rot.push_back(c.depth_to_color.rotation()(row, col));
  }
  j["extrinsics"]["rotation"] = rot;
  j["extrinsics"]["translation"] = detail::vec3_json(c.depth_to_color.translation());
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Detections

/// Parses a detection list. When a frame size is given, boxes are clamped to
/// it before validation.
inline std::vector<Detection2D> parse_detections(
    std::string_view text, std::optional<std::pair<int, int>> frame_size = std::nullopt) {
  const detail::Reader r("detections");
  const Json j = r.parse(text);
  r.schema(j, kDetSchema);
  const auto& arr = r.array(j, "detections", "detections");
  std::vector<Detection2D> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = "detections[" + std::to_string(i) + "]";
    const auto& d = arr[i];
    const auto b = r.numbers(d, "box", path + ".box", 4);
    std::string label = r.has(d, "label") ? r.string(d, "label", path + ".label") : "";
    const double conf = r.number(d, "confidence", path + ".confidence");
    if (!(conf >= 0.0 && conf <= 1.0)) {
      throw ValidationError("detections: " + path + ".confidence outside [0, 1]");
    }
    PixelBox box{b[0], b[1], b[2], b[3]};
    if (!(box.x1 < box.x2 && box.y1 < box.y2)) {
      throw ValidationError("detections: " + path + ".box requires x1 < x2 and y1 < y2");
    }
    Detection2D det(r.int32(d, "class_id", path + ".class_id"), std::move(label), conf, box);
    if (frame_size) det = det.clamped(frame_size->first, frame_size->second);
    out.push_back(std::move(det));
  }
  return out;
}

inline std::string write_detections(const std::vector<Detection2D>& dets) {
  Json j;
  j["schema"] = kDetSchema;
  j["detections"] = Json::array();
  for (const auto& d : dets) {
    Json e;
    e["class_id"] = d.class_id();
    e["label"] = d.label();
    e["confidence"] = d.confidence();
    e["box"] = Json::array({d.box().x1, d.box().y1, d.box().x2, d.box().y2});
    j["detections"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Run-length encoded masks

struct Run {
  bool value;
  std::size_t length;
  bool operator==(const Run&) const = default;
};

/// Maximal runs in row-major order.
inline std::vector<Run> mask_runs(const BinaryMask& mask) {
  std::vector<Run> runs;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!runs.empty() && runs.back().value == mask[i]) {
      ++runs.back().length;
    } else {
      runs.push_back({mask[i], 1});
    }
  }
  return runs;
}

inline std::string rle_encode(const BinaryMask& mask) {
  Json j;
  j["schema"] = kRleSchema;
  j["width"] = mask.width();
  j["height"] = mask.height();
  j["runs"] = Json::array();
  for (const auto& run : mask_runs(mask)) {
    Json e;
    e["value"] = run.value ? 1 : 0;
    e["length"] = run.length;
    j["runs"].push_back(std::move(e));
  }
  return j.dump() + "\n";
}

/// Decodes an fv-rle/1 document. If `expected` dimensions are given the
/// declared size must match them.
inline BinaryMask rle_decode(std::string_view text,
                             std::optional<std::pair<int, int>> expected = std::nullopt) {
  const detail::Reader r("mask rle");
  const Json j = r.parse(text);
  r.schema(j, kRleSchema);
  const int w = r.int32(j, "width", "width");
  const int h = r.int32(j, "height", "height");
  if (w < 0 || h < 0) throw FormatError("mask rle: negative dimensions");
  if (expected && (expected->first != w || expected->second != h)) {
    throw FormatError("mask rle: declared size " + std::to_string(w) + "x" + std::to_string(h) +
                      " does not match expected " + std::to_string(expected->first) + "x" +
                      std::to_string(expected->second));
  }
  const std::size_t total = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  const auto& runs = r.array(j, "runs", "runs");
  std::vector<std::uint8_t> bits;
  bits.reserve(total);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const std::string path = "runs[" + std::to_string(i) + "]";
    const auto value = r.integer(runs[i], "value", path + ".value");
    const auto length = r.integer(runs[i], "length", path + ".length");
    if (value != 0 && value != 1) r.fail(path + ".value", "expected 0 or 1");
    if (length < 1) r.fail(path + ".length", "expected a positive length");
    if (static_cast<std::uint64_t>(length) > total - bits.size()) {
      throw FormatError("mask rle: runs exceed width * height");
    }
    bits.insert(bits.end(), static_cast<std::size_t>(length), static_cast<std::uint8_t>(value));
  }
  if (bits.size() != total) throw FormatError("mask rle: runs do not sum to width * height");
  return BinaryMask(w, h, std::move(bits));
}

// ---------------------------------------------------------------------------
// 3D boxes

struct BoxRecord {
  std::string label;
  int class_id = 0;
  Aabb3 box;
  std::size_t point_count = 0;
};

inline std::string write_boxes(const std::vector<BoxRecord>& boxes) {
  Json j;
  j["schema"] = kBoxSchema;
  j["objects"] = Json::array();
  for (const auto& b : boxes) {
    Json e;
    e["label"] = b.label;
    e["class_id"] = b.class_id;
    e["min"] = detail::vec3_json(b.box.min());
    e["max"] = detail::vec3_json(b.box.max());
    e["point_count"] = b.point_count;
    j["objects"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

inline std::vector<BoxRecord> parse_boxes(std::string_view text) {
  const detail::Reader r("boxes");
  const Json j = r.parse(text);
  r.schema(j, kBoxSchema);
  const auto& arr = r.array(j, "objects", "objects");
  std::vector<BoxRecord> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = "objects[" + std::to_string(i) + "]";
    const auto count = r.integer(arr[i], "point_count", path + ".point_count");
    if (count < 0) r.fail(path + ".point_count", "expected a non-negative integer");
    out.push_back({r.string(arr[i], "label", path + ".label"),
                   r.int32(arr[i], "class_id", path + ".class_id"),
                   Aabb3(r.vec3(arr[i], "min", path + ".min"), r.vec3(arr[i], "max", path + ".max")),
                   static_cast<std::size_t>(count)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic scenes and noise

inline synth::SceneSpec parse_scene(std::string_view text) {
  const detail::Reader r("scene");
  const Json j = r.parse(text);
  r.schema(j, kSceneSchema);
  synth::SceneSpec scene;
  const auto& arr = r.array(j, "primitives", "primitives");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = "primitives[" + std::to_string(i) + "]";
    const auto& p = arr[i];
    const std::string type = r.string(p, "type", path + ".type");
    std::optional<synth::Shape> shape;
    if (type == "plane") {
      shape = synth::Plane(r.vec3(p, "normal", path + ".normal"),
                           r.number(p, "offset", path + ".offset"));
    } else if (type == "sphere") {
      shape = synth::Sphere(r.vec3(p, "center", path + ".center"),
                            r.number(p, "radius", path + ".radius"));
    } else if (type == "box") {
      shape = synth::Box(r.vec3(p, "min", path + ".min"), r.vec3(p, "max", path + ".max"));
    } else {
      r.fail(path + ".type", "expected plane, sphere or box");
    }
    synth::Primitive prim{*shape, r.has(p, "label") ? r.string(p, "label", path + ".label") : type,
                          r.has(p, "class_id") ? r.int32(p, "class_id", path + ".class_id") : 0,
                          std::nullopt};
    if (r.has(p, "color")) {
      const auto c = r.numbers(p, "color", path + ".color", 3);
      for (double x : c) {
        if (!(x >= 0 && x <= 255)) r.fail(path + ".color", "expected values in [0, 255]");
      }
      prim.color = Rgb{static_cast<std::uint8_t>(c[0]), static_cast<std::uint8_t>(c[1]),
                       static_cast<std::uint8_t>(c[2])};
    }
    scene.primitives.push_back(std::move(prim));
  }
  if (r.has(j, "background") && !j["background"].is_null()) {
    const auto& b = j["background"];
    scene.background = synth::Plane(r.vec3(b, "normal", "background.normal"),
                                    r.number(b, "offset", "background.offset"));
  }
  return scene;
}

inline std::string write_scene(const synth::SceneSpec& scene) {
  Json j;
  j["schema"] = kSceneSchema;
  j["primitives"] = Json::array();
  for (const auto& p : scene.primitives) {
    Json e;
    if (const auto* pl = std::get_if<synth::Plane>(&p.shape)) {
      e["type"] = "plane";
      e["normal"] = detail::vec3_json(pl->normal);
      e["offset"] = pl->offset;
    } else if (const auto* s = std::get_if<synth::Sphere>(&p.shape)) {
      e["type"] = "sphere";
      e["center"] = detail::vec3_json(s->center);
      e["radius"] = s->radius;
    } else {
      const auto& b = std::get<synth::Box>(p.shape);
      e["type"] = "box";
      e["min"] = detail::vec3_json(b.min);
      e["max"] = detail::vec3_json(b.max);
    }
    e["label"] = p.label;
    e["class_id"] = p.class_id;
    if (p.color) e["color"] = Json::array({p.color->r, p.color->g, p.color->b});
    j["primitives"].push_back(std::move(e));
  }
  if (scene.background) {
    j["background"]["normal"] = detail::vec3_json(scene.background->normal);
    j["background"]["offset"] = scene.background->offset;
  }
  return j.dump(2) + "\n";
}

inline synth::NoiseSpec parse_noise(std::string_view text) {
  const detail::Reader r("noise");
  const Json j = r.parse(text);
  r.schema(j, kNoiseSchema);
  synth::NoiseSpec n;
  auto opt = [&](const char* key, double& dst) {
    if (r.has(j, key)) dst = r.number(j, key, key);
  };
  opt("sigma", n.sigma);
  opt("dropout_rate", n.dropout_rate);
  opt("outlier_rate", n.outlier_rate);
  opt("outlier_magnitude", n.outlier_magnitude);
  if (r.has(j, "seed")) {
    const auto& s = j["seed"];
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      r.fail("seed", "expected a non-negative integer");
    }
    n.seed = s.get<std::uint64_t>();
  }
  n.validate();
  return n;
}

}  // namespace fv::io

#endif  // FV_IO_DOCUMENTS_HPP
