// fusionvision - RGB-D object isolation and 3D box extraction
// SPDX-License-Identifier: Apache-2.0

#ifndef FV_CORE_HPP
#define FV_CORE_HPP

#include <Eigen/Core>
#include <Eigen/LU>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fv {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// ---------------------------------------------------------------------------
// Errors. Every failure surfaced by the library is one of these.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class InvalidDepthError : public Error {
 public:
  using Error::Error;
};

class BehindCameraError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

/// Wraps a failure raised inside one pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

namespace detail {

inline bool finite(const Vec3& p) {
  return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Camera model

/// Ideal pinhole intrinsics. No skew, no distortion.
class CameraIntrinsics {
 public:
  CameraIntrinsics(double fx, double fy, double cx, double cy, int width,
                   int height)
      : fx_(fx), fy_(fy), cx_(cx), cy_(cy), width_(width), height_(height) {
    if (!(std::isfinite(fx) && fx > 0.0)) {
      throw ValidationError("intrinsics: fx must be > 0");
    }
    if (!(std::isfinite(fy) && fy > 0.0)) {
      throw ValidationError("intrinsics: fy must be > 0");
    }
    if (width < 1 || height < 1) {
      throw ValidationError("intrinsics: width and height must be >= 1");
    }
    if (!(cx >= 0.0 && cx < width)) {
      throw ValidationError("intrinsics: cx must lie in [0, width)");
    }
    if (!(cy >= 0.0 && cy < height)) {
      throw ValidationError("intrinsics: cy must lie in [0, height)");
    }
  }

  double fx() const noexcept { return fx_; }
  double fy() const noexcept { return fy_; }
  double cx() const noexcept { return cx_; }
  double cy() const noexcept { return cy_; }
  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  Mat3 matrix() const {
    Mat3 k;
    k << fx_, 0.0, cx_, 0.0, fy_, cy_, 0.0, 0.0, 1.0;
    return k;
  }

  bool operator==(const CameraIntrinsics&) const = default;

 private:
  double fx_, fy_, cx_, cy_;
  int width_, height_;
};

/// Proper rigid motion p' = R p + t. When used as extrinsics it maps
/// depth-camera coordinates into color-camera coordinates.
class RigidTransform {
 public:
  static constexpr double kOrthonormalTolerance = 1e-9;

  RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

  RigidTransform(const Mat3& rotation, const Vec3& translation)
      : rotation_(rotation), translation_(translation) {
    if (!rotation.allFinite() || !translation.allFinite()) {
      throw ValidationError("extrinsics: non-finite rotation or translation");
    }
    const double ortho =
        (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (ortho > kOrthonormalTolerance ||
        std::abs(rotation.determinant() - 1.0) > kOrthonormalTolerance) {
      throw ValidationError(
          "extrinsics: rotation is not orthonormal with determinant +1");
    }
  }

  static RigidTransform identity() { return {}; }

  const Mat3& rotation() const noexcept { return rotation_; }
  const Vec3& translation() const noexcept { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  Vec3 operator*(const Vec3& p) const { return apply(p); }

  RigidTransform operator*(const RigidTransform& rhs) const {
    RigidTransform out;
    out.rotation_ = rotation_ * rhs.rotation_;
    out.translation_ = rotation_ * rhs.translation_ + translation_;
    return out;
  }

  RigidTransform inverse() const {
    RigidTransform out;
    out.rotation_ = rotation_.transpose();
    out.translation_ = -(out.rotation_ * translation_);
    return out;
  }

  bool operator==(const RigidTransform& o) const {
    return rotation_ == o.rotation_ && translation_ == o.translation_;
  }

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

// ---------------------------------------------------------------------------
// Image-domain types. Pixel (u, v) = (column, row), origin top-left.

/// 16-bit depth image. Stored values are z along the optical axis in units
/// of depth_scale meters; 0 marks an invalid pixel.
class DepthFrame {
 public:
  static constexpr double kDefaultScale = 0.001;

  DepthFrame(int width, int height, std::vector<std::uint16_t> data,
             double depth_scale = kDefaultScale)
      : width_(width),
        height_(height),
        data_(std::move(data)),
        depth_scale_(depth_scale) {
    if (width < 0 || height < 0) {
      throw ValidationError("depth frame: negative dimensions");
    }
    if (data_.size() != static_cast<std::size_t>(width) * height) {
      throw ValidationError("depth frame: data length != width * height");
    }
    if (!(std::isfinite(depth_scale) && depth_scale > 0.0)) {
      throw ValidationError("depth frame: depth_scale must be > 0");
    }
  }

  /// All-invalid frame.
  DepthFrame(int width, int height, double depth_scale = kDefaultScale)
      : DepthFrame(width, height,
                   std::vector<std::uint16_t>(
                       static_cast<std::size_t>(std::max(width, 0)) *
                       std::max(height, 0)),
                   depth_scale) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  double depth_scale() const noexcept { return depth_scale_; }
  const std::vector<std::uint16_t>& data() const noexcept { return data_; }

  std::uint16_t at(int u, int v) const {
    return data_[static_cast<std::size_t>(v) * width_ + u];
  }
  bool valid(int u, int v) const { return at(u, v) != 0; }
  double meters(int u, int v) const { return at(u, v) * depth_scale_; }

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (auto d : data_) n += d != 0;
    return n;
  }

  bool operator==(const DepthFrame&) const = default;

 private:
  int width_, height_;
  std::vector<std::uint16_t> data_;
  double depth_scale_;
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

class ColorFrame {
 public:
  ColorFrame(int width, int height, std::vector<std::uint8_t> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width < 0 || height < 0) {
      throw ValidationError("color frame: negative dimensions");
    }
    if (data_.size() != static_cast<std::size_t>(width) * height * 3) {
      throw ValidationError("color frame: data length != 3 * width * height");
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  const std::vector<std::uint8_t>& data() const noexcept { return data_; }

  Rgb at(int u, int v) const {
    const std::size_t i = 3 * (static_cast<std::size_t>(v) * width_ + u);
    return {data_[i], data_[i + 1], data_[i + 2]};
  }

  bool operator==(const ColorFrame&) const = default;

 private:
  int width_, height_;
  std::vector<std::uint8_t> data_;
};

/// Row-major boolean image, one byte per pixel (0 or 1).
class BinaryMask {
 public:
  BinaryMask(int width, int height, bool fill = false)
      : width_(width),
        height_(height),
        bits_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0),
              fill ? 1 : 0) {
    if (width < 0 || height < 0) {
      throw ValidationError("mask: negative dimensions");
    }
  }

  BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
      : width_(width), height_(height), bits_(std::move(bits)) {
    if (width < 0 || height < 0) {
      throw ValidationError("mask: negative dimensions");
    }
    if (bits_.size() != static_cast<std::size_t>(width) * height) {
      throw ValidationError("mask: bit count != width * height");
    }
    for (auto& b : bits_) b = b ? 1 : 0;
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return bits_.size(); }
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

  bool at(int u, int v) const {
    return bits_[static_cast<std::size_t>(v) * width_ + u] != 0;
  }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  void set(int u, int v, bool value) {
    bits_[static_cast<std::size_t>(v) * width_ + u] = value ? 1 : 0;
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto b : bits_) n += b;
    return n;
  }

  bool same_shape(int w, int h) const { return width_ == w && height_ == h; }

  bool operator==(const BinaryMask&) const = default;

 private:
  int width_, height_;
  std::vector<std::uint8_t> bits_;
};

/// Axis-aligned pixel box, corners (x1, y1) top-left and (x2, y2) bottom-right.
struct PixelBox {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return std::max(0.0, width()) * std::max(0.0, height()); }
  bool operator==(const PixelBox&) const = default;
};

/// One detector output.
class Detection2D {
 public:
  Detection2D(int class_id, std::string label, double confidence, PixelBox box)
      : class_id_(class_id),
        label_(std::move(label)),
        confidence_(confidence),
        box_(box) {
    if (!(confidence >= 0.0 && confidence <= 1.0)) {
      throw ValidationError("detection: confidence outside [0, 1]");
    }
    check_box(box_);
  }

  int class_id() const noexcept { return class_id_; }
  const std::string& label() const noexcept { return label_; }
  double confidence() const noexcept { return confidence_; }
  const PixelBox& box() const noexcept { return box_; }

  /// Returns a copy with the box clamped to [0, width] x [0, height].
  Detection2D clamped(int width, int height) const {
    PixelBox b = box_;
    b.x1 = std::clamp(b.x1, 0.0, static_cast<double>(width));
    b.x2 = std::clamp(b.x2, 0.0, static_cast<double>(width));
    b.y1 = std::clamp(b.y1, 0.0, static_cast<double>(height));
    b.y2 = std::clamp(b.y2, 0.0, static_cast<double>(height));
    return Detection2D(class_id_, label_, confidence_, b);
  }

  bool operator==(const Detection2D&) const = default;

 private:
  static void check_box(const PixelBox& b) {
    if (!(std::isfinite(b.x1) && std::isfinite(b.y1) && std::isfinite(b.x2) &&
          std::isfinite(b.y2))) {
      throw ValidationError("detection: non-finite box coordinate");
    }
    if (!(b.x1 < b.x2 && b.y1 < b.y2)) {
      throw ValidationError("detection: box requires x1 < x2 and y1 < y2");
    }
  }

  int class_id_;
  std::string label_;
  double confidence_;
  PixelBox box_;
};

// ---------------------------------------------------------------------------
// 3D types

/// Points in meters with optional per-point colors.
class PointCloud {
 public:
  PointCloud() = default;

  explicit PointCloud(std::vector<Vec3> points,
                      std::optional<std::vector<Rgb>> colors = std::nullopt)
      : points_(std::move(points)), colors_(std::move(colors)) {
    for (const auto& p : points_) {
      if (!detail::finite(p)) {
        throw ValidationError("point cloud: non-finite coordinate");
      }
    }
    if (colors_ && colors_->size() != points_.size()) {
      throw ValidationError("point cloud: colors length != points length");
    }
  }

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  bool has_colors() const noexcept { return colors_.has_value(); }

  const std::vector<Vec3>& points() const noexcept { return points_; }
  const std::optional<std::vector<Rgb>>& colors() const noexcept {
    return colors_;
  }
  const Vec3& operator[](std::size_t i) const { return points_[i]; }

  bool operator==(const PointCloud& o) const {
    return points_ == o.points_ && colors_ == o.colors_;
  }

 private:
  std::vector<Vec3> points_;
  std::optional<std::vector<Rgb>> colors_;
};

class Aabb3 {
 public:
  Aabb3(const Vec3& min, const Vec3& max) : min_(min), max_(max) {
    if (!detail::finite(min) || !detail::finite(max)) {
      throw ValidationError("aabb: non-finite corner");
    }
    for (int i = 0; i < 3; ++i) {
      if (min[i] > max[i]) {
        throw ValidationError("aabb: min exceeds max on some axis");
      }
    }
  }

  const Vec3& min() const noexcept { return min_; }
  const Vec3& max() const noexcept { return max_; }
  Vec3 extent() const { return max_ - min_; }
  Vec3 center() const { return 0.5 * (min_ + max_); }
  double volume() const {
    const Vec3 e = extent();
    return e.x() * e.y() * e.z();
  }

  bool contains(const Vec3& p) const {
    return (p.array() >= min_.array()).all() && (p.array() <= max_.array()).all();
  }
  bool contains(const Aabb3& b) const { return contains(b.min_) && contains(b.max_); }

  /// Largest per-face deviation from another box.
  double max_face_error(const Aabb3& o) const {
    return std::max((min_ - o.min_).cwiseAbs().maxCoeff(),
                    (max_ - o.max_).cwiseAbs().maxCoeff());
  }

  bool operator==(const Aabb3& o) const { return min_ == o.min_ && max_ == o.max_; }

 private:
  Vec3 min_, max_;
};

/// Per-object reconstruction result. The box always encloses the cloud.
class LabeledCloud {
 public:
  LabeledCloud(std::string label, int class_id, PointCloud cloud, Aabb3 box)
      : label_(std::move(label)),
        class_id_(class_id),
        cloud_(std::move(cloud)),
        box_(box) {
    for (const auto& p : cloud_.points()) {
      if (!box_.contains(p)) {
        throw ValidationError("labeled cloud: box does not enclose every point");
      }
    }
  }

  const std::string& label() const noexcept { return label_; }
  int class_id() const noexcept { return class_id_; }
  const PointCloud& cloud() const noexcept { return cloud_; }
  const Aabb3& box() const noexcept { return box_; }

 private:
  std::string label_;
  int class_id_;
  PointCloud cloud_;
  Aabb3 box_;
};

/// Box regression target (center + extent).
struct BoxParams {
  double cx = 0, cy = 0, w = 0, h = 0;

  BoxParams() = default;
  BoxParams(double cx_, double cy_, double w_, double h_)
      : cx(cx_), cy(cy_), w(w_), h(h_) {
    if (!(w >= 0.0 && h >= 0.0)) {
      throw ValidationError("box params: w and h must be >= 0");
    }
  }

  std::array<double, 4> as_array() const { return {cx, cy, w, h}; }
};

struct FocalParams {
  double alpha = 0.25;
  double gamma = 2.0;

  FocalParams() = default;
  FocalParams(double a, double g) : alpha(a), gamma(g) {
    if (!(a > 0.0)) throw ValidationError("focal params: alpha must be > 0");
    if (!(g >= 0.0)) throw ValidationError("focal params: gamma must be >= 0");
  }
};

}  // namespace fv

#endif  // FV_CORE_HPP
