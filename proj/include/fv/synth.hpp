// fusionvision - RGB-D object isolation and 3D box extraction
// SPDX-License-Identifier: Apache-2.0

#ifndef FV_SYNTH_HPP
#define FV_SYNTH_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fv/align.hpp"
#include "fv/core.hpp"

namespace fv::synth {

// ---------------------------------------------------------------------------
// Analytic primitives. Scene coordinates are the color camera's frame.

/// Points x with normal . x = offset. The normal is stored unit length.
struct Plane {
  Vec3 normal;
  double offset = 0;

  Plane(const Vec3& n, double d) : normal(n), offset(d) {
    const double len = n.norm();
    if (!(std::isfinite(len) && len > 0.0) || !std::isfinite(d)) {
      throw ValidationError("plane: normal must be non-zero and finite");
    }
    normal /= len;
    offset /= len;
  }
};

struct Sphere {
  Vec3 center;
  double radius;

  Sphere(const Vec3& c, double r) : center(c), radius(r) {
    if (!detail::finite(c) || !(std::isfinite(r) && r > 0.0)) {
      throw ValidationError("sphere: radius must be > 0");
    }
  }
};

struct Box {
  Vec3 min, max;

  Box(const Vec3& lo, const Vec3& hi) : min(lo), max(hi) {
    Aabb3 check(lo, hi);  // validates min <= max
    (void)check;
  }
};

using Shape = std::variant<Plane, Sphere, Box>;

struct Primitive {
  Shape shape;
  std::string label;
  int class_id = 0;
  std::optional<Rgb> color;
};

struct SceneSpec {
  std::vector<Primitive> primitives;
  /// Optional backdrop. It occludes and is occluded like any surface but is
  /// not an object: it never appears in masks or detections.
  std::optional<Plane> background;
};

struct NoiseSpec {
  double sigma = 0;  // meters
  double dropout_rate = 0;
  double outlier_rate = 0;
  double outlier_magnitude = 0;  // meters
  std::uint64_t seed = 0;

  void validate() const {
    if (!(std::isfinite(sigma) && sigma >= 0.0)) throw ValidationError("noise: sigma must be >= 0");
    if (!(dropout_rate >= 0.0 && dropout_rate <= 1.0)) {
      throw ValidationError("noise: dropout_rate outside [0, 1]");
    }
    if (!(outlier_rate >= 0.0 && outlier_rate <= 1.0)) {
      throw ValidationError("noise: outlier_rate outside [0, 1]");
    }
    if (!std::isfinite(outlier_magnitude)) {
      throw ValidationError("noise: outlier_magnitude must be finite");
    }
  }
};

// ---------------------------------------------------------------------------
// Ray casting. A ray is origin + s * dir; hits need s > 0.

inline std::optional<double> intersect(const Plane& p, const Vec3& o, const Vec3& d) {
  const double denom = p.normal.dot(d);
  if (denom == 0.0) return std::nullopt;
  const double s = (p.offset - p.normal.dot(o)) / denom;
  if (!(s > 0.0)) return std::nullopt;
  return s;
}

inline std::optional<double> intersect(const Sphere& sp, const Vec3& o, const Vec3& d) {
  const Vec3 oc = o - sp.center;
  const double a = d.squaredNorm();
  const double b = oc.dot(d);
  const double c = oc.squaredNorm() - sp.radius * sp.radius;
  const double disc = b * b - a * c;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  const double near = (-b - root) / a;
  if (near > 0.0) return near;
  const double far = (-b + root) / a;
  if (far > 0.0) return far;
  return std::nullopt;
}

inline std::optional<double> intersect(const Box& bx, const Vec3& o, const Vec3& d) {
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < bx.min[a] || o[a] > bx.max[a]) return std::nullopt;
      continue;
    }
    double ta = (bx.min[a] - o[a]) / d[a];
    double tb = (bx.max[a] - o[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (t0 > t1) return std::nullopt;
  if (t0 > 0.0) return t0;
  if (t1 > 0.0) return t1;
  return std::nullopt;
}

inline std::optional<double> intersect(const Shape& s, const Vec3& o, const Vec3& d) {
  return std::visit([&](const auto& shape) { return intersect(shape, o, d); }, s);
}

inline constexpr int kNoHit = -1;
inline constexpr int kBackground = -2;

struct Hit {
  double s = std::numeric_limits<double>::infinity();
  int id = kNoHit;  // primitive index, kBackground or kNoHit
};

/// Nearest surface along a ray; ties go to the lower primitive index.
inline Hit cast(const SceneSpec& scene, const Vec3& o, const Vec3& d) {
  Hit hit;
  for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
    if (auto s = intersect(scene.primitives[i].shape, o, d); s && *s < hit.s) {
      hit = {*s, static_cast<int>(i)};
    }
  }
  if (scene.background) {
    if (auto s = intersect(*scene.background, o, d); s && *s < hit.s) hit = {*s, kBackground};
  }
  return hit;
}

struct Render {
  DepthFrame depth;
  std::vector<int> ids;  // per pixel: primitive index, kBackground or kNoHit
};

/// Ray-casts the scene through every pixel center of a camera whose pose in
/// scene coordinates is `camera_to_scene`. Stored depth is the camera-frame
/// z of the nearest hit, quantized to depth units; misses and depths that do
/// not fit 16 bits are invalid.
inline Render render(const SceneSpec& scene, const CameraIntrinsics& k,
                     double depth_scale = DepthFrame::kDefaultScale,
                     const RigidTransform& camera_to_scene = RigidTransform::identity()) {
  const int w = k.width();
  const int h = k.height();
  std::vector<std::uint16_t> data(static_cast<std::size_t>(w) * h, 0);
  std::vector<int> ids(data.size(), kNoHit);
  const Vec3 origin = camera_to_scene.translation();
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      // Direction with unit z, so the ray parameter equals camera depth.
      const Vec3 dir_cam = backproject(u, v, 1.0, k);
      const Hit hit = cast(scene, origin, camera_to_scene.rotation() * dir_cam);
      if (hit.id == kNoHit) continue;
      const std::size_t i = static_cast<std::size_t>(v) * w + u;
      if (auto q = fv::detail::quantize_depth(hit.s, depth_scale)) {
        data[i] = *q;
        ids[i] = hit.id;
      }
    }
  }
  return {DepthFrame(w, h, std::move(data), depth_scale), std::move(ids)};
}

inline DepthFrame render_depth(const SceneSpec& scene, const CameraIntrinsics& k,
                               double depth_scale = DepthFrame::kDefaultScale,
                               const RigidTransform& camera_to_scene = RigidTransform::identity()) {
  return render(scene, k, depth_scale, camera_to_scene).depth;
}

inline BinaryMask mask_from_ids(const std::vector<int>& ids, int width, int height, int id) {
  std::vector<std::uint8_t> bits(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) bits[i] = ids[i] == id ? 1 : 0;
  return BinaryMask(width, height, std::move(bits));
}

/// Pixels whose nearest hit is primitive `object_index`.
inline BinaryMask ground_truth_mask(const SceneSpec& scene, std::size_t object_index,
                                    const CameraIntrinsics& k,
                                    double depth_scale = DepthFrame::kDefaultScale) {
  if (object_index >= scene.primitives.size()) {
    throw IndexError("ground_truth_mask: object index out of range");
  }
  const Render r = render(scene, k, depth_scale);
  return mask_from_ids(r.ids, k.width(), k.height(), static_cast<int>(object_index));
}

inline Aabb3 ground_truth_aabb(const Shape& shape) {
  if (const auto* s = std::get_if<Sphere>(&shape)) {
    const Vec3 r = Vec3::Constant(s->radius);
    return Aabb3(s->center - r, s->center + r);
  }
  if (const auto* b = std::get_if<Box>(&shape)) return Aabb3(b->min, b->max);
  throw UnsupportedError("ground_truth_aabb: planes are unbounded");
}

inline Aabb3 ground_truth_aabb(const Primitive& p) { return ground_truth_aabb(p.shape); }

/// Box of the part of a sphere visible from the camera center (the cap
/// facing the origin, bounded by the tangent circle of the viewing cone).
/// Ignores the image bounds and occlusion by other objects.
inline Aabb3 visible_surface_aabb(const Sphere& s) {
  const Vec3& c = s.center;
  const double r = s.radius;
  const double dist = c.norm();
  if (!(dist > r)) throw UnsupportedError("visible_surface_aabb: camera inside sphere");
  const Vec3 axis = c / dist;
  const Vec3 rim_center = axis * ((dist * dist - r * r) / dist);
  const double rim_radius = r * std::sqrt(dist * dist - r * r) / dist;

  Vec3 lo, hi;
  for (int a = 0; a < 3; ++a) {
    const Vec3 e = Vec3::Unit(a);
    const double rim_spread = rim_radius * std::sqrt(std::max(0.0, 1.0 - axis[a] * axis[a]));
    // Extreme of the full sphere along +-e, kept if it faces the camera.
    auto extreme = [&](double sign) {
      const Vec3 p = c + sign * r * e;
      const bool visible = (p - c).dot(p) <= 0.0;
      const double rim = rim_center[a] + sign * rim_spread;
      return visible ? p[a] : rim;
    };
    lo[a] = extreme(-1.0);
    hi[a] = extreme(+1.0);
  }
  return Aabb3(lo, hi);
}

// ---------------------------------------------------------------------------
// Noise

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Uniform in [0, 1) keyed by (seed, pixel, stream); independent of the
/// order in which pixels are visited.
inline double uniform(std::uint64_t seed, std::uint64_t pixel, std::uint64_t stream) {
  const std::uint64_t h =
      splitmix64(splitmix64(splitmix64(seed) ^ pixel) + stream * 0xd1b54a32d192ed03ULL);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline double gaussian(std::uint64_t seed, std::uint64_t pixel) {
  const double u1 = 1.0 - uniform(seed, pixel, 3);  // (0, 1]
  const double u2 = uniform(seed, pixel, 4);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace detail

/// Perturbs valid pixels: Gaussian depth jitter, random dropouts, and
/// speckle outliers displaced by +-outlier_magnitude. Invalid pixels stay
/// invalid; perturbed depths that leave the 16-bit range become invalid.
inline DepthFrame inject_noise(const DepthFrame& depth, const NoiseSpec& spec) {
  spec.validate();
  const double scale = depth.depth_scale();
  std::vector<std::uint16_t> out = depth.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] == 0) continue;
    if (detail::uniform(spec.seed, i, 0) < spec.dropout_rate) {
      out[i] = 0;
      continue;
    }
    double offset = 0.0;
    if (spec.sigma > 0.0) offset += spec.sigma * detail::gaussian(spec.seed, i);
    if (detail::uniform(spec.seed, i, 1) < spec.outlier_rate) {
      offset += detail::uniform(spec.seed, i, 2) < 0.5 ? -spec.outlier_magnitude
                                                       : spec.outlier_magnitude;
    }
    if (offset == 0.0) continue;
    const double units = std::round(out[i] + offset / scale);
    out[i] = (units >= 1.0 && units <= std::numeric_limits<std::uint16_t>::max())
                 ? static_cast<std::uint16_t>(units)
                 : 0;
  }
  return DepthFrame(depth.width(), depth.height(), std::move(out), scale);
}

// ---------------------------------------------------------------------------
// Colors (flat shading, one color per primitive)

inline Rgb palette(std::size_t i) {
  static constexpr Rgb kColors[] = {{230, 57, 70},  {29, 53, 87},  {69, 123, 157},
                                    {42, 157, 143}, {233, 196, 106}, {244, 162, 97}};
  return kColors[i % std::size(kColors)];
}

inline ColorFrame render_color(const SceneSpec& scene, const std::vector<int>& ids, int width,
                               int height) {
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(width) * height * 3, 0);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    Rgb c;
    if (ids[i] == kBackground) {
      c = {128, 128, 128};
    } else if (ids[i] >= 0) {
      const auto& p = scene.primitives[static_cast<std::size_t>(ids[i])];
      c = p.color.value_or(palette(static_cast<std::size_t>(ids[i])));
    }
    rgb[3 * i] = c.r;
    rgb[3 * i + 1] = c.g;
    rgb[3 * i + 2] = c.b;
  }
  return ColorFrame(width, height, std::move(rgb));
}

}  // namespace fv::synth

#endif  // FV_SYNTH_HPP
