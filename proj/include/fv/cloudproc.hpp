// fusionvision - RGB-D object isolation and 3D box extraction
// SPDX-License-Identifier: Apache-2.0

#ifndef FV_CLOUDPROC_HPP
#define FV_CLOUDPROC_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "fv/core.hpp"
#include "fv/knn.hpp"

namespace fv {

struct VoxelParams {
  /// Edge length of a cubic voxel, meters. 5 mm at the default 1 mm depth unit.
  double voxel_size = 0.005;

  VoxelParams() = default;
  explicit VoxelParams(double size) : voxel_size(size) {
    if (!(std::isfinite(size) && size > 0.0)) {
      throw ValidationError("voxel_size must be > 0");
    }
  }
};

struct OutlierParams {
  int k_neighbors = 300;
  double std_ratio = 2.0;

  OutlierParams() = default;
  OutlierParams(int k, double ratio) : k_neighbors(k), std_ratio(ratio) {
    if (k < 1) throw ValidationError("k_neighbors must be >= 1");
    if (!(std::isfinite(ratio) && ratio > 0.0)) {
      throw ValidationError("std_ratio must be > 0");
    }
  }
};

// ---------------------------------------------------------------------------
// Voxel downsampling

using VoxelKey = std::array<std::int64_t, 3>;  // (x, y, z) cell indices

inline VoxelKey voxel_key(const Vec3& p, double voxel_size) {
  return {static_cast<std::int64_t>(std::floor(p.x() / voxel_size)),
          static_cast<std::int64_t>(std::floor(p.y() / voxel_size)),
          static_cast<std::int64_t>(std::floor(p.z() / voxel_size))};
}

/// Replaces the points of every occupied voxel by their centroid (colors are
/// averaged the same way). Output is ordered by voxel key, z-major.
inline PointCloud voxel_downsample(const PointCloud& cloud, const VoxelParams& params) {
  const std::size_t n = cloud.size();
  const auto& pts = cloud.points();
  std::vector<VoxelKey> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = voxel_key(pts[i], params.voxel_size);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto zyx_less = [&](std::size_t a, std::size_t b) {
    const auto& ka = keys[a];
    const auto& kb = keys[b];
    if (ka[2] != kb[2]) return ka[2] < kb[2];
    if (ka[1] != kb[1]) return ka[1] < kb[1];
    return ka[0] < kb[0];
  };
  // Stable so that each voxel accumulates its points in input order.
  std::stable_sort(order.begin(), order.end(), zyx_less);

  std::vector<Vec3> out;
  std::vector<Rgb> out_colors;
  const bool colored = cloud.has_colors();
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    Vec3 sum = Vec3::Zero();
    Vec3 lo = pts[order[i]];
    Vec3 hi = lo;
    std::array<std::uint64_t, 3> csum{0, 0, 0};
    while (j < n && keys[order[j]] == keys[order[i]]) {
      const Vec3& p = pts[order[j]];
      sum += p;
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
      if (colored) {
        const Rgb c = (*cloud.colors())[order[j]];
        csum[0] += c.r;
        csum[1] += c.g;
        csum[2] += c.b;
      }
      ++j;
    }
    const auto count = static_cast<double>(j - i);
    // Rounding in the sum can leave the quotient an ulp outside the inputs.
    out.push_back((sum / count).cwiseMax(lo).cwiseMin(hi));
    if (colored) {
      auto avg = [&](std::uint64_t s) {
        return static_cast<std::uint8_t>(std::lround(static_cast<double>(s) / count));
      };
      out_colors.push_back({avg(csum[0]), avg(csum[1]), avg(csum[2])});
    }
    i = j;
  }
  if (colored) return PointCloud(std::move(out), std::move(out_colors));
  return PointCloud(std::move(out));
}

// ---------------------------------------------------------------------------
// Statistical outlier removal

struct OutlierResult {
  PointCloud cloud;
  std::vector<std::size_t> removed_indices;  // ascending, into the input cloud
  std::vector<double> mean_distances;        // per input point
  double threshold = 0;
  std::size_t effective_k = 0;
  bool k_clamped = false;  // k_neighbors exceeded n - 1
};

/// Mean distance from each point to its k nearest other points (ties by
/// index). Neighbor distances are summed nearest-first.
///
/// Queries run in the tree's leaf order. The k-th neighbor distance of the
/// previous query plus the step between the two bounds the current one
/// (triangle inequality), so each query gathers the points inside that
/// radius and selects among them.
inline std::vector<double> mean_knn_distances(std::span<const Vec3> pts, std::size_t k) {
  std::vector<double> mean(pts.size(), 0.0);
  if (k == 0 || pts.size() < 2) return mean;
  k = std::min(k, pts.size() - 1);
  KdTree tree(pts);
  std::vector<Neighbor> cand;
  double bound = std::numeric_limits<double>::infinity();
  std::size_t prev = 0;
  for (std::size_t i : tree.leaf_order()) {
    if (!std::isinf(bound)) bound += std::sqrt(squared_distance(pts[i], pts[prev]));
    prev = i;
    // Relative slack covers rounding in the bound; extra candidates are harmless.
    const double r = bound * (1.0 + 1e-9) + 1e-12;
    tree.within(pts[i], std::isinf(r) ? r : r * r, cand, i);
    if (cand.size() < k) tree.knn(pts[i], k, cand, i);  // bound too tight; not expected
    std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k - 1), cand.end());
    std::sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k));
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += std::sqrt(cand[j].dist2);
    mean[i] = sum / static_cast<double>(k);
    bound = std::sqrt(cand[k - 1].dist2);
  }
  return mean;
}

/// Drops points whose mean k-NN distance exceeds mean + std_ratio * std of
/// that statistic over the cloud (population std, strict comparison).
/// Clouds with fewer than two points are returned unchanged.
inline OutlierResult remove_statistical_outliers(const PointCloud& cloud,
                                                 const OutlierParams& params) {
  OutlierResult res{cloud, {}, {}, 0.0, 0, false};
  const std::size_t n = cloud.size();
  if (n < 2) return res;

  const auto requested = static_cast<std::size_t>(params.k_neighbors);
  res.effective_k = std::min(requested, n - 1);
  res.k_clamped = requested > n - 1;

  res.mean_distances = mean_knn_distances(cloud.points(), res.effective_k);
  const auto& d = res.mean_distances;
  double sum = 0.0;
  for (double x : d) sum += x;
  const double mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (double x : d) sq += (x - mean) * (x - mean);
  const double stddev = std::sqrt(sq / static_cast<double>(n));
  res.threshold = mean + params.std_ratio * stddev;

  std::vector<Vec3> kept;
  std::vector<Rgb> kept_colors;
  kept.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] > res.threshold) {
      res.removed_indices.push_back(i);
      continue;
    }
    kept.push_back(cloud[i]);
    if (cloud.has_colors()) kept_colors.push_back((*cloud.colors())[i]);
  }
  res.cloud = cloud.has_colors() ? PointCloud(std::move(kept), std::move(kept_colors))
                                 : PointCloud(std::move(kept));
  return res;
}

// ---------------------------------------------------------------------------
// Bounding boxes

inline Aabb3 compute_aabb(const PointCloud& cloud) {
  if (cloud.empty()) throw EmptyInputError("compute_aabb: empty cloud");
  Vec3 lo = cloud[0];
  Vec3 hi = cloud[0];
  for (const auto& p : cloud.points()) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return Aabb3(lo, hi);
}

/// Box outline as line segments. Corner i takes max on axis a when bit a of i
/// is set; each edge joins corners that differ in exactly one bit.
struct Wireframe {
  std::array<Vec3, 8> corners;
  std::array<std::pair<int, int>, 12> edges;
};

inline Wireframe aabb_wireframe(const Aabb3& box) {
  Wireframe wf;
  for (int i = 0; i < 8; ++i) {
    for (int a = 0; a < 3; ++a) {
      wf.corners[i][a] = (i >> a) & 1 ? box.max()[a] : box.min()[a];
    }
  }
  int e = 0;
  for (int i = 0; i < 8; ++i) {
    for (int a = 0; a < 3; ++a) {
      if (!((i >> a) & 1)) wf.edges[e++] = {i, i | (1 << a)};
    }
  }
  return wf;
}

}  // namespace fv

#endif  // FV_CLOUDPROC_HPP
