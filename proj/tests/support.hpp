// fusionvision - RGB-D object isolation and 3D box extraction
// SPDX-License-Identifier: Apache-2.0
//
// Generators and brute-force oracles shared by the unit tests and the
// acceptance binary. Oracles deliberately avoid the library's own helpers.

#ifndef FV_TESTS_SUPPORT_HPP
#define FV_TESTS_SUPPORT_HPP

#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <unistd.h>
#include <string>
#include <utility>
#include <vector>

#include "fv/core.hpp"

namespace fvt {

using fv::Vec3;
using Rng = std::mt19937_64;

inline double uniform(Rng& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline int uniform_int(Rng& g, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(g);
}

inline Vec3 random_vec(Rng& g, double lo, double hi) {
  return {uniform(g, lo, hi), uniform(g, lo, hi), uniform(g, lo, hi)};
}

inline fv::Mat3 random_rotation(Rng& g) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(g), n(g), n(g), n(g));
  return q.normalized().toRotationMatrix();
}

inline fv::RigidTransform random_transform(Rng& g) {
  return fv::RigidTransform(random_rotation(g), random_vec(g, -2.0, 2.0));
}

inline fv::CameraIntrinsics random_intrinsics(Rng& g, int w, int h) {
  return fv::CameraIntrinsics(uniform(g, 100, 900), uniform(g, 100, 900), uniform(g, 0, w - 1),
                              uniform(g, 0, h - 1), w, h);
}

inline fv::DepthFrame random_depth(Rng& g, int w, int h, double invalid_rate,
                                   double scale = 0.001) {
  std::vector<std::uint16_t> d(static_cast<std::size_t>(w) * h);
  for (auto& v : d) {
    v = uniform(g, 0, 1) < invalid_rate ? 0 : static_cast<std::uint16_t>(uniform_int(g, 1, 65535));
  }
  return fv::DepthFrame(w, h, std::move(d), scale);
}

inline fv::BinaryMask random_mask(Rng& g, int w, int h, double p = 0.5) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(w) * h);
  for (auto& b : bits) b = uniform(g, 0, 1) < p ? 1 : 0;
  return fv::BinaryMask(w, h, std::move(bits));
}

/// Random cloud: a few Gaussian clusters plus scattered far points, with
/// occasional exact duplicates to exercise distance ties.
inline std::vector<Vec3> random_cloud(Rng& g, std::size_t n) {
  std::vector<Vec3> pts;
  pts.reserve(n);
  std::normal_distribution<double> nd(0.0, 1.0);
  const int clusters = uniform_int(g, 1, 4);
  std::vector<Vec3> centers;
  for (int c = 0; c < clusters; ++c) centers.push_back(random_vec(g, -1.0, 1.0));
  while (pts.size() < n) {
    const double r = uniform(g, 0, 1);
    if (r < 0.03) {
      pts.push_back(random_vec(g, -5.0, 5.0));
    } else if (r < 0.06 && !pts.empty()) {
      pts.push_back(pts[static_cast<std::size_t>(uniform_int(g, 0, int(pts.size()) - 1))]);
    } else {
      const Vec3& c = centers[static_cast<std::size_t>(uniform_int(g, 0, clusters - 1))];
      pts.push_back(c + 0.05 * Vec3(nd(g), nd(g), nd(g)));
    }
  }
  return pts;
}

// ---------------------------------------------------------------------------
// Oracles

/// O(n^2) statistical outlier removal: full neighbor sort per point.
struct SorOracle {
  std::vector<std::size_t> removed;
  std::vector<double> mean_distances;
  double threshold = 0;
};

inline SorOracle brute_force_sor(const std::vector<Vec3>& pts, int k_neighbors, double ratio) {
  SorOracle o;
  const std::size_t n = pts.size();
  if (n < 2) return o;
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_neighbors), n - 1);
  o.mean_distances.resize(n);
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t i = 0; i < n; ++i) {
    all.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = pts[i].x() - pts[j].x();
      const double dy = pts[i].y() - pts[j].y();
      const double dz = pts[i].z() - pts[j].z();
      all.emplace_back(dx * dx + dy * dy + dz * dz, j);
    }
    std::sort(all.begin(), all.end());
    double sum = 0;
    for (std::size_t j = 0; j < k; ++j) sum += std::sqrt(all[j].first);
    o.mean_distances[i] = sum / static_cast<double>(k);
  }
  double mean = 0;
  for (double d : o.mean_distances) mean += d;
  mean /= static_cast<double>(n);
  double var = 0;
  for (double d : o.mean_distances) var += (d - mean) * (d - mean);
  o.threshold = mean + ratio * std::sqrt(var / static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (o.mean_distances[i] > o.threshold) o.removed.push_back(i);
  }
  return o;
}

using Key = std::array<long long, 3>;

inline Key brute_key(const Vec3& p, double size) {
  return {static_cast<long long>(std::floor(p.x() / size)),
          static_cast<long long>(std::floor(p.y() / size)),
          static_cast<long long>(std::floor(p.z() / size))};
}

/// Voxel centroids computed in long double, keyed by cell.
inline std::map<Key, Vec3> brute_voxel_centroids(const std::vector<Vec3>& pts, double size) {
  std::map<Key, std::pair<std::array<long double, 3>, long>> acc;
  for (const auto& p : pts) {
    auto& [sum, n] = acc[brute_key(p, size)];
    for (int a = 0; a < 3; ++a) sum[static_cast<std::size_t>(a)] += p[a];
    ++n;
  }
  std::map<Key, Vec3> out;
  for (const auto& [key, v] : acc) {
    const auto& [sum, n] = v;
    out[key] = Vec3(static_cast<double>(sum[0] / n), static_cast<double>(sum[1] / n),
                    static_cast<double>(sum[2] / n));
  }
  return out;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("fv_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fvt

#endif  // FV_TESTS_SUPPORT_HPP
