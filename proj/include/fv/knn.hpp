// fusionvision - RGB-D object isolation and 3D box extraction
// SPDX-License-Identifier: Apache-2.0

#ifndef FV_KNN_HPP
#define FV_KNN_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "fv/core.hpp"

namespace fv {

inline double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

struct Neighbor {
  double dist2;
  std::size_t index;

  // Distance first, then input index.
  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
  }
  bool operator==(const Neighbor&) const = default;
};

/// Static kd-tree answering exact Euclidean k-nearest-neighbor queries.
/// Ties in distance are resolved toward the lower point index, so results
/// are identical to a brute-force scan.
class KdTree {
 public:
  static constexpr std::size_t kLeafSize = 12;

  explicit KdTree(std::span<const Vec3> points) : points_(points) {
    order_.resize(points.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (!points.empty()) {
      nodes_.reserve(2 * points.size() / kLeafSize + 2);
      build(0, points.size());
    }
  }

  std::size_t size() const noexcept { return points_.size(); }

  /// Point indices in leaf order; consecutive entries are spatially close.
  const std::vector<std::size_t>& leaf_order() const noexcept { return order_; }

  /// The k nearest points to `query`, sorted ascending. A point whose index
  /// equals `exclude` is never reported.
  void knn(const Vec3& query, std::size_t k, std::vector<Neighbor>& out,
           std::size_t exclude = kNoExclude) const {
    out.clear();
    if (k == 0 || nodes_.empty()) return;
    Search s{query, k, exclude, out};
    search(0, s);
    std::sort_heap(out.begin(), out.end());
  }

  std::vector<Neighbor> knn(const Vec3& query, std::size_t k,
                            std::size_t exclude = kNoExclude) const {
    std::vector<Neighbor> out;
    knn(query, k, out, exclude);
    return out;
  }

  static constexpr std::size_t kNoExclude = std::numeric_limits<std::size_t>::max();

  /// Every point with squared distance <= radius2 from `query`, unordered.
  void within(const Vec3& query, double radius2, std::vector<Neighbor>& out,
              std::size_t exclude = kNoExclude) const {
    out.clear();
    if (!nodes_.empty()) collect(0, query, radius2, exclude, out);
  }

 private:
  struct Node {
    std::size_t begin, end;
    Vec3 lo, hi;  // bounds of the points below this node
    bool leaf = true;
    std::uint32_t left = 0, right = 0;
  };

  struct Search {
    const Vec3& query;
    std::size_t k;
    std::size_t exclude;
    std::vector<Neighbor>& heap;  // max-heap on (dist2, index)
  };

  std::uint32_t build(std::size_t begin, std::size_t end) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    Vec3 lo = points_[order_[begin]];
    Vec3 hi = lo;
    for (std::size_t i = begin + 1; i < end; ++i) {
      lo = lo.cwiseMin(points_[order_[i]]);
      hi = hi.cwiseMax(points_[order_[i]]);
    }
    nodes_.push_back({begin, end, lo, hi});
    if (end - begin <= kLeafSize) return id;

    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    if (hi[axis] == lo[axis]) return id;  // all coincident: keep as leaf

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::size_t a, std::size_t b) {
                       return points_[a][axis] < points_[b][axis];
                     });
    const auto left = build(begin, mid);
    const auto right = build(mid, end);
    Node& n = nodes_[id];
    n.leaf = false;
    n.left = left;
    n.right = right;
    return id;
  }

  static double box_distance2(const Node& n, const Vec3& q) {
    double d2 = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double d = q[a] < n.lo[a] ? n.lo[a] - q[a] : (q[a] > n.hi[a] ? q[a] - n.hi[a] : 0.0);
      d2 += d * d;
    }
    return d2;
  }

  void offer(Search& s, const Neighbor& cand) const {
    if (s.heap.size() < s.k) {
      s.heap.push_back(cand);
      std::push_heap(s.heap.begin(), s.heap.end());
    } else if (cand < s.heap.front()) {
      std::pop_heap(s.heap.begin(), s.heap.end());
      s.heap.back() = cand;
      std::push_heap(s.heap.begin(), s.heap.end());
    }
  }

  void search(std::uint32_t id, Search& s) const {
    const Node& n = nodes_[id];
    if (n.leaf) {
      for (std::size_t i = n.begin; i < n.end; ++i) {
        const std::size_t idx = order_[i];
        if (idx == s.exclude) continue;
        offer(s, {squared_distance(points_[idx], s.query), idx});
      }
      return;
    }
    double dl = box_distance2(nodes_[n.left], s.query);
    double dr = box_distance2(nodes_[n.right], s.query);
    std::uint32_t first = n.left, second = n.right;
    if (dr < dl) {
      std::swap(first, second);
      std::swap(dl, dr);
    }
    // Prune only on strictly larger bounds so equal distances are still seen
    // and the lower index can win the tie.
    if (s.heap.size() < s.k || dl <= s.heap.front().dist2) search(first, s);
    if (s.heap.size() < s.k || dr <= s.heap.front().dist2) search(second, s);
  }

  void collect(std::uint32_t id, const Vec3& q, double radius2, std::size_t exclude,
               std::vector<Neighbor>& out) const {
    const Node& n = nodes_[id];
    if (box_distance2(n, q) > radius2) return;
    if (!n.leaf) {
      collect(n.left, q, radius2, exclude, out);
      collect(n.right, q, radius2, exclude, out);
      return;
    }
    for (std::size_t i = n.begin; i < n.end; ++i) {
      const std::size_t idx = order_[i];
      if (idx == exclude) continue;
      const double d2 = squared_distance(points_[idx], q);
      if (d2 <= radius2) out.push_back({d2, idx});
    }
  }

  std::span<const Vec3> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace fv

#endif  // FV_KNN_HPP
