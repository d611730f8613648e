// fusionvision - RGB-D object isolation and 3D box extraction
// SPDX-License-Identifier: Apache-2.0

#ifndef FV_METRICS_HPP
#define FV_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "fv/core.hpp"

namespace fv::metrics {

// ---------------------------------------------------------------------------
// Boxes

/// Intersection over union of two pixel boxes. Zero-area boxes score 0.
inline double bbox_iou(const PixelBox& a, const PixelBox& b) {
  const double area_a = a.area();
  const double area_b = b.area();
  if (area_a <= 0.0 || area_b <= 0.0) return 0.0;
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (area_a + area_b - inter);
}

struct GroundTruthBox {
  int class_id = 0;
  PixelBox box;
};

struct DetectionPrecision {
  std::map<int, double> per_class;
  double overall = 1.0;
};

/// Detection precision under greedy matching: predictions are visited by
/// descending confidence and take the unmatched ground truth of the same
/// class with the highest IoU, provided it reaches the threshold.
/// Precision is matched / predicted. With no predictions it is 1 when there
/// is also no ground truth and 0 otherwise (per class and overall).
inline DetectionPrecision match_detections(const std::vector<Detection2D>& preds,
                                           const std::vector<GroundTruthBox>& gts,
                                           double iou_threshold = 0.5) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw ValidationError("match_detections: iou_threshold must lie in (0, 1]");
  }
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return preds[a].confidence() > preds[b].confidence();
  });

  struct Tally {
    std::size_t matched = 0, predicted = 0, truths = 0;
  };
  std::map<int, Tally> tally;
  for (const auto& g : gts) ++tally[g.class_id].truths;

  std::vector<bool> taken(gts.size(), false);
  for (std::size_t pi : order) {
    const auto& p = preds[pi];
    auto& t = tally[p.class_id()];
    ++t.predicted;
    double best = -1.0;
    std::size_t best_gt = gts.size();
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (taken[gi] || gts[gi].class_id != p.class_id()) continue;
      const double iou = bbox_iou(p.box(), gts[gi].box);
      if (iou >= iou_threshold && iou > best) {
        best = iou;
        best_gt = gi;
      }
    }
    if (best_gt < gts.size()) {
      taken[best_gt] = true;
      ++t.matched;
    }
  }

  auto score = [](std::size_t matched, std::size_t predicted, std::size_t truths) {
    if (predicted == 0) return truths == 0 ? 1.0 : 0.0;
    return static_cast<double>(matched) / static_cast<double>(predicted);
  };
  DetectionPrecision out;
  std::size_t matched = 0;
  for (const auto& [cls, t] : tally) {
    out.per_class[cls] = score(t.matched, t.predicted, t.truths);
    matched += t.matched;
  }
  out.overall = score(matched, preds.size(), gts.size());
  return out;
}

// ---------------------------------------------------------------------------
// Masks

struct ConfusionCounts {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionCounts&) const = default;
};

inline ConfusionCounts mask_confusion(const BinaryMask& pred, const BinaryMask& gt) {
  if (!pred.same_shape(gt.width(), gt.height())) {
    throw ShapeError("mask_confusion: masks differ in size");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i];
    const bool g = gt[i];
    if (p && g) ++c.tp;
    else if (p) ++c.fp;
    else if (g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

namespace detail {

// 0/0 scores 1 when both masks are empty, 0 otherwise.
inline double ratio(double num, double den, bool both_empty) {
  if (den == 0.0) return both_empty ? 1.0 : 0.0;
  return num / den;
}

inline bool both_empty(const ConfusionCounts& c) { return c.tp == 0 && c.fp == 0 && c.fn == 0; }

}  // namespace detail

inline double jaccard(const ConfusionCounts& c) {
  return detail::ratio(double(c.tp), double(c.tp + c.fp + c.fn), detail::both_empty(c));
}

inline double dice(const ConfusionCounts& c) {
  return detail::ratio(2.0 * double(c.tp), 2.0 * double(c.tp) + double(c.fp + c.fn),
                       detail::both_empty(c));
}

inline double precision(const ConfusionCounts& c) {
  return detail::ratio(double(c.tp), double(c.tp + c.fp), detail::both_empty(c));
}

inline double recall(const ConfusionCounts& c) {
  return detail::ratio(double(c.tp), double(c.tp + c.fn), detail::both_empty(c));
}

inline double f1(const ConfusionCounts& c) {
  const double p = precision(c);
  const double r = recall(c);
  return detail::ratio(2.0 * p * r, p + r, detail::both_empty(c));
}

inline double pixel_accuracy(const ConfusionCounts& c) {
  return detail::ratio(double(c.tp + c.tn), double(c.total()), true);
}

/// Per-pixel scores in [0, 1], e.g. a segmenter's probability map.
class SoftMask {
 public:
  SoftMask(int width, int height, std::vector<double> values)
      : width_(width), height_(height), values_(std::move(values)) {
    if (width < 0 || height < 0 ||
        values_.size() != static_cast<std::size_t>(width) * height) {
      throw ValidationError("soft mask: value count != width * height");
    }
    for (double v : values_) {
      if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("soft mask: value outside [0, 1]");
    }
  }

  static SoftMask from_binary(const BinaryMask& m) {
    std::vector<double> v(m.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = m[i] ? 1.0 : 0.0;
    return SoftMask(m.width(), m.height(), std::move(v));
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  int width_, height_;
  std::vector<double> values_;
};

/// Area under the ROC curve. Every distinct score is a threshold; the curve
/// runs from (0, 0) to (1, 1) and is integrated with the trapezoid rule, so
/// tied scores contribute a diagonal segment.
inline double roc_auc(const SoftMask& pred, const BinaryMask& gt) {
  if (!gt.same_shape(pred.width(), pred.height())) {
    throw ShapeError("roc_auc: masks differ in size");
  }
  const std::size_t n = gt.size();
  const std::size_t pos = gt.count();
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) {
    throw UndefinedMetricError("roc_auc: ground truth must contain both classes");
  }
  const auto& s = pred.values();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });

  double area = 0.0;
  std::uint64_t tp = 0, fp = 0, prev_tp = 0, prev_fp = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && s[order[j]] == s[order[i]]) {
      if (gt[order[j]]) ++tp;
      else ++fp;
      ++j;
    }
    area += double(fp - prev_fp) * double(tp + prev_tp) / 2.0;
    prev_tp = tp;
    prev_fp = fp;
    i = j;
  }
  return area / (double(pos) * double(neg));
}

// ---------------------------------------------------------------------------
// Aggregation

struct MetricSummary {
  double mean = 0, std = 0, median = 0, mad = 0;
};

/// Lower-middle element for even sizes.
inline double lower_median(std::vector<double> v) {
  if (v.empty()) throw EmptyInputError("median of empty sequence");
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

/// Mean, population std, median and median absolute deviation.
inline MetricSummary aggregate(std::span<const double> values) {
  if (values.empty()) throw EmptyInputError("aggregate: empty sequence");
  const double n = static_cast<double>(values.size());
  MetricSummary s;
  double sum = 0.0;
  for (double x : values) sum += x;
  s.mean = sum / n;
  double sq = 0.0;
  for (double x : values) sq += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(sq / n);
  s.median = lower_median({values.begin(), values.end()});
  std::vector<double> dev;
  dev.reserve(values.size());
  for (double x : values) dev.push_back(std::abs(x - s.median));
  s.mad = lower_median(std::move(dev));
  return s;
}

}  // namespace fv::metrics

#endif  // FV_METRICS_HPP
