// fusionvision - RGB-D object isolation and 3D box extraction
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "fv/metrics.hpp"
#include "support.hpp"

using namespace fv;
using namespace fv::metrics;

TEST(BboxIou, HandExamples) {
  EXPECT_NEAR(bbox_iou({0, 0, 2, 2}, {1, 0, 3, 2}), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(bbox_iou({0, 0, 2, 2}, {0, 0, 2, 2}), 1.0);
  EXPECT_EQ(bbox_iou({0, 0, 1, 1}, {2, 2, 3, 3}), 0.0);
  EXPECT_EQ(bbox_iou({0, 0, 1, 1}, {1, 0, 2, 1}), 0.0);  // touching edge
}

TEST(BboxIou, SymmetricAndBounded) {
  fvt::Rng g(1);
  for (int i = 0; i < 1000; ++i) {
    auto box = [&] {
      const double x = fvt::uniform(g, 0, 50), y = fvt::uniform(g, 0, 50);
      return PixelBox{x, y, x + fvt::uniform(g, 0.1, 30), y + fvt::uniform(g, 0.1, 30)};
    };
    const PixelBox a = box(), b = box();
    const double iou = bbox_iou(a, b);
    EXPECT_EQ(iou, bbox_iou(b, a));
    EXPECT_GE(iou, 0.0);
    EXPECT_LE(iou, 1.0);
  }
}

TEST(Confusion, MatchesPixelTally) {
  fvt::Rng g(2);
  for (int i = 0; i < 20; ++i) {
    const BinaryMask p = fvt::random_mask(g, 64, 64, fvt::uniform(g, 0, 1));
    const BinaryMask t = fvt::random_mask(g, 64, 64, fvt::uniform(g, 0, 1));
    ConfusionCounts expect;
    for (int v = 0; v < 64; ++v) {
      for (int u = 0; u < 64; ++u) {
        const bool a = p.at(u, v), b = t.at(u, v);
        expect.tp += a && b;
        expect.fp += a && !b;
        expect.fn += !a && b;
        expect.tn += !a && !b;
      }
    }
    EXPECT_EQ(mask_confusion(p, t), expect);
  }
  EXPECT_THROW(mask_confusion(BinaryMask(2, 2), BinaryMask(2, 3)), ShapeError);
}

TEST(MaskMetrics, HandValues) {
  const ConfusionCounts c{1, 1, 1, 0};
  EXPECT_DOUBLE_EQ(jaccard(c), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(dice(c), 0.5);
  EXPECT_DOUBLE_EQ(precision(c), 0.5);
  EXPECT_DOUBLE_EQ(recall(c), 0.5);
  EXPECT_DOUBLE_EQ(f1(c), 0.5);
  EXPECT_DOUBLE_EQ(pixel_accuracy(c), 1.0 / 3.0);

  fvt::Rng g(3);
  const BinaryMask m = fvt::random_mask(g, 20, 20);
  const ConfusionCounts perfect = mask_confusion(m, m);
  for (double v : {jaccard(perfect), dice(perfect), precision(perfect), recall(perfect), f1(perfect),
                   pixel_accuracy(perfect)}) {
    EXPECT_EQ(v, 1.0);
  }
}

TEST(MaskMetrics, EmptyMaskConventions) {
  const ConfusionCounts both_empty{0, 0, 0, 10};
  EXPECT_EQ(jaccard(both_empty), 1.0);
  EXPECT_EQ(dice(both_empty), 1.0);
  EXPECT_EQ(f1(both_empty), 1.0);
  const ConfusionCounts missed{0, 0, 5, 5};
  EXPECT_EQ(jaccard(missed), 0.0);
  EXPECT_EQ(precision(missed), 0.0);
  EXPECT_EQ(f1(missed), 0.0);
}

TEST(MaskMetrics, DiceJaccardAndF1Identities) {
  fvt::Rng g(4);
  for (int i = 0; i < 1000; ++i) {
    const ConfusionCounts c{static_cast<std::uint64_t>(fvt::uniform_int(g, 0, 10000)),
                            static_cast<std::uint64_t>(fvt::uniform_int(g, 0, 10000)),
                            static_cast<std::uint64_t>(fvt::uniform_int(g, 0, 10000)),
                            static_cast<std::uint64_t>(fvt::uniform_int(g, 0, 10000))};
    const double j = jaccard(c);
    EXPECT_NEAR(dice(c), 2 * j / (1 + j), 1e-12);
    EXPECT_NEAR(f1(c), dice(c), 1e-12);
  }
}

TEST(RocAuc, CanonicalRankings) {
  fvt::Rng g(5);
  BinaryMask gt = fvt::random_mask(g, 16, 16);
  gt.set(0, 0, true);
  gt.set(1, 0, false);
  BinaryMask inv(16, 16);
  for (std::size_t i = 0; i < gt.size(); ++i) inv.set(int(i % 16), int(i / 16), !gt[i]);
  EXPECT_EQ(roc_auc(SoftMask::from_binary(gt), gt), 1.0);
  EXPECT_EQ(roc_auc(SoftMask::from_binary(inv), gt), 0.0);
  EXPECT_EQ(roc_auc(SoftMask(16, 16, std::vector<double>(256, 0.3)), gt), 0.5);
  EXPECT_THROW(roc_auc(SoftMask::from_binary(gt), BinaryMask(16, 16)), UndefinedMetricError);
  EXPECT_THROW(roc_auc(SoftMask::from_binary(gt), BinaryMask(16, 16, true)), UndefinedMetricError);
  EXPECT_THROW(roc_auc(SoftMask(2, 2, std::vector<double>(4, 0)), gt), ShapeError);
  EXPECT_THROW(SoftMask(1, 1, {1.5}), ValidationError);
}

TEST(RocAuc, MatchesPairwiseOracleAndMonotoneInvariance) {
  fvt::Rng g(6);
  for (int trial = 0; trial < 20; ++trial) {
    BinaryMask gt = fvt::random_mask(g, 12, 10, fvt::uniform(g, 0.1, 0.9));
    gt.set(0, 0, true);
    gt.set(1, 0, false);
    std::vector<double> s(gt.size());
    // Coarse scores so ties occur.
    for (auto& v : s) v = std::round(fvt::uniform(g, 0, 1) * 20) / 20;
    // Mann-Whitney: P(score_pos > score_neg) + 0.5 P(tie).
    double wins = 0, pairs = 0;
    for (std::size_t a = 0; a < s.size(); ++a) {
      if (!gt[a]) continue;
      for (std::size_t b = 0; b < s.size(); ++b) {
        if (gt[b]) continue;
        wins += s[a] > s[b] ? 1.0 : s[a] == s[b] ? 0.5 : 0.0;
        pairs += 1;
      }
    }
    const double auc = roc_auc(SoftMask(12, 10, s), gt);
    EXPECT_NEAR(auc, wins / pairs, 1e-12);
    std::vector<double> t(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) t[i] = std::pow(s[i], 3) * 0.5 + 0.1;
    EXPECT_NEAR(roc_auc(SoftMask(12, 10, t), gt), auc, 1e-12);
  }
}

TEST(MatchDetections, Examples) {
  const std::vector<GroundTruthBox> gts{{1, {0, 0, 10, 10}}, {2, {20, 20, 30, 30}}};
  const std::vector<Detection2D> exact{Detection2D(1, "a", 0.9, {0, 0, 10, 10}),
                                       Detection2D(2, "b", 0.8, {20, 20, 30, 30})};
  const auto p = match_detections(exact, gts);
  EXPECT_EQ(p.overall, 1.0);
  EXPECT_EQ(p.per_class.at(1), 1.0);

  // Two predictions on one truth: only one may match.
  const auto dup = match_detections(
      {Detection2D(1, "a", 0.9, {0, 0, 10, 10}), Detection2D(1, "a", 0.7, {0, 0, 10, 10})},
      {gts[0]});
  EXPECT_EQ(dup.per_class.at(1), 0.5);

  EXPECT_EQ(match_detections({}, {}).overall, 1.0);
  EXPECT_EQ(match_detections({}, gts).overall, 0.0);
  EXPECT_EQ(match_detections({Detection2D(1, "a", 0.9, {0, 0, 10, 10})}, {}).overall, 0.0);
  // Class mismatch never matches.
  EXPECT_EQ(match_detections({Detection2D(2, "b", 0.9, {0, 0, 10, 10})}, {gts[0]}).overall, 0.0);
  EXPECT_THROW(match_detections({}, {}, 0.0), ValidationError);
}

TEST(MatchDetections, HigherConfidenceWins) {
  // The confident but looser prediction claims the only truth first.
  const std::vector<GroundTruthBox> gts{{0, {0, 0, 10, 10}}};
  const auto r = match_detections({Detection2D(0, "x", 0.2, {0, 0, 10, 10}),
                                   Detection2D(0, "x", 0.9, {0, 0, 10, 6})},
                                  gts);
  EXPECT_EQ(r.overall, 0.5);
}

TEST(Aggregate, HandValues) {
  const std::vector<double> v{1, 2, 3};
  const MetricSummary s = aggregate(v);
  EXPECT_EQ(s.mean, 2.0);
  EXPECT_EQ(s.std, std::sqrt(2.0 / 3.0));
  EXPECT_EQ(s.median, 2.0);
  EXPECT_EQ(s.mad, 1.0);

  const MetricSummary c = aggregate(std::vector<double>(7, 0.25));
  EXPECT_EQ(c.std, 0.0);
  EXPECT_EQ(c.mad, 0.0);
  const MetricSummary one = aggregate(std::vector<double>{5});
  EXPECT_EQ(one.median, 5.0);
  EXPECT_EQ(aggregate(std::vector<double>{4, 1, 3, 2}).median, 2.0);  // lower middle
  EXPECT_THROW(aggregate(std::vector<double>{}), EmptyInputError);
}

TEST(Aggregate, MadIsRobustToOneOutlier) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    fvt::Rng g(seed);
    std::vector<double> v(50);
    for (auto& x : v) x = fvt::uniform(g, 0.9, 1.0);
    const MetricSummary before = aggregate(v);
    v.push_back(1000.0);
    const MetricSummary after = aggregate(v);
    EXPECT_LT(std::abs(after.mad - before.mad), std::abs(after.std - before.std));
    EXPECT_GE(after.std, 0.0);
    EXPECT_GE(after.mad, 0.0);
  }
}
