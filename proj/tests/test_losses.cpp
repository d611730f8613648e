// fusionvision - RGB-D object isolation and 3D box extraction
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "fv/losses.hpp"
#include "support.hpp"

using namespace fv;
using namespace fv::losses;

namespace {

double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric));
}

template <class F>
double central_diff(F f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2 * h);
}

}  // namespace

TEST(Objectness, HandValuesAndSymmetry) {
  EXPECT_NEAR(objectness_loss(1, 0.5), std::log(2.0), 1e-9);
  EXPECT_NEAR(objectness_loss(0, 0.5), std::log(2.0), 1e-9);
  fvt::Rng g(1);
  for (int i = 0; i < 100; ++i) {
    const double p = fvt::uniform(g, 0.01, 0.99);
    EXPECT_NEAR(objectness_loss(1, p), objectness_loss(0, 1 - p), 1e-12);
  }
  // Clamping keeps the extremes finite.
  EXPECT_TRUE(std::isfinite(objectness_loss(1, 0.0)));
  EXPECT_NEAR(objectness_loss(1, 1.0), 0.0, 1e-11);
}

TEST(Objectness, StrictlyDecreasingForPositiveTarget) {
  double prev = objectness_loss(1, 0.001);
  for (double p = 0.002; p < 1.0; p += 0.001) {
    const double cur = objectness_loss(1, p);
    EXPECT_LT(cur, prev);
    prev = cur;
  }
}

TEST(Classification, UniformPredictionAndErrors) {
  const std::vector<double> y{0, 1, 0, 0};
  const std::vector<double> yh(4, 0.25);
  EXPECT_NEAR(classification_loss(y, yh), std::log(4.0), 1e-9);
  EXPECT_NEAR(classification_loss(y, std::vector<double>{0, 1, 0, 0}), 0.0, 1e-11);
  EXPECT_THROW(classification_loss(y, std::vector<double>(3, 0.3)), ShapeError);
  EXPECT_THROW(classification_loss_grad(y, std::vector<double>(3, 0.3)), ShapeError);
}

TEST(Bbox, HandValueAndZeroAtTruth) {
  const BoxParams y(0.5, 0.5, 0.2, 0.3);
  EXPECT_NEAR(bbox_loss(y, BoxParams(0.6, 0.6, 0.3, 0.4)), 0.04, 1e-9);
  EXPECT_EQ(bbox_loss(y, y), 0.0);
}

TEST(CenterFocal, HandValueAndDegeneracy) {
  EXPECT_NEAR(center_focal_loss(1, 0.5, FocalParams(0.25, 2)), 0.25 * 0.25 * std::log(2.0), 1e-9);
  fvt::Rng g(2);
  for (int i = 0; i < 100; ++i) {
    const double p = fvt::uniform(g, 0.01, 0.99);
    const double y = fvt::uniform(g, 0, 1);
    EXPECT_NEAR(center_focal_loss(y, p, FocalParams(1, 0)), -y * std::log(p), 1e-12);
  }
  EXPECT_EQ(center_focal_loss(0, 0.3, FocalParams(0.25, 2)), 0.0);
}

TEST(CenterFocal, StrictlyDecreasingForPositiveTarget) {
  const FocalParams fp(0.25, 2);
  double prev = center_focal_loss(1, 0.001, fp);
  for (double p = 0.002; p < 1.0; p += 0.001) {
    const double cur = center_focal_loss(1, p, fp);
    EXPECT_LT(cur, prev);
    prev = cur;
  }
}

TEST(Losses, NonNegativeOnRandomInputs) {
  fvt::Rng g(3);
  for (int i = 0; i < 500; ++i) {
    const double p = fvt::uniform(g, 0, 1);
    EXPECT_GE(objectness_loss(g() % 2, p), 0.0);
    EXPECT_GE(center_focal_loss(1, p, FocalParams(fvt::uniform(g, 0.01, 2), fvt::uniform(g, 0, 5))), 0.0);
    std::vector<double> y(5, 0.0), yh(5);
    y[g() % 5] = 1;
    for (auto& v : yh) v = fvt::uniform(g, 0, 1);
    EXPECT_GE(classification_loss(y, yh), 0.0);
  }
}

TEST(Gradients, MatchCentralDifferences) {
  fvt::Rng g(4);
  for (int i = 0; i < 100; ++i) {
    const double p = fvt::uniform(g, 0.05, 0.95);
    const double y = fvt::uniform(g, 0, 1);

    EXPECT_LE(rel_err(objectness_loss_grad(y, p),
                      central_diff([&](double x) { return objectness_loss(y, x); }, p)),
              1e-6);

    const FocalParams fp(fvt::uniform(g, 0.1, 1), fvt::uniform(g, 0, 4));
    EXPECT_LE(rel_err(center_focal_loss_grad(y, p, fp),
                      central_diff([&](double x) { return center_focal_loss(y, x, fp); }, p)),
              1e-6);

    std::vector<double> ty(4), yh(4);
    for (int c = 0; c < 4; ++c) {
      ty[c] = fvt::uniform(g, 0, 1);
      yh[c] = fvt::uniform(g, 0.05, 0.95);
    }
    const auto cg = classification_loss_grad(ty, yh);
    for (int c = 0; c < 4; ++c) {
      auto f = [&](double x) {
        auto v = yh;
        v[c] = x;
        return classification_loss(ty, v);
      };
      EXPECT_LE(rel_err(cg[c], central_diff(f, yh[c])), 1e-6);
    }

    const BoxParams by(fvt::uniform(g, 0, 1), fvt::uniform(g, 0, 1), fvt::uniform(g, 0.1, 1),
                       fvt::uniform(g, 0.1, 1));
    const std::array<double, 4> bh{fvt::uniform(g, 0, 1), fvt::uniform(g, 0, 1),
                                   fvt::uniform(g, 0.2, 1), fvt::uniform(g, 0.2, 1)};
    const auto bg = bbox_loss_grad(by, BoxParams(bh[0], bh[1], bh[2], bh[3]));
    for (int c = 0; c < 4; ++c) {
      auto f = [&](double x) {
        auto v = bh;
        v[c] = x;
        return bbox_loss(by, BoxParams(v[0], v[1], v[2], v[3]));
      };
      EXPECT_LE(rel_err(bg[c], central_diff(f, bh[c])), 1e-6);
    }
  }
}

TEST(Total, WeightedSum) {
  const LossTerms t{1, 2, 3, 4};
  EXPECT_EQ(total_loss(t), 10.0);
  EXPECT_EQ(total_loss(t, LossWeights{0.5, 0, 2, 1}), 0.5 + 6 + 4);
}
