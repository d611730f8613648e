// fusionvision - RGB-D object isolation and 3D box extraction
// SPDX-License-Identifier: Apache-2.0

// Detector training losses as plain scalar functions, each paired with its
// analytic derivative with respect to the prediction. Probabilities are
// clamped to [kProbEpsilon, 1 - kProbEpsilon] before any logarithm; the
// derivatives are those of the unclamped expression evaluated at the clamped
// point.

#ifndef FV_LOSSES_HPP
#define FV_LOSSES_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "fv/core.hpp"

namespace fv::losses {

inline constexpr double kProbEpsilon = 1e-12;

inline double clamp_prob(double p) {
  return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon);
}

/// Binary cross-entropy on the objectness score.
inline double objectness_loss(double y, double y_hat) {
  const double p = clamp_prob(y_hat);
  return -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
}

inline double objectness_loss_grad(double y, double y_hat) {
  const double p = clamp_prob(y_hat);
  return -y / p + (1.0 - y) / (1.0 - p);
}

/// Categorical cross-entropy over C classes.
inline double classification_loss(std::span<const double> y,
                                  std::span<const double> y_hat) {
  if (y.size() != y_hat.size()) {
    throw ShapeError("classification_loss: target and prediction lengths differ");
  }
  double loss = 0.0;
  for (std::size_t c = 0; c < y.size(); ++c) {
    if (y[c] != 0.0) loss -= y[c] * std::log(clamp_prob(y_hat[c]));
  }
  return loss;
}

inline std::vector<double> classification_loss_grad(std::span<const double> y,
                                                    std::span<const double> y_hat) {
  if (y.size() != y_hat.size()) {
    throw ShapeError("classification_loss: target and prediction lengths differ");
  }
  std::vector<double> g(y.size());
  for (std::size_t c = 0; c < y.size(); ++c) g[c] = -y[c] / clamp_prob(y_hat[c]);
  return g;
}

/// Sum of squared errors over (cx, cy, w, h).
inline double bbox_loss(const BoxParams& y, const BoxParams& y_hat) {
  const auto a = y.as_array();
  const auto b = y_hat.as_array();
  double loss = 0.0;
  for (int i = 0; i < 4; ++i) loss += (a[i] - b[i]) * (a[i] - b[i]);
  return loss;
}

/// Gradient with respect to y_hat, ordered (cx, cy, w, h).
inline std::array<double, 4> bbox_loss_grad(const BoxParams& y, const BoxParams& y_hat) {
  const auto a = y.as_array();
  const auto b = y_hat.as_array();
  std::array<double, 4> g{};
  for (int i = 0; i < 4; ++i) g[i] = -2.0 * (a[i] - b[i]);
  return g;
}

/// Focal term on the center score: -alpha (1 - p)^gamma y log p.
/// There is no (1 - y) branch, so the loss vanishes for negative targets.
inline double center_focal_loss(double y_center, double y_hat_center,
                                const FocalParams& params) {
  const double p = clamp_prob(y_hat_center);
  return -params.alpha * std::pow(1.0 - p, params.gamma) * y_center * std::log(p);
}

inline double center_focal_loss_grad(double y_center, double y_hat_center,
                                     const FocalParams& params) {
  const double p = clamp_prob(y_hat_center);
  const double q = 1.0 - p;
  const double dpow = params.gamma == 0.0 ? 0.0
                                          : -params.gamma * std::pow(q, params.gamma - 1.0);
  return -params.alpha * y_center * (dpow * std::log(p) + std::pow(q, params.gamma) / p);
}

struct LossWeights {
  double objectness = 1.0;
  double classification = 1.0;
  double bbox = 1.0;
  double center = 1.0;
};

struct LossTerms {
  double objectness = 0, classification = 0, bbox = 0, center = 0;
};

inline double total_loss(const LossTerms& t, const LossWeights& w = {}) {
  return w.objectness * t.objectness + w.classification * t.classification +
         w.bbox * t.bbox + w.center * t.center;
}

}  // namespace fv::losses

#endif  // FV_LOSSES_HPP
