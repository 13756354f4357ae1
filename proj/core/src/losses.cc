// Copyright 2026 The Detkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "detkit/losses.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/strings/str_cat.h"

namespace detkit {

namespace {

double SafeLog(double p) { return std::log(std::max(p, kProbabilityEpsilon)); }

}  // namespace

absl::StatusOr<CoordinateDistribution> CoordinateDistribution::Create(
    int bins, std::vector<double> probs) {
  if (bins < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("distribution needs at least one bin, got ", bins));
  }
  if (probs.size() != static_cast<size_t>(4 * bins)) {
    return absl::InvalidArgumentError(
        absl::StrCat("distribution expects 4 x ", bins, " = ", 4 * bins,
                     " probabilities, got ", probs.size()));
  }
  for (int side = 0; side < 4; ++side) {
    double sum = 0.0;
    for (int k = 0; k < bins; ++k) {
      const double p = probs[side * bins + k];
      if (!(p >= 0) || !std::isfinite(p)) {
        return absl::InvalidArgumentError(
            absl::StrCat("invalid distribution: entry (", side, ", ", k,
                         ") = ", p));
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kDistributionSumTolerance) {
      return absl::InvalidArgumentError(absl::StrCat(
          "invalid distribution: row ", side, " sums to ", sum));
    }
  }
  return CoordinateDistribution(bins, std::move(probs));
}

CoordinateDistribution CoordinateDistribution::Uniform(int bins) {
  return CoordinateDistribution(bins, std::vector<double>(4 * bins, 1.0 / bins));
}

absl::StatusOr<CoordinateDistribution> CoordinateDistribution::SoftTarget(
    int bins, const std::array<double, 4>& offsets) {
  if (bins < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("soft targets need at least two bins, got ", bins));
  }
  std::vector<double> probs(4 * bins, 0.0);
  for (int side = 0; side < 4; ++side) {
    if (!std::isfinite(offsets[side])) {
      return absl::InvalidArgumentError("soft target offset is not finite");
    }
    const double v = std::clamp(offsets[side], 0.0, bins - 1 - 0.01);
    const int left = static_cast<int>(std::floor(v));
    const double w_right = v - left;
    probs[side * bins + left] = 1.0 - w_right;
    probs[side * bins + left + 1] = w_right;
  }
  return CoordinateDistribution(bins, std::move(probs));
}

double LossIou(const Box& pred, const Box& gt) { return 1.0 - Iou(pred, gt); }

absl::StatusOr<double> LossDfl(
    std::span<const CoordinateDistribution> preds,
    std::span<const CoordinateDistribution> targets) {
  if (preds.empty()) return absl::InvalidArgumentError("LossDfl: empty batch");
  if (preds.size() != targets.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("LossDfl: ", preds.size(), " predictions vs ",
                     targets.size(), " targets"));
  }
  double sum = 0.0;
  for (size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].bins() != targets[i].bins()) {
      return absl::InvalidArgumentError(
          absl::StrCat("LossDfl: sample ", i, " has ", preds[i].bins(),
                       " predicted bins but ", targets[i].bins(), " target bins"));
    }
    for (int side = 0; side < 4; ++side) {
      std::span<const double> p = preds[i].row(side);
      std::span<const double> t = targets[i].row(side);
      for (size_t k = 0; k < p.size(); ++k) {
        if (t[k] != 0.0) sum -= t[k] * SafeLog(p[k]);
      }
    }
  }
  return sum / static_cast<double>(preds.size());
}

absl::StatusOr<double> LossCls(std::span<const std::vector<double>> preds,
                               std::span<const std::vector<double>> targets) {
  if (preds.empty()) return absl::InvalidArgumentError("LossCls: empty batch");
  if (preds.size() != targets.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("LossCls: ", preds.size(), " predictions vs ",
                     targets.size(), " targets"));
  }
  double sum = 0.0;
  size_t terms = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].size() != targets[i].size() || preds[i].empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("LossCls: sample ", i, " has ", preds[i].size(),
                       " scores but ", targets[i].size(), " targets"));
    }
    int hot = 0;
    for (size_t c = 0; c < preds[i].size(); ++c) {
      const double p = preds[i][c];
      const double t = targets[i][c];
      if (!(p >= 0 && p <= 1)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "LossCls: probability out of [0, 1] at (", i, ", ", c, "): ", p));
      }
      if (t != 0.0 && t != 1.0) {
        return absl::InvalidArgumentError(absl::StrCat(
            "LossCls: target must be 0 or 1 at (", i, ", ", c, "): ", t));
      }
      hot += t == 1.0;
      const double q =
          std::clamp(p, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
      sum -= t * std::log(q) + (1.0 - t) * std::log(1.0 - q);
      ++terms;
    }
    if (hot > 1) {
      return absl::InvalidArgumentError(
          absl::StrCat("LossCls: target row ", i, " is not one-hot"));
    }
  }
  return sum / static_cast<double>(terms);
}

absl::StatusOr<LossBreakdown> TotalLoss(double cls, double iou, double dfl,
                                        const LossWeights& weights) {
  if (!(cls >= 0) || !(iou >= 0) || !(dfl >= 0)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "loss components must be non-negative: ", cls, ", ", iou, ", ", dfl));
  }
  if (!(weights.lambda_iou >= 0) || !(weights.lambda_dfl >= 0)) {
    return absl::InvalidArgumentError("loss weights must be non-negative");
  }
  return LossBreakdown{
      .cls = cls,
      .iou = iou,
      .dfl = dfl,
      .total = cls + weights.lambda_iou * iou + weights.lambda_dfl * dfl};
}

absl::StatusOr<LossDiagnostics> DiagnoseLosses(
    std::span<const Detection> preds, std::span<const Annotation> gts,
    double iou_threshold, const LossWeights& weights,
    std::span<const std::optional<CoordinateDistribution>> distributions,
    double stride) {
  if (!distributions.empty() && distributions.size() != preds.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("got ", distributions.size(), " distributions for ",
                     preds.size(), " predictions"));
  }
  if (!(stride > 0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("stride must be positive, got ", stride));
  }
  auto matched = MatchAll(preds, gts, iou_threshold);
  if (!matched.ok()) return matched.status();

  LossDiagnostics diag;
  diag.predictions = static_cast<int>(preds.size());

  std::vector<std::vector<double>> cls_pred;
  std::vector<std::vector<double>> cls_target;
  double iou_sum = 0.0;
  std::vector<CoordinateDistribution> dfl_pred;
  std::vector<CoordinateDistribution> dfl_target;

  for (size_t i = 0; i < preds.size(); ++i) {
    const int g = (*matched)[i];
    cls_pred.push_back({preds[i].score});
    cls_target.push_back({g >= 0 ? 1.0 : 0.0});
    if (g < 0) continue;

    ++diag.matched_pairs;
    const Box& pb = preds[i].box;
    const Box& gb = gts[g].box;
    iou_sum += LossIou(pb, gb);

    if (distributions.empty() || !distributions[i]) continue;
    const double cx = 0.5 * (pb.x1() + pb.x2());
    const double cy = 0.5 * (pb.y1() + pb.y2());
    const std::array<double, 4> offsets = {
        (cx - gb.x1()) / stride, (cy - gb.y1()) / stride,
        (gb.x2() - cx) / stride, (gb.y2() - cy) / stride};
    auto target = CoordinateDistribution::SoftTarget(distributions[i]->bins(),
                                                     offsets);
    if (!target.ok()) return target.status();
    dfl_pred.push_back(*distributions[i]);
    dfl_target.push_back(*std::move(target));
  }
  diag.dfl_pairs = static_cast<int>(dfl_pred.size());

  double cls = 0.0;
  if (!cls_pred.empty()) {
    auto v = LossCls(cls_pred, cls_target);
    if (!v.ok()) return v.status();
    cls = *v;
  }
  double dfl = 0.0;
  if (!dfl_pred.empty()) {
    auto v = LossDfl(dfl_pred, dfl_target);
    if (!v.ok()) return v.status();
    dfl = *v;
  }
  const double iou =
      diag.matched_pairs > 0 ? iou_sum / diag.matched_pairs : 0.0;
  auto total = TotalLoss(cls, iou, dfl, weights);
  if (!total.ok()) return total.status();
  diag.breakdown = *total;
  return diag;
}

}  // namespace detkit
