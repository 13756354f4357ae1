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
#ifndef DETKIT_LOSSES_H_
#define DETKIT_LOSSES_H_

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "detkit/geometry.h"
#include "detkit/metrics.h"
#include "detkit/postprocess.h"

namespace detkit {

// Clamp applied to probabilities before taking logs.
inline constexpr double kProbabilityEpsilon = 1e-12;
// Tolerance on the row sums of a CoordinateDistribution.
inline constexpr double kDistributionSumTolerance = 1e-6;
// Number of regression bins used by PP-YOLOE style heads.
inline constexpr int kDefaultRegMax = 16;

// Four categorical distributions over `bins` discrete offsets, one per box
// side (left, top, right, bottom). Used for both predictions and targets.
class CoordinateDistribution {
 public:
  // `probs` is row-major 4 x bins. Every entry must be >= 0 and every row
  // must sum to 1 within kDistributionSumTolerance.
  static absl::StatusOr<CoordinateDistribution> Create(
      int bins, std::vector<double> probs);

  // Uniform over all bins.
  static CoordinateDistribution Uniform(int bins);

  // Standard two-bin soft target: each offset v (in bin units) puts weight
  // (ceil - v) on floor(v) and (v - floor) on floor(v) + 1. Offsets are
  // clamped into [0, bins - 1 - 0.01].
  static absl::StatusOr<CoordinateDistribution> SoftTarget(
      int bins, const std::array<double, 4>& offsets);

  int bins() const { return bins_; }
  std::span<const double> row(int side) const {
    return std::span<const double>(probs_).subspan(side * bins_, bins_);
  }

 private:
  CoordinateDistribution(int bins, std::vector<double> probs)
      : bins_(bins), probs_(std::move(probs)) {}

  int bins_;
  std::vector<double> probs_;
};

struct LossWeights {
  double lambda_iou = 1.0;
  double lambda_dfl = 1.0;
};

struct LossBreakdown {
  double cls = 0.0;
  double iou = 0.0;
  double dfl = 0.0;
  double total = 0.0;
};

// 1 - IoU.
double LossIou(const Box& pred, const Box& gt);

// Mean over samples of sum_j sum_k -target * ln(max(pred, eps)).
// Batches must be non-empty, equally sized and share one bin count.
absl::StatusOr<double> LossDfl(std::span<const CoordinateDistribution> preds,
                               std::span<const CoordinateDistribution> targets);

// Mean binary cross-entropy over samples and classes. Each prediction row
// holds per-class probabilities in [0, 1]; each target row is one-hot or all
// zero (background) and must match the prediction width.
absl::StatusOr<double> LossCls(std::span<const std::vector<double>> preds,
                               std::span<const std::vector<double>> targets);

// total = cls + lambda_iou * iou + lambda_dfl * dfl. Components and weights
// must be non-negative.
absl::StatusOr<LossBreakdown> TotalLoss(double cls, double iou, double dfl,
                                        const LossWeights& weights = {});

struct LossDiagnostics {
  LossBreakdown breakdown;
  int predictions = 0;
  int matched_pairs = 0;
  int dfl_pairs = 0;
};

// Loss diagnostics for already post-processed predictions.
//
// Predictions are matched to ground truth with MatchAll. The classification
// term is the BCE of each prediction's score against 1 (matched) or 0
// (unmatched). The IoU term averages 1 - IoU over matched pairs. The DFL term
// averages over matched pairs that carry a predicted distribution: the target
// is the soft target of the ground-truth side distances measured from the
// predicted box centre, in units of `stride`.
//
// `distributions`, if non-empty, must be aligned with `preds`.
absl::StatusOr<LossDiagnostics> DiagnoseLosses(
    std::span<const Detection> preds, std::span<const Annotation> gts,
    double iou_threshold, const LossWeights& weights,
    std::span<const std::optional<CoordinateDistribution>> distributions = {},
    double stride = 8.0);

}  // namespace detkit

#endif  // DETKIT_LOSSES_H_
