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
#ifndef DETKIT_METRICS_H_
#define DETKIT_METRICS_H_

#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "detkit/geometry.h"
#include "detkit/postprocess.h"

namespace detkit {

// A ground-truth object.
struct Annotation {
  Box box;
  int class_id = 0;
  int image_id = 0;
  int annotation_id = 0;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct ConfusionCounts {
  int tp = 0;
  int fp = 0;
  int fn = 0;

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const ConfusionCounts&,
                         const ConfusionCounts&) = default;
};

// tp / (tp + fp), or 0 with no predictions.
double Precision(const ConfusionCounts& c);
// tp / (tp + fn), or 0 with no ground truth.
double Recall(const ConfusionCounts& c);
// Harmonic mean, or 0 when precision + recall is 0.
double F1(double precision, double recall);

struct MatchResult {
  // Aligned with the input predictions.
  std::vector<bool> is_tp;
  // Index into the ground-truth list for each TP, -1 otherwise.
  std::vector<int> matched_gt;
  ConfusionCounts counts;
};

// Greedy matching for one (image, class) group. Predictions are visited in
// descending score order (ties by input position); each takes the unmatched
// ground truth of highest IoU if that IoU is >= iou_threshold. Returns
// InvalidArgument if the inputs span more than one image or class, or the
// threshold is outside (0, 1].
absl::StatusOr<MatchResult> MatchDetections(std::span<const Detection> preds,
                                            std::span<const Annotation> gts,
                                            double iou_threshold);

struct ScoredLabel {
  double score = 0.0;
  bool is_tp = false;
};

enum class ApInterpolation {
  // Mean of the precision envelope sampled at recall 0.00, 0.01, ..., 1.00.
  kCoco101,
  // Exact area under the precision envelope.
  kAllPoint,
};

// Area under the interpolated precision/recall curve of one class.
// `total_gt` must be >= 1.
absl::StatusOr<double> AveragePrecision(
    std::span<const ScoredLabel> labels, int total_gt,
    ApInterpolation method = ApInterpolation::kCoco101);

// Unweighted mean over the map entries. Error on an empty map.
absl::StatusOr<double> MeanAp(const std::map<int, double>& per_class_ap);

// Runs MatchDetections over every (image, class) group. Returns, for each
// prediction, the index of its matched ground truth in `gts` or -1.
absl::StatusOr<std::vector<int>> MatchAll(std::span<const Detection> preds,
                                          std::span<const Annotation> gts,
                                          double iou_threshold);

struct MetricsReport {
  // Only classes with at least one ground-truth instance.
  std::map<int, double> per_class_ap;
  std::map<int, double> per_class_ar;
  // Every class seen in predictions or ground truth.
  std::map<int, ConfusionCounts> per_class_counts;
  ConfusionCounts totals;
  double iou_threshold = 0.5;
  double precision = 0.0;
  double recall = 0.0;
  double map50 = 0.0;
  double f1 = 0.0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

struct EvaluateOptions {
  // Image ids predictions may refer to. When unset, the ids present in the
  // ground truth are used.
  std::optional<std::set<int>> known_image_ids;
};

// Matches predictions against ground truth per (image, class) and aggregates
// counts, per-class AP (COCO 101-point) and per-class recall. Returns
// InvalidArgument listing any prediction image ids that are not known.
absl::StatusOr<MetricsReport> Evaluate(std::span<const Detection> preds,
                                       std::span<const Annotation> gts,
                                       double iou_threshold,
                                       const EvaluateOptions& options = {});

}  // namespace detkit

#endif  // DETKIT_METRICS_H_
