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
#include "detkit/metrics.h"

#include <algorithm>
#include <numeric>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace detkit {

namespace {

constexpr int kRecallSamples = 101;

std::vector<size_t> ArgSortByScore(std::span<const Detection> preds) {
  std::vector<size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return preds[a].score > preds[b].score;
  });
  return order;
}

}  // namespace

double Precision(const ConfusionCounts& c) {
  const int denom = c.tp + c.fp;
  return denom == 0 ? 0.0 : static_cast<double>(c.tp) / denom;
}

double Recall(const ConfusionCounts& c) {
  const int denom = c.tp + c.fn;
  return denom == 0 ? 0.0 : static_cast<double>(c.tp) / denom;
}

double F1(double precision, double recall) {
  const double sum = precision + recall;
  return sum == 0 ? 0.0 : 2.0 * precision * recall / sum;
}

absl::StatusOr<MatchResult> MatchDetections(std::span<const Detection> preds,
                                            std::span<const Annotation> gts,
                                            double iou_threshold) {
  if (!(iou_threshold > 0 && iou_threshold <= 1)) {
    return absl::InvalidArgumentError(
        absl::StrCat("iou_threshold must be in (0, 1], got ", iou_threshold));
  }
  std::optional<int> image_id;
  std::optional<int> class_id;
  auto check = [&](int img, int cls) -> absl::Status {
    if (!image_id) image_id = img;
    if (!class_id) class_id = cls;
    if (img != *image_id || cls != *class_id) {
      return absl::InvalidArgumentError(absl::StrCat(
          "MatchDetections expects a single (image, class) group, saw (",
          *image_id, ", ", *class_id, ") and (", img, ", ", cls, ")"));
    }
    return absl::OkStatus();
  };
  for (const Detection& d : preds) {
    if (auto s = check(d.image_id, d.class_id); !s.ok()) return s;
  }
  for (const Annotation& a : gts) {
    if (auto s = check(a.image_id, a.class_id); !s.ok()) return s;
  }

  MatchResult result;
  result.is_tp.assign(preds.size(), false);
  result.matched_gt.assign(preds.size(), -1);
  std::vector<bool> taken(gts.size(), false);

  for (size_t p : ArgSortByScore(preds)) {
    int best = -1;
    double best_iou = 0.0;
    for (size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      const double iou = Iou(preds[p].box, gts[g].box);
      // Inclusive threshold; equal IoU keeps the earlier ground truth.
      if (iou >= iou_threshold && (best < 0 || iou > best_iou)) {
        best = static_cast<int>(g);
        best_iou = iou;
      }
    }
    if (best >= 0) {
      taken[best] = true;
      result.is_tp[p] = true;
      result.matched_gt[p] = best;
      ++result.counts.tp;
    } else {
      ++result.counts.fp;
    }
  }
  result.counts.fn = static_cast<int>(
      std::count(taken.begin(), taken.end(), false));
  return result;
}

absl::StatusOr<double> AveragePrecision(std::span<const ScoredLabel> labels,
                                        int total_gt, ApInterpolation method) {
  if (total_gt < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("AveragePrecision needs total_gt >= 1, got ", total_gt));
  }
  std::vector<size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return labels[a].score > labels[b].score;
  });

  const size_t n = order.size();
  std::vector<double> recall(n);
  std::vector<double> envelope(n);
  int tp = 0;
  for (size_t i = 0; i < n; ++i) {
    if (labels[order[i]].is_tp) ++tp;
    recall[i] = static_cast<double>(tp) / total_gt;
    envelope[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  for (size_t i = n; i-- > 1;) {
    envelope[i - 1] = std::max(envelope[i - 1], envelope[i]);
  }

  double ap = 0.0;
  switch (method) {
    case ApInterpolation::kCoco101: {
      for (int k = 0; k < kRecallSamples; ++k) {
        const double r = k / 100.0;
        auto it = std::lower_bound(recall.begin(), recall.end(), r);
        if (it == recall.end()) break;
        ap += envelope[it - recall.begin()];
      }
      ap /= kRecallSamples;
      break;
    }
    case ApInterpolation::kAllPoint: {
      double prev = 0.0;
      for (size_t i = 0; i < n; ++i) {
        ap += (recall[i] - prev) * envelope[i];
        prev = recall[i];
      }
      break;
    }
  }
  return std::clamp(ap, 0.0, 1.0);
}

absl::StatusOr<double> MeanAp(const std::map<int, double>& per_class_ap) {
  if (per_class_ap.empty()) {
    return absl::InvalidArgumentError("MeanAp needs at least one class");
  }
  double sum = 0.0;
  for (const auto& [cls, ap] : per_class_ap) sum += ap;
  return sum / static_cast<double>(per_class_ap.size());
}

absl::StatusOr<std::vector<int>> MatchAll(std::span<const Detection> preds,
                                          std::span<const Annotation> gts,
                                          double iou_threshold) {
  using Key = std::pair<int, int>;  // (image, class)
  std::map<Key, std::vector<size_t>> pred_groups;
  std::map<Key, std::vector<size_t>> gt_groups;
  for (size_t i = 0; i < preds.size(); ++i) {
    pred_groups[{preds[i].image_id, preds[i].class_id}].push_back(i);
  }
  for (size_t i = 0; i < gts.size(); ++i) {
    gt_groups[{gts[i].image_id, gts[i].class_id}].push_back(i);
  }

  std::vector<int> matched(preds.size(), -1);
  for (const auto& [key, pred_idx] : pred_groups) {
    std::vector<Detection> group_preds;
    for (size_t i : pred_idx) group_preds.push_back(preds[i]);
    std::vector<Annotation> group_gts;
    std::vector<size_t> gt_idx;
    if (auto it = gt_groups.find(key); it != gt_groups.end()) gt_idx = it->second;
    for (size_t i : gt_idx) group_gts.push_back(gts[i]);

    auto match = MatchDetections(group_preds, group_gts, iou_threshold);
    if (!match.ok()) return match.status();
    for (size_t j = 0; j < pred_idx.size(); ++j) {
      if (match->matched_gt[j] >= 0) {
        matched[pred_idx[j]] = static_cast<int>(gt_idx[match->matched_gt[j]]);
      }
    }
  }
  return matched;
}

absl::StatusOr<MetricsReport> Evaluate(std::span<const Detection> preds,
                                       std::span<const Annotation> gts,
                                       double iou_threshold,
                                       const EvaluateOptions& options) {
  if (!(iou_threshold > 0 && iou_threshold <= 1)) {
    return absl::InvalidArgumentError(
        absl::StrCat("iou_threshold must be in (0, 1], got ", iou_threshold));
  }
  std::set<int> known;
  if (options.known_image_ids) {
    known = *options.known_image_ids;
  } else {
    for (const Annotation& a : gts) known.insert(a.image_id);
  }
  std::set<int> unknown;
  for (const Detection& d : preds) {
    if (!known.contains(d.image_id)) unknown.insert(d.image_id);
  }
  if (!unknown.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("predictions reference unknown image ids: ",
                     absl::StrJoin(unknown, ", ")));
  }

  auto matched = MatchAll(preds, gts, iou_threshold);
  if (!matched.ok()) return matched.status();

  MetricsReport report;
  report.iou_threshold = iou_threshold;
  std::map<int, int> gt_per_class;
  for (const Annotation& a : gts) {
    ++gt_per_class[a.class_id];
    report.per_class_counts[a.class_id];
  }
  std::map<int, std::vector<ScoredLabel>> labels;
  for (size_t i = 0; i < preds.size(); ++i) {
    const bool tp = (*matched)[i] >= 0;
    ConfusionCounts& c = report.per_class_counts[preds[i].class_id];
    ++(tp ? c.tp : c.fp);
    labels[preds[i].class_id].push_back({preds[i].score, tp});
  }

  for (auto& [cls, counts] : report.per_class_counts) {
    const int total_gt = gt_per_class[cls];
    counts.fn = total_gt - counts.tp;
    report.totals += counts;
    if (total_gt == 0) continue;
    auto ap = AveragePrecision(labels[cls], total_gt);
    if (!ap.ok()) return ap.status();
    report.per_class_ap[cls] = *ap;
    report.per_class_ar[cls] = Recall(counts);
  }

  report.precision = Precision(report.totals);
  report.recall = Recall(report.totals);
  report.f1 = F1(report.precision, report.recall);
  if (!report.per_class_ap.empty()) report.map50 = *MeanAp(report.per_class_ap);
  return report;
}

}  // namespace detkit
