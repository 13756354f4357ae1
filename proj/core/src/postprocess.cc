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
#include "detkit/postprocess.h"

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>

#include "absl/strings/str_cat.h"

namespace detkit {

namespace {

// Indices of `dets` restricted to `subset`, stably sorted by descending score.
std::vector<size_t> SortByScore(std::span<const Detection> dets,
                                std::vector<size_t> subset) {
  std::stable_sort(subset.begin(), subset.end(), [&](size_t a, size_t b) {
    return dets[a].score > dets[b].score;
  });
  return subset;
}

// Greedy suppression over `order`, which must already be sorted by score.
std::vector<size_t> GreedyNms(std::span<const Detection> dets,
                              const std::vector<size_t>& order,
                              double iou_threshold) {
  std::vector<size_t> keep;
  std::vector<bool> suppressed(order.size(), false);
  for (size_t i = 0; i < order.size(); ++i) {
    if (suppressed[i]) continue;
    const Box& best = dets[order[i]].box;
    keep.push_back(order[i]);
    for (size_t j = i + 1; j < order.size(); ++j) {
      if (!suppressed[j] && Iou(best, dets[order[j]].box) > iou_threshold) {
        suppressed[j] = true;
      }
    }
  }
  return keep;
}

std::vector<Detection> Gather(std::span<const Detection> dets,
                              const std::vector<size_t>& idx) {
  std::vector<Detection> out;
  out.reserve(idx.size());
  for (size_t i : idx) out.push_back(dets[i]);
  return out;
}

}  // namespace

PostprocessConfig DefaultPostprocessConfig() { return PostprocessConfig{}; }

PostprocessConfig ValidationPostprocessConfig() {
  return PostprocessConfig{.score_threshold = 0.01,
                           .pre_nms_top_k = 10,
                           .nms_iou_threshold = 0.7,
                           .max_predictions = 10};
}

absl::StatusOr<PostprocessConfig> PostprocessPreset(std::string_view name) {
  if (name == "default") return DefaultPostprocessConfig();
  if (name == "validation") return ValidationPostprocessConfig();
  return absl::InvalidArgumentError(
      absl::StrCat("unknown postprocess preset '", std::string(name),
                   "' (expected default|validation)"));
}

absl::Status Validate(const PostprocessConfig& config) {
  if (!(config.score_threshold >= 0 && config.score_threshold <= 1)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "score_threshold must be in [0, 1], got ", config.score_threshold));
  }
  if (!(config.nms_iou_threshold > 0 && config.nms_iou_threshold <= 1)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "nms_iou_threshold must be in (0, 1], got ", config.nms_iou_threshold));
  }
  if (config.pre_nms_top_k < 1) {
    return absl::InvalidArgumentError(absl::StrCat(
        "pre_nms_top_k must be positive, got ", config.pre_nms_top_k));
  }
  if (config.max_predictions < 1) {
    return absl::InvalidArgumentError(absl::StrCat(
        "max_predictions must be positive, got ", config.max_predictions));
  }
  return absl::OkStatus();
}

std::vector<Detection> FilterByScore(std::span<const Detection> dets,
                                     double threshold) {
  std::vector<Detection> out;
  std::copy_if(dets.begin(), dets.end(), std::back_inserter(out),
               [threshold](const Detection& d) { return d.score >= threshold; });
  return out;
}

std::vector<Detection> TopK(std::span<const Detection> dets, int k) {
  std::vector<size_t> idx(dets.size());
  std::iota(idx.begin(), idx.end(), 0);
  idx = SortByScore(dets, std::move(idx));
  if (k >= 0 && idx.size() > static_cast<size_t>(k)) idx.resize(k);
  return Gather(dets, idx);
}

absl::StatusOr<std::vector<Detection>> NmsSingleClass(
    std::span<const Detection> dets, double iou_threshold) {
  for (const Detection& d : dets) {
    if (d.class_id != dets.front().class_id) {
      return absl::InvalidArgumentError(
          absl::StrCat("NmsSingleClass got mixed class ids ",
                       dets.front().class_id, " and ", d.class_id));
    }
    if (d.image_id != dets.front().image_id) {
      return absl::InvalidArgumentError(
          absl::StrCat("NmsSingleClass got mixed image ids ",
                       dets.front().image_id, " and ", d.image_id));
    }
  }
  std::vector<size_t> idx(dets.size());
  std::iota(idx.begin(), idx.end(), 0);
  return Gather(dets, GreedyNms(dets, SortByScore(dets, std::move(idx)),
                                iou_threshold));
}

absl::StatusOr<std::vector<Detection>> Postprocess(
    std::span<const Detection> dets, const PostprocessConfig& config) {
  if (auto s = Validate(config); !s.ok()) return s;

  std::map<int, std::vector<size_t>> by_image;
  for (size_t i = 0; i < dets.size(); ++i) {
    if (dets[i].score >= config.score_threshold) {
      by_image[dets[i].image_id].push_back(i);
    }
  }

  std::vector<Detection> out;
  for (auto& [image_id, idx] : by_image) {
    std::vector<size_t> ranked = SortByScore(dets, std::move(idx));
    if (ranked.size() > static_cast<size_t>(config.pre_nms_top_k)) {
      ranked.resize(config.pre_nms_top_k);
    }

    // Splitting a score-sorted list by class keeps each class list sorted.
    std::map<int, std::vector<size_t>> by_class;
    for (size_t i : ranked) by_class[dets[i].class_id].push_back(i);

    std::vector<size_t> kept;
    for (const auto& [class_id, class_idx] : by_class) {
      std::vector<size_t> k =
          GreedyNms(dets, class_idx, config.nms_iou_threshold);
      kept.insert(kept.end(), k.begin(), k.end());
    }

    std::sort(kept.begin(), kept.end(), [&](size_t a, size_t b) {
      if (dets[a].score != dets[b].score) return dets[a].score > dets[b].score;
      if (dets[a].class_id != dets[b].class_id) {
        return dets[a].class_id < dets[b].class_id;
      }
      return a < b;
    });
    if (kept.size() > static_cast<size_t>(config.max_predictions)) {
      kept.resize(config.max_predictions);
    }
    for (size_t i : kept) out.push_back(dets[i]);
  }
  return out;
}

}  // namespace detkit
