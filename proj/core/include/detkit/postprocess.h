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
#ifndef DETKIT_POSTPROCESS_H_
#define DETKIT_POSTPROCESS_H_

#include <span>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "detkit/geometry.h"

namespace detkit {

// One scored prediction for one image.
struct Detection {
  Box box;
  int class_id = 0;
  double score = 0.0;
  int image_id = 0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

// Score filter, pre-NMS top-k, per-class NMS and final cap.
struct PostprocessConfig {
  double score_threshold = 0.01;
  int pre_nms_top_k = 1000;
  double nms_iou_threshold = 0.8;
  int max_predictions = 200;

  friend bool operator==(const PostprocessConfig&,
                         const PostprocessConfig&) = default;
};

// Runtime post-prediction callback settings: 0.01 / 1000 / 0.8 / 200.
PostprocessConfig DefaultPostprocessConfig();

// Settings used for the training-time validation metric: 0.01 / 10 / 0.7 / 10.
PostprocessConfig ValidationPostprocessConfig();

// Looks up a preset by name ("default" or "validation").
absl::StatusOr<PostprocessConfig> PostprocessPreset(std::string_view name);

absl::Status Validate(const PostprocessConfig& config);

// Keeps detections with score >= threshold, in input order.
std::vector<Detection> FilterByScore(std::span<const Detection> dets,
                                     double threshold);

// The k best detections in descending score order. Equal scores keep their
// input order.
std::vector<Detection> TopK(std::span<const Detection> dets, int k);

// Greedy hard NMS over detections of a single class and image. A box is
// suppressed when its IoU with an already kept box is strictly greater than
// `iou_threshold`. Kept boxes are returned in selection order. Returns
// InvalidArgument for mixed class or image ids.
absl::StatusOr<std::vector<Detection>> NmsSingleClass(
    std::span<const Detection> dets, double iou_threshold);

// Full pipeline, applied independently to each image: score filter, top-k,
// per-class NMS, then the max_predictions cap by descending score (ties by
// class id, then input position). Output is grouped by ascending image id.
absl::StatusOr<std::vector<Detection>> Postprocess(
    std::span<const Detection> dets, const PostprocessConfig& config);

}  // namespace detkit

#endif  // DETKIT_POSTPROCESS_H_
