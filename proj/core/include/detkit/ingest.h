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
#ifndef DETKIT_INGEST_H_
#define DETKIT_INGEST_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "detkit/geometry.h"
#include "detkit/losses.h"
#include "detkit/metrics.h"
#include "detkit/postprocess.h"

namespace detkit {

// Ordered (id, name) category list, e.g. {1, "004_sugar_box"}.
class ClassTable {
 public:
  struct Entry {
    int id;
    std::string name;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  ClassTable() = default;

  // Ids and names must be unique; names non-empty.
  static absl::StatusOr<ClassTable> Create(std::vector<Entry> entries);

  const std::vector<Entry>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }
  bool Contains(int id) const;
  // Name for `id`, or nullopt.
  std::optional<std::string_view> Name(int id) const;

  friend bool operator==(const ClassTable&, const ClassTable&) = default;

 private:
  explicit ClassTable(std::vector<Entry> entries)
      : entries_(std::move(entries)) {}

  std::vector<Entry> entries_;
};

struct ImageInfo {
  int id = 0;
  std::string file_name;
  ImageDims dims = *ImageDims::Create(1, 1);

  friend bool operator==(const ImageInfo&, const ImageInfo&) = default;
};

struct Dataset {
  std::vector<ImageInfo> images;
  std::vector<Annotation> annotations;
  ClassTable classes;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Checks referential integrity, unique image and annotation ids, positive
// annotation area and that every box lies inside its image.
absl::Status Validate(const Dataset& dataset);

// Parses a COCO instances file. bbox is [x, y, w, h]; boxes are converted to
// corners and clipped to the image. Fields this toolkit does not model
// (segmentation, pose, depth, ...) are ignored.
//
// Errors: malformed JSON (message carries the byte offset), missing arrays,
// dangling image/category ids (all listed), negative or zero width/height.
absl::StatusOr<Dataset> ParseCoco(std::string_view json);

// Inverse of ParseCoco. Deterministic output.
std::string SerializeCoco(const Dataset& dataset);

// COCO results records together with optional per-record side distributions
// (key "distribution": four arrays of bin probabilities).
struct PredictionSet {
  std::vector<Detection> detections;
  // Aligned with `detections`.
  std::vector<std::optional<CoordinateDistribution>> distributions;
};

// Parses a COCO results array of {image_id, category_id, bbox, score}.
// Scores must be in [0, 1] and categories must exist in `classes`.
absl::StatusOr<PredictionSet> ParsePredictionSet(std::string_view json,
                                                 const ClassTable& classes);

absl::StatusOr<std::vector<Detection>> ParsePredictions(
    std::string_view json, const ClassTable& classes);

// Writes detections as a COCO results array. Deterministic output.
std::string SerializePredictions(std::span<const Detection> dets);

// Per-channel pixel statistics.
class NormalizationStats {
 public:
  // mean and stddev must be the same non-zero length; every stddev > 0.
  static absl::StatusOr<NormalizationStats> Create(std::vector<double> mean,
                                                   std::vector<double> stddev);

  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& stddev() const { return stddev_; }
  size_t channels() const { return mean_.size(); }

 private:
  NormalizationStats(std::vector<double> mean, std::vector<double> stddev)
      : mean_(std::move(mean)), stddev_(std::move(stddev)) {}

  std::vector<double> mean_;
  std::vector<double> stddev_;
};

// (v - mean[c]) / stddev[c] over channel-interleaved values, where c is the
// position modulo the channel count.
absl::StatusOr<std::vector<double>> NormalizePixels(
    std::span<const double> values, const NormalizationStats& stats);

// v * stddev[c] + mean[c].
absl::StatusOr<std::vector<double>> DenormalizePixels(
    std::span<const double> values, const NormalizationStats& stats);

struct FlipHorizontalOp {};
struct Rotate90Op {};
struct ScaleOp {
  double sx = 1.0;
  double sy = 1.0;
};
// Per image: flip with `flip_probability`, rotate 90 degrees with
// `rotate_probability`, then scale both axes by one factor drawn uniformly
// from [scale_min, scale_max].
struct RandomAugmentOp {
  double flip_probability = 0.5;
  double rotate_probability = 0.5;
  double scale_min = 0.8;
  double scale_max = 1.2;
};

using AugmentOp =
    std::variant<FlipHorizontalOp, Rotate90Op, ScaleOp, RandomAugmentOp>;

struct AugmentResult {
  Dataset dataset;
  // Annotations removed because a transform left them with zero area.
  int dropped = 0;
};

// Applies `ops` in order to every image and its annotations. Scaled image
// sides are rounded to whole pixels (minimum 1) and boxes are clipped to the
// new extent. The same seed always produces the same output.
absl::StatusOr<AugmentResult> Augment(const Dataset& dataset,
                                      std::span<const AugmentOp> ops,
                                      uint64_t seed);

}  // namespace detkit

#endif  // DETKIT_INGEST_H_
