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
#ifndef DETKIT_FEEDBACK_H_
#define DETKIT_FEEDBACK_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "detkit/ingest.h"
#include "detkit/postprocess.h"

namespace detkit {

inline constexpr int kDefaultMaxUtterances = 13;

// One spoken item: "sugar box" saved as "0.wav".
struct Utterance {
  int index = 0;
  std::string text;
  std::string suggested_filename;

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

// "004_sugar_box" -> "sugar box". Drops one leading all-digit token and its
// separator, then turns underscores into spaces. Names that would become
// empty keep their digits.
std::string SpeakableName(std::string_view class_name);

// Utterances for the `max_items` highest-scoring detections (ties by input
// position), indexed from 0. Returns InvalidArgument for a non-positive
// `max_items` or a class id missing from `classes`.
absl::StatusOr<std::vector<Utterance>> Utterances(
    std::span<const Detection> dets, const ClassTable& classes,
    int max_items = kDefaultMaxUtterances);

// "<index>\t<text>\t<filename>".
std::string FormatUtterance(const Utterance& u);

}  // namespace detkit

#endif  // DETKIT_FEEDBACK_H_
