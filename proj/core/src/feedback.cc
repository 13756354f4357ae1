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
#include "detkit/feedback.h"

#include <algorithm>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"

namespace detkit {

std::string SpeakableName(std::string_view class_name) {
  std::string_view rest = class_name;
  const size_t sep = rest.find_first_of("_ -");
  const std::string_view head = rest.substr(0, sep);
  if (sep != std::string_view::npos && !head.empty() &&
      std::all_of(head.begin(), head.end(),
                  [](char c) { return absl::ascii_isdigit(c); })) {
    std::string_view tail = rest.substr(sep + 1);
    if (!tail.empty()) rest = tail;
  }
  std::string text(rest);
  std::replace(text.begin(), text.end(), '_', ' ');
  // Collapses doubled separators and keeps tabs out of the listing format.
  std::vector<std::string> words =
      absl::StrSplit(text, absl::ByAnyChar(" \t\r\n"), absl::SkipEmpty());
  std::string out = absl::StrJoin(words, " ");
  return out.empty() ? std::string(class_name) : out;
}

absl::StatusOr<std::vector<Utterance>> Utterances(
    std::span<const Detection> dets, const ClassTable& classes, int max_items) {
  if (max_items < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("max_items must be positive, got ", max_items));
  }
  std::vector<size_t> order(dets.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return dets[a].score > dets[b].score;
  });
  if (order.size() > static_cast<size_t>(max_items)) order.resize(max_items);

  std::vector<Utterance> out;
  out.reserve(order.size());
  for (size_t i : order) {
    auto name = classes.Name(dets[i].class_id);
    if (!name) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown class id ", dets[i].class_id));
    }
    const int index = static_cast<int>(out.size());
    out.push_back({index, SpeakableName(*name), absl::StrCat(index, ".wav")});
  }
  return out;
}

std::string FormatUtterance(const Utterance& u) {
  return absl::StrCat(u.index, "\t", u.text, "\t", u.suggested_filename);
}

}  // namespace detkit
