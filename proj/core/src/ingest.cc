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
#include "detkit/ingest.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "json.hpp"

namespace detkit {

namespace {

using Json = nlohmann::json;

absl::StatusOr<Json> ParseJson(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    return absl::InvalidArgumentError(absl::StrCat(
        "malformed JSON at byte ", e.byte, ": ", e.what()));
  }
}

absl::StatusOr<const Json*> Field(const Json& obj, const char* key,
                                  const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    return absl::InvalidArgumentError(
        absl::StrCat(where, ": missing field '", key, "'"));
  }
  return &*it;
}

absl::StatusOr<int> IntField(const Json& obj, const char* key,
                             const std::string& where) {
  auto f = Field(obj, key, where);
  if (!f.ok()) return f.status();
  const Json& v = **f;
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == std::floor(d)) return static_cast<int>(d);
  }
  return absl::InvalidArgumentError(
      absl::StrCat(where, ": field '", key, "' must be an integer"));
}

absl::StatusOr<double> NumberField(const Json& obj, const char* key,
                                   const std::string& where) {
  auto f = Field(obj, key, where);
  if (!f.ok()) return f.status();
  if (!(*f)->is_number()) {
    return absl::InvalidArgumentError(
        absl::StrCat(where, ": field '", key, "' must be a number"));
  }
  return (*f)->get<double>();
}

absl::StatusOr<std::array<double, 4>> BboxField(const Json& obj,
                                                const std::string& where) {
  auto f = Field(obj, "bbox", where);
  if (!f.ok()) return f.status();
  const Json& v = **f;
  if (!v.is_array() || v.size() != 4) {
    return absl::InvalidArgumentError(
        absl::StrCat(where, ": bbox must be an array [x, y, w, h]"));
  }
  std::array<double, 4> out;
  for (size_t i = 0; i < 4; ++i) {
    if (!v[i].is_number()) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": bbox entries must be numbers"));
    }
    out[i] = v[i].get<double>();
  }
  return out;
}

absl::StatusOr<const Json*> ArrayField(const Json& root, const char* key) {
  auto f = Field(root, key, "COCO file");
  if (!f.ok()) return f.status();
  if (!(*f)->is_array()) {
    return absl::InvalidArgumentError(
        absl::StrCat("COCO file: '", key, "' must be an array"));
  }
  return *f;
}

Json BoxToXywh(const Box& b) {
  return Json::array({b.x1(), b.y1(), b.width(), b.height()});
}

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double Uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

absl::StatusOr<std::vector<double>> ApplyPerChannel(
    std::span<const double> values, const NormalizationStats& stats,
    bool forward) {
  const size_t c = stats.channels();
  if (values.size() % c != 0) {
    return absl::InvalidArgumentError(
        absl::StrCat(values.size(), " values are not a multiple of ", c,
                     " channels"));
  }
  std::vector<double> out(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    const double mu = stats.mean()[i % c];
    const double sigma = stats.stddev()[i % c];
    out[i] = forward ? (values[i] - mu) / sigma : values[i] * sigma + mu;
  }
  return out;
}

}  // namespace

absl::StatusOr<ClassTable> ClassTable::Create(std::vector<Entry> entries) {
  std::set<int> ids;
  std::set<std::string> names;
  for (const Entry& e : entries) {
    if (e.name.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("class ", e.id, " has an empty name"));
    }
    if (!ids.insert(e.id).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate class id ", e.id));
    }
    if (!names.insert(e.name).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate class name '", e.name, "'"));
    }
  }
  return ClassTable(std::move(entries));
}

bool ClassTable::Contains(int id) const { return Name(id).has_value(); }

std::optional<std::string_view> ClassTable::Name(int id) const {
  for (const Entry& e : entries_) {
    if (e.id == id) return e.name;
  }
  return std::nullopt;
}

absl::Status Validate(const Dataset& dataset) {
  std::map<int, ImageDims> dims;
  for (const ImageInfo& img : dataset.images) {
    if (!dims.emplace(img.id, img.dims).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate image id ", img.id));
    }
  }
  std::set<int> bad_images;
  std::set<int> bad_classes;
  std::set<int> ann_ids;
  for (const Annotation& a : dataset.annotations) {
    if (!ann_ids.insert(a.annotation_id).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate annotation id ", a.annotation_id));
    }
    auto it = dims.find(a.image_id);
    if (it == dims.end()) bad_images.insert(a.image_id);
    if (!dataset.classes.Contains(a.class_id)) bad_classes.insert(a.class_id);
    if (Area(a.box) <= 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("annotation ", a.annotation_id, " has zero area"));
    }
    if (it != dims.end() && !Contains(it->second, a.box)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "annotation ", a.annotation_id, " lies outside image ", a.image_id));
    }
  }
  if (!bad_images.empty() || !bad_classes.empty()) {
    std::string msg = "dangling references:";
    if (!bad_images.empty()) {
      absl::StrAppend(&msg, " image_id [", absl::StrJoin(bad_images, ", "), "]");
    }
    if (!bad_classes.empty()) {
      absl::StrAppend(&msg, " category_id [", absl::StrJoin(bad_classes, ", "),
                      "]");
    }
    return absl::InvalidArgumentError(msg);
  }
  return absl::OkStatus();
}

absl::StatusOr<Dataset> ParseCoco(std::string_view json) {
  auto root = ParseJson(json);
  if (!root.ok()) return root.status();
  if (!root->is_object()) {
    return absl::InvalidArgumentError("COCO file: top level must be an object");
  }
  auto images = ArrayField(*root, "images");
  if (!images.ok()) return images.status();
  auto annotations = ArrayField(*root, "annotations");
  if (!annotations.ok()) return annotations.status();
  auto categories = ArrayField(*root, "categories");
  if (!categories.ok()) return categories.status();

  Dataset ds;
  std::vector<ClassTable::Entry> entries;
  for (size_t i = 0; i < (*categories)->size(); ++i) {
    const Json& c = (**categories)[i];
    const std::string where = absl::StrCat("categories[", i, "]");
    auto id = IntField(c, "id", where);
    if (!id.ok()) return id.status();
    auto name = Field(c, "name", where);
    if (!name.ok()) return name.status();
    if (!(*name)->is_string()) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": name must be a string"));
    }
    entries.push_back({*id, (*name)->get<std::string>()});
  }
  auto classes = ClassTable::Create(std::move(entries));
  if (!classes.ok()) return classes.status();
  ds.classes = *std::move(classes);

  std::map<int, ImageDims> dims;
  for (size_t i = 0; i < (*images)->size(); ++i) {
    const Json& im = (**images)[i];
    const std::string where = absl::StrCat("images[", i, "]");
    auto id = IntField(im, "id", where);
    if (!id.ok()) return id.status();
    auto w = IntField(im, "width", where);
    if (!w.ok()) return w.status();
    auto h = IntField(im, "height", where);
    if (!h.ok()) return h.status();
    auto d = ImageDims::Create(*w, *h);
    if (!d.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": ", d.status().message()));
    }
    std::string file_name;
    if (auto it = im.find("file_name"); it != im.end() && it->is_string()) {
      file_name = it->get<std::string>();
    }
    ds.images.push_back({*id, std::move(file_name), *d});
    dims.emplace(*id, *d);
  }

  std::set<int> bad_images;
  std::set<int> bad_classes;
  for (size_t i = 0; i < (*annotations)->size(); ++i) {
    const Json& an = (**annotations)[i];
    const std::string where = absl::StrCat("annotations[", i, "]");
    auto id = IntField(an, "id", where);
    if (!id.ok()) return id.status();
    auto image_id = IntField(an, "image_id", where);
    if (!image_id.ok()) return image_id.status();
    auto category_id = IntField(an, "category_id", where);
    if (!category_id.ok()) return category_id.status();
    auto xywh = BboxField(an, where);
    if (!xywh.ok()) return xywh.status();

    const auto [x, y, w, h] = *xywh;
    if (w <= 0 || h <= 0) {
      return absl::InvalidArgumentError(absl::StrCat(
          where, " (id ", *id, "): bbox width/height must be positive, got ",
          w, " x ", h));
    }
    auto it = dims.find(*image_id);
    if (it == dims.end()) bad_images.insert(*image_id);
    if (!ds.classes.Contains(*category_id)) bad_classes.insert(*category_id);
    if (it == dims.end()) continue;

    auto box = Box::FromXywh(x, y, w, h);
    if (!box.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": ", box.status().message()));
    }
    const Box clipped = Clip(*box, it->second);
    if (Area(clipped) <= 0) {
      return absl::InvalidArgumentError(absl::StrCat(
          where, " (id ", *id, "): bbox lies outside image ", *image_id));
    }
    ds.annotations.push_back({clipped, *category_id, *image_id, *id});
  }
  if (!bad_images.empty() || !bad_classes.empty()) {
    std::string msg = "dangling references:";
    if (!bad_images.empty()) {
      absl::StrAppend(&msg, " image_id [", absl::StrJoin(bad_images, ", "), "]");
    }
    if (!bad_classes.empty()) {
      absl::StrAppend(&msg, " category_id [", absl::StrJoin(bad_classes, ", "),
                      "]");
    }
    return absl::InvalidArgumentError(msg);
  }
  if (auto s = Validate(ds); !s.ok()) return s;
  return ds;
}

std::string SerializeCoco(const Dataset& dataset) {
  Json images = Json::array();
  for (const ImageInfo& img : dataset.images) {
    images.push_back({{"id", img.id},
                      {"file_name", img.file_name},
                      {"width", img.dims.width()},
                      {"height", img.dims.height()}});
  }
  Json annotations = Json::array();
  for (const Annotation& a : dataset.annotations) {
    annotations.push_back({{"id", a.annotation_id},
                           {"image_id", a.image_id},
                           {"category_id", a.class_id},
                           {"bbox", BoxToXywh(a.box)},
                           {"area", Area(a.box)},
                           {"iscrowd", 0}});
  }
  Json categories = Json::array();
  for (const ClassTable::Entry& e : dataset.classes.entries()) {
    categories.push_back({{"id", e.id}, {"name", e.name}});
  }
  Json root = {{"images", std::move(images)},
               {"annotations", std::move(annotations)},
               {"categories", std::move(categories)}};
  return root.dump(2) + "\n";
}

absl::StatusOr<PredictionSet> ParsePredictionSet(std::string_view json,
                                                 const ClassTable& classes) {
  auto root = ParseJson(json);
  if (!root.ok()) return root.status();
  if (!root->is_array()) {
    return absl::InvalidArgumentError("results file: top level must be an array");
  }
  PredictionSet out;
  std::set<int> unknown;
  for (size_t i = 0; i < root->size(); ++i) {
    const Json& r = (*root)[i];
    const std::string where = absl::StrCat("results[", i, "]");
    if (!r.is_object()) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": record must be an object"));
    }
    auto image_id = IntField(r, "image_id", where);
    if (!image_id.ok()) return image_id.status();
    auto category_id = IntField(r, "category_id", where);
    if (!category_id.ok()) return category_id.status();
    auto score = NumberField(r, "score", where);
    if (!score.ok()) return score.status();
    if (!(*score >= 0 && *score <= 1)) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": score must be in [0, 1], got ", *score));
    }
    auto xywh = BboxField(r, where);
    if (!xywh.ok()) return xywh.status();
    auto box = Box::FromXywh((*xywh)[0], (*xywh)[1], (*xywh)[2], (*xywh)[3]);
    if (!box.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": ", box.status().message()));
    }
    if (!classes.Contains(*category_id)) unknown.insert(*category_id);

    std::optional<CoordinateDistribution> dist;
    if (auto it = r.find("distribution"); it != r.end()) {
      if (!it->is_array() || it->size() != 4 || !(*it)[0].is_array()) {
        return absl::InvalidArgumentError(absl::StrCat(
            where, ": distribution must be four arrays of probabilities"));
      }
      const size_t bins = (*it)[0].size();
      std::vector<double> probs;
      for (const Json& side : *it) {
        if (!side.is_array() || side.size() != bins) {
          return absl::InvalidArgumentError(absl::StrCat(
              where, ": distribution rows must have equal length"));
        }
        for (const Json& p : side) {
          if (!p.is_number()) {
            return absl::InvalidArgumentError(
                absl::StrCat(where, ": distribution entries must be numbers"));
          }
          probs.push_back(p.get<double>());
        }
      }
      auto d = CoordinateDistribution::Create(static_cast<int>(bins),
                                              std::move(probs));
      if (!d.ok()) {
        return absl::InvalidArgumentError(
            absl::StrCat(where, ": ", d.status().message()));
      }
      dist = *std::move(d);
    }
    out.detections.push_back({*box, *category_id, *score, *image_id});
    out.distributions.push_back(std::move(dist));
  }
  if (!unknown.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("results reference unknown category ids: ",
                     absl::StrJoin(unknown, ", ")));
  }
  return out;
}

absl::StatusOr<std::vector<Detection>> ParsePredictions(
    std::string_view json, const ClassTable& classes) {
  auto set = ParsePredictionSet(json, classes);
  if (!set.ok()) return set.status();
  return std::move(set->detections);
}

std::string SerializePredictions(std::span<const Detection> dets) {
  Json root = Json::array();
  for (const Detection& d : dets) {
    root.push_back({{"image_id", d.image_id},
                    {"category_id", d.class_id},
                    {"bbox", BoxToXywh(d.box)},
                    {"score", d.score}});
  }
  return root.dump(2) + "\n";
}

absl::StatusOr<NormalizationStats> NormalizationStats::Create(
    std::vector<double> mean, std::vector<double> stddev) {
  if (mean.empty() || mean.size() != stddev.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("normalization needs matching non-empty mean/stddev, got ",
                     mean.size(), " and ", stddev.size()));
  }
  for (size_t c = 0; c < stddev.size(); ++c) {
    if (!(stddev[c] > 0) || !std::isfinite(stddev[c])) {
      return absl::InvalidArgumentError(absl::StrCat(
          "stddev must be positive, channel ", c, " has ", stddev[c]));
    }
  }
  return NormalizationStats(std::move(mean), std::move(stddev));
}

absl::StatusOr<std::vector<double>> NormalizePixels(
    std::span<const double> values, const NormalizationStats& stats) {
  return ApplyPerChannel(values, stats, /*forward=*/true);
}

absl::StatusOr<std::vector<double>> DenormalizePixels(
    std::span<const double> values, const NormalizationStats& stats) {
  return ApplyPerChannel(values, stats, /*forward=*/false);
}

absl::StatusOr<AugmentResult> Augment(const Dataset& dataset,
                                      std::span<const AugmentOp> ops,
                                      uint64_t seed) {
  if (auto s = Validate(dataset); !s.ok()) return s;
  for (const AugmentOp& op : ops) {
    if (const auto* s = std::get_if<ScaleOp>(&op)) {
      if (!(s->sx > 0) || !(s->sy > 0)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "scale factors must be positive, got ", s->sx, ", ", s->sy));
      }
    }
    if (const auto* r = std::get_if<RandomAugmentOp>(&op)) {
      if (!(r->scale_min > 0) || r->scale_max < r->scale_min) {
        return absl::InvalidArgumentError("invalid random scale range");
      }
    }
  }

  std::mt19937_64 rng(seed);
  AugmentResult result;
  result.dataset.classes = dataset.classes;

  std::map<int, std::vector<Annotation>> per_image;
  for (const Annotation& a : dataset.annotations) {
    per_image[a.image_id].push_back(a);
  }

  for (const ImageInfo& image : dataset.images) {
    ImageDims dims = image.dims;
    std::vector<Annotation> anns = per_image[image.id];

    auto flip = [&]() -> absl::Status {
      for (Annotation& a : anns) {
        auto b = FlipHorizontal(a.box, dims);
        if (!b.ok()) return b.status();
        a.box = *b;
      }
      return absl::OkStatus();
    };
    auto rotate = [&]() -> absl::Status {
      for (Annotation& a : anns) {
        auto r = Rotate90(a.box, dims);
        if (!r.ok()) return r.status();
        a.box = r->first;
      }
      dims = *ImageDims::Create(dims.height(), dims.width());
      return absl::OkStatus();
    };
    auto scale = [&](double sx, double sy) -> absl::Status {
      const int w = std::max(1, static_cast<int>(std::lround(dims.width() * sx)));
      const int h =
          std::max(1, static_cast<int>(std::lround(dims.height() * sy)));
      dims = *ImageDims::Create(w, h);
      for (Annotation& a : anns) {
        auto b = Scale(a.box, sx, sy);
        if (!b.ok()) return b.status();
        a.box = Clip(*b, dims);
      }
      return absl::OkStatus();
    };

    for (const AugmentOp& op : ops) {
      absl::Status s;
      if (std::holds_alternative<FlipHorizontalOp>(op)) {
        s = flip();
      } else if (std::holds_alternative<Rotate90Op>(op)) {
        s = rotate();
      } else if (const auto* so = std::get_if<ScaleOp>(&op)) {
        s = scale(so->sx, so->sy);
      } else {
        const auto& r = std::get<RandomAugmentOp>(op);
        // Draw all three variates unconditionally so the stream position
        // does not depend on outcomes.
        const double u_flip = Uniform01(rng);
        const double u_rot = Uniform01(rng);
        const double u_scale = Uniform01(rng);
        if (u_flip < r.flip_probability) s = flip();
        if (s.ok() && u_rot < r.rotate_probability) s = rotate();
        if (s.ok()) {
          const double f = r.scale_min + (r.scale_max - r.scale_min) * u_scale;
          s = scale(f, f);
        }
      }
      if (!s.ok()) return s;

      auto degenerate = [](const Annotation& a) { return Area(a.box) <= 0; };
      result.dropped += static_cast<int>(
          std::count_if(anns.begin(), anns.end(), degenerate));
      std::erase_if(anns, degenerate);
    }

    result.dataset.images.push_back({image.id, image.file_name, dims});
    result.dataset.annotations.insert(result.dataset.annotations.end(),
                                      anns.begin(), anns.end());
  }

  // Keep the input annotation order.
  std::map<int, size_t> position;
  for (size_t i = 0; i < dataset.annotations.size(); ++i) {
    position[dataset.annotations[i].annotation_id] = i;
  }
  std::sort(result.dataset.annotations.begin(),
            result.dataset.annotations.end(),
            [&](const Annotation& a, const Annotation& b) {
              return position[a.annotation_id] < position[b.annotation_id];
            });

  if (auto s = Validate(result.dataset); !s.ok()) return s;
  return result;
}

}  // namespace detkit
