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

#include <random>

#include <gtest/gtest.h>
#include "absl/strings/str_cat.h"
#include "oracles.h"
#include "planted.h"

namespace detkit {
namespace {

using oracle::MakeBox;

constexpr char kMinimal[] = R"({
  "images": [{"id": 1, "file_name": "a.jpg", "width": 100, "height": 80}],
  "annotations": [{"id": 5, "image_id": 1, "category_id": 3,
                   "bbox": [10, 20, 30, 40], "area": 1200, "iscrowd": 0}],
  "categories": [{"id": 3, "name": "004_sugar_box"}]
})";

Dataset RandomDataset(std::mt19937_64& rng) {
  Dataset ds;
  ds.classes = testing_fixtures::YcbClassTable();
  std::uniform_int_distribution<int> side(20, 200), cls(0, 12), count(0, 8);
  int ann = 1;
  for (int img = 1; img <= 4; ++img) {
    const int w = side(rng), h = side(rng);
    ds.images.push_back({img, absl::StrCat("img", img, ".jpg"),
                         *ImageDims::Create(w, h)});
    for (int k = count(rng); k > 0; --k) {
      std::uniform_int_distribution<int> xs(0, w - 1), ys(0, h - 1);
      int x1 = xs(rng), y1 = ys(rng);
      const int x2 = std::uniform_int_distribution<int>(x1 + 1, w)(rng);
      const int y2 = std::uniform_int_distribution<int>(y1 + 1, h)(rng);
      ds.annotations.push_back({MakeBox(x1, y1, x2, y2), cls(rng), img, ann++});
    }
  }
  return ds;
}

std::map<int, int> ClassHistogram(const Dataset& ds) {
  std::map<int, int> h;
  for (const auto& a : ds.annotations) ++h[a.class_id];
  return h;
}

TEST(ClassTableTest, Validation) {
  EXPECT_FALSE(ClassTable::Create({{1, "a"}, {1, "b"}}).ok());
  EXPECT_FALSE(ClassTable::Create({{1, "a"}, {2, "a"}}).ok());
  EXPECT_FALSE(ClassTable::Create({{1, ""}}).ok());
  auto t = *ClassTable::Create({{4, "mug"}, {2, "apple"}});
  EXPECT_TRUE(t.Contains(4));
  EXPECT_FALSE(t.Contains(3));
  EXPECT_EQ(*t.Name(2), "apple");
  EXPECT_FALSE(t.Name(9).has_value());
}

TEST(ParseCocoTest, Minimal) {
  auto ds = ParseCoco(kMinimal);
  ASSERT_TRUE(ds.ok()) << ds.status();
  ASSERT_EQ(ds->images.size(), 1u);
  ASSERT_EQ(ds->annotations.size(), 1u);
  ASSERT_EQ(ds->classes.size(), 1u);
  EXPECT_EQ(ds->images[0].file_name, "a.jpg");
  EXPECT_EQ(ds->images[0].dims, *ImageDims::Create(100, 80));
  EXPECT_EQ(ds->annotations[0].box, MakeBox(10, 20, 40, 60));
  EXPECT_EQ(ds->annotations[0].class_id, 3);
  EXPECT_EQ(ds->annotations[0].annotation_id, 5);
}

TEST(ParseCocoTest, DanglingCategoryIsNamed) {
  std::string json = kMinimal;
  json.replace(json.find("\"category_id\": 3"), 16, "\"category_id\": 77");
  auto ds = ParseCoco(json);
  ASSERT_FALSE(ds.ok());
  EXPECT_NE(ds.status().message().find("77"), std::string::npos);
}

TEST(ParseCocoTest, DanglingImageIsNamed) {
  std::string json = kMinimal;
  json.replace(json.find("\"image_id\": 1"), 13, "\"image_id\": 42");
  auto ds = ParseCoco(json);
  ASSERT_FALSE(ds.ok());
  EXPECT_NE(ds.status().message().find("42"), std::string::npos);
}

TEST(ParseCocoTest, Errors) {
  EXPECT_FALSE(ParseCoco("{").ok());
  EXPECT_FALSE(ParseCoco("[]").ok());
  EXPECT_FALSE(ParseCoco(R"({"images": [], "annotations": []})").ok());
  std::string zero = kMinimal;
  zero.replace(zero.find("[10, 20, 30, 40]"), 16, "[10, 20, 0, 40]");
  EXPECT_FALSE(ParseCoco(zero).ok());
  std::string outside = kMinimal;
  outside.replace(outside.find("[10, 20, 30, 40]"), 16, "[500, 20, 30, 40]");
  EXPECT_FALSE(ParseCoco(outside).ok());
  std::string bad_dims = kMinimal;
  bad_dims.replace(bad_dims.find("\"width\": 100"), 12, "\"width\": 0");
  EXPECT_FALSE(ParseCoco(bad_dims).ok());
}

TEST(ParseCocoTest, ClipsBoxesToTheImage) {
  std::string json = kMinimal;
  json.replace(json.find("[10, 20, 30, 40]"), 16, "[90, 20, 30, 40]");
  auto ds = *ParseCoco(json);
  EXPECT_EQ(ds.annotations[0].box, MakeBox(90, 20, 100, 60));
}

TEST(ParseCocoTest, IgnoresExtraFields) {
  std::string json = kMinimal;
  json.replace(json.find("\"iscrowd\": 0"), 12,
               "\"iscrowd\": 0, \"pose\": [1, 2, 3], \"depth\": \"d.png\"");
  EXPECT_TRUE(ParseCoco(json).ok());
}

TEST(ParseCocoTest, RoundTripIsAFixedPoint) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const Dataset ds = RandomDataset(rng);
    const std::string once = SerializeCoco(ds);
    auto parsed = ParseCoco(once);
    ASSERT_TRUE(parsed.ok()) << parsed.status();
    EXPECT_EQ(*parsed, ds);
    EXPECT_EQ(SerializeCoco(*parsed), once);
  }
}

TEST(ParsePredictionsTest, Examples) {
  const ClassTable classes = *ClassTable::Create({{1, "mug"}});
  EXPECT_TRUE(ParsePredictions("[]", classes)->empty());

  auto one = ParsePredictions(
      R"([{"image_id": 3, "category_id": 1, "bbox": [0, 0, 10, 10],
           "score": 0.73}])",
      classes);
  ASSERT_TRUE(one.ok()) << one.status();
  ASSERT_EQ(one->size(), 1u);
  EXPECT_EQ((*one)[0], (Detection{MakeBox(0, 0, 10, 10), 1, 0.73, 3}));

  auto bad = ParsePredictions(
      R"([{"image_id": 3, "category_id": 1, "bbox": [0, 0, 10, 10],
           "score": 1.5}])",
      classes);
  EXPECT_EQ(bad.status().code(), absl::StatusCode::kInvalidArgument);
}

TEST(ParsePredictionsTest, UnknownCategoriesAreListed) {
  const ClassTable classes = *ClassTable::Create({{1, "mug"}});
  auto r = ParsePredictions(
      R"([{"image_id": 1, "category_id": 8, "bbox": [0, 0, 1, 1], "score": 0.5},
          {"image_id": 1, "category_id": 9, "bbox": [0, 0, 1, 1], "score": 0.5}])",
      classes);
  ASSERT_FALSE(r.ok());
  EXPECT_NE(r.status().message().find("8"), std::string::npos);
  EXPECT_NE(r.status().message().find("9"), std::string::npos);
}

TEST(ParsePredictionsTest, Distributions) {
  const ClassTable classes = *ClassTable::Create({{1, "mug"}});
  auto set = ParsePredictionSet(
      R"([{"image_id": 1, "category_id": 1, "bbox": [0, 0, 1, 1], "score": 0.5,
           "distribution": [[0.5, 0.5], [1, 0], [0, 1], [0.25, 0.75]]},
          {"image_id": 1, "category_id": 1, "bbox": [0, 0, 1, 1], "score": 0.5}])",
      classes);
  ASSERT_TRUE(set.ok()) << set.status();
  ASSERT_EQ(set->distributions.size(), 2u);
  ASSERT_TRUE(set->distributions[0].has_value());
  EXPECT_EQ(set->distributions[0]->bins(), 2);
  EXPECT_EQ(set->distributions[0]->row(3)[1], 0.75);
  EXPECT_FALSE(set->distributions[1].has_value());

  auto bad = ParsePredictionSet(
      R"([{"image_id": 1, "category_id": 1, "bbox": [0, 0, 1, 1], "score": 0.5,
           "distribution": [[0.5, 0.6], [1, 0], [0, 1], [0.25, 0.75]]}])",
      classes);
  EXPECT_FALSE(bad.ok());
}

TEST(SerializePredictionsTest, RoundTrip) {
  std::mt19937_64 rng(12);
  auto dets = oracle::RandomDetections(rng, 40, 3, 9);
  const ClassTable classes = *ClassTable::Create({{3, "apple"}});
  auto parsed = ParsePredictions(SerializePredictions(dets), classes);
  ASSERT_TRUE(parsed.ok()) << parsed.status();
  ASSERT_EQ(parsed->size(), dets.size());
  for (size_t i = 0; i < dets.size(); ++i) {
    EXPECT_EQ((*parsed)[i].score, dets[i].score);
    EXPECT_NEAR((*parsed)[i].box.x1(), dets[i].box.x1(), 1e-9);
    EXPECT_NEAR((*parsed)[i].box.y2(), dets[i].box.y2(), 1e-9);
  }
}

TEST(NormalizePixelsTest, Examples) {
  auto stats = *NormalizationStats::Create({128}, {64});
  const std::vector<double> in = {0, 128, 255};
  EXPECT_EQ(*NormalizePixels(in, stats), (std::vector<double>{-2, 0, 1.984375}));

  auto identity = *NormalizationStats::Create({0}, {1});
  EXPECT_EQ(*NormalizePixels(in, identity), in);

  const std::vector<double> flat(5, 128);
  EXPECT_EQ(*NormalizePixels(flat, stats), std::vector<double>(5, 0.0));
}

TEST(NormalizePixelsTest, PerChannelAndInvertible) {
  auto stats = *NormalizationStats::Create({123.7, 116.3, 103.5},
                                           {58.4, 57.1, 57.4});
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> px(0, 255);
  std::vector<double> v(3 * 50);
  for (double& x : v) x = px(rng);
  auto n = *NormalizePixels(v, stats);
  EXPECT_NEAR(n[4], (v[4] - 116.3) / 57.1, 1e-12);
  auto back = *DenormalizePixels(n, stats);
  for (size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(back[i], v[i], 1e-9);
}

TEST(NormalizePixelsTest, Errors) {
  EXPECT_FALSE(NormalizationStats::Create({1}, {0}).ok());
  EXPECT_FALSE(NormalizationStats::Create({1, 2}, {1}).ok());
  EXPECT_FALSE(NormalizationStats::Create({}, {}).ok());
  auto stats = *NormalizationStats::Create({0, 0, 0}, {1, 1, 1});
  EXPECT_FALSE(NormalizePixels(std::vector<double>{1, 2}, stats).ok());
}

TEST(AugmentTest, EmptyOpListIsIdentity) {
  std::mt19937_64 rng(2);
  const Dataset ds = RandomDataset(rng);
  auto r = *Augment(ds, {}, 0);
  EXPECT_EQ(r.dataset, ds);
  EXPECT_EQ(r.dropped, 0);
}

TEST(AugmentTest, DoubleFlipIsIdentity) {
  std::mt19937_64 rng(3);
  const Dataset ds = RandomDataset(rng);
  const std::vector<AugmentOp> ops = {FlipHorizontalOp{}, FlipHorizontalOp{}};
  EXPECT_EQ(Augment(ds, ops, 0)->dataset, ds);
}

TEST(AugmentTest, ScaleExample) {
  Dataset ds;
  ds.classes = *ClassTable::Create({{0, "mug"}});
  ds.images.push_back({1, "a.jpg", *ImageDims::Create(100, 100)});
  ds.annotations.push_back({MakeBox(10, 10, 20, 20), 0, 1, 1});
  const std::vector<AugmentOp> ops = {ScaleOp{2, 2}};
  auto r = *Augment(ds, ops, 0);
  EXPECT_EQ(r.dataset.images[0].dims, *ImageDims::Create(200, 200));
  EXPECT_EQ(r.dataset.annotations[0].box, MakeBox(20, 20, 40, 40));
}

TEST(AugmentTest, RotateSwapsDims) {
  Dataset ds;
  ds.classes = *ClassTable::Create({{0, "mug"}});
  ds.images.push_back({1, "a.jpg", *ImageDims::Create(10, 4)});
  ds.annotations.push_back({MakeBox(0, 0, 2, 1), 0, 1, 1});
  const std::vector<AugmentOp> ops = {Rotate90Op{}};
  auto r = *Augment(ds, ops, 0);
  EXPECT_EQ(r.dataset.images[0].dims, *ImageDims::Create(4, 10));
  EXPECT_EQ(r.dataset.annotations[0].box, MakeBox(3, 0, 4, 2));
}

TEST(AugmentTest, DropsBoxesThatCollapse) {
  Dataset ds;
  ds.classes = *ClassTable::Create({{0, "mug"}});
  ds.images.push_back({1, "a.jpg", *ImageDims::Create(3, 3)});
  // A thin box that falls off the rounded 1x1 image: x in [1.0, 1.2] clips to zero width.
  ds.annotations.push_back({MakeBox(2.5, 0, 3, 3), 0, 1, 1});
  ds.annotations.push_back({MakeBox(0, 0, 1, 1), 0, 1, 2});
  const std::vector<AugmentOp> ops = {ScaleOp{0.4, 0.4}};
  auto r = *Augment(ds, ops, 0);
  EXPECT_EQ(r.dropped, 1);
  ASSERT_EQ(r.dataset.annotations.size(), 1u);
  EXPECT_EQ(r.dataset.annotations[0].annotation_id, 2);
}

TEST(AugmentTest, RejectsBadScale) {
  std::mt19937_64 rng(3);
  const std::vector<AugmentOp> ops = {ScaleOp{0, 1}};
  EXPECT_FALSE(Augment(RandomDataset(rng), ops, 0).ok());
}

TEST(AugmentTest, RandomOpsPreserveCountsAndAreSeeded) {
  std::mt19937_64 rng(8);
  const std::vector<AugmentOp> ops = {RandomAugmentOp{}, RandomAugmentOp{},
                                      FlipHorizontalOp{}};
  for (int trial = 0; trial < 30; ++trial) {
    const Dataset ds = RandomDataset(rng);
    auto r = *Augment(ds, ops, trial);
    EXPECT_TRUE(Validate(r.dataset).ok());
    if (r.dropped == 0) {
      EXPECT_EQ(r.dataset.annotations.size(), ds.annotations.size());
      EXPECT_EQ(ClassHistogram(r.dataset), ClassHistogram(ds));
    }
    EXPECT_EQ(r.dataset.annotations.size() + r.dropped, ds.annotations.size());
    EXPECT_EQ(Augment(ds, ops, trial)->dataset, r.dataset);
  }
}

}  // namespace
}  // namespace detkit
