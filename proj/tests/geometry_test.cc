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
#include "detkit/geometry.h"

#include <random>

#include <gtest/gtest.h>
#include "oracles.h"

namespace detkit {
namespace {

using oracle::MakeBox;

ImageDims Dims(int w, int h) { return *ImageDims::Create(w, h); }

TEST(BoxTest, RejectsNegativeExtent) {
  EXPECT_FALSE(Box::Create(2, 0, 1, 1).ok());
  EXPECT_FALSE(Box::Create(0, 2, 1, 1).ok());
  EXPECT_TRUE(Box::Create(1, 1, 1, 5).ok());
  EXPECT_EQ(Box::Create(1, 0, 0, 1).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(BoxTest, FromXywh) {
  EXPECT_EQ(*Box::FromXywh(10, 20, 30, 40), MakeBox(10, 20, 40, 60));
  EXPECT_FALSE(Box::FromXywh(0, 0, -1, 1).ok());
}

TEST(ImageDimsTest, MustBePositive) {
  EXPECT_FALSE(ImageDims::Create(0, 4).ok());
  EXPECT_FALSE(ImageDims::Create(4, -1).ok());
}

TEST(AreaTest, Examples) {
  EXPECT_EQ(Area(MakeBox(0, 0, 2, 2)), 4);
  EXPECT_EQ(Area(MakeBox(1, 1, 1, 5)), 0);
  EXPECT_EQ(Area(MakeBox(0, 0, 3, 7)), 21);
}

TEST(IouTest, Examples) {
  EXPECT_DOUBLE_EQ(Iou(MakeBox(0, 0, 2, 2), MakeBox(0, 0, 2, 2)), 1.0);
  EXPECT_DOUBLE_EQ(Iou(MakeBox(0, 0, 1, 1), MakeBox(5, 5, 6, 6)), 0.0);
  // inter 1, union 7; confirmed by raster counting below.
  EXPECT_NEAR(Iou(MakeBox(0, 0, 2, 2), MakeBox(1, 1, 3, 3)), 1.0 / 7.0, 1e-12);
  EXPECT_NEAR(oracle::RasterIou({0, 0, 2, 2}, {1, 1, 3, 3}, 4), 1.0 / 7.0,
              1e-12);
}

TEST(IouTest, DegenerateUnionIsZero) {
  EXPECT_EQ(Iou(MakeBox(1, 1, 1, 1), MakeBox(1, 1, 1, 1)), 0.0);
  EXPECT_EQ(Iou(MakeBox(1, 1, 1, 5), MakeBox(1, 1, 1, 5)), 0.0);
}

TEST(IouTest, TouchingBoxesDoNotOverlap) {
  EXPECT_EQ(Iou(MakeBox(0, 0, 1, 1), MakeBox(1, 0, 2, 1)), 0.0);
}

TEST(IouTest, PropertiesOnRandomBoxes) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const auto ia = oracle::RandomIntBox(rng, 40);
    const auto ib = oracle::RandomIntBox(rng, 40);
    const Box a = MakeBox(ia.x1, ia.y1, ia.x2, ia.y2);
    const Box b = MakeBox(ib.x1, ib.y1, ib.x2, ib.y2);
    const double v = Iou(a, b);
    EXPECT_EQ(v, Iou(b, a));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_EQ(v == 0.0, IntersectionArea(a, b) == 0.0);
    EXPECT_DOUBLE_EQ(Iou(a, a), 1.0);
    EXPECT_NEAR(v, oracle::RasterIou(ia, ib, 40), 1e-6);

    // Invariance under a shared flip / rotation / translation.
    const ImageDims dims = Dims(40, 40);
    EXPECT_NEAR(Iou(*FlipHorizontal(a, dims), *FlipHorizontal(b, dims)), v,
                1e-12);
    EXPECT_NEAR(Iou(Rotate90(a, dims)->first, Rotate90(b, dims)->first), v,
                1e-12);
    const Box ta = MakeBox(a.x1() + 3, a.y1() + 5, a.x2() + 3, a.y2() + 5);
    const Box tb = MakeBox(b.x1() + 3, b.y1() + 5, b.x2() + 3, b.y2() + 5);
    EXPECT_NEAR(Iou(ta, tb), v, 1e-12);
  }
}

TEST(FlipHorizontalTest, Examples) {
  EXPECT_EQ(*FlipHorizontal(MakeBox(0, 0, 2, 2), Dims(10, 10)),
            MakeBox(8, 0, 10, 2));
  EXPECT_EQ(*FlipHorizontal(MakeBox(4, 1, 6, 3), Dims(10, 10)),
            MakeBox(4, 1, 6, 3));
  const Box b = MakeBox(1.5, 2, 7.25, 9);
  EXPECT_EQ(*FlipHorizontal(*FlipHorizontal(b, Dims(10, 10)), Dims(10, 10)), b);
}

TEST(FlipHorizontalTest, MatchesPixelFlip) {
  // Column x maps to column W-1-x; the flipped box must cover the same cells.
  const int w = 10;
  const oracle::IntBox src{0, 0, 2, 2};
  const Box flipped = *FlipHorizontal(MakeBox(0, 0, 2, 2), Dims(w, 4));
  for (int x = 0; x < w; ++x) {
    const bool in_src = src.x1 <= x && x + 1 <= src.x2;
    const int fx = w - 1 - x;
    const bool in_dst = flipped.x1() <= fx && fx + 1 <= flipped.x2();
    EXPECT_EQ(in_src, in_dst) << "column " << x;
  }
}

TEST(FlipHorizontalTest, OutOfBounds) {
  auto r = FlipHorizontal(MakeBox(8, 0, 11, 2), Dims(10, 10));
  EXPECT_EQ(r.status().code(), absl::StatusCode::kOutOfRange);
}

TEST(ScaleTest, Examples) {
  EXPECT_EQ(*Scale(MakeBox(1, 1, 2, 2), 2, 2), MakeBox(2, 2, 4, 4));
  const Box b = MakeBox(1.5, 2.5, 3, 9);
  EXPECT_EQ(*Scale(b, 1, 1), b);
  EXPECT_EQ(*Scale(MakeBox(0, 0, 3, 4), 2, 0.5), MakeBox(0, 0, 6, 2));
  EXPECT_DOUBLE_EQ(Area(*Scale(MakeBox(0, 0, 3, 4), 2, 0.5)),
                   Area(MakeBox(0, 0, 3, 4)) * 2 * 0.5);
}

TEST(ScaleTest, RejectsNonPositiveFactors) {
  EXPECT_EQ(Scale(MakeBox(0, 0, 1, 1), 0, 1).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_FALSE(Scale(MakeBox(0, 0, 1, 1), 1, -2).ok());
}

TEST(Rotate90Test, Example) {
  auto r = Rotate90(MakeBox(0, 0, 2, 1), Dims(10, 4));
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->first, MakeBox(3, 0, 4, 2));
  EXPECT_EQ(r->second, Dims(4, 10));
}

TEST(Rotate90Test, MatchesRasterRotation) {
  // Rotate a mask cell by cell: cell (x, y) -> (H-1-y, x).
  const int w = 10, h = 4;
  const oracle::IntBox src{2, 1, 5, 3};
  const Box rotated = Rotate90(MakeBox(2, 1, 5, 3), Dims(w, h))->first;
  int nx1 = w, ny1 = h * 10, nx2 = -1, ny2 = -1;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!(src.x1 <= x && x + 1 <= src.x2 && src.y1 <= y && y + 1 <= src.y2)) {
        continue;
      }
      const int rx = h - 1 - y, ry = x;
      nx1 = std::min(nx1, rx);
      ny1 = std::min(ny1, ry);
      nx2 = std::max(nx2, rx + 1);
      ny2 = std::max(ny2, ry + 1);
    }
  }
  EXPECT_EQ(rotated, MakeBox(nx1, ny1, nx2, ny2));
}

TEST(Rotate90Test, FourRotationsIsIdentity) {
  const Box b = MakeBox(1, 2, 7, 3);
  std::pair<Box, ImageDims> cur{b, Dims(10, 4)};
  for (int i = 0; i < 4; ++i) {
    cur = *Rotate90(cur.first, cur.second);
    EXPECT_DOUBLE_EQ(Area(cur.first), Area(b));
  }
  EXPECT_EQ(cur.first, b);
  EXPECT_EQ(cur.second, Dims(10, 4));
}

TEST(Rotate90Test, FullImage) {
  auto r = Rotate90(MakeBox(0, 0, 10, 4), Dims(10, 4));
  EXPECT_EQ(r->first, MakeBox(0, 0, 4, 10));
  EXPECT_EQ(r->second, Dims(4, 10));
}

TEST(Rotate90Test, OutOfBounds) {
  EXPECT_EQ(Rotate90(MakeBox(0, 0, 2, 5), Dims(10, 4)).status().code(),
            absl::StatusCode::kOutOfRange);
}

TEST(ClipTest, Examples) {
  const ImageDims d = Dims(10, 10);
  EXPECT_EQ(Clip(MakeBox(-1, -1, 3, 3), d), MakeBox(0, 0, 3, 3));
  EXPECT_EQ(Clip(MakeBox(2, 2, 5, 5), d), MakeBox(2, 2, 5, 5));
  const Box outside = Clip(MakeBox(11, 11, 12, 12), d);
  EXPECT_EQ(outside, MakeBox(10, 10, 10, 10));
  EXPECT_EQ(Area(outside), 0);
}

}  // namespace
}  // namespace detkit
