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
#ifndef DETKIT_GEOMETRY_H_
#define DETKIT_GEOMETRY_H_

#include <ostream>
#include <utility>

#include "absl/status/statusor.h"

namespace detkit {

// Axis-aligned box in continuous pixel coordinates, corner convention.
// The box covers the real region [x1, x2] x [y1, y2]; zero width or height is
// allowed, negative extents are not.
class Box {
 public:
  // Zero-area box at the origin.
  constexpr Box() = default;

  // Returns InvalidArgument if x2 < x1, y2 < y1 or any coordinate is not
  // finite.
  static absl::StatusOr<Box> Create(double x1, double y1, double x2, double y2);

  // Converts a COCO-style [x, y, width, height] rectangle.
  static absl::StatusOr<Box> FromXywh(double x, double y, double width,
                                      double height);

  constexpr double x1() const { return x1_; }
  constexpr double y1() const { return y1_; }
  constexpr double x2() const { return x2_; }
  constexpr double y2() const { return y2_; }
  constexpr double width() const { return x2_ - x1_; }
  constexpr double height() const { return y2_ - y1_; }

  friend constexpr bool operator==(const Box&, const Box&) = default;

 private:
  constexpr Box(double x1, double y1, double x2, double y2)
      : x1_(x1), y1_(y1), x2_(x2), y2_(y2) {}

  double x1_ = 0.0;
  double y1_ = 0.0;
  double x2_ = 0.0;
  double y2_ = 0.0;
};

std::ostream& operator<<(std::ostream& os, const Box& box);

// Image extent in whole pixels. Both sides strictly positive.
class ImageDims {
 public:
  static absl::StatusOr<ImageDims> Create(int width, int height);

  constexpr int width() const { return width_; }
  constexpr int height() const { return height_; }

  friend constexpr bool operator==(const ImageDims&,
                                   const ImageDims&) = default;

 private:
  constexpr ImageDims(int width, int height) : width_(width), height_(height) {}

  int width_;
  int height_;
};

std::ostream& operator<<(std::ostream& os, const ImageDims& dims);

double Area(const Box& box);

// Area of the overlap region; 0 for disjoint or touching boxes.
double IntersectionArea(const Box& a, const Box& b);

// Intersection over union. Defined as 0 when the union is empty (both boxes
// degenerate) so the function is total.
double Iou(const Box& a, const Box& b);

// True if the box lies inside [0, width] x [0, height].
bool Contains(const ImageDims& dims, const Box& box);

// Mirror about the vertical centre line. OutOfRange if the box is not inside
// the image.
absl::StatusOr<Box> FlipHorizontal(const Box& box, const ImageDims& dims);

// Multiplies x coordinates by `sx` and y coordinates by `sy`. Both factors
// must be strictly positive.
absl::StatusOr<Box> Scale(const Box& box, double sx, double sy);

// Rotates the image 90 degrees clockwise, i.e. (x, y) -> (H - y, x). Returns
// the transformed box together with the rotated image extent (H, W).
absl::StatusOr<std::pair<Box, ImageDims>> Rotate90(const Box& box,
                                                   const ImageDims& dims);

// Clamps every coordinate into the image. Boxes entirely outside collapse to a
// zero-area box on the nearest edge.
Box Clip(const Box& box, const ImageDims& dims);

}  // namespace detkit

#endif  // DETKIT_GEOMETRY_H_
