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

#include <algorithm>
#include <cmath>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace detkit {

absl::StatusOr<Box> Box::Create(double x1, double y1, double x2, double y2) {
  if (!std::isfinite(x1) || !std::isfinite(y1) || !std::isfinite(x2) ||
      !std::isfinite(y2)) {
    return absl::InvalidArgumentError("box coordinates must be finite");
  }
  if (x2 < x1 || y2 < y1) {
    return absl::InvalidArgumentError(absl::StrCat(
        "box has negative extent: (", x1, ", ", y1, ", ", x2, ", ", y2, ")"));
  }
  return Box(x1, y1, x2, y2);
}

absl::StatusOr<Box> Box::FromXywh(double x, double y, double width,
                                  double height) {
  if (width < 0 || height < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("negative width/height: [", x, ", ", y, ", ", width, ", ",
                     height, "]"));
  }
  return Create(x, y, x + width, y + height);
}

std::ostream& operator<<(std::ostream& os, const Box& box) {
  return os << "Box(" << box.x1() << ", " << box.y1() << ", " << box.x2()
            << ", " << box.y2() << ")";
}

absl::StatusOr<ImageDims> ImageDims::Create(int width, int height) {
  if (width <= 0 || height <= 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("image dims must be positive, got ", width, "x", height));
  }
  return ImageDims(width, height);
}

std::ostream& operator<<(std::ostream& os, const ImageDims& dims) {
  return os << dims.width() << "x" << dims.height();
}

double Area(const Box& box) { return box.width() * box.height(); }

double IntersectionArea(const Box& a, const Box& b) {
  const double w = std::min(a.x2(), b.x2()) - std::max(a.x1(), b.x1());
  const double h = std::min(a.y2(), b.y2()) - std::max(a.y1(), b.y1());
  if (w <= 0 || h <= 0) return 0.0;
  return w * h;
}

double Iou(const Box& a, const Box& b) {
  const double inter = IntersectionArea(a, b);
  const double uni = Area(a) + Area(b) - inter;
  if (uni <= 0) return 0.0;
  // Rounding can push inter/uni a hair past 1 for identical boxes.
  return std::clamp(inter / uni, 0.0, 1.0);
}

bool Contains(const ImageDims& dims, const Box& box) {
  return box.x1() >= 0 && box.y1() >= 0 && box.x2() <= dims.width() &&
         box.y2() <= dims.height();
}

namespace {

absl::Status CheckInside(const Box& box, const ImageDims& dims) {
  if (Contains(dims, box)) return absl::OkStatus();
  return absl::OutOfRangeError(
      absl::StrCat("box (", box.x1(), ", ", box.y1(), ", ", box.x2(), ", ",
                   box.y2(), ") is outside image ", dims.width(), "x",
                   dims.height()));
}

}  // namespace

absl::StatusOr<Box> FlipHorizontal(const Box& box, const ImageDims& dims) {
  if (auto s = CheckInside(box, dims); !s.ok()) return s;
  const double w = dims.width();
  return Box::Create(w - box.x2(), box.y1(), w - box.x1(), box.y2());
}

absl::StatusOr<Box> Scale(const Box& box, double sx, double sy) {
  if (!(sx > 0) || !(sy > 0) || !std::isfinite(sx) || !std::isfinite(sy)) {
    return absl::InvalidArgumentError(
        absl::StrCat("scale factors must be positive, got ", sx, ", ", sy));
  }
  return Box::Create(box.x1() * sx, box.y1() * sy, box.x2() * sx,
                     box.y2() * sy);
}

absl::StatusOr<std::pair<Box, ImageDims>> Rotate90(const Box& box,
                                                   const ImageDims& dims) {
  if (auto s = CheckInside(box, dims); !s.ok()) return s;
  // (x, y) -> (H - y, x). The y-range maps to a reversed x-range, the x-range
  // maps unchanged to y.
  const double h = dims.height();
  auto rotated = Box::Create(h - box.y2(), box.x1(), h - box.y1(), box.x2());
  if (!rotated.ok()) return rotated.status();
  auto new_dims = ImageDims::Create(dims.height(), dims.width());
  if (!new_dims.ok()) return new_dims.status();
  return std::make_pair(*rotated, *new_dims);
}

Box Clip(const Box& box, const ImageDims& dims) {
  const double w = dims.width();
  const double h = dims.height();
  // Clamping each coordinate independently preserves x1 <= x2 and y1 <= y2.
  return *Box::Create(std::clamp(box.x1(), 0.0, w), std::clamp(box.y1(), 0.0, h),
                      std::clamp(box.x2(), 0.0, w), std::clamp(box.y2(), 0.0, h));
}

}  // namespace detkit
