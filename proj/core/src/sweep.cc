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
#include "detkit/sweep.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <set>
#include <thread>
#include <utility>

#include "absl/strings/str_cat.h"

namespace detkit {

namespace {

template <typename T, typename Less = std::less<T>>
bool HasDuplicates(const std::vector<T>& v, Less less = {}) {
  std::vector<T> sorted = v;
  std::sort(sorted.begin(), sorted.end(), less);
  for (size_t i = 1; i < sorted.size(); ++i) {
    if (!less(sorted[i - 1], sorted[i])) return true;
  }
  return false;
}

Trial RunOne(const SweepPoint& point, const SweepEvaluator& evaluator) {
  Trial trial{.point = point};
  try {
    absl::StatusOr<double> score = evaluator(point);
    if (!score.ok()) {
      trial.error = std::string(score.status().message());
    } else if (!std::isfinite(*score) || *score < 0) {
      trial.error = absl::StrCat("evaluator returned invalid score ", *score,
                                 " (must be finite and >= 0)");
    } else {
      trial.score = *score;
    }
  } catch (const std::exception& e) {
    trial.error = absl::StrCat("evaluator threw: ", e.what());
  }
  return trial;
}

}  // namespace

SweepGrid DefaultSweepGrid() {
  return SweepGrid{
      .learning_rates = {1e-3, 5e-4, 1e-4},
      .batch_sizes = {8, 16, 32},
      .input_sizes = {{416, 416}, {512, 512}, {608, 608}},
  };
}

absl::Status Validate(const SweepGrid& grid) {
  if (grid.learning_rates.empty() || grid.batch_sizes.empty() ||
      grid.input_sizes.empty()) {
    return absl::InvalidArgumentError("sweep grid lists must be non-empty");
  }
  for (double lr : grid.learning_rates) {
    if (!(lr > 0) || !std::isfinite(lr)) {
      return absl::InvalidArgumentError(
          absl::StrCat("learning rate must be positive, got ", lr));
    }
  }
  for (int b : grid.batch_sizes) {
    if (b <= 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("batch size must be positive, got ", b));
    }
  }
  for (const InputSize& s : grid.input_sizes) {
    if (s.height <= 0 || s.width <= 0) {
      return absl::InvalidArgumentError(absl::StrCat(
          "input size must be positive, got ", s.height, "x", s.width));
    }
  }
  if (HasDuplicates(grid.learning_rates)) {
    return absl::InvalidArgumentError("duplicate learning rate in sweep grid");
  }
  if (HasDuplicates(grid.batch_sizes)) {
    return absl::InvalidArgumentError("duplicate batch size in sweep grid");
  }
  if (HasDuplicates(grid.input_sizes, [](const InputSize& a, const InputSize& b) {
        return std::pair(a.height, a.width) < std::pair(b.height, b.width);
      })) {
    return absl::InvalidArgumentError("duplicate input size in sweep grid");
  }
  return absl::OkStatus();
}

std::ostream& operator<<(std::ostream& os, const SweepPoint& p) {
  return os << "(lr=" << p.learning_rate << ", batch=" << p.batch_size
            << ", input=" << p.input_size.height << "x" << p.input_size.width
            << ")";
}

std::vector<SweepPoint> EnumerateGrid(const SweepGrid& grid) {
  std::vector<SweepPoint> points;
  points.reserve(grid.learning_rates.size() * grid.batch_sizes.size() *
                 grid.input_sizes.size());
  for (double lr : grid.learning_rates) {
    for (int batch : grid.batch_sizes) {
      for (const InputSize& size : grid.input_sizes) {
        points.push_back({lr, batch, size});
      }
    }
  }
  return points;
}

absl::StatusOr<SweepResult> RunSweep(const SweepGrid& grid,
                                     const SweepEvaluator& evaluator,
                                     const SweepOptions& options) {
  if (auto s = Validate(grid); !s.ok()) return s;
  if (!evaluator) return absl::InvalidArgumentError("sweep needs an evaluator");
  if (options.workers < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("workers must be >= 1, got ", options.workers));
  }

  const std::vector<SweepPoint> points = EnumerateGrid(grid);
  SweepResult result;
  result.trials.resize(points.size());

  const int workers =
      std::min<int>(options.workers, static_cast<int>(points.size()));
  if (workers == 1) {
    for (size_t i = 0; i < points.size(); ++i) {
      result.trials[i] = RunOne(points[i], evaluator);
    }
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (size_t i = next++; i < points.size(); i = next++) {
          result.trials[i] = RunOne(points[i], evaluator);
        }
      });
    }
  }  // jthreads join here.

  // Best-update in enumeration order, independent of completion order.
  for (size_t i = 0; i < result.trials.size(); ++i) {
    const Trial& t = result.trials[i];
    if (!t.ok()) {
      result.failed.push_back(static_cast<int>(i));
      continue;
    }
    if (result.best_index < 0 || *t.score > result.best_score) {
      result.best_score = *t.score;
      result.best_point = t.point;
      result.best_index = static_cast<int>(i);
    }
  }
  if (result.best_index < 0) {
    return absl::FailedPreconditionError(absl::StrCat(
        "all ", points.size(), " sweep points failed; first error: ",
        result.trials.front().error));
  }
  return result;
}

}  // namespace detkit
