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
#ifndef DETKIT_SWEEP_H_
#define DETKIT_SWEEP_H_

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace detkit {

struct InputSize {
  int height = 0;
  int width = 0;
  friend bool operator==(const InputSize&, const InputSize&) = default;
};

// Hyperparameter lattice. Each list is non-empty with unique, positive values.
struct SweepGrid {
  std::vector<double> learning_rates;
  std::vector<int> batch_sizes;
  std::vector<InputSize> input_sizes;
};

// lr {1e-3, 5e-4, 1e-4} x batch {8, 16, 32} x input {416, 512, 608}^2.
SweepGrid DefaultSweepGrid();

absl::Status Validate(const SweepGrid& grid);

struct SweepPoint {
  double learning_rate = 0.0;
  int batch_size = 0;
  InputSize input_size;
  friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

std::ostream& operator<<(std::ostream& os, const SweepPoint& p);

// Every combination, learning rate outermost and input size innermost.
std::vector<SweepPoint> EnumerateGrid(const SweepGrid& grid);

// Returns a validation score >= 0 for one point. Must be deterministic and
// safe to call concurrently when the sweep runs with more than one worker.
using SweepEvaluator = std::function<absl::StatusOr<double>(const SweepPoint&)>;

struct Trial {
  SweepPoint point;
  // Set on success.
  std::optional<double> score;
  // Set on failure.
  std::string error;

  bool ok() const { return score.has_value(); }
};

struct SweepResult {
  double best_score = 0.0;
  SweepPoint best_point;
  int best_index = -1;
  // In enumeration order, one per grid point.
  std::vector<Trial> trials;
  // Indices into `trials`.
  std::vector<int> failed;
};

struct SweepOptions {
  int workers = 1;
};

// Evaluates every grid point exactly once. A point replaces the current best
// only if its score strictly exceeds it, so ties keep the earliest point.
// Failing points, and points with negative scores, are recorded as failed
// trials. Returns an error if the grid is invalid or every point fails.
absl::StatusOr<SweepResult> RunSweep(const SweepGrid& grid,
                                     const SweepEvaluator& evaluator,
                                     const SweepOptions& options = {});

}  // namespace detkit

#endif  // DETKIT_SWEEP_H_
