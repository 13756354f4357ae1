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
#include <random>
#include <vector>

#include <benchmark/benchmark.h>
#include "detkit/geometry.h"
#include "detkit/metrics.h"
#include "detkit/postprocess.h"

namespace detkit {
namespace {

// Boxes clustered on a 640x640 canvas so NMS suppresses a realistic share.
std::vector<Detection> MakeDetections(int n, int classes, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> xy(0.0, 600.0), wh(8.0, 64.0),
      score(0.0, 1.0);
  std::uniform_int_distribution<int> cls(0, classes - 1);
  std::vector<Detection> dets;
  dets.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double x = xy(rng), y = xy(rng);
    dets.push_back(
        {*Box::Create(x, y, x + wh(rng), y + wh(rng)), cls(rng), score(rng), 0});
  }
  return dets;
}

void BM_Iou(benchmark::State& state) {
  const auto dets = MakeDetections(1024, 1, 1);
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        Iou(dets[i % 1024].box, dets[(i * 7 + 3) % 1024].box));
    ++i;
  }
}
BENCHMARK(BM_Iou);

void BM_NmsSingleClass(benchmark::State& state) {
  const auto dets = MakeDetections(state.range(0), 1, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(NmsSingleClass(dets, 0.5));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NmsSingleClass)->RangeMultiplier(4)->Range(16, 1024)->Complexity();

void BM_Postprocess(benchmark::State& state) {
  const auto dets = MakeDetections(state.range(0), 13, 3);
  const PostprocessConfig config = DefaultPostprocessConfig();
  for (auto _ : state) {
    benchmark::DoNotOptimize(Postprocess(dets, config));
  }
}
BENCHMARK(BM_Postprocess)->Arg(1500)->Arg(8400);

void BM_Evaluate(benchmark::State& state) {
  const int n = state.range(0);
  auto preds = MakeDetections(n, 13, 4);
  std::vector<Annotation> gts;
  for (int i = 0; i < n; i += 2) {
    gts.push_back({preds[i].box, preds[i].class_id, 0, i + 1});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(Evaluate(preds, gts, 0.5));
  }
}
BENCHMARK(BM_Evaluate)->Arg(200)->Arg(2000);

void BM_AveragePrecision(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  std::bernoulli_distribution hit(0.6);
  std::vector<ScoredLabel> labels(state.range(0));
  int tps = 0;
  for (ScoredLabel& l : labels) {
    l = {score(rng), hit(rng)};
    tps += l.is_tp;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(AveragePrecision(labels, tps + 1));
  }
}
BENCHMARK(BM_AveragePrecision)->Arg(100)->Arg(10000);

}  // namespace
}  // namespace detkit

BENCHMARK_MAIN();
