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
#ifndef DETKIT_REPORT_H_
#define DETKIT_REPORT_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "absl/status/statusor.h"
#include "detkit/ingest.h"
#include "detkit/losses.h"
#include "detkit/metrics.h"
#include "detkit/sweep.h"

namespace detkit {

// A metrics report plus what is needed to render it on its own.
struct ReportDocument {
  MetricsReport metrics;
  std::map<int, std::string> class_names;
  std::optional<LossDiagnostics> losses;
};

ReportDocument MakeReportDocument(const MetricsReport& metrics,
                                  const ClassTable& classes,
                                  std::optional<LossDiagnostics> losses = {});

std::string ReportToJson(const ReportDocument& doc);
absl::StatusOr<ReportDocument> ReportFromJson(std::string_view json);

// One row per class (class_id,name,tp,fp,fn,ap,ar) and a final summary row
// whose ap column is mAP and ar column is overall recall. Classes without
// ground truth leave ap/ar empty.
std::string ReportToCsv(const ReportDocument& doc);

// Summary metric table followed by a per-class AP/AR table.
std::string ReportToMarkdown(const ReportDocument& doc);

// lr,batch,h,w,score,status with one row per trial in enumeration order.
std::string TrialsToCsv(const SweepResult& result);
std::string BestPointToJson(const SweepResult& result);

}  // namespace detkit

#endif  // DETKIT_REPORT_H_
