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
#include "detkit/report.h"

#include <set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "json.hpp"

namespace detkit {

namespace {

using Json = nlohmann::json;

std::string Num(double v) { return absl::StrFormat("%.9g", v); }

// RFC 4180 quoting for names that contain separators.
std::string CsvField(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

Json CountsJson(const ConfusionCounts& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}};
}

std::string NameOf(const ReportDocument& doc, int cls) {
  auto it = doc.class_names.find(cls);
  return it == doc.class_names.end() ? std::string() : it->second;
}

}  // namespace

ReportDocument MakeReportDocument(const MetricsReport& metrics,
                                  const ClassTable& classes,
                                  std::optional<LossDiagnostics> losses) {
  ReportDocument doc{.metrics = metrics, .losses = std::move(losses)};
  for (const auto& e : classes.entries()) doc.class_names[e.id] = e.name;
  return doc;
}

std::string ReportToJson(const ReportDocument& doc) {
  const MetricsReport& m = doc.metrics;
  Json classes = Json::array();
  for (const auto& [cls, counts] : m.per_class_counts) {
    Json row = {{"class_id", cls},
                {"name", NameOf(doc, cls)},
                {"tp", counts.tp},
                {"fp", counts.fp},
                {"fn", counts.fn},
                {"ap", nullptr},
                {"ar", nullptr}};
    if (auto it = m.per_class_ap.find(cls); it != m.per_class_ap.end()) {
      row["ap"] = it->second;
    }
    if (auto it = m.per_class_ar.find(cls); it != m.per_class_ar.end()) {
      row["ar"] = it->second;
    }
    classes.push_back(std::move(row));
  }
  Json root = {{"iou_threshold", m.iou_threshold},
               {"precision", m.precision},
               {"recall", m.recall},
               {"map50", m.map50},
               {"f1", m.f1},
               {"totals", CountsJson(m.totals)},
               {"classes", std::move(classes)}};
  if (doc.losses) {
    const LossDiagnostics& l = *doc.losses;
    root["losses"] = {{"cls", l.breakdown.cls},
                      {"iou", l.breakdown.iou},
                      {"dfl", l.breakdown.dfl},
                      {"total", l.breakdown.total},
                      {"predictions", l.predictions},
                      {"matched_pairs", l.matched_pairs},
                      {"dfl_pairs", l.dfl_pairs}};
  }
  return root.dump(2) + "\n";
}

absl::StatusOr<ReportDocument> ReportFromJson(std::string_view json) {
  try {
    const Json root = Json::parse(json.begin(), json.end());
    ReportDocument doc;
    MetricsReport& m = doc.metrics;
    m.iou_threshold = root.at("iou_threshold").get<double>();
    m.precision = root.at("precision").get<double>();
    m.recall = root.at("recall").get<double>();
    m.map50 = root.at("map50").get<double>();
    m.f1 = root.at("f1").get<double>();
    const Json& t = root.at("totals");
    m.totals = {t.at("tp").get<int>(), t.at("fp").get<int>(),
                t.at("fn").get<int>()};
    for (const Json& row : root.at("classes")) {
      const int cls = row.at("class_id").get<int>();
      m.per_class_counts[cls] = {row.at("tp").get<int>(),
                                 row.at("fp").get<int>(),
                                 row.at("fn").get<int>()};
      doc.class_names[cls] = row.at("name").get<std::string>();
      if (!row.at("ap").is_null()) m.per_class_ap[cls] = row["ap"].get<double>();
      if (!row.at("ar").is_null()) m.per_class_ar[cls] = row["ar"].get<double>();
    }
    if (auto it = root.find("losses"); it != root.end()) {
      LossDiagnostics l;
      l.breakdown = {it->at("cls").get<double>(), it->at("iou").get<double>(),
                     it->at("dfl").get<double>(), it->at("total").get<double>()};
      l.predictions = it->at("predictions").get<int>();
      l.matched_pairs = it->at("matched_pairs").get<int>();
      l.dfl_pairs = it->at("dfl_pairs").get<int>();
      doc.losses = l;
    }
    return doc;
  } catch (const Json::parse_error& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed report JSON at byte ", e.byte, ": ", e.what()));
  } catch (const Json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("invalid report JSON: ", e.what()));
  }
}

std::string ReportToCsv(const ReportDocument& doc) {
  const MetricsReport& m = doc.metrics;
  std::string out = "class_id,name,tp,fp,fn,ap,ar\n";
  for (const auto& [cls, c] : m.per_class_counts) {
    std::string ap;
    std::string ar;
    if (auto it = m.per_class_ap.find(cls); it != m.per_class_ap.end()) {
      ap = Num(it->second);
    }
    if (auto it = m.per_class_ar.find(cls); it != m.per_class_ar.end()) {
      ar = Num(it->second);
    }
    absl::StrAppend(&out, cls, ",", CsvField(NameOf(doc, cls)), ",", c.tp, ",",
                    c.fp, ",", c.fn, ",", ap, ",", ar, "\n");
  }
  absl::StrAppend(&out, "all,summary,", m.totals.tp, ",", m.totals.fp, ",",
                  m.totals.fn, ",", Num(m.map50), ",", Num(m.recall), "\n");
  return out;
}

std::string ReportToMarkdown(const ReportDocument& doc) {
  const MetricsReport& m = doc.metrics;
  const std::string iou = absl::StrFormat("%.2f", m.iou_threshold);
  std::string out = "| Metric | Value |\n|---|---|\n";
  if (doc.losses) {
    const LossBreakdown& l = doc.losses->breakdown;
    absl::StrAppendFormat(&out, "| loss_cls | %.2f |\n", l.cls);
    absl::StrAppendFormat(&out, "| loss_iou | %.2f |\n", l.iou);
    absl::StrAppendFormat(&out, "| loss_dfl | %.2f |\n", l.dfl);
    absl::StrAppendFormat(&out, "| loss | %.2f |\n", l.total);
  }
  absl::StrAppendFormat(&out, "| Precision@%s | %.2f |\n", iou, m.precision);
  absl::StrAppendFormat(&out, "| Recall@%s | %.2f |\n", iou, m.recall);
  absl::StrAppendFormat(&out, "| mAP@%s | %.2f |\n", iou, m.map50);
  absl::StrAppendFormat(&out, "| F1@%s | %.2f |\n", iou, m.f1);

  out += "\n| Class | AP | AR |\n|---|---|---|\n";
  for (const auto& [cls, ap] : m.per_class_ap) {
    std::string name = NameOf(doc, cls);
    if (name.empty()) name = absl::StrCat(cls);
    const auto ar = m.per_class_ar.find(cls);
    absl::StrAppendFormat(&out, "| %s | %.2f | %.2f |\n", name, ap,
                          ar == m.per_class_ar.end() ? 0.0 : ar->second);
  }
  return out;
}

std::string TrialsToCsv(const SweepResult& result) {
  std::string out = "lr,batch,h,w,score,status\n";
  for (const Trial& t : result.trials) {
    absl::StrAppend(&out, Num(t.point.learning_rate), ",", t.point.batch_size,
                    ",", t.point.input_size.height, ",",
                    t.point.input_size.width, ",",
                    t.ok() ? Num(*t.score) : std::string(), ",",
                    t.ok() ? "ok" : "failed", "\n");
  }
  return out;
}

std::string BestPointToJson(const SweepResult& result) {
  Json failures = Json::array();
  for (int i : result.failed) {
    const Trial& t = result.trials[i];
    failures.push_back({{"index", i}, {"error", t.error}});
  }
  const SweepPoint& p = result.best_point;
  Json root = {{"best_score", result.best_score},
               {"best_index", result.best_index},
               {"learning_rate", p.learning_rate},
               {"batch_size", p.batch_size},
               {"input_size", {p.input_size.height, p.input_size.width}},
               {"trials", result.trials.size()},
               {"failures", std::move(failures)}};
  return root.dump(2) + "\n";
}

}  // namespace detkit
