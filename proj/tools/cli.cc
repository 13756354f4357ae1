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
#include "cli.h"

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>
#include <utility>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "detkit/feedback.h"
#include "detkit/ingest.h"
#include "detkit/losses.h"
#include "detkit/metrics.h"
#include "detkit/postprocess.h"
#include "detkit/report.h"
#include "detkit/sweep.h"
#include "json.hpp"

namespace detkit::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Files and processes.

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open file: ", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

absl::Status WriteFile(const fs::path& path, const std::string& contents) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    return absl::PermissionDeniedError(
        absl::StrCat("cannot write file: ", path.string()));
  }
  out << contents;
  return out.good() ? absl::OkStatus()
                    : absl::InternalError(
                          absl::StrCat("write failed: ", path.string()));
}

std::string ShellQuote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::string Substitute(std::string text,
                       const std::vector<std::pair<std::string, std::string>>&
                           replacements) {
  for (const auto& [from, to] : replacements) {
    for (size_t pos = text.find(from); pos != std::string::npos;
         pos = text.find(from, pos + to.size())) {
      text.replace(pos, from.size(), to);
    }
  }
  return text;
}

struct CommandResult {
  int exit_code = 0;
  std::string output;
};

absl::StatusOr<CommandResult> RunShell(const std::string& command) {
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(command.c_str(), "r"),
                                             pclose);
  if (!pipe) {
    return absl::InternalError(absl::StrCat("cannot start: ", command));
  }
  CommandResult result;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe.get())) > 0) {
    result.output.append(buf, n);
  }
  const int status = pclose(pipe.release());
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128;
  return result;
}

// ---------------------------------------------------------------------------
// Layered settings: flag, then config file, then built-in default.

class Settings {
 public:
  absl::Status Load(const std::string& path) {
    if (path.empty()) return absl::OkStatus();
    auto text = ReadFile(path);
    if (!text.ok()) return text.status();
    try {
      config_ = Json::parse(*text);
    } catch (const Json::parse_error& e) {
      return absl::InvalidArgumentError(
          absl::StrCat("config ", path, ": ", e.what()));
    }
    if (!config_.is_object()) {
      return absl::InvalidArgumentError(
          absl::StrCat("config ", path, ": top level must be an object"));
    }
    return absl::OkStatus();
  }

  // Overwrites `target` with the flag value when the flag was given,
  // otherwise with the config entry when present.
  template <typename T>
  absl::Status Layer(const CLI::Option* flag, const T& flag_value,
                     const char* key, T& target) const {
    if (flag != nullptr && flag->count() > 0) {
      target = flag_value;
      return absl::OkStatus();
    }
    return FromConfig(key, target);
  }

  template <typename T>
  absl::Status FromConfig(const char* key, T& target) const {
    auto it = config_.find(key);
    if (it == config_.end()) return absl::OkStatus();
    try {
      target = it->get<T>();
    } catch (const Json::exception& e) {
      return absl::InvalidArgumentError(
          absl::StrCat("config key '", key, "': ", e.what()));
    }
    return absl::OkStatus();
  }

  bool Has(const char* key) const { return config_.contains(key); }
  const Json& config() const { return config_; }

 private:
  Json config_ = Json::object();
};

// Flags shared by every command that post-processes predictions.
struct PostprocessFlags {
  std::string preset = "default";
  double score_threshold = 0;
  int top_k = 0;
  double nms_threshold = 0;
  int max_predictions = 0;
  CLI::Option* preset_opt = nullptr;
  CLI::Option* score_opt = nullptr;
  CLI::Option* top_k_opt = nullptr;
  CLI::Option* nms_opt = nullptr;
  CLI::Option* max_opt = nullptr;

  void Register(CLI::App* app) {
    preset_opt = app->add_option("--preset", preset,
                                 "Post-processing preset: default|validation");
    score_opt = app->add_option("--score-threshold", score_threshold,
                                "Minimum confidence kept (default 0.01)");
    top_k_opt = app->add_option("--top-k", top_k,
                                "Candidates kept before NMS (default 1000)");
    nms_opt = app->add_option("--nms-threshold", nms_threshold,
                              "Suppress overlaps with IoU above this (0.8)");
    max_opt = app->add_option("--max-predictions", max_predictions,
                              "Per-image cap after NMS (default 200)");
  }

  absl::StatusOr<PostprocessConfig> Resolve(const Settings& s) const {
    std::string name = "default";
    if (auto st = s.Layer(preset_opt, preset, "preset", name); !st.ok()) {
      return st;
    }
    auto config = PostprocessPreset(name);
    if (!config.ok()) return config.status();
    PostprocessConfig c = *config;
    for (absl::Status st :
         {s.Layer(score_opt, score_threshold, "score_threshold",
                  c.score_threshold),
          s.Layer(top_k_opt, top_k, "top_k", c.pre_nms_top_k),
          s.Layer(nms_opt, nms_threshold, "nms_threshold",
                  c.nms_iou_threshold),
          s.Layer(max_opt, max_predictions, "max_predictions",
                  c.max_predictions)}) {
      if (!st.ok()) return st;
    }
    if (auto st = Validate(c); !st.ok()) return st;
    return c;
  }
};

struct PathFlag {
  std::string value;
  CLI::Option* opt = nullptr;

  absl::StatusOr<std::string> Resolve(const Settings& s, const char* key,
                                      bool required) const {
    std::string path;
    if (auto st = s.Layer(opt, value, key, path); !st.ok()) return st;
    if (path.empty() && required) {
      return absl::InvalidArgumentError(
          absl::StrCat("missing required --", key, " (flag or config key '",
                       key, "')"));
    }
    return path;
  }
};

struct OutputDirFlag {
  std::string value;
  CLI::Option* opt = nullptr;

  void Register(CLI::App* app) {
    opt = app->add_option(
        "--output-dir", value,
        absl::StrCat("Directory for output files (default $", kOutputDirEnv,
                     " or the working directory)"));
  }

  absl::StatusOr<fs::path> Resolve(const Settings& s) const {
    std::string dir;
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) dir = env;
    if (auto st = s.Layer(opt, value, "output_dir", dir); !st.ok()) return st;
    if (dir.empty()) dir = ".";
    return fs::path(dir);
  }
};

// ---------------------------------------------------------------------------
// Input helpers.

bool IsBlank(const std::string& s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

absl::StatusOr<Dataset> LoadDataset(const std::string& path) {
  auto text = ReadFile(path);
  if (!text.ok()) return text.status();
  auto ds = ParseCoco(*text);
  if (!ds.ok()) {
    return absl::Status(ds.status().code(),
                        absl::StrCat(path, ": ", ds.status().message()));
  }
  return ds;
}

// Without an annotation file, accept whatever category ids the results use.
absl::StatusOr<ClassTable> ClassesFromResults(const std::string& text) {
  std::set<int> ids;
  try {
    const Json root = Json::parse(text);
    if (root.is_array()) {
      for (const Json& r : root) {
        if (r.is_object() && r.contains("category_id") &&
            r["category_id"].is_number_integer()) {
          ids.insert(r["category_id"].get<int>());
        }
      }
    }
  } catch (const Json::exception&) {
    // Leave the detailed error to the results parser.
  }
  std::vector<ClassTable::Entry> entries;
  for (int id : ids) entries.push_back({id, absl::StrCat("class_", id)});
  return ClassTable::Create(std::move(entries));
}

absl::StatusOr<PredictionSet> LoadPredictions(const std::string& path,
                                              const ClassTable* classes) {
  auto text = ReadFile(path);
  if (!text.ok()) return text.status();
  if (IsBlank(*text)) return PredictionSet{};
  ClassTable table;
  if (classes != nullptr) {
    table = *classes;
  } else {
    auto derived = ClassesFromResults(*text);
    if (!derived.ok()) return derived.status();
    table = *std::move(derived);
  }
  auto set = ParsePredictionSet(*text, table);
  if (!set.ok()) {
    std::string msg = absl::StrCat(path, ": ", set.status().message());
    if (classes != nullptr) {
      std::vector<int> known;
      for (const auto& e : classes->entries()) known.push_back(e.id);
      absl::StrAppend(&msg, " (annotation categories: [",
                      absl::StrJoin(known, ", "), "])");
    }
    return absl::Status(set.status().code(), msg);
  }
  return set;
}

// Postprocess() returns copies; recover which input each output came from so
// per-detection side data (distributions) can follow it.
std::vector<size_t> SourceIndices(const std::vector<Detection>& inputs,
                                  const std::vector<Detection>& outputs) {
  using Key = std::tuple<int, int, double, double, double, double, double>;
  auto key = [](const Detection& d) {
    return Key{d.image_id, d.class_id, d.score, d.box.x1(),
               d.box.y1(), d.box.x2(), d.box.y2()};
  };
  std::map<Key, std::vector<size_t>> pending;
  for (size_t i = inputs.size(); i-- > 0;) pending[key(inputs[i])].push_back(i);
  std::vector<size_t> out;
  out.reserve(outputs.size());
  for (const Detection& d : outputs) {
    auto& stack = pending[key(d)];
    out.push_back(stack.back());
    stack.pop_back();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands. Each returns a status; Run() maps it to an exit code.

struct NmsCommand {
  std::string config;
  PathFlag predictions, annotations;
  std::string output;
  CLI::Option* output_opt = nullptr;
  OutputDirFlag output_dir;
  PostprocessFlags pp;

  void Register(CLI::App* app) {
    app->add_option("--config", config, "JSON config file");
    predictions.opt = app->add_option("--predictions", predictions.value,
                                      "COCO results JSON to post-process");
    annotations.opt =
        app->add_option("--annotations", annotations.value,
                        "COCO annotations whose categories validate results");
    output_opt = app->add_option(
        "--output", output,
        "Output path (default <output-dir>/predictions_nms.json)");
    output_dir.Register(app);
    pp.Register(app);
  }

  absl::Status Execute(std::ostream& out) const {
    Settings s;
    if (auto st = s.Load(config); !st.ok()) return st;
    auto pred_path = predictions.Resolve(s, "predictions", true);
    if (!pred_path.ok()) return pred_path.status();
    auto ann_path = annotations.Resolve(s, "annotations", false);
    if (!ann_path.ok()) return ann_path.status();
    auto pc = pp.Resolve(s);
    if (!pc.ok()) return pc.status();
    auto dir = output_dir.Resolve(s);
    if (!dir.ok()) return dir.status();

    std::optional<Dataset> ds;
    if (!ann_path->empty()) {
      auto loaded = LoadDataset(*ann_path);
      if (!loaded.ok()) return loaded.status();
      ds = *std::move(loaded);
    }
    auto set = LoadPredictions(*pred_path, ds ? &ds->classes : nullptr);
    if (!set.ok()) return set.status();
    auto kept = Postprocess(set->detections, *pc);
    if (!kept.ok()) return kept.status();

    std::string out_path = (*dir / "predictions_nms.json").string();
    if (auto st = s.Layer(output_opt, output, "output", out_path); !st.ok()) {
      return st;
    }
    if (auto st = WriteFile(out_path, SerializePredictions(*kept)); !st.ok()) {
      return st;
    }
    out << "kept " << kept->size() << " suppressed "
        << set->detections.size() - kept->size() << " of "
        << set->detections.size() << "\n";
    return absl::OkStatus();
  }
};

struct EvaluateCommand {
  std::string config;
  PathFlag predictions, annotations;
  OutputDirFlag output_dir;
  PostprocessFlags pp;
  double iou = 0.5;
  CLI::Option* iou_opt = nullptr;
  std::string format = "json";
  CLI::Option* format_opt = nullptr;
  bool losses = false;
  CLI::Option* losses_opt = nullptr;
  double lambda_iou = 1, lambda_dfl = 1, stride = 8;
  CLI::Option *lambda_iou_opt = nullptr, *lambda_dfl_opt = nullptr,
              *stride_opt = nullptr;

  void Register(CLI::App* app) {
    app->add_option("--config", config, "JSON config file");
    predictions.opt = app->add_option("--predictions", predictions.value,
                                      "COCO results JSON");
    annotations.opt = app->add_option("--annotations", annotations.value,
                                      "COCO annotations JSON (ground truth)");
    output_dir.Register(app);
    pp.Register(app);
    iou_opt = app->add_option("--iou-threshold", iou,
                              "Match threshold for TP (default 0.50)");
    format_opt = app->add_option("--format", format,
                                 "Report printed to stdout: json|csv")
                     ->check(CLI::IsMember({"json", "csv"}));
    losses_opt = app->add_flag("--losses", losses,
                               "Also report losses over matched pairs");
    lambda_iou_opt =
        app->add_option("--lambda-iou", lambda_iou, "IoU loss weight");
    lambda_dfl_opt =
        app->add_option("--lambda-dfl", lambda_dfl, "DFL loss weight");
    stride_opt = app->add_option(
        "--dfl-stride", stride, "Pixels per distribution bin (default 8)");
  }

  absl::Status Execute(std::ostream& out) const {
    Settings s;
    if (auto st = s.Load(config); !st.ok()) return st;
    auto pred_path = predictions.Resolve(s, "predictions", true);
    if (!pred_path.ok()) return pred_path.status();
    auto ann_path = annotations.Resolve(s, "annotations", true);
    if (!ann_path.ok()) return ann_path.status();
    auto pc = pp.Resolve(s);
    if (!pc.ok()) return pc.status();
    auto dir = output_dir.Resolve(s);
    if (!dir.ok()) return dir.status();

    double iou_threshold = 0.5;
    std::string fmt = "json";
    bool want_losses = false;
    LossWeights weights;
    double dfl_stride = 8;
    for (absl::Status st :
         {s.Layer(iou_opt, iou, "iou_threshold", iou_threshold),
          s.Layer(format_opt, format, "format", fmt),
          s.Layer(losses_opt, losses, "losses", want_losses),
          s.Layer(lambda_iou_opt, lambda_iou, "lambda_iou", weights.lambda_iou),
          s.Layer(lambda_dfl_opt, lambda_dfl, "lambda_dfl", weights.lambda_dfl),
          s.Layer(stride_opt, stride, "dfl_stride", dfl_stride)}) {
      if (!st.ok()) return st;
    }
    if (fmt != "json" && fmt != "csv") {
      return absl::InvalidArgumentError(
          absl::StrCat("format must be json or csv, got '", fmt, "'"));
    }

    auto ds = LoadDataset(*ann_path);
    if (!ds.ok()) return ds.status();
    auto set = LoadPredictions(*pred_path, &ds->classes);
    if (!set.ok()) return set.status();
    auto kept = Postprocess(set->detections, *pc);
    if (!kept.ok()) return kept.status();

    EvaluateOptions opts;
    opts.known_image_ids.emplace();
    for (const ImageInfo& im : ds->images) opts.known_image_ids->insert(im.id);
    auto metrics = Evaluate(*kept, ds->annotations, iou_threshold, opts);
    if (!metrics.ok()) return metrics.status();

    std::optional<LossDiagnostics> diag;
    if (want_losses) {
      std::vector<std::optional<CoordinateDistribution>> dists;
      if (!set->distributions.empty()) {
        for (size_t i : SourceIndices(set->detections, *kept)) {
          dists.push_back(set->distributions[i]);
        }
      }
      auto d = DiagnoseLosses(*kept, ds->annotations, iou_threshold, weights,
                              dists, dfl_stride);
      if (!d.ok()) return d.status();
      diag = *d;
    }

    const ReportDocument doc = MakeReportDocument(*metrics, ds->classes, diag);
    const std::string json = ReportToJson(doc);
    const std::string csv = ReportToCsv(doc);
    if (auto st = WriteFile(*dir / "report.json", json); !st.ok()) return st;
    if (auto st = WriteFile(*dir / "report.csv", csv); !st.ok()) return st;
    out << (fmt == "csv" ? csv : json);
    return absl::OkStatus();
  }
};

// Scores 1.0 at the planted point and 0.1 elsewhere.
double PlantedEvaluator(const SweepPoint& p) {
  return p == SweepPoint{5e-4, 16, {512, 512}} ? 1.0 : 0.1;
}

absl::StatusOr<double> CommandEvaluator(const std::string& tmpl,
                                        const SweepPoint& p) {
  const std::string cmd =
      Substitute(tmpl, {{"{lr}", absl::StrFormat("%g", p.learning_rate)},
                        {"{batch}", absl::StrCat(p.batch_size)},
                        {"{h}", absl::StrCat(p.input_size.height)},
                        {"{w}", absl::StrCat(p.input_size.width)}});
  auto r = RunShell(cmd);
  if (!r.ok()) return r.status();
  if (r->exit_code != 0) {
    return absl::InternalError(
        absl::StrCat("command exited with status ", r->exit_code));
  }
  // The score is the last non-empty line of standard output.
  std::istringstream lines(r->output);
  std::string line, last;
  while (std::getline(lines, line)) {
    if (!IsBlank(line)) last = line;
  }
  char* end = nullptr;
  const double v = std::strtod(last.c_str(), &end);
  if (last.empty() || end == last.c_str() || !IsBlank(end)) {
    return absl::InternalError(
        absl::StrCat("command output has no trailing score: '", last, "'"));
  }
  return v;
}

struct SweepCommand {
  std::string config;
  OutputDirFlag output_dir;
  int workers = 1;
  CLI::Option* workers_opt = nullptr;
  std::string evaluator;
  CLI::Option* evaluator_opt = nullptr;
  std::string command;
  CLI::Option* command_opt = nullptr;

  void Register(CLI::App* app) {
    app->add_option("--config", config,
                    "JSON config: learning_rates, batch_sizes, input_sizes, "
                    "workers, command");
    output_dir.Register(app);
    workers_opt = app->add_option("--workers", workers,
                                  "Concurrent evaluations (default 1)");
    evaluator_opt =
        app->add_option("--evaluator", evaluator,
                        "Built-in evaluator: planted|constant")
            ->check(CLI::IsMember({"planted", "constant"}));
    command_opt = app->add_option(
        "--command", command,
        "Shell command per point; {lr} {batch} {h} {w} are substituted and "
        "the last output line is the score");
  }

  absl::StatusOr<SweepGrid> Grid(const Settings& s) const {
    SweepGrid grid = DefaultSweepGrid();
    std::vector<std::array<int, 2>> sizes;
    for (absl::Status st : {s.FromConfig("learning_rates", grid.learning_rates),
                            s.FromConfig("batch_sizes", grid.batch_sizes),
                            s.FromConfig("input_sizes", sizes)}) {
      if (!st.ok()) return st;
    }
    if (s.Has("input_sizes")) {
      grid.input_sizes.clear();
      for (const auto& [h, w] : sizes) grid.input_sizes.push_back({h, w});
    }
    if (auto st = Validate(grid); !st.ok()) return st;
    return grid;
  }

  absl::Status Execute(std::ostream& out) const {
    Settings s;
    if (auto st = s.Load(config); !st.ok()) return st;
    auto grid = Grid(s);
    if (!grid.ok()) return grid.status();
    auto dir = output_dir.Resolve(s);
    if (!dir.ok()) return dir.status();
    SweepOptions opts;
    std::string builtin, tmpl;
    for (absl::Status st :
         {s.Layer(workers_opt, workers, "workers", opts.workers),
          s.Layer(evaluator_opt, evaluator, "evaluator", builtin),
          s.Layer(command_opt, command, "command", tmpl)}) {
      if (!st.ok()) return st;
    }

    SweepEvaluator eval;
    if (!tmpl.empty() && !builtin.empty()) {
      return absl::InvalidArgumentError(
          "choose either a command template or a built-in evaluator");
    } else if (!tmpl.empty()) {
      eval = [tmpl](const SweepPoint& p) { return CommandEvaluator(tmpl, p); };
    } else if (builtin == "planted") {
      eval = [](const SweepPoint& p) -> absl::StatusOr<double> {
        return PlantedEvaluator(p);
      };
    } else if (builtin == "constant") {
      eval = [](const SweepPoint&) -> absl::StatusOr<double> { return 0.5; };
    } else if (builtin.empty()) {
      return absl::InvalidArgumentError(
          "sweep needs --command or --evaluator planted|constant");
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown evaluator '", builtin, "'"));
    }

    auto result = RunSweep(*grid, eval, opts);
    if (!result.ok()) return result.status();
    if (auto st = WriteFile(*dir / "trials.csv", TrialsToCsv(*result));
        !st.ok()) {
      return st;
    }
    if (auto st = WriteFile(*dir / "best.json", BestPointToJson(*result));
        !st.ok()) {
      return st;
    }
    const SweepPoint& b = result->best_point;
    out << absl::StrFormat(
        "best lr=%g batch=%d input=%dx%d score=%.9g trials=%d failed=%d\n",
        b.learning_rate, b.batch_size, b.input_size.height,
        b.input_size.width, result->best_score, result->trials.size(),
        result->failed.size());
    return absl::OkStatus();
  }
};

struct SpeakCommand {
  std::string config;
  PathFlag predictions, annotations;
  OutputDirFlag output_dir;
  PostprocessFlags pp;
  int max_items = kDefaultMaxUtterances;
  CLI::Option* max_items_opt = nullptr;
  std::string tts;
  CLI::Option* tts_opt = nullptr;

  void Register(CLI::App* app) {
    app->add_option("--config", config, "JSON config file");
    predictions.opt = app->add_option("--predictions", predictions.value,
                                      "COCO results JSON");
    annotations.opt = app->add_option("--annotations", annotations.value,
                                      "COCO annotations providing names");
    output_dir.Register(app);
    pp.Register(app);
    max_items_opt = app->add_option("--max-items", max_items,
                                    "Utterances to emit (default 13)");
    tts_opt = app->add_option(
        "--tts-cmd", tts,
        "Command run per utterance; {text} and {file} are substituted");
  }

  absl::Status Execute(std::ostream& out) const {
    Settings s;
    if (auto st = s.Load(config); !st.ok()) return st;
    auto pred_path = predictions.Resolve(s, "predictions", true);
    if (!pred_path.ok()) return pred_path.status();
    auto ann_path = annotations.Resolve(s, "annotations", true);
    if (!ann_path.ok()) return ann_path.status();
    auto pc = pp.Resolve(s);
    if (!pc.ok()) return pc.status();
    auto dir = output_dir.Resolve(s);
    if (!dir.ok()) return dir.status();
    int items = kDefaultMaxUtterances;
    std::string tts_cmd;
    for (absl::Status st :
         {s.Layer(max_items_opt, max_items, "max_items", items),
          s.Layer(tts_opt, tts, "tts_cmd", tts_cmd)}) {
      if (!st.ok()) return st;
    }

    auto ds = LoadDataset(*ann_path);
    if (!ds.ok()) return ds.status();
    auto set = LoadPredictions(*pred_path, &ds->classes);
    if (!set.ok()) return set.status();
    auto kept = Postprocess(set->detections, *pc);
    if (!kept.ok()) return kept.status();
    auto utterances = Utterances(*kept, ds->classes, items);
    if (!utterances.ok()) return utterances.status();

    if (!tts_cmd.empty()) {
      std::error_code ec;
      fs::create_directories(*dir, ec);
      if (ec) {
        return absl::PermissionDeniedError(absl::StrCat(
            "cannot create output directory ", dir->string(), ": ",
            ec.message()));
      }
    }
    for (const Utterance& u : *utterances) {
      out << FormatUtterance(u) << "\n";
      if (tts_cmd.empty()) continue;
      const std::string cmd = Substitute(
          tts_cmd, {{"{text}", ShellQuote(u.text)},
                    {"{file}",
                     ShellQuote((*dir / u.suggested_filename).string())}});
      auto r = RunShell(cmd);
      if (!r.ok()) return r.status();
      if (r->exit_code != 0) {
        return absl::InternalError(absl::StrCat(
            "tts command failed with status ", r->exit_code, ": ", cmd));
      }
    }
    return absl::OkStatus();
  }
};

struct ReportCommand {
  std::string input;
  std::string format = "markdown";
  std::string output;

  void Register(CLI::App* app) {
    app->add_option("--input", input, "report.json written by evaluate")
        ->required();
    app->add_option("--format", format, "markdown|csv|json")
        ->check(CLI::IsMember({"markdown", "csv", "json"}));
    app->add_option("--output", output, "Write here instead of stdout");
  }

  absl::Status Execute(std::ostream& out) const {
    auto text = ReadFile(input);
    if (!text.ok()) return text.status();
    auto doc = ReportFromJson(*text);
    if (!doc.ok()) {
      return absl::Status(doc.status().code(),
                          absl::StrCat(input, ": ", doc.status().message()));
    }
    std::string rendered;
    if (format == "csv") {
      rendered = ReportToCsv(*doc);
    } else if (format == "json") {
      rendered = ReportToJson(*doc);
    } else {
      rendered = ReportToMarkdown(*doc);
    }
    if (output.empty()) {
      out << rendered;
      return absl::OkStatus();
    }
    return WriteFile(output, rendered);
  }
};

int ExitCodeFor(const absl::Status& s) {
  switch (s.code()) {
    case absl::StatusCode::kOk:
      return kExitOk;
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kNotFound:
    case absl::StatusCode::kOutOfRange:
      return kExitUsage;
    default:
      return kExitInternal;
  }
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app("Detection post-processing, evaluation and sweep toolkit",
               "detkit");
  app.require_subcommand(1);

  NmsCommand nms;
  EvaluateCommand evaluate;
  SweepCommand sweep;
  SpeakCommand speak;
  ReportCommand report;
  nms.Register(app.add_subcommand(
      "nms", "Score filter, top-k, per-class NMS and cap on a results file"));
  evaluate.Register(app.add_subcommand(
      "evaluate", "Post-process predictions and score them against COCO GT"));
  sweep.Register(app.add_subcommand(
      "sweep", "Grid search over learning rate, batch size and input size"));
  speak.Register(app.add_subcommand(
      "speak", "List spoken-feedback utterances for the top detections"));
  report.Register(app.add_subcommand(
      "report", "Re-render an evaluation report as markdown, CSV or JSON"));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  absl::Status status;
  try {
    if (app.got_subcommand("nms")) {
      status = nms.Execute(out);
    } else if (app.got_subcommand("evaluate")) {
      status = evaluate.Execute(out);
    } else if (app.got_subcommand("sweep")) {
      status = sweep.Execute(out);
    } else if (app.got_subcommand("speak")) {
      status = speak.Execute(out);
    } else {
      status = report.Execute(out);
    }
  } catch (const std::exception& e) {
    status = absl::InternalError(e.what());
  }
  if (!status.ok()) err << "detkit: " << status.message() << "\n";
  return ExitCodeFor(status);
}

}  // namespace detkit::cli
