// Copyright 2026 The vfmr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// vfmr command-line front end. Links only the C API.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 I/O error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "vfmr/vfmr.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitIo = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code(vfmr_status s) {
  switch (s) {
    case VFMR_OK: return kExitOk;
    case VFMR_ERR_INVALID_ARGUMENT:
    case VFMR_ERR_INVALID_CONFIG: return kExitUsage;
    case VFMR_ERR_IO: return kExitIo;
    default: return kExitData;
  }
}

// Thrown by check(); carries the exit code for the failed call.
struct ApiFailure {
  int code;
};

void check(vfmr_status s, const char* what) {
  if (s == VFMR_OK) return;
  std::cerr << "vfmr: " << what << ": " << vfmr_status_name(s) << ": " << vfmr_last_error()
            << "\n";
  throw ApiFailure{exit_code(s)};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

// Config file (if any) with command-line overrides merged in.
struct ConfigArgs {
  std::string path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;

  json load() const {
    json j = json::object();
    if (!path.empty()) {
      try {
        j = json::parse(read_file(path));
      } catch (const json::exception& e) {
        throw UsageError("config " + path + ": " + e.what());
      }
      if (!j.is_object()) throw UsageError("config must be a JSON object");
    }
    if (seed) j["seed"] = *seed;
    if (threads) j["threads"] = *threads;
    return j;
  }
};

void add_config_flags(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config", args.path, "Experiment config (JSON)");
  cmd->add_option("--seed", args.seed, "Global seed (overrides config)");
  cmd->add_option("--threads", args.threads, "Worker threads (0 = all cores)");
}

std::string path_from(const json& cfg, const char* key, const std::string& flag,
                      const char* flag_name) {
  if (!flag.empty()) return flag;
  if (cfg.contains("paths") && cfg["paths"].contains(key)) {
    const std::string p = cfg["paths"][key].get<std::string>();
    if (!p.empty()) return p;
  }
  throw UsageError(std::string("missing ") + flag_name);
}

class Dataset {
 public:
  Dataset() = default;
  Dataset(const Dataset&) = delete;
  Dataset& operator=(const Dataset&) = delete;
  ~Dataset() { vfmr_dataset_free(ptr); }
  vfmr_dataset* ptr = nullptr;
};

class Model {
 public:
  Model() = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  ~Model() { vfmr_model_free(ptr); }
  vfmr_model* ptr = nullptr;
};

std::string owned(char* s) {
  std::string out = s ? s : "";
  vfmr_string_free(s);
  return out;
}

int cmd_generate(const ConfigArgs& args, const std::string& out,
                 std::optional<std::size_t> identities) {
  json cfg = args.load();
  if (identities) cfg["generator"]["num_identities"] = *identities;
  const std::string text = cfg.dump();
  Dataset ds;
  check(vfmr_dataset_generate(text.c_str(), &ds.ptr), "generate");
  const std::string path = path_from(cfg, "dataset", out, "--out");
  check(vfmr_dataset_save(ds.ptr, path.c_str()), "write dataset");
  std::size_t n = 0, voices = 0, faces = 0;
  check(vfmr_dataset_stats(ds.ptr, &n, &voices, &faces), "stats");
  std::cout << "identities=" << n << " voices=" << voices << " faces=" << faces << "\n";
  return kExitOk;
}

int cmd_train(const ConfigArgs& args, const std::string& dataset_flag, const std::string& out,
              const std::string& loss_csv_flag, const std::string& init,
              std::optional<std::size_t> steps) {
  json cfg = args.load();
  if (steps) cfg["training"]["total_steps"] = *steps;
  const std::string text = cfg.dump();
  const std::string dataset_path = path_from(cfg, "dataset", dataset_flag, "--dataset");
  const std::string checkpoint = path_from(cfg, "checkpoint", out, "--out");
  std::string loss_csv = loss_csv_flag;
  if (loss_csv.empty() && cfg.contains("paths") && cfg["paths"].contains("loss_csv")) {
    loss_csv = cfg["paths"]["loss_csv"].get<std::string>();
  }

  Dataset ds;
  check(vfmr_dataset_load(dataset_path.c_str(), &ds.ptr), "read dataset");
  Model model;
  if (init.empty()) {
    check(vfmr_model_init(text.c_str(), ds.ptr, &model.ptr), "init model");
  } else {
    check(vfmr_model_load(init.c_str(), &model.ptr), "read checkpoint");
  }
  vfmr_train_summary summary{};
  check(vfmr_train(model.ptr, ds.ptr, text.c_str(), loss_csv.empty() ? nullptr : loss_csv.c_str(),
                   &summary),
        "train");
  check(vfmr_model_save(model.ptr, checkpoint.c_str()), "write checkpoint");
  if (summary.replacement_draws > 0) {
    std::cerr << "warning: " << summary.replacement_draws
              << " samples were drawn with replacement\n";
  }
  std::cout << "steps=" << summary.steps << " identities=" << summary.identities
            << " initial_loss=" << summary.initial_loss << " final_loss=" << summary.final_loss
            << "\n";
  return kExitOk;
}

struct EvaluateArgs {
  std::string checkpoint;
  std::string dataset;
  std::optional<std::string> task;
  std::optional<std::size_t> n;
  std::optional<std::size_t> m_f;
  std::optional<std::size_t> m_v;
  std::optional<std::size_t> instances;
  std::optional<std::string> target;
  std::string out;
  std::string csv;
};

int cmd_evaluate(const ConfigArgs& args, const EvaluateArgs& e) {
  json cfg = args.load();
  auto& ev = cfg["evaluation"];
  if (e.task) ev["task"] = *e.task;
  if (e.n) ev["n"] = *e.n;
  if (e.m_f) ev["m_f"] = *e.m_f;
  if (e.m_v) ev["m_v"] = *e.m_v;
  if (e.instances) ev["num_instances"] = *e.instances;
  if (e.target) ev["target_id"] = *e.target;
  if (ev.empty()) cfg.erase("evaluation");
  const std::string text = cfg.dump();

  const std::string checkpoint = path_from(cfg, "checkpoint", e.checkpoint, "--checkpoint");
  const std::string dataset_path = path_from(cfg, "dataset", e.dataset, "--dataset");
  Dataset ds;
  check(vfmr_dataset_load(dataset_path.c_str(), &ds.ptr), "read dataset");
  Model model;
  check(vfmr_model_load(checkpoint.c_str(), &model.ptr), "read checkpoint");
  char* report_json = nullptr;
  char* report_csv = nullptr;
  check(vfmr_evaluate(model.ptr, ds.ptr, text.c_str(), &report_json, &report_csv), "evaluate");
  const std::string json_text = owned(report_json);
  const std::string csv_text = owned(report_csv);

  std::string json_path = e.out;
  std::string csv_path = e.csv;
  if (cfg.contains("paths")) {
    if (json_path.empty()) json_path = cfg["paths"].value("report_json", "");
    if (csv_path.empty()) csv_path = cfg["paths"].value("report_csv", "");
  }
  if (!json_path.empty()) write_file(json_path, json_text);
  if (!csv_path.empty()) write_file(csv_path, csv_text);
  std::cout << json_text;
  return kExitOk;
}

struct ConfidenceArgs {
  std::optional<std::uint64_t> identities;
  std::optional<double> tuples;
  std::optional<std::uint64_t> b, q, r, steps;
};

std::string sig4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  std::string s = buf;
  if (s.find('e') != std::string::npos) {
    std::snprintf(buf, sizeof buf, "%.0f", v);
    s = buf;
  }
  return s;
}

int cmd_confidence(const ConfidenceArgs& a) {
  if (!a.identities) throw UsageError("--N is required");
  const bool batches = a.b || a.q || a.r || a.steps;
  double k = 0.0, t = 0.0;
  if (batches) {
    if (a.tuples) throw UsageError("give either --n or batch parameters, not both");
    double tuples = 0.0, per_step = 0.0;
    check(vfmr_confidence_batches(*a.identities, a.b.value_or(4), a.q.value_or(4),
                                  a.r.value_or(8), a.steps.value_or(1000), &tuples, &per_step,
                                  &k, &t),
          "confidence");
    std::cout << "N,n,K,T,triplets_per_step\n"
              << *a.identities << ',' << static_cast<unsigned long long>(tuples) << ','
              << sig4(k) << ',' << sig4(t) << ','
              << static_cast<unsigned long long>(per_step) << "\n";
    return kExitOk;
  }
  if (!a.tuples) throw UsageError("--n is required");
  check(vfmr_confidence(*a.identities, *a.tuples, &k, &t), "confidence");
  std::ostringstream n_text;
  n_text.precision(17);
  n_text << *a.tuples;
  std::cout << "N,n,K,T\n"
            << *a.identities << ',' << n_text.str() << ',' << sig4(k) << ',' << sig4(t) << "\n";
  return kExitOk;
}

struct SegmentArgs {
  std::string stream;
  std::string truth;
  double threshold = 0.5;
  std::size_t s_min = 10;
  std::size_t s_max = 100;
  std::size_t s_step = 5;
  std::string out;
};

int cmd_segment(const SegmentArgs& a) {
  std::size_t count = 0;
  char* csv = nullptr;
  check(vfmr_segment_files(a.stream.c_str(), a.truth.c_str(), a.threshold, a.s_min, a.s_max,
                           a.s_step, a.out.empty() ? nullptr : a.out.c_str(), &count, &csv),
        "segment");
  const std::string text = owned(csv);
  if (a.out.empty()) std::cout << text;
  std::cerr << "segments=" << count << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vfmr: voice-face cross-modal metric learning and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(vfmr_version()));

  ConfigArgs gen_cfg;
  std::string gen_out;
  std::optional<std::size_t> gen_identities;
  auto* gen = app.add_subcommand("generate", "Write a synthetic voice/face dataset");
  add_config_flags(gen, gen_cfg);
  gen->add_option("--out", gen_out, "Dataset output path (JSON Lines)");
  gen->add_option("--identities", gen_identities, "Number of identities");

  ConfigArgs train_cfg;
  std::string train_dataset, train_out, train_loss, train_init;
  std::optional<std::size_t> train_steps;
  auto* tr = app.add_subcommand("train", "Voice-anchored triplet training");
  add_config_flags(tr, train_cfg);
  tr->add_option("--dataset", train_dataset, "Dataset path");
  tr->add_option("--out", train_out, "Checkpoint output path");
  tr->add_option("--loss-csv", train_loss, "Loss history CSV path");
  tr->add_option("--init", train_init, "Start from this checkpoint instead of a fresh model");
  tr->add_option("--steps", train_steps, "Total training steps");

  ConfigArgs eval_cfg;
  EvaluateArgs eval_args;
  auto* ev = app.add_subcommand("evaluate", "Matching, retrieval, joint and individual tests");
  add_config_flags(ev, eval_cfg);
  ev->add_option("--checkpoint", eval_args.checkpoint, "Checkpoint path");
  ev->add_option("--dataset", eval_args.dataset, "Dataset path");
  ev->add_option("--task", eval_args.task, "match | retrieve | joint | individual")
      ->check(CLI::IsMember({"match", "retrieve", "joint", "individual"}));
  ev->add_option("--n", eval_args.n, "Candidates per matching instance");
  ev->add_option("--mf", eval_args.m_f, "Faces per joint face embedding");
  ev->add_option("--mv", eval_args.m_v, "Voices per joint voice embedding");
  ev->add_option("--instances", eval_args.instances, "Matching instances");
  ev->add_option("--target", eval_args.target, "Identity for the individual test");
  ev->add_option("--out", eval_args.out, "Report JSON path");
  ev->add_option("--csv", eval_args.csv, "Report CSV path");

  ConfidenceArgs conf_args;
  auto* conf = app.add_subcommand("confidence", "Pair coverage K and confidence T");
  conf->add_option("--N", conf_args.identities, "Test identities");
  conf->add_option("--n", conf_args.tuples, "Test tuples");
  conf->add_option("--b", conf_args.b, "Identities per batch");
  conf->add_option("--q", conf_args.q, "Voices per identity");
  conf->add_option("--r", conf_args.r, "Faces per identity");
  conf->add_option("--steps", conf_args.steps, "Test steps");

  SegmentArgs seg_args;
  auto* seg = app.add_subcommand("segment", "Growing-window speech segment detection");
  seg->add_option("--stream", seg_args.stream, "Frame stream (JSON Lines)")->required();
  seg->add_option("--gt", seg_args.truth, "Ground-truth frames (JSON Lines)")->required();
  seg->add_option("--t", seg_args.threshold, "Detection threshold");
  seg->add_option("--smin", seg_args.s_min, "Minimum window (frames)");
  seg->add_option("--smax", seg_args.s_max, "Maximum window (frames)");
  seg->add_option("--sstep", seg_args.s_step, "Growth step (frames)");
  seg->add_option("--out", seg_args.out, "Segments CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) return cmd_generate(gen_cfg, gen_out, gen_identities);
    if (*tr) return cmd_train(train_cfg, train_dataset, train_out, train_loss, train_init, train_steps);
    if (*ev) return cmd_evaluate(eval_cfg, eval_args);
    if (*conf) return cmd_confidence(conf_args);
    if (*seg) return cmd_segment(seg_args);
  } catch (const ApiFailure& f) {
    return f.code;
  } catch (const UsageError& e) {
    std::cerr << "vfmr: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "vfmr: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "vfmr: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
