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

#include "vfmr/config.hpp"

#include <initializer_list>
#include <set>

#include "json.hpp"
#include "vfmr/error.hpp"
#include "vfmr/rng.hpp"

namespace vfmr {
namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw Error(ErrorCode::kInvalidConfig, where + " must be an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& item : obj.items()) {
    if (!keys.count(item.key())) {
      throw Error(ErrorCode::kInvalidConfig, "unknown key '" + item.key() + "' in " + where);
    }
  }
}

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

GenderBalance balance_from_name(const std::string& s) {
  if (s == "off") return GenderBalance::kOff;
  if (s == "three_to_one") return GenderBalance::kThreeToOne;
  throw Error(ErrorCode::kInvalidConfig, "gender_balance must be off or three_to_one");
}

OptimizerKind optimizer_from_name(const std::string& s) {
  if (s == "adam") return OptimizerKind::kAdam;
  if (s == "sgd") return OptimizerKind::kSgd;
  throw Error(ErrorCode::kInvalidConfig, "optimizer must be adam or sgd");
}

Reduction reduction_from_name(const std::string& s) {
  if (s == "sum") return Reduction::kSum;
  if (s == "mean") return Reduction::kMean;
  throw Error(ErrorCode::kInvalidConfig, "reduction must be sum or mean");
}

void parse_generator(const json& j, GeneratorConfig& g) {
  reject_unknown(j, "generator",
                 {"num_identities", "latent_dim", "voice_dim", "face_dim", "noise_sigma", "rho",
                  "gender_offset", "populations", "voices_per_identity", "faces_per_identity"});
  read(j, "num_identities", g.num_identities);
  read(j, "latent_dim", g.latent_dim);
  read(j, "voice_dim", g.voice_dim);
  read(j, "face_dim", g.face_dim);
  read(j, "noise_sigma", g.noise_sigma);
  read(j, "rho", g.rho);
  read(j, "gender_offset", g.gender_offset);
  read(j, "voices_per_identity", g.voices_per_identity);
  read(j, "faces_per_identity", g.faces_per_identity);
  if (j.contains("populations")) {
    g.populations.clear();
    for (const json& p : j.at("populations")) {
      reject_unknown(p, "generator.populations[]", {"label", "sigma"});
      g.populations.push_back({p.at("label").get<std::string>(), p.value("sigma", 0.0)});
    }
  }
}

void parse_embedder(const json& j, EmbedderConfig& e) {
  reject_unknown(j, "embedder",
                 {"embedding_dim", "scale", "voice_hidden", "face_hidden", "activation",
                  "voice_frozen", "face_frozen"});
  read(j, "embedding_dim", e.embedding_dim);
  read(j, "scale", e.scale);
  read(j, "voice_hidden", e.voice_hidden);
  read(j, "face_hidden", e.face_hidden);
  if (j.contains("activation")) e.activation = activation_from_name(j.at("activation").get<std::string>());
  read(j, "voice_frozen", e.voice_frozen);
  read(j, "face_frozen", e.face_frozen);
}

void parse_training(const json& j, TrainingConfig& t) {
  reject_unknown(j, "training",
                 {"margin", "optimizer", "beta1", "beta2", "epsilon", "learning_rates",
                  "total_steps", "reduction", "voice_lr_multipliers", "face_lr_multipliers",
                  "warm_start_steps"});
  read(j, "margin", t.margin);
  if (j.contains("optimizer")) t.optimizer = optimizer_from_name(j.at("optimizer").get<std::string>());
  read(j, "beta1", t.beta1);
  read(j, "beta2", t.beta2);
  read(j, "epsilon", t.epsilon);
  read(j, "total_steps", t.total_steps);
  if (j.contains("reduction")) t.reduction = reduction_from_name(j.at("reduction").get<std::string>());
  read(j, "voice_lr_multipliers", t.voice_lr_multipliers);
  read(j, "face_lr_multipliers", t.face_lr_multipliers);
  read(j, "warm_start_steps", t.warm_start_steps);
  if (j.contains("learning_rates")) {
    t.lr_schedule.clear();
    for (const json& s : j.at("learning_rates")) {
      reject_unknown(s, "training.learning_rates[]", {"until_step", "lr"});
      t.lr_schedule.push_back({s.at("until_step").get<std::size_t>(), s.at("lr").get<double>()});
    }
  }
}

void parse_sampler(const json& j, SamplerConfig& s) {
  reject_unknown(j, "sampler", {"b", "q", "r", "gender_balance"});
  read(j, "b", s.b);
  read(j, "q", s.q);
  read(j, "r", s.r);
  if (j.contains("gender_balance")) {
    s.gender_balance = balance_from_name(j.at("gender_balance").get<std::string>());
  }
}

void parse_evaluation(const json& j, EvaluationConfig& e) {
  reject_unknown(j, "evaluation",
                 {"task", "n", "num_instances", "stratify_gender", "m_v", "m_f", "joint_task",
                  "gallery_identities", "gallery_faces", "queries_per_identity", "chance_seeds",
                  "repeats", "target_id"});
  read(j, "task", e.task);
  read(j, "n", e.n);
  read(j, "num_instances", e.num_instances);
  read(j, "stratify_gender", e.stratify_gender);
  read(j, "m_v", e.m_v);
  read(j, "m_f", e.m_f);
  read(j, "joint_task", e.joint_task);
  read(j, "gallery_identities", e.gallery_identities);
  read(j, "gallery_faces", e.gallery_faces);
  read(j, "queries_per_identity", e.queries_per_identity);
  read(j, "chance_seeds", e.chance_seeds);
  read(j, "repeats", e.repeats);
  read(j, "target_id", e.target_id);
}

void parse_split(const json& j, SplitConfig& s) {
  reject_unknown(j, "split", {"mode", "fraction"});
  if (j.contains("mode")) {
    const std::string mode = j.at("mode").get<std::string>();
    s.mode = mode == "none" ? std::nullopt : std::optional(split_mode_from_name(mode));
  }
  read(j, "fraction", s.fraction);
}

void parse_paths(const json& j, PathsConfig& p) {
  reject_unknown(j, "paths", {"dataset", "checkpoint", "loss_csv", "report_json", "report_csv"});
  read(j, "dataset", p.dataset);
  read(j, "checkpoint", p.checkpoint);
  read(j, "loss_csv", p.loss_csv);
  read(j, "report_json", p.report_json);
  read(j, "report_csv", p.report_csv);
}

void validate_evaluation(const EvaluationConfig& e) {
  const std::set<std::string> tasks{"match", "retrieve", "joint", "individual"};
  if (!tasks.count(e.task)) {
    throw Error(ErrorCode::kInvalidConfig, "evaluation.task must be match, retrieve, joint or individual");
  }
  if (e.joint_task != "match" && e.joint_task != "retrieve") {
    throw Error(ErrorCode::kInvalidConfig, "evaluation.joint_task must be match or retrieve");
  }
  if (e.n < 2) throw Error(ErrorCode::kInvalidConfig, "evaluation.n must be >= 2");
  if (e.m_v < 1 || e.m_f < 1) throw Error(ErrorCode::kInvalidConfig, "m_v and m_f must be >= 1");
  if (e.repeats < 1) throw Error(ErrorCode::kInvalidConfig, "evaluation.repeats must be >= 1");
}

}  // namespace

void ExperimentConfig::derive_seeds() {
  generator.seed = Rng::derive(seed, 11);
  sampler.seed = Rng::derive(seed, 12);
  training.seed = Rng::derive(seed, 13);
  training.threads = threads;
}

std::uint64_t ExperimentConfig::voice_init_seed() const { return Rng::derive(seed, 14); }
std::uint64_t ExperimentConfig::face_init_seed() const { return Rng::derive(seed, 15); }
std::uint64_t ExperimentConfig::evaluation_seed() const { return Rng::derive(seed, 16); }
std::uint64_t ExperimentConfig::split_seed() const { return Rng::derive(seed, 17); }

ExperimentConfig parse_experiment_config(std::string_view json_text) {
  ExperimentConfig cfg;
  if (json_text.find_first_not_of(" \t\r\n") != std::string_view::npos) {
    try {
      const json j = json::parse(json_text);
      reject_unknown(j, "config",
                     {"seed", "threads", "generator", "embedder", "training", "sampler",
                      "evaluation", "split", "paths"});
      read(j, "seed", cfg.seed);
      read(j, "threads", cfg.threads);
      if (j.contains("generator")) parse_generator(j.at("generator"), cfg.generator);
      if (j.contains("embedder")) parse_embedder(j.at("embedder"), cfg.embedder);
      if (j.contains("training")) parse_training(j.at("training"), cfg.training);
      if (j.contains("sampler")) parse_sampler(j.at("sampler"), cfg.sampler);
      if (j.contains("evaluation")) parse_evaluation(j.at("evaluation"), cfg.evaluation);
      if (j.contains("split")) parse_split(j.at("split"), cfg.split);
      if (j.contains("paths")) parse_paths(j.at("paths"), cfg.paths);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInvalidConfig, std::string("config: ") + e.what());
    }
  }
  cfg.derive_seeds();
  cfg.generator.validate();
  cfg.training.validate();
  cfg.sampler.validate();
  validate_evaluation(cfg.evaluation);
  MetricSpaceConfig{cfg.embedder.embedding_dim, cfg.embedder.scale}.validate();
  if (!(cfg.split.fraction > 0.0 && cfg.split.fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "split.fraction must lie in (0, 1)");
  }
  return cfg;
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  json populations = json::array();
  for (const auto& p : cfg.generator.populations) {
    populations.push_back({{"label", p.label}, {"sigma", p.projection_sigma}});
  }
  json rates = json::array();
  for (const auto& s : cfg.training.lr_schedule) {
    rates.push_back({{"until_step", s.until_step}, {"lr", s.lr}});
  }
  const auto& g = cfg.generator;
  const auto& e = cfg.embedder;
  const auto& t = cfg.training;
  const auto& ev = cfg.evaluation;
  json j = {
      {"seed", cfg.seed},
      {"threads", cfg.threads},
      {"generator",
       {{"num_identities", g.num_identities}, {"latent_dim", g.latent_dim},
        {"voice_dim", g.voice_dim}, {"face_dim", g.face_dim},
        {"noise_sigma", g.noise_sigma}, {"rho", g.rho},
        {"gender_offset", g.gender_offset}, {"populations", populations},
        {"voices_per_identity", g.voices_per_identity},
        {"faces_per_identity", g.faces_per_identity}}},
      {"embedder",
       {{"embedding_dim", e.embedding_dim}, {"scale", e.scale},
        {"voice_hidden", e.voice_hidden}, {"face_hidden", e.face_hidden},
        {"activation", activation_name(e.activation)},
        {"voice_frozen", e.voice_frozen}, {"face_frozen", e.face_frozen}}},
      {"training",
       {{"margin", t.margin},
        {"optimizer", t.optimizer == OptimizerKind::kAdam ? "adam" : "sgd"},
        {"beta1", t.beta1}, {"beta2", t.beta2}, {"epsilon", t.epsilon},
        {"learning_rates", rates}, {"total_steps", t.total_steps},
        {"reduction", t.reduction == Reduction::kSum ? "sum" : "mean"},
        {"voice_lr_multipliers", t.voice_lr_multipliers},
        {"face_lr_multipliers", t.face_lr_multipliers},
        {"warm_start_steps", t.warm_start_steps}}},
      {"sampler",
       {{"b", cfg.sampler.b}, {"q", cfg.sampler.q}, {"r", cfg.sampler.r},
        {"gender_balance",
         cfg.sampler.gender_balance == GenderBalance::kOff ? "off" : "three_to_one"}}},
      {"evaluation",
       {{"task", ev.task}, {"n", ev.n}, {"num_instances", ev.num_instances},
        {"stratify_gender", ev.stratify_gender}, {"m_v", ev.m_v}, {"m_f", ev.m_f},
        {"joint_task", ev.joint_task}, {"gallery_identities", ev.gallery_identities},
        {"gallery_faces", ev.gallery_faces}, {"queries_per_identity", ev.queries_per_identity},
        {"chance_seeds", ev.chance_seeds}, {"repeats", ev.repeats},
        {"target_id", ev.target_id}}},
      {"split",
       {{"mode", cfg.split.mode ? split_mode_name(*cfg.split.mode) : "none"},
        {"fraction", cfg.split.fraction}}},
      {"paths",
       {{"dataset", cfg.paths.dataset}, {"checkpoint", cfg.paths.checkpoint},
        {"loss_csv", cfg.paths.loss_csv}, {"report_json", cfg.paths.report_json},
        {"report_csv", cfg.paths.report_csv}}}};
  return j.dump(2) + "\n";
}

ModalityPair init_model(const ExperimentConfig& cfg, std::size_t voice_dim,
                        std::size_t face_dim) {
  const auto& e = cfg.embedder;
  ModalityPair pair;
  pair.space = {e.embedding_dim, e.scale};
  pair.voice = init_embedder(voice_dim, e.voice_hidden, e.embedding_dim, cfg.voice_init_seed(),
                             e.activation);
  pair.face = init_embedder(face_dim, e.face_hidden, e.embedding_dim, cfg.face_init_seed(),
                            e.activation);
  pair.voice.frozen = e.voice_frozen;
  pair.face.frozen = e.face_frozen;
  pair.validate();
  return pair;
}

}  // namespace vfmr
