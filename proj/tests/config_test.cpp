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

#include <functional>
#include <set>
#include <string>

#include "doctest.h"
#include "vfmr/config.hpp"
#include "vfmr/error.hpp"
#include "vfmr/experiment.hpp"
#include "vfmr/rng.hpp"

using namespace vfmr;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("empty configs give defaults") {
  for (const char* text : {"", "  \n", "{}"}) {
    const ExperimentConfig cfg = parse_experiment_config(text);
    CHECK(cfg.seed == 0);
    CHECK(cfg.threads == 1);
    CHECK(cfg.embedder.embedding_dim == 128);
    CHECK(cfg.embedder.scale == 128.0);
    CHECK(cfg.embedder.voice_frozen);
    CHECK_FALSE(cfg.embedder.face_frozen);
    CHECK(cfg.sampler.b == 4);
    CHECK(cfg.sampler.q == 4);
    CHECK(cfg.sampler.r == 8);
    CHECK(cfg.training.margin == 1.0);
    CHECK(cfg.evaluation.task == "match");
    CHECK(cfg.evaluation.n == 2);
    CHECK_FALSE(cfg.split.mode.has_value());
  }
}

TEST_CASE("sections override defaults") {
  const ExperimentConfig cfg = parse_experiment_config(R"({
    "seed": 9, "threads": 3,
    "generator": {"num_identities": 50, "rho": 0.25, "populations": [{"label": "a"}, {"label": "b", "sigma": 0.5}]},
    "embedder": {"embedding_dim": 16, "voice_hidden": [32], "activation": "identity", "face_frozen": true},
    "training": {"optimizer": "sgd", "total_steps": 70, "reduction": "mean",
                 "learning_rates": [{"until_step": 10, "lr": 0.1}, {"until_step": 70, "lr": 0.01}]},
    "sampler": {"b": 3, "gender_balance": "off"},
    "evaluation": {"task": "retrieve", "m_v": 2},
    "split": {"mode": "seen_heard", "fraction": 0.5},
    "paths": {"dataset": "d.jsonl"}
  })");
  CHECK(cfg.seed == 9);
  CHECK(cfg.training.threads == 3);
  CHECK(cfg.generator.num_identities == 50);
  CHECK(cfg.generator.rho == 0.25);
  REQUIRE(cfg.generator.populations.size() == 2);
  CHECK(cfg.generator.populations[1].projection_sigma == 0.5);
  CHECK(cfg.embedder.voice_hidden == std::vector<std::size_t>{32});
  CHECK(cfg.embedder.activation == Activation::kIdentity);
  CHECK(cfg.training.optimizer == OptimizerKind::kSgd);
  CHECK(cfg.training.reduction == Reduction::kMean);
  REQUIRE(cfg.training.lr_schedule.size() == 2);
  CHECK(cfg.training.lr_schedule[0].lr == 0.1);
  CHECK(cfg.sampler.b == 3);
  CHECK(cfg.sampler.gender_balance == GenderBalance::kOff);
  CHECK(cfg.evaluation.task == "retrieve");
  CHECK(cfg.split.mode == SplitMode::kSeenHeard);
  CHECK(cfg.paths.dataset == "d.jsonl");
}

TEST_CASE("invalid configs are rejected") {
  for (const char* text : {R"({"sede": 1})", R"({"generator": {"rhoo": 1}})",
                           R"({"training": {"optimizer": "rmsprop"}})",
                           R"({"sampler": {"b": 1}})", R"({"generator": {"rho": 2}})",
                           R"({"embedder": {"activation": "tanh"}})", "[1, 2]"}) {
    CAPTURE(text);
    CHECK(code_of([&] { parse_experiment_config(text); }) == ErrorCode::kInvalidConfig);
  }
  CHECK_THROWS_AS(parse_experiment_config("{not json"), Error);
}

TEST_CASE("subsystem seeds derive from the global seed") {
  const ExperimentConfig a = parse_experiment_config(R"({"seed": 5})");
  const ExperimentConfig b = parse_experiment_config(R"({"seed": 6})");
  CHECK(a.generator.seed == Rng::derive(5, 11));
  const std::set<std::uint64_t> seeds{a.generator.seed,   a.sampler.seed,      a.training.seed,
                                      a.voice_init_seed(), a.face_init_seed(), a.evaluation_seed(),
                                      a.split_seed()};
  CHECK(seeds.size() == 7);
  CHECK(a.generator.seed != b.generator.seed);
  CHECK(a.training.seed != b.training.seed);
}

TEST_CASE("configs round-trip through JSON") {
  const ExperimentConfig cfg = parse_experiment_config(
      R"({"seed": 4, "training": {"total_steps": 35}, "split": {"mode": "unseen_unheard"}})");
  const std::string text = experiment_config_to_json(cfg);
  const ExperimentConfig back = parse_experiment_config(text);
  CHECK(experiment_config_to_json(back) == text);
  CHECK(back.training.total_steps == 35);
  CHECK(back.split.mode == SplitMode::kUnseenUnheard);
}

TEST_CASE("experiment pipeline") {
  const ExperimentConfig cfg = parse_experiment_config(R"({
    "seed": 3,
    "generator": {"num_identities": 60},
    "training": {"total_steps": 150},
    "split": {"mode": "unseen_unheard"},
    "evaluation": {"num_instances": 2000}
  })");
  const Dataset ds = generate(cfg.generator);
  CHECK(training_partition(cfg, ds).size() == 48);
  CHECK(evaluation_partition(cfg, ds).size() == 12);

  ModalityPair pair = init_model(cfg, ds.voice_dim(), ds.face_dim());
  const ModalityPair before = pair;
  const EvaluationReport untrained = run_evaluation(cfg, ds, pair);
  const TrainSummary summary = run_training(cfg, ds, pair);
  CHECK(summary.history.size() == 150);
  CHECK(summary.identities == 48);
  CHECK(pair.voice.layers[0].weights == before.voice.layers[0].weights);
  CHECK(pair.face.layers[0].weights != before.face.layers[0].weights);
  const EvaluationReport trained = run_evaluation(cfg, ds, pair);
  CHECK(trained.identities == 12);
  CHECK(trained.accuracy_1n.at(2) > untrained.accuracy_1n.at(2));

  // Same config, same bytes.
  ModalityPair again = init_model(cfg, ds.voice_dim(), ds.face_dim());
  run_training(cfg, ds, again);
  CHECK(again.face.layers[0].weights == pair.face.layers[0].weights);
}

TEST_CASE("every evaluation task runs") {
  ExperimentConfig cfg = parse_experiment_config(R"({"generator": {"num_identities": 30}})");
  const Dataset ds = generate(cfg.generator);
  const ModalityPair pair = init_model(cfg, ds.voice_dim(), ds.face_dim());
  cfg.evaluation.gallery_identities = 20;
  cfg.evaluation.queries_per_identity = 2;
  cfg.evaluation.chance_seeds = 2;
  cfg.evaluation.num_instances = 200;
  cfg.evaluation.repeats = 2;
  for (const char* task : {"match", "retrieve", "joint", "individual"}) {
    CAPTURE(task);
    cfg.evaluation.task = task;
    const EvaluationReport r = run_evaluation(cfg, ds, pair);
    CHECK(r.task == task);
  }
  cfg.evaluation.task = "individual";
  cfg.evaluation.target_id = "nobody";
  CHECK(code_of([&] { run_evaluation(cfg, ds, pair); }) == ErrorCode::kUnknownIdentity);
  cfg.evaluation.task = "classify";
  CHECK(code_of([&] { run_evaluation(cfg, ds, pair); }) == ErrorCode::kInvalidConfig);
}
