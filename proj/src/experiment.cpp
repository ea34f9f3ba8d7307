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

#include "vfmr/experiment.hpp"

#include "vfmr/error.hpp"

namespace vfmr {

Dataset training_partition(const ExperimentConfig& cfg, const Dataset& dataset) {
  if (!cfg.split.mode) return dataset;
  return split_dataset(dataset, *cfg.split.mode, cfg.split.fraction, cfg.split_seed()).first;
}

Dataset evaluation_partition(const ExperimentConfig& cfg, const Dataset& dataset) {
  if (!cfg.split.mode) return dataset;
  return split_dataset(dataset, *cfg.split.mode, cfg.split.fraction, cfg.split_seed()).second;
}

TrainSummary run_training(const ExperimentConfig& cfg, const Dataset& dataset,
                          ModalityPair& pair) {
  const Dataset train_set = training_partition(cfg, dataset);
  if (cfg.training.warm_start_steps > 0) {
    pair = warm_start(train_set, pair, cfg.sampler, cfg.training, cfg.training.warm_start_steps);
  }
  TrainResult result = train(train_set, pair, cfg.sampler, cfg.training);
  pair = std::move(result.pair);
  return {std::move(result.history), train_set.size(), result.replacement_draws};
}

EvaluationReport run_evaluation(const ExperimentConfig& cfg, const Dataset& dataset,
                                const ModalityPair& pair) {
  const Dataset test_set = evaluation_partition(cfg, dataset);
  const EvaluationConfig& e = cfg.evaluation;

  EvaluationReport report;
  report.task = e.task;
  report.identities = test_set.size();

  MatchingOptions matching;
  matching.n = e.n;
  matching.num_instances = e.num_instances;
  matching.seed = cfg.evaluation_seed();
  matching.stratify_gender = e.stratify_gender;
  matching.threads = cfg.threads;

  RetrievalOptions retrieval;
  retrieval.identities = e.gallery_identities;
  retrieval.faces_per_identity = e.gallery_faces;
  retrieval.queries_per_identity = e.queries_per_identity;
  retrieval.chance_seeds = e.chance_seeds;
  retrieval.seed = cfg.evaluation_seed();
  retrieval.threads = cfg.threads;

  const bool joint = e.task == "joint";
  if (joint) {
    matching.m_v = retrieval.m_v = report.m_v = e.m_v;
    matching.m_f = retrieval.m_f = report.m_f = e.m_f;
  }

  if (e.task == "match" || (joint && e.joint_task == "match")) {
    const MatchingResult r = evaluate_matching(test_set, pair, matching);
    report.instances = r.instances;
    report.accuracy_1n[e.n] = r.accuracy;
    report.accuracy_by_gender = r.accuracy_by_gender;
    report.confidence_T = r.confidence_T;
  } else if (e.task == "retrieve" || joint) {
    const RetrievalResult r = evaluate_retrieval(test_set, pair, retrieval);
    report.instances = r.queries;
    report.map_score = r.map;
    report.chance_map = r.chance_map;
  } else if (e.task == "individual") {
    if (e.target_id.empty()) {
      report.per_identity_accuracy =
          individual_accuracies(test_set, pair, e.repeats, cfg.evaluation_seed(), cfg.threads);
    } else {
      report.per_identity_accuracy[e.target_id] =
          individual_test(test_set, pair, e.target_id, e.repeats, cfg.evaluation_seed());
    }
    report.instances = report.per_identity_accuracy.size() * (test_set.size() - 1) * e.repeats;
  } else {
    throw Error(ErrorCode::kInvalidConfig, "unknown evaluation task " + e.task);
  }
  return report;
}

}  // namespace vfmr
