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

#pragma once

#include <cstddef>
#include <vector>

#include "vfmr/config.hpp"

namespace vfmr {

// Training / evaluation partitions selected by cfg.split (whole dataset when
// no split mode is configured).
Dataset training_partition(const ExperimentConfig& cfg, const Dataset& dataset);
Dataset evaluation_partition(const ExperimentConfig& cfg, const Dataset& dataset);

struct TrainSummary {
  std::vector<LossRecord> history;
  std::size_t identities = 0;
  std::size_t replacement_draws = 0;
};

// Optional unimodal warm start, then anchored triplet training on the
// training partition. Updates `pair` in place.
TrainSummary run_training(const ExperimentConfig& cfg, const Dataset& dataset,
                          ModalityPair& pair);

// Runs cfg.evaluation.task on the evaluation partition.
EvaluationReport run_evaluation(const ExperimentConfig& cfg, const Dataset& dataset,
                                const ModalityPair& pair);

}  // namespace vfmr
