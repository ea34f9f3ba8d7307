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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vfmr/dataset.hpp"
#include "vfmr/embedder.hpp"
#include "vfmr/sampling.hpp"

namespace vfmr {

enum class Reduction { kSum, kMean };
enum class OptimizerKind { kSgd, kAdam };

// Learning rate `lr` applies while step < until_step. Past the last entry
// its rate keeps applying.
struct LrStep {
  std::size_t until_step;
  double lr;
};

// 1e-3 / 1e-4 / 1e-5 / 1e-6 with breakpoints at 20/70, 40/70 and 60/70 of
// total_steps (exactly 20k/40k/60k for a 70k-step run).
std::vector<LrStep> default_lr_schedule(std::size_t total_steps);

struct TrainingConfig {
  double margin = 1.0;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::vector<LrStep> lr_schedule;  // empty: default_lr_schedule(total_steps)
  std::size_t total_steps = 2000;
  Reduction reduction = Reduction::kSum;
  // Per-layer multipliers on the scheduled rate; empty means 1 everywhere.
  std::vector<double> voice_lr_multipliers;
  std::vector<double> face_lr_multipliers;
  // Unimodal warm-start steps run before cross-modal training (0 = off).
  std::size_t warm_start_steps = 0;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  void validate() const;
  double learning_rate(std::size_t step) const;
};

// Gradients mirror EmbedderParams::layers (Layer::weights holds dW, bias db).
using LayerGradients = std::vector<Layer>;

struct GradientSet {
  double loss = 0.0;
  std::optional<LayerGradients> voice;  // absent when the voice net is frozen
  std::optional<LayerGradients> face;
};

struct GradientOptions {
  Reduction reduction = Reduction::kSum;
  unsigned threads = 1;
  bool include_frozen = false;  // warm start trains frozen nets too
};

// Sum (or mean) over triplets of max(d(a, p) - d(a, n) + margin, 0).
double triplet_loss(const Dataset& dataset, const TripletBatch& batch,
                    const ModalityPair& pair, double margin,
                    Reduction reduction = Reduction::kSum);

// Exact gradient of triplet_loss with respect to every trainable parameter.
// Hinge terms at or below zero contribute nothing, as do distance terms with
// d == 0. Results do not depend on `threads`.
GradientSet loss_gradients(const Dataset& dataset, const TripletBatch& batch,
                           const ModalityPair& pair, double margin,
                           const GradientOptions& options = {});

class Optimizer {
 public:
  Optimizer(const TrainingConfig& cfg, const ModalityPair& pair);

  void apply(ModalityPair& pair, const GradientSet& grads, std::size_t step);

 private:
  struct Moments {
    LayerGradients first;
    LayerGradients second;
  };
  void update(EmbedderParams& params, const LayerGradients& grads,
              std::span<const double> multipliers, Moments& moments,
              std::size_t step);

  TrainingConfig cfg_;
  Moments voice_;
  Moments face_;
};

struct LossRecord {
  std::size_t step;
  double loss;
  double learning_rate;
};

struct TrainResult {
  ModalityPair pair;
  std::vector<LossRecord> history;
  std::size_t replacement_draws = 0;
};

// total_steps iterations of: sample batch, gradients, optimizer update of the
// non-frozen nets. Batches come from sampler.seed; fully deterministic.
TrainResult train(const Dataset& dataset, const ModalityPair& initial,
                  const SamplerConfig& sampler, const TrainingConfig& cfg);

// Unimodal pretraining of both nets (frozen flags ignored), alternating
// voice and face batches for `steps` steps each. Stands in for pretraining
// the feature extractors before anchored cross-modal training.
ModalityPair warm_start(const Dataset& dataset, const ModalityPair& initial,
                        const SamplerConfig& sampler, const TrainingConfig& cfg,
                        std::size_t steps);

// "step,loss,learning_rate" CSV.
std::string loss_history_csv(std::span<const LossRecord> history);

}  // namespace vfmr
