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
#include <string>
#include <vector>

#include "vfmr/dataset.hpp"

namespace vfmr {

struct PopulationSpec {
  std::string label;
  double projection_sigma = 0.0;  // perturbation of the shared projections
};

// Identity-grounded generator. Each identity draws a latent z ~ N(0, I);
// each modality sees sqrt(rho) * z + sqrt(1 - rho) * (private latent), with
// coordinate 0 shifted by +/- gender_offset, projected by a per-population
// matrix and corrupted by N(0, noise_sigma^2) per sample.
struct GeneratorConfig {
  std::size_t num_identities = 200;
  std::size_t latent_dim = 16;
  std::size_t voice_dim = 64;
  std::size_t face_dim = 64;
  double noise_sigma = 0.1;
  double rho = 1.0;
  double gender_offset = 0.0;
  std::vector<PopulationSpec> populations{{"en", 0.0}};
  std::size_t voices_per_identity = 40;
  std::size_t faces_per_identity = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

// Row-major projections (voice_dim x latent_dim, face_dim x latent_dim).
struct Projections {
  Vector voice;
  Vector face;
};

Projections population_projections(const GeneratorConfig& cfg,
                                   std::size_t population_index);

// Identity i belongs to population i % populations.size().
Dataset generate(const GeneratorConfig& cfg);

}  // namespace vfmr
