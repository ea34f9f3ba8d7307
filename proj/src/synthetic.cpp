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

#include "vfmr/synthetic.hpp"

#include <cmath>
#include <cstdio>

#include "vfmr/error.hpp"
#include "vfmr/rng.hpp"

namespace vfmr {
namespace {

constexpr std::uint64_t kProjectionStream = 1;
constexpr std::uint64_t kPopulationStream = 2;
constexpr std::uint64_t kIdentityStream = 3;

Vector gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  const double sd = 1.0 / std::sqrt(static_cast<double>(cols));
  Vector m(rows * cols);
  for (double& x : m) x = sd * rng.normal();
  return m;
}

Vector project(const Vector& p, std::size_t rows, const Vector& latent,
               double noise_sigma, Rng& rng) {
  const std::size_t cols = latent.size();
  Vector out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += p[r * cols + c] * latent[c];
    out[r] = acc + noise_sigma * rng.normal();
  }
  return out;
}

}  // namespace

void GeneratorConfig::validate() const {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kInvalidConfig, msg);
  };
  if (num_identities < 2) fail("generator needs num_identities >= 2");
  if (latent_dim < 1 || voice_dim < 1 || face_dim < 1) fail("generator dims must be >= 1");
  if (!(noise_sigma >= 0.0)) fail("noise_sigma must be >= 0");
  if (!(rho >= 0.0 && rho <= 1.0)) fail("rho must lie in [0, 1]");
  if (!std::isfinite(gender_offset)) fail("gender_offset must be finite");
  if (populations.empty()) fail("at least one population is required");
  for (const auto& p : populations) {
    if (!(p.projection_sigma >= 0.0)) fail("population sigma must be >= 0");
  }
  if (voices_per_identity < 1 || faces_per_identity < 1) {
    fail("samples per identity must be >= 1");
  }
}

Projections population_projections(const GeneratorConfig& cfg,
                                   std::size_t population_index) {
  Rng base_rng(Rng::derive(cfg.seed, kProjectionStream));
  Projections p{gaussian_matrix(base_rng, cfg.voice_dim, cfg.latent_dim),
                gaussian_matrix(base_rng, cfg.face_dim, cfg.latent_dim)};
  const double sigma = cfg.populations.at(population_index).projection_sigma;
  if (sigma > 0.0) {
    Rng pop_rng(Rng::derive(Rng::derive(cfg.seed, kPopulationStream), population_index));
    const Vector dv = gaussian_matrix(pop_rng, cfg.voice_dim, cfg.latent_dim);
    const Vector df = gaussian_matrix(pop_rng, cfg.face_dim, cfg.latent_dim);
    for (std::size_t i = 0; i < dv.size(); ++i) p.voice[i] += sigma * dv[i];
    for (std::size_t i = 0; i < df.size(); ++i) p.face[i] += sigma * df[i];
  }
  return p;
}

Dataset generate(const GeneratorConfig& cfg) {
  cfg.validate();
  std::vector<Projections> projections;
  for (std::size_t p = 0; p < cfg.populations.size(); ++p) {
    projections.push_back(population_projections(cfg, p));
  }

  const double shared = std::sqrt(cfg.rho);
  const double own = std::sqrt(1.0 - cfg.rho);
  const std::uint64_t identity_seed = Rng::derive(cfg.seed, kIdentityStream);

  Dataset ds;
  ds.identities.resize(cfg.num_identities);
  for (std::size_t i = 0; i < cfg.num_identities; ++i) {
    Rng rng(Rng::derive(identity_seed, i));
    IdentityRecord& rec = ds.identities[i];
    char id[32];
    std::snprintf(id, sizeof id, "id%05zu", i);
    rec.id = id;
    rec.gender = rng.uniform() < 0.5 ? Gender::kMale : Gender::kFemale;
    const std::size_t pop = i % cfg.populations.size();
    rec.population = cfg.populations[pop].label;

    Vector z(cfg.latent_dim), voice_latent(cfg.latent_dim), face_latent(cfg.latent_dim);
    for (double& x : z) x = rng.normal();
    for (std::size_t k = 0; k < cfg.latent_dim; ++k) {
      voice_latent[k] = shared * z[k] + own * rng.normal();
    }
    for (std::size_t k = 0; k < cfg.latent_dim; ++k) {
      face_latent[k] = shared * z[k] + own * rng.normal();
    }
    const double shift = rec.gender == Gender::kMale ? cfg.gender_offset : -cfg.gender_offset;
    voice_latent[0] += shift;
    face_latent[0] += shift;

    for (std::size_t s = 0; s < cfg.voices_per_identity; ++s) {
      rec.voices.push_back(project(projections[pop].voice, cfg.voice_dim,
                                   voice_latent, cfg.noise_sigma, rng));
    }
    for (std::size_t s = 0; s < cfg.faces_per_identity; ++s) {
      rec.faces.push_back(project(projections[pop].face, cfg.face_dim,
                                  face_latent, cfg.noise_sigma, rng));
    }
  }
  return ds;
}

}  // namespace vfmr
