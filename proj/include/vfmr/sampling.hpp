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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "vfmr/dataset.hpp"
#include "vfmr/rng.hpp"

namespace vfmr {

enum class GenderBalance { kOff, kThreeToOne };

struct SamplerConfig {
  std::size_t b = 4;  // identities per batch
  std::size_t q = 4;  // voices per identity
  std::size_t r = 8;  // faces per identity
  GenderBalance gender_balance = GenderBalance::kOff;
  std::uint64_t seed = 0;

  void validate() const;
  // b(b-1) q r^2
  std::size_t triplets_per_batch() const { return b * (b - 1) * q * r * r; }
};

struct SampleRef {
  std::size_t identity = 0;  // index into Dataset::identities
  std::size_t index = 0;     // index into that identity's sample list

  auto operator<=>(const SampleRef&) const = default;
};

struct Triplet {
  SampleRef anchor_voice;
  SampleRef positive_face;
  SampleRef negative_face;

  std::size_t anchor_id() const { return anchor_voice.identity; }
  std::size_t negative_id() const { return negative_face.identity; }
};

// Triplets over two sample pools. Each distinct sample is embedded once per
// batch; triplets refer to pool slots.
struct TripletBatch {
  struct Index {
    std::uint32_t anchor;
    std::uint32_t positive;
    std::uint32_t negative;
  };

  Modality anchor_modality = Modality::kVoice;
  Modality candidate_modality = Modality::kFace;
  std::vector<std::size_t> identities;
  std::vector<SampleRef> anchors;
  std::vector<SampleRef> candidates;
  std::vector<Index> triplets;

  std::size_t size() const { return triplets.size(); }
  Triplet triplet(std::size_t k) const;
};

// Packs loose voice/face/face triplets into pooled form (pools deduplicated,
// triplet order preserved).
TripletBatch batch_from_triplets(std::span<const Triplet> triplets);

// Identity-based online sampler: b identities without replacement, then q
// voices and r faces per identity; emits every (voice of A, face of A,
// face of B != A) combination.
class BatchSampler {
 public:
  BatchSampler(const Dataset& dataset, const SamplerConfig& cfg);

  TripletBatch next();
  // Anchor, positive and negative all from one modality; per identity r
  // samples are drawn and every ordered (anchor, positive) pair of distinct
  // slots is combined with every negative slot.
  TripletBatch next_unimodal(Modality modality);

  std::size_t batches_drawn() const { return batches_; }
  // Draws made with replacement because an identity had too few samples.
  std::size_t replacement_draws() const { return replacement_draws_; }

 private:
  std::vector<std::size_t> pick_identities();
  std::vector<std::size_t> pick_samples(std::size_t pool, std::size_t k);

  const Dataset& dataset_;
  SamplerConfig cfg_;
  Rng rng_;
  std::vector<std::size_t> eligible_;
  std::vector<std::size_t> by_gender_[2];
  int first_majority_ = 0;
  std::size_t batches_ = 0;
  std::size_t replacement_draws_ = 0;
  bool warned_ = false;
};

// Single batch drawn from cfg.seed.
TripletBatch sample_batch(const Dataset& dataset, const SamplerConfig& cfg);

// Offline baseline: i.i.d. triplets over uniformly chosen ordered identity
// pairs (probability 1 / (N(N-1)) each).
class RandomTupleMiner {
 public:
  RandomTupleMiner(const Dataset& dataset, std::uint64_t seed);
  Triplet next();

 private:
  const Dataset& dataset_;
  Rng rng_;
  std::vector<std::size_t> eligible_;
};

std::vector<Triplet> mine_random_tuples(const Dataset& dataset, std::size_t n,
                                        std::uint64_t seed);

}  // namespace vfmr
