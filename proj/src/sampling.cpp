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

#include "vfmr/sampling.hpp"

#include <iostream>
#include <map>
#include <string>

#include "vfmr/error.hpp"

namespace vfmr {
namespace {

std::vector<std::size_t> eligible_identities(const Dataset& ds) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!ds.identities[i].voices.empty() && !ds.identities[i].faces.empty()) {
      out.push_back(i);
    }
  }
  return out;
}

int gender_slot(Gender g) { return g == Gender::kMale ? 0 : 1; }

}  // namespace

void SamplerConfig::validate() const {
  if (b < 2) throw Error(ErrorCode::kInvalidConfig, "sampler needs b >= 2");
  if (q < 1 || r < 1) throw Error(ErrorCode::kInvalidConfig, "sampler needs q, r >= 1");
  if (gender_balance == GenderBalance::kThreeToOne && b % 4 != 0) {
    throw Error(ErrorCode::kInvalidConfig, "3:1 gender balance needs b divisible by 4");
  }
}

Triplet TripletBatch::triplet(std::size_t k) const {
  const Index& t = triplets.at(k);
  return {anchors[t.anchor], candidates[t.positive], candidates[t.negative]};
}

TripletBatch batch_from_triplets(std::span<const Triplet> triplets) {
  TripletBatch batch;
  std::map<SampleRef, std::uint32_t> anchor_slot, candidate_slot;
  std::map<std::size_t, bool> identity_seen;
  auto slot = [](std::map<SampleRef, std::uint32_t>& index,
                 std::vector<SampleRef>& pool, const SampleRef& ref) {
    auto [it, inserted] = index.try_emplace(ref, static_cast<std::uint32_t>(pool.size()));
    if (inserted) pool.push_back(ref);
    return it->second;
  };
  for (const Triplet& t : triplets) {
    for (std::size_t id : {t.anchor_id(), t.negative_id()}) {
      if (identity_seen.try_emplace(id, true).second) batch.identities.push_back(id);
    }
    batch.triplets.push_back({slot(anchor_slot, batch.anchors, t.anchor_voice),
                              slot(candidate_slot, batch.candidates, t.positive_face),
                              slot(candidate_slot, batch.candidates, t.negative_face)});
  }
  return batch;
}

BatchSampler::BatchSampler(const Dataset& dataset, const SamplerConfig& cfg)
    : dataset_(dataset), cfg_(cfg), rng_(cfg.seed) {
  cfg_.validate();
  eligible_ = eligible_identities(dataset_);
  if (eligible_.size() < cfg_.b) {
    throw Error(ErrorCode::kInsufficientData,
                "need " + std::to_string(cfg_.b) + " identities with voices and faces, have " +
                    std::to_string(eligible_.size()));
  }
  if (cfg_.gender_balance == GenderBalance::kThreeToOne) {
    for (std::size_t i : eligible_) {
      by_gender_[gender_slot(dataset_.identities[i].gender)].push_back(i);
    }
    const std::size_t majority = 3 * cfg_.b / 4;
    if (by_gender_[0].size() < majority || by_gender_[1].size() < majority) {
      throw Error(ErrorCode::kInsufficientData,
                  "3:1 gender balance needs " + std::to_string(majority) +
                      " identities of each gender");
    }
    first_majority_ = static_cast<int>(Rng::derive(cfg_.seed, 7) & 1U);
  }
}

std::vector<std::size_t> BatchSampler::pick_identities() {
  std::vector<std::size_t> chosen;
  if (cfg_.gender_balance == GenderBalance::kOff) {
    for (std::size_t k : rng_.choose(eligible_.size(), cfg_.b)) chosen.push_back(eligible_[k]);
    return chosen;
  }
  const int major = (first_majority_ + static_cast<int>(batches_ % 2)) % 2;
  const std::size_t n_major = 3 * cfg_.b / 4;
  const auto& majors = by_gender_[major];
  const auto& minors = by_gender_[1 - major];
  for (std::size_t k : rng_.choose(majors.size(), n_major)) chosen.push_back(majors[k]);
  for (std::size_t k : rng_.choose(minors.size(), cfg_.b - n_major)) chosen.push_back(minors[k]);
  rng_.shuffle(std::span<std::size_t>(chosen));
  return chosen;
}

std::vector<std::size_t> BatchSampler::pick_samples(std::size_t pool, std::size_t k) {
  if (pool >= k) return rng_.choose(pool, k);
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(rng_.index(pool));
  replacement_draws_ += k;
  if (!warned_) {
    std::clog << "warning: identity has " << pool << " samples, fewer than " << k
              << "; sampling with replacement\n";
    warned_ = true;
  }
  return out;
}

TripletBatch BatchSampler::next() {
  TripletBatch batch;
  batch.identities = pick_identities();
  const std::size_t b = cfg_.b, q = cfg_.q, r = cfg_.r;
  for (std::size_t id : batch.identities) {
    const IdentityRecord& rec = dataset_.identities[id];
    for (std::size_t v : pick_samples(rec.voices.size(), q)) batch.anchors.push_back({id, v});
    for (std::size_t f : pick_samples(rec.faces.size(), r)) batch.candidates.push_back({id, f});
  }
  batch.triplets.reserve(cfg_.triplets_per_batch());
  for (std::size_t a = 0; a < b; ++a) {
    for (std::size_t v = 0; v < q; ++v) {
      const auto anchor = static_cast<std::uint32_t>(a * q + v);
      for (std::size_t p = 0; p < r; ++p) {
        const auto positive = static_cast<std::uint32_t>(a * r + p);
        for (std::size_t o = 0; o < b; ++o) {
          if (o == a) continue;
          for (std::size_t n = 0; n < r; ++n) {
            batch.triplets.push_back({anchor, positive, static_cast<std::uint32_t>(o * r + n)});
          }
        }
      }
    }
  }
  ++batches_;
  return batch;
}

TripletBatch BatchSampler::next_unimodal(Modality modality) {
  if (cfg_.r < 2) {
    throw Error(ErrorCode::kInvalidConfig, "unimodal batches need r >= 2");
  }
  TripletBatch batch;
  batch.anchor_modality = modality;
  batch.candidate_modality = modality;
  batch.identities = pick_identities();
  const std::size_t b = cfg_.b, r = cfg_.r;
  for (std::size_t id : batch.identities) {
    const auto& pool = dataset_.identities[id].samples(modality);
    for (std::size_t s : pick_samples(pool.size(), r)) batch.anchors.push_back({id, s});
  }
  batch.candidates = batch.anchors;
  for (std::size_t a = 0; a < b; ++a) {
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < r; ++j) {
        if (i == j) continue;
        for (std::size_t o = 0; o < b; ++o) {
          if (o == a) continue;
          for (std::size_t n = 0; n < r; ++n) {
            batch.triplets.push_back({static_cast<std::uint32_t>(a * r + i),
                                      static_cast<std::uint32_t>(a * r + j),
                                      static_cast<std::uint32_t>(o * r + n)});
          }
        }
      }
    }
  }
  ++batches_;
  return batch;
}

TripletBatch sample_batch(const Dataset& dataset, const SamplerConfig& cfg) {
  BatchSampler sampler(dataset, cfg);
  return sampler.next();
}

RandomTupleMiner::RandomTupleMiner(const Dataset& dataset, std::uint64_t seed)
    : dataset_(dataset), rng_(seed), eligible_(eligible_identities(dataset)) {
  if (eligible_.size() < 2) {
    throw Error(ErrorCode::kInsufficientData,
                "random tuple mining needs >= 2 identities with voices and faces");
  }
}

Triplet RandomTupleMiner::next() {
  const std::size_t n = eligible_.size();
  const std::size_t a = rng_.index(n);
  std::size_t o = rng_.index(n - 1);
  if (o >= a) ++o;
  const std::size_t ia = eligible_[a], io = eligible_[o];
  const IdentityRecord& ra = dataset_.identities[ia];
  const IdentityRecord& ro = dataset_.identities[io];
  Triplet t;
  t.anchor_voice = {ia, rng_.index(ra.voices.size())};
  t.positive_face = {ia, rng_.index(ra.faces.size())};
  t.negative_face = {io, rng_.index(ro.faces.size())};
  return t;
}

std::vector<Triplet> mine_random_tuples(const Dataset& dataset, std::size_t n,
                                        std::uint64_t seed) {
  RandomTupleMiner miner(dataset, seed);
  std::vector<Triplet> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(miner.next());
  return out;
}

}  // namespace vfmr
