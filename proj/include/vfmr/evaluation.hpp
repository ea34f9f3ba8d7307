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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vfmr/dataset.hpp"
#include "vfmr/embedder.hpp"

namespace vfmr {

// Embeddings of every sample in a dataset under one model.
class EmbeddingCache {
 public:
  EmbeddingCache(const Dataset& dataset, const ModalityPair& pair, unsigned threads = 1);

  const Embedding& voice(std::size_t identity, std::size_t index) const {
    return voices_[identity][index];
  }
  const Embedding& face(std::size_t identity, std::size_t index) const {
    return faces_[identity][index];
  }
  const MetricSpaceConfig& space() const { return space_; }

 private:
  MetricSpaceConfig space_;
  std::vector<std::vector<Embedding>> voices_;
  std::vector<std::vector<Embedding>> faces_;
};

// Index of the highest inner product; ties go to the lowest index.
std::size_t argmax_similarity(const Embedding& query,
                              std::span<const Embedding> candidates);

struct MatchingInstance {
  Vector query_voice;
  std::vector<Vector> candidates;
  std::size_t true_index = 0;
};

// Predicted candidate index for a 1:n matching instance.
std::size_t match_1n(const MatchingInstance& instance, const ModalityPair& pair);

// Mean embedding of the members re-projected to the sphere. A single member
// is returned unchanged. Throws ZeroVector when the mean cancels exactly.
Embedding joint_of(std::span<const Embedding> members, const MetricSpaceConfig& space);
Embedding joint_embedding(std::span<const Vector> vectors, const EmbedderParams& params,
                          const MetricSpaceConfig& space);

struct MatchingOptions {
  std::size_t n = 2;
  std::size_t num_instances = 10000;
  std::uint64_t seed = 0;
  // Candidates share the query identity's gender.
  bool stratify_gender = false;
  std::size_t m_v = 1;  // voices averaged into one query
  std::size_t m_f = 1;  // faces averaged into one candidate
  unsigned threads = 1;
};

struct MatchingResult {
  double accuracy = 0.0;
  std::size_t instances = 0;
  std::size_t correct = 0;
  std::size_t identities = 0;
  // Keyed "male" / "female" by query gender; absent genders are omitted.
  std::map<std::string, double> accuracy_by_gender;
  std::optional<double> confidence_T;  // n == 2 only
};

// Instance i is drawn from its own stream derived from (seed, i): query
// identity, n - 1 distinct other identities, the true slot, then m_v voices
// and m_f faces per candidate.
MatchingResult evaluate_matching(const Dataset& dataset, const ModalityPair& pair,
                                 const MatchingOptions& options);

// Gallery indices by descending inner product, ties by ascending index.
std::vector<std::size_t> retrieve(const Embedding& query,
                                  std::span<const Embedding> gallery);

// Mean over relevant items of precision at that item's rank.
double average_precision(std::span<const std::size_t> ranking,
                         const std::vector<bool>& relevant);
// Throws NoRelevantItems if any query has no relevant gallery item.
double mean_average_precision(std::span<const std::vector<std::size_t>> rankings,
                              std::span<const std::vector<bool>> relevance);

// Monte-Carlo mAP of uniformly random rankings: each query has `relevant`
// relevant items in a gallery of `gallery_size`; averaged over `seeds` runs.
double random_ranking_map(std::size_t gallery_size, std::size_t relevant,
                          std::size_t queries, std::size_t seeds, std::uint64_t seed);

struct RetrievalOptions {
  std::size_t identities = 100;
  std::size_t faces_per_identity = 5;
  std::size_t queries_per_identity = 40;
  std::size_t m_v = 1;
  std::size_t m_f = 1;
  std::size_t chance_seeds = 50;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct RetrievalResult {
  double map = 0.0;
  double chance_map = 0.0;
  std::size_t gallery_size = 0;
  std::size_t queries = 0;
};

RetrievalResult evaluate_retrieval(const Dataset& dataset, const ModalityPair& pair,
                                   const RetrievalOptions& options);

enum class JointTask { kMatching, kRetrieval };

// Matching accuracy or retrieval mAP with identities represented by joint
// embeddings of m_f faces / m_v voices. m_f = m_v = 1 is exactly the
// single-sample pipeline.
double evaluate_joint(const Dataset& dataset, const ModalityPair& pair, std::size_t m_f,
                      std::size_t m_v, JointTask task, const MatchingOptions& matching = {},
                      const RetrievalOptions& retrieval = {});

// Mean 1:2 accuracy of `target_id` against every other identity, `repeats`
// instances per pairing.
double individual_test(const Dataset& dataset, const ModalityPair& pair,
                       std::string_view target_id, std::size_t repeats,
                       std::uint64_t seed = 0);
std::map<std::string, double> individual_accuracies(const Dataset& dataset,
                                                    const ModalityPair& pair,
                                                    std::size_t repeats, std::uint64_t seed,
                                                    unsigned threads = 1);

enum class SplitMode { kUnseenUnheard, kSeenHeard };

const char* split_mode_name(SplitMode mode);
SplitMode split_mode_from_name(std::string_view name);

// unseen_unheard: disjoint identity sets (round(fraction * N) train).
// seen_heard: every identity in both parts, each sample in exactly one.
std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset, SplitMode mode,
                                          double fraction, std::uint64_t seed);

struct EvaluationReport {
  std::string task;
  std::size_t identities = 0;
  std::size_t instances = 0;
  std::size_t m_v = 1;
  std::size_t m_f = 1;
  std::map<std::size_t, double> accuracy_1n;
  std::optional<double> map_score;
  std::optional<double> chance_map;
  std::map<std::string, double> accuracy_by_gender;
  std::map<std::string, double> per_identity_accuracy;
  std::optional<double> confidence_T;
};

std::string report_to_json(const EvaluationReport& report);
// Flat "metric,key,value" rows.
std::string report_to_csv(const EvaluationReport& report);

}  // namespace vfmr
