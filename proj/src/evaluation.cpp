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

#include "vfmr/evaluation.hpp"

#include <algorithm>
#include <numeric>

#include "format_util.hpp"
#include "json.hpp"
#include "vfmr/confidence.hpp"
#include "vfmr/error.hpp"
#include "vfmr/parallel.hpp"
#include "vfmr/rng.hpp"

namespace vfmr {
namespace {

using nlohmann::json;

std::vector<std::size_t> usable_identities(const Dataset& ds) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!ds.identities[i].voices.empty() && !ds.identities[i].faces.empty()) out.push_back(i);
  }
  return out;
}

// k draws from a pool of `pool` samples: distinct when possible, otherwise
// with replacement.
std::vector<std::size_t> draw(Rng& rng, std::size_t pool, std::size_t k) {
  if (pool >= k) return rng.choose(pool, k);
  std::vector<std::size_t> out(k);
  for (auto& x : out) x = rng.index(pool);
  return out;
}

// `groups` groups of `k` draws: all distinct across groups if the pool
// allows, else distinct within each group if possible, else with replacement.
std::vector<std::vector<std::size_t>> draw_groups(Rng& rng, std::size_t pool,
                                                  std::size_t groups, std::size_t k) {
  std::vector<std::vector<std::size_t>> out(groups);
  if (pool >= groups * k) {
    const auto all = rng.choose(pool, groups * k);
    for (std::size_t g = 0; g < groups; ++g) {
      out[g].assign(all.begin() + g * k, all.begin() + (g + 1) * k);
    }
    return out;
  }
  for (auto& group : out) group = draw(rng, pool, k);
  return out;
}

Embedding joint_voice(const EmbeddingCache& cache, std::size_t id,
                      std::span<const std::size_t> picks) {
  std::vector<Embedding> members;
  members.reserve(picks.size());
  for (std::size_t p : picks) members.push_back(cache.voice(id, p));
  return joint_of(members, cache.space());
}

Embedding joint_face(const EmbeddingCache& cache, std::size_t id,
                     std::span<const std::size_t> picks) {
  std::vector<Embedding> members;
  members.reserve(picks.size());
  for (std::size_t p : picks) members.push_back(cache.face(id, p));
  return joint_of(members, cache.space());
}

double mean_of(std::span<const double> values) {
  return values.empty() ? 0.0 : pairwise_sum(values) / static_cast<double>(values.size());
}

}  // namespace

EmbeddingCache::EmbeddingCache(const Dataset& dataset, const ModalityPair& pair,
                               unsigned threads)
    : space_(pair.space) {
  pair.validate();
  const std::size_t n = dataset.size();
  std::vector<std::vector<std::optional<Embedding>>> v(n), f(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const IdentityRecord& rec = dataset.identities[i];
    for (const Vector& x : rec.voices) v[i].emplace_back(embed(pair.voice, x, pair.space));
    for (const Vector& x : rec.faces) f[i].emplace_back(embed(pair.face, x, pair.space));
  });
  voices_.resize(n);
  faces_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& e : v[i]) voices_[i].push_back(std::move(*e));
    for (auto& e : f[i]) faces_[i].push_back(std::move(*e));
  }
}

std::size_t argmax_similarity(const Embedding& query, std::span<const Embedding> candidates) {
  if (candidates.empty()) throw Error(ErrorCode::kInvalidArgument, "no candidates");
  std::size_t best = 0;
  double best_score = inner_product_similarity(query, candidates[0]);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double s = inner_product_similarity(query, candidates[i]);
    if (s > best_score) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

std::size_t match_1n(const MatchingInstance& instance, const ModalityPair& pair) {
  if (instance.candidates.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "1:n matching needs n >= 2 candidates");
  }
  const Embedding query = embed(pair.voice, instance.query_voice, pair.space);
  std::vector<Embedding> candidates;
  candidates.reserve(instance.candidates.size());
  for (const Vector& c : instance.candidates) candidates.push_back(embed(pair.face, c, pair.space));
  return argmax_similarity(query, candidates);
}

Embedding joint_of(std::span<const Embedding> members, const MetricSpaceConfig& space) {
  if (members.empty()) throw Error(ErrorCode::kInvalidArgument, "joint embedding of nothing");
  if (members.size() == 1) return members[0];
  const std::size_t dim = members[0].size();
  Vector mean(dim, 0.0);
  for (const Embedding& e : members) {
    if (e.size() != dim) throw Error(ErrorCode::kDimensionMismatch, "joint members differ in dim");
    for (std::size_t i = 0; i < dim; ++i) mean[i] += e[i];
  }
  for (double& x : mean) x /= static_cast<double>(members.size());
  return l2_normalize_scale(mean, space);
}

Embedding joint_embedding(std::span<const Vector> vectors, const EmbedderParams& params,
                          const MetricSpaceConfig& space) {
  std::vector<Embedding> members;
  members.reserve(vectors.size());
  for (const Vector& v : vectors) members.push_back(embed(params, v, space));
  return joint_of(members, space);
}

MatchingResult evaluate_matching(const Dataset& dataset, const ModalityPair& pair,
                                 const MatchingOptions& options) {
  if (options.n < 2) throw Error(ErrorCode::kInvalidArgument, "matching needs n >= 2");
  if (options.m_v < 1 || options.m_f < 1) {
    throw Error(ErrorCode::kInvalidArgument, "m_v and m_f must be >= 1");
  }
  const std::vector<std::size_t> usable = usable_identities(dataset);
  if (usable.size() < options.n) {
    throw Error(ErrorCode::kInsufficientData,
                "1:" + std::to_string(options.n) + " matching needs " +
                    std::to_string(options.n) + " identities with voices and faces");
  }

  // Query pool and, per gender, the candidate pool.
  std::vector<std::size_t> by_gender[2];
  for (std::size_t id : usable) {
    by_gender[dataset.identities[id].gender == Gender::kMale ? 0 : 1].push_back(id);
  }
  std::vector<std::size_t> queries = usable;
  if (options.stratify_gender) {
    queries.clear();
    for (const auto& group : by_gender) {
      if (group.size() >= options.n) queries.insert(queries.end(), group.begin(), group.end());
    }
    std::sort(queries.begin(), queries.end());
    if (queries.empty()) {
      throw Error(ErrorCode::kInsufficientData,
                  "gender-stratified matching needs n identities of one gender");
    }
  }

  const EmbeddingCache cache(dataset, pair, options.threads);
  std::vector<char> correct(options.num_instances, 0);
  std::vector<char> query_male(options.num_instances, 0);
  parallel_for(options.num_instances, options.threads, [&](std::size_t i) {
    Rng rng(Rng::derive(options.seed, i));
    const std::size_t query_id = queries[rng.index(queries.size())];
    const bool male = dataset.identities[query_id].gender == Gender::kMale;
    const auto& pool = options.stratify_gender ? by_gender[male ? 0 : 1] : usable;
    // Distinct non-query identities via a partial shuffle of pool minus query.
    std::vector<std::size_t> others;
    others.reserve(pool.size() - 1);
    for (std::size_t id : pool) {
      if (id != query_id) others.push_back(id);
    }
    std::vector<std::size_t> candidate_ids;
    for (std::size_t k : rng.choose(others.size(), options.n - 1)) {
      candidate_ids.push_back(others[k]);
    }
    const std::size_t true_index = rng.index(options.n);
    candidate_ids.insert(candidate_ids.begin() + static_cast<std::ptrdiff_t>(true_index), query_id);

    const auto& qrec = dataset.identities[query_id];
    const Embedding query = joint_voice(cache, query_id, draw(rng, qrec.voices.size(), options.m_v));
    std::vector<Embedding> candidates;
    candidates.reserve(options.n);
    for (std::size_t id : candidate_ids) {
      const auto picks = draw(rng, dataset.identities[id].faces.size(), options.m_f);
      candidates.push_back(joint_face(cache, id, picks));
    }
    correct[i] = argmax_similarity(query, candidates) == true_index ? 1 : 0;
    query_male[i] = male ? 1 : 0;
  });

  MatchingResult result;
  result.instances = options.num_instances;
  result.identities = usable.size();
  std::size_t per_gender_total[2] = {0, 0};
  std::size_t per_gender_correct[2] = {0, 0};
  for (std::size_t i = 0; i < options.num_instances; ++i) {
    const int g = query_male[i] ? 0 : 1;
    ++per_gender_total[g];
    per_gender_correct[g] += static_cast<std::size_t>(correct[i]);
    result.correct += static_cast<std::size_t>(correct[i]);
  }
  if (result.instances > 0) {
    result.accuracy = static_cast<double>(result.correct) / static_cast<double>(result.instances);
  }
  const char* names[2] = {"male", "female"};
  for (int g = 0; g < 2; ++g) {
    if (per_gender_total[g] > 0) {
      result.accuracy_by_gender[names[g]] = static_cast<double>(per_gender_correct[g]) /
                                            static_cast<double>(per_gender_total[g]);
    }
  }
  if (options.n == 2 && options.num_instances >= 1) {
    result.confidence_T = confidence_T(TestDesign::random_tuples(
        usable.size(), static_cast<double>(options.num_instances)));
  }
  return result;
}

std::vector<std::size_t> retrieve(const Embedding& query, std::span<const Embedding> gallery) {
  std::vector<double> scores(gallery.size());
  for (std::size_t i = 0; i < gallery.size(); ++i) {
    scores[i] = inner_product_similarity(query, gallery[i]);
  }
  std::vector<std::size_t> order(gallery.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

double average_precision(std::span<const std::size_t> ranking,
                         const std::vector<bool>& relevant) {
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t rank = 0; rank < ranking.size(); ++rank) {
    if (ranking[rank] < relevant.size() && relevant[ranking[rank]]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  if (hits == 0) throw Error(ErrorCode::kNoRelevantItems, "query has no relevant gallery item");
  return sum / static_cast<double>(hits);
}

double mean_average_precision(std::span<const std::vector<std::size_t>> rankings,
                              std::span<const std::vector<bool>> relevance) {
  if (rankings.size() != relevance.size()) {
    throw Error(ErrorCode::kInvalidArgument, "one relevance vector per ranking required");
  }
  if (rankings.empty()) throw Error(ErrorCode::kNoRelevantItems, "no queries");
  std::vector<double> ap(rankings.size());
  for (std::size_t q = 0; q < rankings.size(); ++q) {
    ap[q] = average_precision(rankings[q], relevance[q]);
  }
  return mean_of(ap);
}

double random_ranking_map(std::size_t gallery_size, std::size_t relevant, std::size_t queries,
                          std::size_t seeds, std::uint64_t seed) {
  if (relevant < 1 || relevant > gallery_size || queries < 1 || seeds < 1) {
    throw Error(ErrorCode::kInvalidArgument, "invalid random-ranking layout");
  }
  std::vector<double> per_seed(seeds);
  for (std::size_t s = 0; s < seeds; ++s) {
    Rng rng(Rng::derive(seed, s));
    std::vector<double> ap(queries);
    for (std::size_t q = 0; q < queries; ++q) {
      // Ranks of the relevant items under a uniform permutation.
      std::vector<std::size_t> ranks = rng.choose(gallery_size, relevant);
      std::sort(ranks.begin(), ranks.end());
      double sum = 0.0;
      for (std::size_t k = 0; k < relevant; ++k) {
        sum += static_cast<double>(k + 1) / static_cast<double>(ranks[k] + 1);
      }
      ap[q] = sum / static_cast<double>(relevant);
    }
    per_seed[s] = mean_of(ap);
  }
  return mean_of(per_seed);
}

RetrievalResult evaluate_retrieval(const Dataset& dataset, const ModalityPair& pair,
                                   const RetrievalOptions& options) {
  if (options.faces_per_identity < 1 || options.queries_per_identity < 1 || options.m_v < 1 ||
      options.m_f < 1 || options.identities < 1) {
    throw Error(ErrorCode::kInvalidArgument, "retrieval layout values must be >= 1");
  }
  const std::vector<std::size_t> usable = usable_identities(dataset);
  if (usable.size() < 2) {
    throw Error(ErrorCode::kInsufficientData, "retrieval needs >= 2 identities");
  }
  const EmbeddingCache cache(dataset, pair, options.threads);

  Rng layout_rng(Rng::derive(options.seed, 0));
  std::vector<std::size_t> gallery_ids;
  for (std::size_t k : layout_rng.choose(usable.size(), options.identities)) {
    gallery_ids.push_back(usable[k]);
  }
  std::sort(gallery_ids.begin(), gallery_ids.end());

  std::vector<Embedding> gallery;
  std::vector<std::size_t> gallery_owner;
  struct Query {
    std::size_t identity;
    std::vector<std::size_t> voices;
  };
  std::vector<Query> queries;
  for (std::size_t g = 0; g < gallery_ids.size(); ++g) {
    const std::size_t id = gallery_ids[g];
    Rng rng(Rng::derive(Rng::derive(options.seed, 1), id));
    const auto& rec = dataset.identities[id];
    for (const auto& picks :
         draw_groups(rng, rec.faces.size(), options.faces_per_identity, options.m_f)) {
      gallery.push_back(joint_face(cache, id, picks));
      gallery_owner.push_back(id);
    }
    for (auto& picks :
         draw_groups(rng, rec.voices.size(), options.queries_per_identity, options.m_v)) {
      queries.push_back({id, std::move(picks)});
    }
  }

  std::vector<double> ap(queries.size());
  parallel_for(queries.size(), options.threads, [&](std::size_t q) {
    const Embedding query = joint_voice(cache, queries[q].identity, queries[q].voices);
    const auto ranking = retrieve(query, gallery);
    std::vector<bool> relevant(gallery.size());
    for (std::size_t i = 0; i < gallery.size(); ++i) {
      relevant[i] = gallery_owner[i] == queries[q].identity;
    }
    ap[q] = average_precision(ranking, relevant);
  });

  RetrievalResult result;
  result.map = mean_of(ap);
  result.gallery_size = gallery.size();
  result.queries = queries.size();
  result.chance_map = random_ranking_map(gallery.size(), options.faces_per_identity,
                                         queries.size(), options.chance_seeds,
                                         Rng::derive(options.seed, 2));
  return result;
}

double evaluate_joint(const Dataset& dataset, const ModalityPair& pair, std::size_t m_f,
                      std::size_t m_v, JointTask task, const MatchingOptions& matching,
                      const RetrievalOptions& retrieval) {
  if (task == JointTask::kMatching) {
    MatchingOptions opts = matching;
    opts.m_f = m_f;
    opts.m_v = m_v;
    return evaluate_matching(dataset, pair, opts).accuracy;
  }
  RetrievalOptions opts = retrieval;
  opts.m_f = m_f;
  opts.m_v = m_v;
  return evaluate_retrieval(dataset, pair, opts).map;
}

namespace {

double individual_accuracy(const Dataset& dataset, const EmbeddingCache& cache,
                           std::size_t target, std::size_t repeats, std::uint64_t seed) {
  const auto& trec = dataset.identities[target];
  if (trec.voices.empty() || trec.faces.empty()) {
    throw Error(ErrorCode::kInsufficientData, "identity " + trec.id + " lacks voices or faces");
  }
  const std::uint64_t target_seed = Rng::derive(seed, target);
  std::vector<double> outcomes;
  for (std::size_t other = 0; other < dataset.size(); ++other) {
    const auto& orec = dataset.identities[other];
    if (other == target || orec.faces.empty()) continue;
    for (std::size_t k = 0; k < repeats; ++k) {
      Rng rng(Rng::derive(Rng::derive(target_seed, other), k));
      const Embedding& query = cache.voice(target, rng.index(trec.voices.size()));
      const Embedding& own = cache.face(target, rng.index(trec.faces.size()));
      const Embedding& foreign = cache.face(other, rng.index(orec.faces.size()));
      const std::size_t true_index = rng.index(2);
      const std::vector<Embedding> candidates =
          true_index == 0 ? std::vector<Embedding>{own, foreign}
                          : std::vector<Embedding>{foreign, own};
      outcomes.push_back(argmax_similarity(query, candidates) == true_index ? 1.0 : 0.0);
    }
  }
  if (outcomes.empty()) {
    throw Error(ErrorCode::kInsufficientData, "individual test needs another identity with faces");
  }
  return mean_of(outcomes);
}

}  // namespace

double individual_test(const Dataset& dataset, const ModalityPair& pair,
                       std::string_view target_id, std::size_t repeats, std::uint64_t seed) {
  const auto target = dataset.find(target_id);
  if (!target) {
    throw Error(ErrorCode::kUnknownIdentity, "unknown identity " + std::string(target_id));
  }
  if (dataset.size() < 2) throw Error(ErrorCode::kInsufficientData, "need >= 2 identities");
  if (repeats < 1) throw Error(ErrorCode::kInvalidArgument, "repeats must be >= 1");
  const EmbeddingCache cache(dataset, pair);
  return individual_accuracy(dataset, cache, *target, repeats, seed);
}

std::map<std::string, double> individual_accuracies(const Dataset& dataset,
                                                    const ModalityPair& pair,
                                                    std::size_t repeats, std::uint64_t seed,
                                                    unsigned threads) {
  if (dataset.size() < 2) throw Error(ErrorCode::kInsufficientData, "need >= 2 identities");
  if (repeats < 1) throw Error(ErrorCode::kInvalidArgument, "repeats must be >= 1");
  const EmbeddingCache cache(dataset, pair, threads);
  std::vector<double> acc(dataset.size());
  parallel_for(dataset.size(), threads, [&](std::size_t i) {
    acc[i] = individual_accuracy(dataset, cache, i, repeats, seed);
  });
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < dataset.size(); ++i) out[dataset.identities[i].id] = acc[i];
  return out;
}

const char* split_mode_name(SplitMode mode) {
  return mode == SplitMode::kUnseenUnheard ? "unseen_unheard" : "seen_heard";
}

SplitMode split_mode_from_name(std::string_view name) {
  if (name == "unseen_unheard") return SplitMode::kUnseenUnheard;
  if (name == "seen_heard") return SplitMode::kSeenHeard;
  throw Error(ErrorCode::kInvalidConfig, "unknown split mode " + std::string(name));
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset, SplitMode mode,
                                          double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "split fraction must lie in (0, 1)");
  }
  auto train_count = [fraction](std::size_t total) {
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
    return std::clamp<std::size_t>(k, 1, total - 1);
  };
  Rng rng(seed);
  std::pair<Dataset, Dataset> out;

  if (mode == SplitMode::kUnseenUnheard) {
    if (dataset.size() < 2) {
      throw Error(ErrorCode::kInsufficientData, "identity split needs >= 2 identities");
    }
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    const std::size_t k = train_count(dataset.size());
    std::vector<bool> in_train(dataset.size(), false);
    for (std::size_t i = 0; i < k; ++i) in_train[order[i]] = true;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      (in_train[i] ? out.first : out.second).identities.push_back(dataset.identities[i]);
    }
    return out;
  }

  for (const auto& rec : dataset.identities) {
    if (rec.voices.size() < 2 || rec.faces.size() < 2) {
      throw Error(ErrorCode::kInsufficientData,
                  "seen_heard split needs >= 2 voices and faces for identity " + rec.id);
    }
    IdentityRecord train{rec.id, rec.gender, rec.population, {}, {}};
    IdentityRecord test = train;
    auto split_samples = [&](const std::vector<Vector>& samples, std::vector<Vector>& a,
                             std::vector<Vector>& b) {
      std::vector<std::size_t> order(samples.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      rng.shuffle(std::span<std::size_t>(order));
      const std::size_t k = train_count(samples.size());
      std::vector<bool> in_train(samples.size(), false);
      for (std::size_t i = 0; i < k; ++i) in_train[order[i]] = true;
      for (std::size_t i = 0; i < samples.size(); ++i) {
        (in_train[i] ? a : b).push_back(samples[i]);
      }
    };
    split_samples(rec.voices, train.voices, test.voices);
    split_samples(rec.faces, train.faces, test.faces);
    out.first.identities.push_back(std::move(train));
    out.second.identities.push_back(std::move(test));
  }
  return out;
}

std::string report_to_json(const EvaluationReport& report) {
  json j;
  j["format"] = "vfmr-report";
  j["version"] = 1;
  j["task"] = report.task;
  j["identities"] = report.identities;
  j["instances"] = report.instances;
  j["m_v"] = report.m_v;
  j["m_f"] = report.m_f;
  json acc = json::object();
  for (const auto& [n, a] : report.accuracy_1n) acc[std::to_string(n)] = a;
  j["accuracy_1n"] = acc;
  j["map_score"] = report.map_score ? json(*report.map_score) : json(nullptr);
  j["chance_map"] = report.chance_map ? json(*report.chance_map) : json(nullptr);
  j["accuracy_by_gender"] = report.accuracy_by_gender;
  j["per_identity_accuracy"] = report.per_identity_accuracy;
  j["confidence_T"] = report.confidence_T ? json(*report.confidence_T) : json(nullptr);
  if (report.confidence_T) j["confidence_T_display"] = format_sig4(*report.confidence_T);
  return j.dump(2) + "\n";
}

std::string report_to_csv(const EvaluationReport& report) {
  using detail::format_double;
  std::string out = "metric,key,value\n";
  auto row = [&out](const std::string& metric, const std::string& key, const std::string& v) {
    out += metric + "," + key + "," + v + "\n";
  };
  row("task", "", report.task);
  row("identities", "", std::to_string(report.identities));
  row("instances", "", std::to_string(report.instances));
  row("m_v", "", std::to_string(report.m_v));
  row("m_f", "", std::to_string(report.m_f));
  for (const auto& [n, a] : report.accuracy_1n) row("accuracy_1n", std::to_string(n), format_double(a));
  if (report.map_score) row("map_score", "", format_double(*report.map_score));
  if (report.chance_map) row("chance_map", "", format_double(*report.chance_map));
  for (const auto& [g, a] : report.accuracy_by_gender) row("accuracy_by_gender", g, format_double(a));
  for (const auto& [id, a] : report.per_identity_accuracy) {
    row("per_identity_accuracy", id, format_double(a));
  }
  if (report.confidence_T) row("confidence_T", "", format_sig4(*report.confidence_T));
  return out;
}

}  // namespace vfmr
