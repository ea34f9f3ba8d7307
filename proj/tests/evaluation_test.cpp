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

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <vector>

#include "doctest.h"
#include "vfmr/confidence.hpp"
#include "vfmr/config.hpp"
#include "vfmr/error.hpp"
#include "vfmr/evaluation.hpp"
#include "vfmr/rng.hpp"
#include "vfmr/synthetic.hpp"
#include "vfmr/training.hpp"

using namespace vfmr;

namespace {

Embedding emb(Vector v, double scale = 1.0) {
  const std::size_t dim = v.size();
  return l2_normalize_scale(v, MetricSpaceConfig{dim, scale});
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kInvalidArgument;
}

// Pseudo-inverse (P^T P)^-1 P^T of a rows x cols projection, as a layer.
Layer pseudo_inverse(const Vector& p, std::size_t rows, std::size_t cols) {
  std::vector<Vector> a(cols, Vector(2 * cols, 0.0));
  for (std::size_t i = 0; i < cols; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      for (std::size_t r = 0; r < rows; ++r) a[i][j] += p[r * cols + i] * p[r * cols + j];
    }
    a[i][cols + i] = 1.0;
  }
  for (std::size_t c = 0; c < cols; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < cols; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    const double d = a[c][c];
    for (double& x : a[c]) x /= d;
    for (std::size_t r = 0; r < cols; ++r) {
      if (r == c) continue;
      const double f = a[r][c];
      for (std::size_t k = 0; k < 2 * cols; ++k) a[r][k] -= f * a[c][k];
    }
  }
  Layer out(cols, rows);
  for (std::size_t i = 0; i < cols; ++i) {
    for (std::size_t r = 0; r < rows; ++r) {
      double acc = 0.0;
      for (std::size_t j = 0; j < cols; ++j) acc += a[i][cols + j] * p[r * cols + j];
      out.w(i, r) = acc;
    }
  }
  return out;
}

// A model that maps both modalities back onto the generator's latent.
ModalityPair oracle_model(const GeneratorConfig& g) {
  const Projections p = population_projections(g, 0);
  ModalityPair pair;
  pair.space = {g.latent_dim, 128.0};
  pair.voice.layers = {pseudo_inverse(p.voice, g.voice_dim, g.latent_dim)};
  pair.face.layers = {pseudo_inverse(p.face, g.face_dim, g.latent_dim)};
  pair.voice.activation = pair.face.activation = Activation::kIdentity;
  return pair;
}

ModalityPair untrained(const Dataset& ds, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.derive_seeds();
  return init_model(cfg, ds.voice_dim(), ds.face_dim());
}

// Brute-force ranking: repeatedly pick the best remaining item, lowest index
// on ties.
std::vector<std::size_t> oracle_ranking(const Embedding& q, const std::vector<Embedding>& g) {
  std::vector<bool> used(g.size(), false);
  std::vector<std::size_t> out;
  for (std::size_t step = 0; step < g.size(); ++step) {
    std::size_t best = g.size();
    double best_score = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (used[i]) continue;
      double s = 0;
      for (std::size_t k = 0; k < q.size(); ++k) s += q[k] * g[i][k];
      if (best == g.size() || s > best_score) {
        best = i;
        best_score = s;
      }
    }
    used[best] = true;
    out.push_back(best);
  }
  return out;
}

}  // namespace

TEST_CASE("argmax breaks ties by lowest index") {
  const Embedding q = emb({1, 0});
  const std::vector<Embedding> same{emb({1, 1}), emb({1, 1})};
  CHECK(argmax_similarity(q, same) == 0);
  const std::vector<Embedding> c{emb({0, 1}), emb({1, 0.1}), emb({1, 0.1})};
  CHECK(argmax_similarity(q, c) == 1);
}

TEST_CASE("match_1n with two identical candidates picks index 0") {
  const GeneratorConfig g;
  const ModalityPair pair = oracle_model(g);
  MatchingInstance inst;
  inst.query_voice = Vector(g.voice_dim, 0.3);
  inst.candidates = {Vector(g.face_dim, 0.7), Vector(g.face_dim, 0.7)};
  CHECK(match_1n(inst, pair) == 0);
  inst.candidates.pop_back();
  CHECK_THROWS_AS(match_1n(inst, pair), Error);
}

TEST_CASE("a perfectly correlated model matches every pair") {
  GeneratorConfig g;
  g.num_identities = 30;
  g.noise_sigma = 0.0;
  g.voices_per_identity = 1;
  g.faces_per_identity = 1;
  const Dataset ds = generate(g);
  const ModalityPair pair = oracle_model(g);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < ds.size(); ++j) {
      if (i == j) continue;
      MatchingInstance inst{ds.identities[i].voices[0],
                            {ds.identities[j].faces[0], ds.identities[i].faces[0]}, 1};
      CHECK(match_1n(inst, pair) == inst.true_index);
    }
  }
}

TEST_CASE("matching monotonicity") {
  Rng rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    auto random = [&] {
      Vector v(4);
      for (auto& x : v) x = rng.normal();
      return emb(v, 3.0);
    };
    const Embedding q = random();
    std::vector<Embedding> c{random(), random(), random()};
    const std::size_t truth = rng.index(3);
    if (argmax_similarity(q, c) != truth) continue;
    // Move the true candidate halfway towards the query.
    Vector closer(4);
    for (std::size_t k = 0; k < 4; ++k) closer[k] = c[truth][k] + 0.5 * (q[k] - c[truth][k]);
    c[truth] = emb(closer, 3.0);
    CHECK(argmax_similarity(q, c) == truth);
  }
}

TEST_CASE("untrained embedders are at chance") {
  GeneratorConfig g;
  g.seed = 3;
  const Dataset ds = generate(g);
  for (std::size_t n : {2u, 4u}) {
    std::size_t correct = 0, total = 0;
    // Average over initializations: one random net has its own bias.
    for (std::uint64_t init = 0; init < 40; ++init) {
      MatchingOptions m;
      m.n = n;
      m.num_instances = 500;
      m.seed = init;
      const MatchingResult r = evaluate_matching(ds, untrained(ds, 100 + init), m);
      correct += r.correct;
      total += r.instances;
    }
    const double p = 1.0 / static_cast<double>(n);
    const double acc = static_cast<double>(correct) / total;
    CHECK(std::abs(acc - p) <= 3 * std::sqrt(p * (1 - p) / total));
  }
}

TEST_CASE("matching is deterministic and thread-count independent") {
  GeneratorConfig g;
  g.num_identities = 50;
  const Dataset ds = generate(g);
  const ModalityPair pair = untrained(ds, 1);
  MatchingOptions m;
  m.n = 3;
  m.num_instances = 3000;
  m.seed = 4;
  const MatchingResult a = evaluate_matching(ds, pair, m);
  m.threads = 5;
  const MatchingResult b = evaluate_matching(ds, pair, m);
  CHECK(a.correct == b.correct);
  CHECK(a.accuracy_by_gender == b.accuracy_by_gender);
  CHECK(a.identities == 50);
  CHECK_FALSE(a.confidence_T.has_value());
  m.n = 2;
  const MatchingResult c = evaluate_matching(ds, pair, m);
  REQUIRE(c.confidence_T.has_value());
  CHECK(*c.confidence_T == confidence_T(TestDesign::random_tuples(50, 3000)));
}

TEST_CASE("gender stratification draws candidates of the query's gender") {
  // Features carry gender only, so same-gender candidates always tie.
  Dataset ds;
  for (int i = 0; i < 12; ++i) {
    IdentityRecord r;
    r.id = "p" + std::to_string(i);
    r.gender = i % 2 == 0 ? Gender::kMale : Gender::kFemale;
    const Vector v = r.gender == Gender::kMale ? Vector{1, 0} : Vector{-1, 0.2};
    r.voices = {v, v};
    r.faces = {v};
    ds.identities.push_back(r);
  }
  ModalityPair pair;
  pair.space = {2, 1.0};
  Layer eye(2, 2);
  eye.w(0, 0) = eye.w(1, 1) = 1.0;
  pair.voice.layers = pair.face.layers = {eye};
  MatchingOptions m;
  m.num_instances = 4000;
  m.seed = 1;
  m.stratify_gender = true;
  const MatchingResult strat = evaluate_matching(ds, pair, m);
  // Ties resolve to index 0, so only true_index == 0 scores.
  CHECK(std::abs(strat.accuracy - 0.5) < 0.04);
  CHECK(strat.accuracy_by_gender.size() == 2);
  m.stratify_gender = false;
  CHECK(evaluate_matching(ds, pair, m).accuracy > 0.65);
}

TEST_CASE("matching needs enough identities") {
  GeneratorConfig g;
  g.num_identities = 3;
  const Dataset ds = generate(g);
  MatchingOptions m;
  m.n = 4;
  CHECK(code_of([&] { evaluate_matching(ds, untrained(ds, 0), m); }) ==
        ErrorCode::kInsufficientData);
}

TEST_CASE("retrieval ranking") {
  CHECK(retrieve(emb({1, 0}), std::vector<Embedding>{emb({0, 1})}) ==
        std::vector<std::size_t>{0});
  const std::vector<Embedding> g{emb({0, 1, 0}), emb({1, 0, 0}), emb({0, 0, 1})};
  CHECK(retrieve(emb({1, 0, 0}), g).front() == 1);

  Rng rng(0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Embedding> gallery;
    auto random = [&] {
      Vector v(4);
      for (auto& x : v) x = rng.normal();
      return emb(v, 2.0);
    };
    for (int i = 0; i < 40; ++i) gallery.push_back(random());
    gallery.push_back(gallery[3]);  // an exact tie
    const Embedding q = random();
    CHECK(retrieve(q, gallery) == oracle_ranking(q, gallery));
  }
}

TEST_CASE("average precision") {
  std::vector<std::size_t> ranking(500);
  std::iota(ranking.begin(), ranking.end(), std::size_t{0});
  std::vector<bool> rel(500, false);
  for (int i = 0; i < 5; ++i) rel[i] = true;
  CHECK(average_precision(ranking, rel) == 1.0);

  std::vector<bool> one(500, false);
  one[1] = true;
  CHECK(average_precision(ranking, one) == 0.5);

  // Relevant at ranks 1, 3, 5: (1 + 2/3 + 3/5) / 3.
  std::vector<bool> odd(6, false);
  odd[0] = odd[2] = odd[4] = true;
  std::vector<std::size_t> r6(6);
  std::iota(r6.begin(), r6.end(), std::size_t{0});
  CHECK(average_precision(r6, odd) == doctest::Approx((1 + 2.0 / 3 + 3.0 / 5) / 3));

  // Swapping a relevant item ahead of an irrelevant one strictly helps.
  std::vector<std::size_t> swapped = r6;
  std::swap(swapped[1], swapped[2]);
  CHECK(average_precision(swapped, odd) > average_precision(r6, odd));

  CHECK(code_of([&] { average_precision(r6, std::vector<bool>(6, false)); }) ==
        ErrorCode::kNoRelevantItems);

  const std::vector<std::vector<std::size_t>> rankings{r6, r6};
  const std::vector<std::vector<bool>> rels{odd, {false, true, false, false, false, false}};
  CHECK(mean_average_precision(rankings, rels) ==
        doctest::Approx(((1 + 2.0 / 3 + 3.0 / 5) / 3 + 0.5) / 2));
}

TEST_CASE("random-ranking mAP matches an independent Monte-Carlo oracle") {
  const double fast = random_ranking_map(500, 5, 4000, 50, 7);
  CHECK(std::abs(fast - 0.0215) <= 0.002);

  // Oracle: shuffle whole galleries and score them with the generic AP.
  Rng rng(123);
  std::vector<std::size_t> perm(500);
  std::vector<bool> rel(500, false);
  for (int i = 0; i < 5; ++i) rel[i] = true;
  double sum = 0;
  constexpr int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(perm));
    sum += average_precision(perm, rel);
  }
  CHECK(std::abs(sum / trials - fast) < 0.001);
}

TEST_CASE("joint embeddings") {
  const MetricSpaceConfig space{4, 5.0};
  EmbedderParams net = init_embedder(3, {}, 4, 0, Activation::kIdentity);
  const Vector x{0.2, -1.0, 0.5};
  const std::vector<Vector> same(4, x);
  CHECK(joint_embedding(same, net, space).values().size() == 4);
  const Embedding single = embed(net, x, space);
  const Embedding joint = joint_embedding(same, net, space);
  for (std::size_t i = 0; i < 4; ++i) CHECK(joint[i] == doctest::Approx(single[i]));

  const std::vector<Embedding> antipodal{emb({1, 0}), emb({-1, 0})};
  CHECK(code_of([&] { joint_of(antipodal, MetricSpaceConfig{2, 1.0}); }) ==
        ErrorCode::kZeroVector);

  // Three random vectors against mean-then-normalize by hand.
  Rng rng(0);
  std::vector<Vector> xs(3, Vector(3));
  for (auto& v : xs) for (auto& e : v) e = rng.normal();
  Vector mean(4, 0.0);
  for (const auto& v : xs) {
    const Vector out = forward(net, v);
    double n = 0;
    for (double o : out) n += o * o;
    for (std::size_t i = 0; i < 4; ++i) mean[i] += 5.0 * out[i] / std::sqrt(n) / 3.0;
  }
  double mn = 0;
  for (double m : mean) mn += m * m;
  const Embedding got = joint_embedding(xs, net, space);
  for (std::size_t i = 0; i < 4; ++i) CHECK(got[i] == doctest::Approx(5.0 * mean[i] / std::sqrt(mn)));
}

TEST_CASE("joint evaluation with m=1 reproduces the single-sample metrics") {
  GeneratorConfig g;
  g.num_identities = 120;
  g.noise_sigma = 0.5;
  const Dataset ds = generate(g);
  const ModalityPair pair = untrained(ds, 3);
  MatchingOptions m;
  m.num_instances = 2000;
  m.seed = 8;
  CHECK(evaluate_joint(ds, pair, 1, 1, JointTask::kMatching, m) ==
        evaluate_matching(ds, pair, m).accuracy);
  RetrievalOptions r;
  r.queries_per_identity = 4;
  r.chance_seeds = 2;
  CHECK(evaluate_joint(ds, pair, 1, 1, JointTask::kRetrieval, {}, r) ==
        evaluate_retrieval(ds, pair, r).map);
}

TEST_CASE("joint retrieval with 20 voices and 5 faces") {
  GeneratorConfig g;
  g.num_identities = 110;
  const Dataset ds = generate(g);
  const ModalityPair pair = oracle_model(g);
  RetrievalOptions r;
  r.m_v = 20;
  r.m_f = 5;
  r.chance_seeds = 5;
  const RetrievalResult res = evaluate_retrieval(ds, pair, r);
  CHECK(res.gallery_size == 500);
  CHECK(res.queries == 4000);
  CHECK(res.map > 0.9);
  CHECK(evaluate_joint(ds, pair, 5, 20, JointTask::kRetrieval, {}, r) == res.map);
}

TEST_CASE("retrieval layout and chance baseline") {
  GeneratorConfig g;
  g.num_identities = 100;
  const Dataset ds = generate(g);
  const RetrievalResult res = evaluate_retrieval(ds, untrained(ds, 2), RetrievalOptions{});
  CHECK(res.gallery_size == 500);
  CHECK(res.queries == 4000);
  CHECK(std::abs(res.chance_map - 0.0215) <= 0.002);
  CHECK(res.map >= 0.0);
  CHECK(res.map <= 1.0);
  const RetrievalResult perfect = evaluate_retrieval(ds, oracle_model(g), RetrievalOptions{});
  CHECK(perfect.map > 0.9);
}

TEST_CASE("individual test") {
  GeneratorConfig g;
  g.num_identities = 2;
  const Dataset two = generate(g);
  const double acc = individual_test(two, untrained(two, 0), "id00000", 1);
  CHECK((acc == 0.0 || acc == 1.0));
  CHECK(code_of([&] { individual_test(two, untrained(two, 0), "nobody", 1); }) ==
        ErrorCode::kUnknownIdentity);

  g.num_identities = 40;
  Dataset ds = generate(g);
  const ModalityPair pair = oracle_model(g);
  for (const auto& [id, a] : individual_accuracies(ds, pair, 10, 1)) CHECK(a >= 0.9);

  // One identity with pure-noise voices is the worst one.
  Rng rng(77);
  for (auto& v : ds.identities[17].voices) {
    for (auto& x : v) x = 3.0 * rng.normal();
  }
  const auto acc_all = individual_accuracies(ds, pair, 10, 1, 3);
  const auto worst = std::min_element(acc_all.begin(), acc_all.end(),
                                      [](const auto& a, const auto& b) { return a.second < b.second; });
  CHECK(worst->first == "id00017");
  CHECK(acc_all.at("id00017") == individual_test(ds, pair, "id00017", 10, 1));
}

TEST_CASE("splits") {
  GeneratorConfig g;
  g.num_identities = 100;
  g.voices_per_identity = 5;
  g.faces_per_identity = 5;
  const Dataset ds = generate(g);

  const auto [train, test] = split_dataset(ds, SplitMode::kUnseenUnheard, 0.8, 3);
  CHECK(train.size() == 80);
  CHECK(test.size() == 20);
  std::set<std::string> ids;
  for (const auto& r : train.identities) ids.insert(r.id);
  for (const auto& r : test.identities) CHECK(ids.count(r.id) == 0);

  const auto [seen, heard] = split_dataset(ds, SplitMode::kSeenHeard, 0.8, 3);
  REQUIRE(seen.size() == 100);
  REQUIRE(heard.size() == 100);
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(seen.identities[i].id == heard.identities[i].id);
    CHECK(seen.identities[i].voices.size() + heard.identities[i].voices.size() == 5);
    CHECK(heard.identities[i].voices.size() >= 1);
    for (const auto& v : heard.identities[i].voices) {
      CHECK(std::find(seen.identities[i].voices.begin(), seen.identities[i].voices.end(), v) ==
            seen.identities[i].voices.end());
    }
    for (const auto& f : heard.identities[i].faces) {
      CHECK(std::find(seen.identities[i].faces.begin(), seen.identities[i].faces.end(), f) ==
            seen.identities[i].faces.end());
    }
  }

  CHECK(split_mode_from_name(split_mode_name(SplitMode::kSeenHeard)) == SplitMode::kSeenHeard);
  CHECK_THROWS_AS(split_dataset(ds, SplitMode::kUnseenUnheard, 1.0, 0), Error);
  g.voices_per_identity = 1;
  CHECK(code_of([&] { split_dataset(generate(g), SplitMode::kSeenHeard, 0.5, 0); }) ==
        ErrorCode::kInsufficientData);
}

TEST_CASE("report serialization") {
  EvaluationReport r;
  r.task = "match";
  r.identities = 40;
  r.instances = 10000;
  r.accuracy_1n[2] = 0.9;
  r.accuracy_by_gender = {{"male", 0.875}, {"female", 0.925}};
  r.confidence_T = confidence_T(TestDesign::random_tuples(189, 10000));
  const std::string json = report_to_json(r);
  CHECK(json.find("\"format\": \"vfmr-report\"") != std::string::npos);
  CHECK(json.find("\"confidence_T_display\": \"-239.6\"") != std::string::npos);
  CHECK(json.find("\"map_score\": null") != std::string::npos);
  const std::string csv = report_to_csv(r);
  CHECK(csv.rfind("metric,key,value\n", 0) == 0);
  CHECK(csv.find("accuracy_1n,2,0.9\n") != std::string::npos);
  CHECK(csv.find("accuracy_by_gender,male,0.875\n") != std::string::npos);
  CHECK(csv.find("confidence_T,,-239.6\n") != std::string::npos);
}

TEST_CASE("a model trained on one population transfers worse to another") {
  GeneratorConfig g;
  g.num_identities = 240;
  g.populations = {{"en", 0.0}, {"zh", 1.0}};
  g.seed = 12;
  const Dataset all = generate(g);
  Dataset en, zh;
  for (const auto& r : all.identities) (r.population == "en" ? en : zh).identities.push_back(r);
  const auto [en_train, en_test] = split_dataset(en, SplitMode::kUnseenUnheard, 0.7, 1);

  TrainingConfig cfg;
  cfg.total_steps = 600;
  const TrainResult trained = train(en_train, untrained(all, 12), SamplerConfig{}, cfg);
  MatchingOptions m;
  m.num_instances = 5000;
  m.seed = 2;
  const double within = evaluate_matching(en_test, trained.pair, m).accuracy;
  const double cross = evaluate_matching(zh, trained.pair, m).accuracy;
  MESSAGE("within-population " << within << ", cross-population " << cross);
  CHECK(cross <= within);
}
