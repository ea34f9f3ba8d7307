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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "vfmr/error.hpp"
#include "vfmr/metric_space.hpp"
#include "vfmr/rng.hpp"

using namespace vfmr;

namespace {

MetricSpaceConfig space(std::size_t dim, double scale) { return {dim, scale}; }

Embedding random_embedding(Rng& rng, std::size_t dim, double scale) {
  Vector z(dim);
  for (auto& x : z) x = rng.normal();
  return l2_normalize_scale(z, space(dim, scale));
}

}  // namespace

TEST_CASE("normalization examples") {
  const Embedding e1 = l2_normalize_scale(Vector{3, 4}, space(2, 1.0));
  CHECK(e1[0] == doctest::Approx(0.6));
  CHECK(e1[1] == doctest::Approx(0.8));

  const Embedding e128 = l2_normalize_scale(Vector{3, 4}, space(2, 128.0));
  CHECK(e128[0] == doctest::Approx(76.8));
  CHECK(e128[1] == doctest::Approx(102.4));

  try {
    l2_normalize_scale(Vector{0, 0}, space(2, 128.0));
    FAIL("expected ZeroVector");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kZeroVector);
  }
}

TEST_CASE("normalization rejects a vector of the wrong size") {
  CHECK_THROWS_AS(l2_normalize_scale(Vector{1, 2, 3}, space(2, 1.0)), Error);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(space(0, 1.0).validate(), Error);
  CHECK_THROWS_AS(space(2, 0.0).validate(), Error);
  CHECK_THROWS_AS(space(2, -1.0).validate(), Error);
  CHECK_NOTHROW(MetricSpaceConfig{}.validate());
  CHECK(MetricSpaceConfig{}.scale == 128.0);
}

TEST_CASE("inner product examples") {
  const auto cfg = space(2, 1.0);
  const Embedding a = l2_normalize_scale(Vector{0.6, 0.8}, cfg);
  const Embedding b = l2_normalize_scale(Vector{0.8, 0.6}, cfg);
  CHECK(inner_product_similarity(a, b) == doctest::Approx(0.96));
  CHECK(inner_product_similarity(a, b) == inner_product_similarity(b, a));

  const Embedding s = l2_normalize_scale(Vector{1, 1}, space(2, 128.0));
  CHECK(inner_product_similarity(s, s) == doctest::Approx(128.0 * 128.0));

  const Embedding x = l2_normalize_scale(Vector{1, 0}, cfg);
  const Embedding y = l2_normalize_scale(Vector{0, 1}, cfg);
  CHECK(inner_product_similarity(x, y) == 0.0);
  CHECK(euclidean_distance(x, y) == doctest::Approx(std::sqrt(2.0)));
  CHECK(euclidean_distance(x, x) == 0.0);
}

TEST_CASE("dimension mismatch") {
  const Embedding a = l2_normalize_scale(Vector{1, 0}, space(2, 1.0));
  const Embedding b = l2_normalize_scale(Vector{1, 0, 0}, space(3, 1.0));
  try {
    inner_product_similarity(a, b);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimensionMismatch);
  }
  CHECK_THROWS_AS(euclidean_distance(a, b), Error);
}

TEST_CASE("sphere properties on random embeddings") {
  Rng rng(0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t dim = 1 + rng.index(16);
    const double s = rng.uniform(0.5, 200.0);
    const Embedding a = random_embedding(rng, dim, s);
    const Embedding b = random_embedding(rng, dim, s);

    // Norm is s.
    double sq = 0.0;
    for (double v : a.values()) sq += v * v;
    CHECK(std::sqrt(sq) == doctest::Approx(s).epsilon(1e-6));

    // Idempotence.
    const Embedding again = l2_normalize_scale(a.values(), space(dim, s));
    for (std::size_t i = 0; i < dim; ++i) {
      CHECK(again[i] == doctest::Approx(a[i]).epsilon(1e-6));
    }

    // d^2 + 2<a,b> = 2 s^2.
    const double d = euclidean_distance(a, b);
    CHECK(d * d + 2 * inner_product_similarity(a, b) == doctest::Approx(2 * s * s).epsilon(1e-5));

    // Bounded similarity.
    CHECK(std::abs(inner_product_similarity(a, b)) <= s * s * (1 + 1e-12));
  }
}

TEST_CASE("argmax similarity and argmin distance agree on the sphere") {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = 2 + rng.index(6);
    const Embedding q = random_embedding(rng, dim, 10.0);
    std::vector<Embedding> cands;
    for (int i = 0; i < 7; ++i) cands.push_back(random_embedding(rng, dim, 10.0));
    std::size_t best_sim = 0, best_dist = 0;
    for (std::size_t i = 1; i < cands.size(); ++i) {
      if (inner_product_similarity(q, cands[i]) > inner_product_similarity(q, cands[best_sim])) {
        best_sim = i;
      }
      if (euclidean_distance(q, cands[i]) < euclidean_distance(q, cands[best_dist])) {
        best_dist = i;
      }
    }
    CHECK(best_sim == best_dist);
  }
}
