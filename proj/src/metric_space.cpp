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

#include "vfmr/metric_space.hpp"

#include <cmath>
#include <string>

#include "vfmr/error.hpp"

namespace vfmr {
namespace {

void check_dims(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorCode::kDimensionMismatch,
                "dimension mismatch: " + std::to_string(a) + " vs " +
                    std::to_string(b));
  }
}

}  // namespace

void MetricSpaceConfig::validate() const {
  if (dim < 1) throw Error(ErrorCode::kInvalidConfig, "embedding dim must be >= 1");
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::kInvalidConfig, "scale must be a positive finite real");
  }
}

Embedding l2_normalize_scale(std::span<const double> z,
                             const MetricSpaceConfig& cfg) {
  check_dims(z.size(), cfg.dim);
  const double norm = l2_norm(z);
  if (!(norm > kZeroNormEpsilon)) {
    throw Error(ErrorCode::kZeroVector, "cannot normalize a zero vector");
  }
  const double factor = cfg.scale / norm;
  Vector out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] * factor;
  return Embedding(std::move(out));
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_dims(a.size(), b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double l2_norm(std::span<const double> a) {
  double acc = 0.0;
  for (double v : a) acc += v * v;
  return std::sqrt(acc);
}

double distance(std::span<const double> a, std::span<const double> b) {
  check_dims(a.size(), b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

double inner_product_similarity(const Embedding& a, const Embedding& b) {
  return dot(a.values(), b.values());
}

double euclidean_distance(const Embedding& a, const Embedding& b) {
  return distance(a.values(), b.values());
}

}  // namespace vfmr
