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
#include <span>
#include <vector>

namespace vfmr {

using Vector = std::vector<double>;

struct MetricSpaceConfig {
  std::size_t dim = 128;
  double scale = 128.0;

  void validate() const;
};

inline constexpr double kZeroNormEpsilon = 1e-12;

// A point on the radius-`scale` hypersphere. Only produced by
// l2_normalize_scale (or copied from another Embedding), so the norm
// invariant holds for every instance.
class Embedding {
 public:
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  friend Embedding l2_normalize_scale(std::span<const double>,
                                      const MetricSpaceConfig&);
  explicit Embedding(Vector values) : values_(std::move(values)) {}

  Vector values_;
};

// s * z / ||z||. Throws ZeroVector when ||z|| <= 1e-12.
Embedding l2_normalize_scale(std::span<const double> z,
                             const MetricSpaceConfig& cfg);

double inner_product_similarity(const Embedding& a, const Embedding& b);
double euclidean_distance(const Embedding& a, const Embedding& b);

// Raw-vector forms shared by the training and evaluation kernels.
double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> a);
double distance(std::span<const double> a, std::span<const double> b);

}  // namespace vfmr
