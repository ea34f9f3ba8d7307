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

#include "vfmr/confidence.hpp"

#include <cmath>
#include <cstdio>

#include "vfmr/error.hpp"

namespace vfmr {

double IdentityBatchParams::triplets_per_step() const {
  return static_cast<double>(b) * static_cast<double>(b - 1) * static_cast<double>(q) *
         static_cast<double>(r) * static_cast<double>(r);
}

TestDesign TestDesign::random_tuples(std::uint64_t identities, double tuples) {
  TestDesign d;
  d.identities = identities;
  d.tuples = tuples;
  d.regime = MiningRegime::kRandomTuples;
  return d;
}

TestDesign TestDesign::identity_batches(std::uint64_t identities,
                                        const IdentityBatchParams& batches) {
  TestDesign d;
  d.identities = identities;
  d.regime = MiningRegime::kIdentityBatches;
  d.batches = batches;
  d.tuples = static_cast<double>(batches.steps) * batches.triplets_per_step();
  return d;
}

void TestDesign::validate() const {
  if (identities < 2) throw Error(ErrorCode::kInvalidArgument, "N must be >= 2");
  if (!(tuples >= 1.0) || !std::isfinite(tuples)) {
    throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
  }
  if (regime == MiningRegime::kIdentityBatches) {
    if (batches.b < 2 || batches.q < 1 || batches.r < 1 || batches.steps < 1) {
      throw Error(ErrorCode::kInvalidArgument, "identity batches need b >= 2, q, r, steps >= 1");
    }
    if (batches.b > identities) {
      throw Error(ErrorCode::kInvalidArgument, "batch size b exceeds N");
    }
    if (tuples != static_cast<double>(batches.steps) * batches.triplets_per_step()) {
      throw Error(ErrorCode::kInvalidArgument, "n must equal steps * b(b-1)qr^2");
    }
  }
}

double pair_coverage_K(const TestDesign& design) {
  design.validate();
  const double n_id = static_cast<double>(design.identities);
  return design.tuples / (n_id * (n_id - 1.0));
}

double confidence_T(const TestDesign& design) {
  return static_cast<double>(design.identities) * std::log(pair_coverage_K(design));
}

std::string format_sig4(double value) {
  if (value == 0.0) return "0";
  char buf[64];
  const int magnitude = static_cast<int>(std::floor(std::log10(std::fabs(value))));
  if (magnitude >= 3 && magnitude < 15) {
    std::snprintf(buf, sizeof buf, "%.0f", std::round(value / std::pow(10.0, magnitude - 3)) *
                                               std::pow(10.0, magnitude - 3));
  } else {
    std::snprintf(buf, sizeof buf, "%.4g", value);
  }
  return buf;
}

}  // namespace vfmr
