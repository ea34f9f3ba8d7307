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

#include <cstdint>
#include <string>

namespace vfmr {

enum class MiningRegime { kRandomTuples, kIdentityBatches };

struct IdentityBatchParams {
  std::uint64_t b = 4;
  std::uint64_t q = 4;
  std::uint64_t r = 8;
  std::uint64_t steps = 1000;

  // b(b-1) q r^2
  double triplets_per_step() const;
};

// A matching test over N identities with n test tuples. For identity
// batches n is steps * b(b-1) q r^2.
struct TestDesign {
  std::uint64_t identities = 2;  // N
  double tuples = 1;             // n
  MiningRegime regime = MiningRegime::kRandomTuples;
  IdentityBatchParams batches;

  static TestDesign random_tuples(std::uint64_t identities, double tuples);
  static TestDesign identity_batches(std::uint64_t identities,
                                     const IdentityBatchParams& batches);

  void validate() const;
};

// Expected number of tuples involving a fixed ordered identity pair:
// n / (N (N - 1)). Identical for both regimes.
double pair_coverage_K(const TestDesign& design);

// T = N ln K. Negative when K < 1.
double confidence_T(const TestDesign& design);

// Four significant figures, as printed in reports.
std::string format_sig4(double value);

}  // namespace vfmr
