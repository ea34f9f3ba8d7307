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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vfmr/metric_space.hpp"

namespace vfmr {

enum class Gender { kMale, kFemale };
enum class Modality { kVoice, kFace };

const char* gender_code(Gender g);  // "m" / "f"
Gender gender_from_code(std::string_view code);

struct IdentityRecord {
  std::string id;
  Gender gender = Gender::kMale;
  std::string population;
  std::vector<Vector> voices;
  std::vector<Vector> faces;

  const std::vector<Vector>& samples(Modality m) const {
    return m == Modality::kVoice ? voices : faces;
  }
};

struct Dataset {
  std::vector<IdentityRecord> identities;

  std::size_t size() const { return identities.size(); }
  std::optional<std::size_t> find(std::string_view id) const;
  std::size_t voice_dim() const;
  std::size_t face_dim() const;
  std::size_t count(Modality m) const;

  // Uniform dims per modality and unique ids. Throws InvalidConfig.
  void validate() const;
};

// JSON Lines: a header {"format":"vfmr-dataset","version":1,...} followed by
// one {"id","gender","population","modality","features"} record per sample.
std::string dataset_to_jsonl(const Dataset& ds);
Dataset dataset_from_jsonl(std::string_view text);
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace vfmr
