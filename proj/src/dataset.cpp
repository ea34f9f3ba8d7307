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

#include "vfmr/dataset.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "vfmr/error.hpp"

namespace vfmr {
namespace {

using nlohmann::json;

constexpr const char* kDatasetFormat = "vfmr-dataset";
constexpr int kDatasetVersion = 1;

std::size_t uniform_dim(const Dataset& ds, Modality m) {
  std::optional<std::size_t> dim;
  for (const auto& rec : ds.identities) {
    for (const auto& v : rec.samples(m)) {
      if (!dim) dim = v.size();
      if (v.size() != *dim) {
        throw Error(ErrorCode::kInvalidData,
                    "inconsistent feature dims in identity " + rec.id);
      }
    }
  }
  return dim.value_or(0);
}

}  // namespace

const char* gender_code(Gender g) { return g == Gender::kMale ? "m" : "f"; }

Gender gender_from_code(std::string_view code) {
  if (code == "m") return Gender::kMale;
  if (code == "f") return Gender::kFemale;
  throw Error(ErrorCode::kInvalidData, "gender must be \"m\" or \"f\"");
}

std::optional<std::size_t> Dataset::find(std::string_view id) const {
  for (std::size_t i = 0; i < identities.size(); ++i) {
    if (identities[i].id == id) return i;
  }
  return std::nullopt;
}

std::size_t Dataset::voice_dim() const { return uniform_dim(*this, Modality::kVoice); }
std::size_t Dataset::face_dim() const { return uniform_dim(*this, Modality::kFace); }

std::size_t Dataset::count(Modality m) const {
  std::size_t n = 0;
  for (const auto& rec : identities) n += rec.samples(m).size();
  return n;
}

void Dataset::validate() const {
  std::unordered_set<std::string> seen;
  for (const auto& rec : identities) {
    if (!seen.insert(rec.id).second) {
      throw Error(ErrorCode::kInvalidData, "duplicate identity " + rec.id);
    }
  }
  uniform_dim(*this, Modality::kVoice);
  uniform_dim(*this, Modality::kFace);
}

std::string dataset_to_jsonl(const Dataset& ds) {
  std::string out;
  json header = {{"format", kDatasetFormat},
                 {"version", kDatasetVersion},
                 {"identities", ds.size()},
                 {"voices", ds.count(Modality::kVoice)},
                 {"faces", ds.count(Modality::kFace)}};
  out += header.dump() + "\n";
  for (const auto& rec : ds.identities) {
    for (Modality m : {Modality::kVoice, Modality::kFace}) {
      for (const auto& f : rec.samples(m)) {
        json line = {{"id", rec.id},
                     {"gender", gender_code(rec.gender)},
                     {"population", rec.population},
                     {"modality", m == Modality::kVoice ? "voice" : "face"},
                     {"features", f}};
        out += line.dump() + "\n";
      }
    }
  }
  return out;
}

Dataset dataset_from_jsonl(std::string_view text) {
  Dataset ds;
  std::unordered_map<std::string, std::size_t> index;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInvalidData,
                  "dataset line " + std::to_string(line_no) + ": " + e.what());
    }
    if (j.contains("format")) {
      if (j["format"] != kDatasetFormat || j.value("version", 0) != kDatasetVersion) {
        throw Error(ErrorCode::kInvalidData, "unsupported dataset header");
      }
      continue;
    }
    try {
      const std::string id = j.at("id").get<std::string>();
      const Gender gender = gender_from_code(j.at("gender").get<std::string>());
      const std::string population = j.value("population", "");
      const std::string modality = j.at("modality").get<std::string>();
      auto [it, inserted] = index.try_emplace(id, ds.identities.size());
      if (inserted) {
        ds.identities.push_back({id, gender, population, {}, {}});
      }
      IdentityRecord& rec = ds.identities[it->second];
      if (rec.gender != gender || rec.population != population) {
        throw Error(ErrorCode::kInvalidData,
                    "identity " + id + " has inconsistent attributes");
      }
      Vector features = j.at("features").get<Vector>();
      if (modality == "voice") {
        rec.voices.push_back(std::move(features));
      } else if (modality == "face") {
        rec.faces.push_back(std::move(features));
      } else {
        throw Error(ErrorCode::kInvalidData, "unknown modality " + modality);
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInvalidData,
                  "dataset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  ds.validate();
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open for writing: " + path);
  out << dataset_to_jsonl(ds);
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return dataset_from_jsonl(buf.str());
}

}  // namespace vfmr
