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

#include "vfmr/vfmr.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <fstream>
#include <new>
#include <span>
#include <string>

#include "vfmr/confidence.hpp"
#include "vfmr/config.hpp"
#include "vfmr/error.hpp"
#include "vfmr/experiment.hpp"
#include "vfmr/segment.hpp"
#include "vfmr/synthetic.hpp"

struct vfmr_dataset {
  vfmr::Dataset value;
};

struct vfmr_model {
  vfmr::ModalityPair value;
};

namespace {

thread_local std::string g_last_error;

vfmr_status to_status(vfmr::ErrorCode code) {
  using vfmr::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return VFMR_ERR_INVALID_ARGUMENT;
    case ErrorCode::kInvalidConfig: return VFMR_ERR_INVALID_CONFIG;
    case ErrorCode::kDimensionMismatch: return VFMR_ERR_DIMENSION_MISMATCH;
    case ErrorCode::kZeroVector: return VFMR_ERR_ZERO_VECTOR;
    case ErrorCode::kInsufficientData: return VFMR_ERR_INSUFFICIENT_DATA;
    case ErrorCode::kUnknownIdentity: return VFMR_ERR_UNKNOWN_IDENTITY;
    case ErrorCode::kNoRelevantItems: return VFMR_ERR_NO_RELEVANT_ITEMS;
    case ErrorCode::kStreamTooShort: return VFMR_ERR_STREAM_TOO_SHORT;
    case ErrorCode::kIo: return VFMR_ERR_IO;
    case ErrorCode::kInvalidData: return VFMR_ERR_INVALID_DATA;
  }
  return VFMR_ERR_INTERNAL;
}

template <class Fn>
vfmr_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return VFMR_OK;
  } catch (const vfmr::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return VFMR_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return VFMR_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw vfmr::Error(vfmr::ErrorCode::kInvalidArgument, what);
}

char* duplicate(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

vfmr::ExperimentConfig config_of(const char* json) {
  return vfmr::parse_experiment_config(json ? json : "");
}

void write_text(const char* path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw vfmr::Error(vfmr::ErrorCode::kIo, std::string("cannot open for writing: ") + path);
  out << text;
  if (!out) throw vfmr::Error(vfmr::ErrorCode::kIo, std::string("write failed: ") + path);
}

}  // namespace

extern "C" {

const char* vfmr_version(void) { return "1.0.0"; }

const char* vfmr_status_name(vfmr_status status) {
  switch (status) {
    case VFMR_OK: return "ok";
    case VFMR_ERR_INVALID_ARGUMENT: return "invalid argument";
    case VFMR_ERR_INVALID_CONFIG: return "invalid config";
    case VFMR_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case VFMR_ERR_ZERO_VECTOR: return "zero vector";
    case VFMR_ERR_INSUFFICIENT_DATA: return "insufficient data";
    case VFMR_ERR_UNKNOWN_IDENTITY: return "unknown identity";
    case VFMR_ERR_NO_RELEVANT_ITEMS: return "no relevant items";
    case VFMR_ERR_STREAM_TOO_SHORT: return "stream too short";
    case VFMR_ERR_IO: return "i/o error";
    case VFMR_ERR_INTERNAL: return "internal error";
    case VFMR_ERR_INVALID_DATA: return "invalid data";
  }
  return "unknown status";
}

const char* vfmr_last_error(void) { return g_last_error.c_str(); }

void vfmr_string_free(char* s) { delete[] s; }

vfmr_status vfmr_config_resolve(const char* config_json, char** out_json) {
  return guarded([&] {
    require(out_json != nullptr, "out_json is null");
    *out_json = duplicate(vfmr::experiment_config_to_json(config_of(config_json)));
  });
}

vfmr_status vfmr_dataset_generate(const char* config_json, vfmr_dataset** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    const auto cfg = config_of(config_json);
    *out = new vfmr_dataset{vfmr::generate(cfg.generator)};
  });
}

vfmr_status vfmr_dataset_load(const char* path, vfmr_dataset** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new vfmr_dataset{vfmr::load_dataset(path)};
  });
}

vfmr_status vfmr_dataset_save(const vfmr_dataset* dataset, const char* path) {
  return guarded([&] {
    require(dataset != nullptr && path != nullptr, "null argument");
    vfmr::save_dataset(dataset->value, path);
  });
}

vfmr_status vfmr_dataset_stats(const vfmr_dataset* dataset, size_t* identities, size_t* voices,
                               size_t* faces) {
  return guarded([&] {
    require(dataset != nullptr, "dataset is null");
    if (identities) *identities = dataset->value.size();
    if (voices) *voices = dataset->value.count(vfmr::Modality::kVoice);
    if (faces) *faces = dataset->value.count(vfmr::Modality::kFace);
  });
}

void vfmr_dataset_free(vfmr_dataset* dataset) { delete dataset; }

vfmr_status vfmr_model_init(const char* config_json, const vfmr_dataset* dataset,
                            vfmr_model** out) {
  return guarded([&] {
    require(dataset != nullptr && out != nullptr, "null argument");
    const auto cfg = config_of(config_json);
    *out = new vfmr_model{
        vfmr::init_model(cfg, dataset->value.voice_dim(), dataset->value.face_dim())};
  });
}

vfmr_status vfmr_model_load(const char* path, vfmr_model** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new vfmr_model{vfmr::load_checkpoint(path)};
  });
}

vfmr_status vfmr_model_save(const vfmr_model* model, const char* path) {
  return guarded([&] {
    require(model != nullptr && path != nullptr, "null argument");
    vfmr::save_checkpoint(model->value, path);
  });
}

vfmr_status vfmr_model_embedding_dim(const vfmr_model* model, size_t* dim) {
  return guarded([&] {
    require(model != nullptr && dim != nullptr, "null argument");
    *dim = model->value.space.dim;
  });
}

vfmr_status vfmr_model_embed(const vfmr_model* model, vfmr_modality modality,
                             const double* features, size_t feature_len, double* out,
                             size_t out_len) {
  return guarded([&] {
    require(model != nullptr && features != nullptr && out != nullptr, "null argument");
    const auto& pair = model->value;
    if (out_len != pair.space.dim) {
      throw vfmr::Error(vfmr::ErrorCode::kDimensionMismatch, "output buffer must hold dim values");
    }
    const auto& net = modality == VFMR_VOICE ? pair.voice : pair.face;
    const vfmr::Embedding e =
        vfmr::embed(net, std::span<const double>(features, feature_len), pair.space);
    std::copy(e.values().begin(), e.values().end(), out);
  });
}

void vfmr_model_free(vfmr_model* model) { delete model; }

vfmr_status vfmr_train(vfmr_model* model, const vfmr_dataset* dataset, const char* config_json,
                       const char* loss_csv_path, vfmr_train_summary* summary) {
  return guarded([&] {
    require(model != nullptr && dataset != nullptr, "null argument");
    const auto cfg = config_of(config_json);
    vfmr::ModalityPair pair = model->value;
    const vfmr::TrainSummary s = vfmr::run_training(cfg, dataset->value, pair);
    if (loss_csv_path) write_text(loss_csv_path, vfmr::loss_history_csv(s.history));
    model->value = std::move(pair);
    if (summary) {
      summary->steps = s.history.size();
      summary->identities = s.identities;
      summary->replacement_draws = s.replacement_draws;
      summary->initial_loss = s.history.empty() ? 0.0 : s.history.front().loss;
      summary->final_loss = s.history.empty() ? 0.0 : s.history.back().loss;
    }
  });
}

vfmr_status vfmr_evaluate(const vfmr_model* model, const vfmr_dataset* dataset,
                          const char* config_json, char** report_json, char** report_csv) {
  return guarded([&] {
    require(model != nullptr && dataset != nullptr, "null argument");
    const auto cfg = config_of(config_json);
    const vfmr::EvaluationReport report = vfmr::run_evaluation(cfg, dataset->value, model->value);
    std::string json = vfmr::report_to_json(report);
    std::string csv = vfmr::report_to_csv(report);
    if (report_json) *report_json = duplicate(json);
    if (report_csv) *report_csv = duplicate(csv);
  });
}

vfmr_status vfmr_confidence(uint64_t identities, double tuples, double* k, double* t) {
  return guarded([&] {
    const auto design = vfmr::TestDesign::random_tuples(identities, tuples);
    if (k) *k = vfmr::pair_coverage_K(design);
    if (t) *t = vfmr::confidence_T(design);
  });
}

vfmr_status vfmr_confidence_batches(uint64_t identities, uint64_t b, uint64_t q, uint64_t r,
                                    uint64_t steps, double* tuples, double* triplets_per_step,
                                    double* k, double* t) {
  return guarded([&] {
    const auto design = vfmr::TestDesign::identity_batches(identities, {b, q, r, steps});
    if (tuples) *tuples = design.tuples;
    if (triplets_per_step) *triplets_per_step = design.batches.triplets_per_step();
    if (k) *k = vfmr::pair_coverage_K(design);
    if (t) *t = vfmr::confidence_T(design);
  });
}

vfmr_status vfmr_segment_files(const char* stream_path, const char* ground_truth_path,
                               double threshold, size_t s_min, size_t s_max, size_t s_step,
                               const char* out_csv_path, size_t* segment_count, char** csv) {
  return guarded([&] {
    require(stream_path != nullptr && ground_truth_path != nullptr, "null path");
    const auto stream = vfmr::load_frame_stream(stream_path);
    const auto truth = vfmr::load_frame_stream(ground_truth_path);
    const auto segments = vfmr::detect_segments(stream, truth, {threshold, s_min, s_max, s_step});
    const std::string text = vfmr::segments_csv(segments);
    if (out_csv_path) write_text(out_csv_path, text);
    if (segment_count) *segment_count = segments.size();
    if (csv) *csv = duplicate(text);
  });
}

}  // extern "C"
