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
#include <string>
#include <string_view>
#include <vector>

#include "vfmr/dataset.hpp"
#include "vfmr/metric_space.hpp"

namespace vfmr {

// Per-frame feature vectors of one audio track (or of a ground-truth clip).
struct FrameStream {
  std::vector<Vector> frames;
  double frame_rate = 100.0;

  std::size_t size() const { return frames.size(); }
  std::size_t dim() const { return frames.empty() ? 0 : frames.front().size(); }
  void validate() const;
};

struct DetectorConfig {
  double threshold = 0.5;
  std::size_t s_min = 10;
  std::size_t s_max = 100;
  std::size_t s_step = 5;

  void validate() const;
};

// Half-open frame interval [start, end).
struct Segment {
  std::size_t start = 0;
  std::size_t end = 0;
  double score = 0.0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

// Cosine similarity of the mean frame over [start, end) and the mean
// ground-truth frame. Throws ZeroVector if either mean is all zeros.
double window_score(const FrameStream& stream, std::size_t start, std::size_t end,
                    const FrameStream& ground_truth);

enum class DetectorAction { kExtend, kEmit, kDiscard };

struct DetectorEvent {
  std::size_t start;
  std::size_t end;
  double score;
  DetectorAction action;
};

// Growing-window detection. Starts at [0, s_min); while the window scores
// above the threshold and extending its end by s_step (within s_max and the
// stream) strictly improves the score, it grows. Otherwise the window is
// emitted if its score exceeds the threshold and the scan restarts at
// [end, end + s_min). Windows are evaluated while they fit in the stream.
// A window whose mean frame is zero scores 0. `trace`, when given, receives
// one event per decision.
std::vector<Segment> detect_segments(const FrameStream& stream,
                                     const FrameStream& ground_truth,
                                     const DetectorConfig& cfg,
                                     std::vector<DetectorEvent>* trace = nullptr);

template <class Payload>
struct ScoredItem {
  Payload payload;
  double score;
  Modality modality;
};

// Keeps items scoring strictly above their modality's threshold, in order.
template <class Payload>
std::vector<ScoredItem<Payload>> retain_by_thresholds(
    std::span<const ScoredItem<Payload>> items, double face_threshold,
    double voice_threshold) {
  std::vector<ScoredItem<Payload>> kept;
  for (const auto& item : items) {
    const double t = item.modality == Modality::kFace ? face_threshold : voice_threshold;
    if (item.score > t) kept.push_back(item);
  }
  return kept;
}

// JSON Lines: {"format":"vfmr-frames","version":1,"frame_rate":R,"dim":D}
// then one JSON array per frame.
std::string frame_stream_to_jsonl(const FrameStream& stream);
FrameStream frame_stream_from_jsonl(std::string_view text);
FrameStream load_frame_stream(const std::string& path);

// "start_frame,end_frame,score" CSV.
std::string segments_csv(std::span<const Segment> segments);

}  // namespace vfmr
