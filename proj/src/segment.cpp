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

#include "vfmr/segment.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "vfmr/error.hpp"

namespace vfmr {
namespace {

using nlohmann::json;

Vector mean_frame(const FrameStream& s, std::size_t start, std::size_t end) {
  Vector mean(s.dim(), 0.0);
  for (std::size_t f = start; f < end; ++f) {
    const Vector& frame = s.frames[f];
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += frame[i];
  }
  const double inv = 1.0 / static_cast<double>(end - start);
  for (double& x : mean) x *= inv;
  return mean;
}

bool is_zero(const Vector& v) {
  for (double x : v) {
    if (x != 0.0) return false;
  }
  return true;
}

double cosine(const Vector& a, const Vector& b) {
  return dot(a, b) / (l2_norm(a) * l2_norm(b));
}

}  // namespace

void FrameStream::validate() const {
  if (!(frame_rate > 0.0)) throw Error(ErrorCode::kInvalidConfig, "frame_rate must be > 0");
  for (const Vector& f : frames) {
    if (f.size() != dim() || f.empty()) {
      throw Error(ErrorCode::kInvalidConfig, "frames must share one non-zero dimension");
    }
  }
}

void DetectorConfig::validate() const {
  if (s_min < 1) throw Error(ErrorCode::kInvalidConfig, "s_min must be >= 1");
  if (s_max < s_min) throw Error(ErrorCode::kInvalidConfig, "s_max must be >= s_min");
  if (s_step < 1) throw Error(ErrorCode::kInvalidConfig, "s_step must be >= 1");
}

double window_score(const FrameStream& stream, std::size_t start, std::size_t end,
                    const FrameStream& ground_truth) {
  if (start >= end || end > stream.size()) {
    throw Error(ErrorCode::kInvalidArgument, "window bounds outside the stream");
  }
  if (ground_truth.size() == 0) throw Error(ErrorCode::kInvalidArgument, "empty ground truth");
  if (stream.dim() != ground_truth.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "stream and ground-truth dims differ");
  }
  const Vector w = mean_frame(stream, start, end);
  const Vector g = mean_frame(ground_truth, 0, ground_truth.size());
  if (is_zero(w) || is_zero(g)) throw Error(ErrorCode::kZeroVector, "mean frame is zero");
  return cosine(w, g);
}

std::vector<Segment> detect_segments(const FrameStream& stream,
                                     const FrameStream& ground_truth,
                                     const DetectorConfig& cfg,
                                     std::vector<DetectorEvent>* trace) {
  cfg.validate();
  stream.validate();
  ground_truth.validate();
  if (stream.size() < cfg.s_min || stream.size() == 0) {
    throw Error(ErrorCode::kStreamTooShort,
                "stream has " + std::to_string(stream.size()) + " frames, s_min is " +
                    std::to_string(cfg.s_min));
  }
  if (ground_truth.size() == 0) throw Error(ErrorCode::kInvalidArgument, "empty ground truth");
  if (stream.dim() != ground_truth.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "stream and ground-truth dims differ");
  }
  const Vector gt_mean = mean_frame(ground_truth, 0, ground_truth.size());
  if (is_zero(gt_mean)) throw Error(ErrorCode::kZeroVector, "ground-truth mean frame is zero");

  auto score = [&](std::size_t start, std::size_t end) {
    const Vector w = mean_frame(stream, start, end);
    return is_zero(w) ? 0.0 : cosine(w, gt_mean);
  };
  auto record = [&](std::size_t s, std::size_t e, double sc, DetectorAction a) {
    if (trace) trace->push_back({s, e, sc, a});
  };

  const std::size_t length = stream.size();
  std::vector<Segment> segments;
  std::size_t start = 0;
  std::size_t end = cfg.s_min;
  double current = score(start, end);
  while (end <= length) {
    const std::size_t grown = end + cfg.s_step;
    if (current > cfg.threshold && grown <= length && grown - start <= cfg.s_max) {
      const double candidate = score(start, grown);
      if (candidate > current) {
        record(start, grown, candidate, DetectorAction::kExtend);
        end = grown;
        current = candidate;
        continue;
      }
    }
    if (current > cfg.threshold) {
      segments.push_back({start, end, current});
      record(start, end, current, DetectorAction::kEmit);
    } else {
      record(start, end, current, DetectorAction::kDiscard);
    }
    start = end;
    end = start + cfg.s_min;
    if (end <= length) current = score(start, end);
  }
  return segments;
}

std::string frame_stream_to_jsonl(const FrameStream& stream) {
  std::string out = json{{"format", "vfmr-frames"},
                         {"version", 1},
                         {"frame_rate", stream.frame_rate},
                         {"dim", stream.dim()}}
                        .dump() +
                    "\n";
  for (const Vector& f : stream.frames) out += json(f).dump() + "\n";
  return out;
}

FrameStream frame_stream_from_jsonl(std::string_view text) {
  FrameStream stream;
  bool have_header = false;
  std::size_t dim = 0;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  try {
    while (pos < text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      const std::string_view line = text.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
      const json j = json::parse(line);
      if (!have_header) {
        if (!j.is_object()) throw Error(ErrorCode::kInvalidData, "frame stream lacks a header line");
        stream.frame_rate = j.at("frame_rate").get<double>();
        dim = j.at("dim").get<std::size_t>();
        have_header = true;
        continue;
      }
      Vector frame = j.get<Vector>();
      if (frame.size() != dim) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "frame on line " + std::to_string(line_no) + " has wrong dimension");
      }
      stream.frames.push_back(std::move(frame));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidData,
                "frame stream line " + std::to_string(line_no) + ": " + e.what());
  }
  if (!have_header) throw Error(ErrorCode::kInvalidData, "frame stream lacks a header line");
  stream.validate();
  return stream;
}

FrameStream load_frame_stream(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return frame_stream_from_jsonl(buf.str());
}

std::string segments_csv(std::span<const Segment> segments) {
  std::string out = "start_frame,end_frame,score\n";
  char buf[64];
  for (const Segment& s : segments) {
    auto res = std::to_chars(buf, buf + sizeof buf, s.score);
    out += std::to_string(s.start) + "," + std::to_string(s.end) + "," +
           std::string(buf, res.ptr) + "\n";
  }
  return out;
}

}  // namespace vfmr
