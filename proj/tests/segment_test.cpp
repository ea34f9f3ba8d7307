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
#include <functional>
#include <string>
#include <vector>

#include "doctest.h"
#include "vfmr/error.hpp"
#include "vfmr/rng.hpp"
#include "vfmr/segment.hpp"

using namespace vfmr;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kInvalidArgument;
}

FrameStream stream_of(std::vector<Vector> frames) { return {std::move(frames), 100.0}; }

// Direct cosine of window and ground-truth means, 0 for a zero window.
double oracle_score(const FrameStream& s, std::size_t a, std::size_t b, const FrameStream& gt) {
  const std::size_t d = gt.dim();
  Vector w(d, 0.0), g(d, 0.0);
  for (std::size_t f = a; f < b; ++f)
    for (std::size_t i = 0; i < d; ++i) w[i] += s.frames[f][i];
  for (const auto& f : gt.frames)
    for (std::size_t i = 0; i < d; ++i) g[i] += f[i];
  double ww = 0, gg = 0, wg = 0;
  for (std::size_t i = 0; i < d; ++i) {
    ww += w[i] * w[i];
    gg += g[i] * g[i];
    wg += w[i] * g[i];
  }
  return ww == 0 ? 0.0 : wg / std::sqrt(ww * gg);
}

// Reference detector written from the documented growth rule.
std::vector<Segment> oracle_detect(const FrameStream& s, const FrameStream& gt,
                                   const DetectorConfig& c) {
  std::vector<Segment> out;
  std::size_t start = 0;
  while (start + c.s_min <= s.size()) {
    std::size_t end = start + c.s_min;
    double sc = oracle_score(s, start, end, gt);
    while (sc > c.threshold && end + c.s_step <= s.size() && end + c.s_step - start <= c.s_max) {
      const double next = oracle_score(s, start, end + c.s_step, gt);
      if (!(next > sc)) break;
      end += c.s_step;
      sc = next;
    }
    if (sc > c.threshold) out.push_back({start, end, sc});
    start = end;
  }
  return out;
}

}  // namespace

TEST_CASE("window score examples") {
  const FrameStream gt = stream_of({{1, 0}, {1, 0}});
  const FrameStream s = stream_of({{2, 0}, {0, 3}, {0, 1}, {1, 1}});
  CHECK(window_score(s, 0, 1, gt) == doctest::Approx(1.0));
  CHECK(window_score(s, 1, 3, gt) == doctest::Approx(0.0));
  CHECK(window_score(s, 3, 4, gt) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(window_score(s, 0, 4, gt) == doctest::Approx(oracle_score(s, 0, 4, gt)));
  CHECK(code_of([&] { window_score(s, 2, 2, gt); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { window_score(s, 0, 5, gt); }) == ErrorCode::kInvalidArgument);
  const FrameStream zero = stream_of({{0, 0}, {0, 0}});
  CHECK(code_of([&] { window_score(zero, 0, 2, gt); }) == ErrorCode::kZeroVector);
  CHECK(code_of([&] { window_score(s, 0, 2, stream_of({{1, 0, 0}})); }) ==
        ErrorCode::kDimensionMismatch);
}

TEST_CASE("detector error cases") {
  const FrameStream gt = stream_of({{1, 0}});
  DetectorConfig c{0.5, 4, 16, 2};
  CHECK(code_of([&] { detect_segments(stream_of({{1, 0}, {1, 0}}), gt, c); }) ==
        ErrorCode::kStreamTooShort);
  CHECK(code_of([&] { detect_segments(stream_of({}), gt, c); }) == ErrorCode::kStreamTooShort);
  const FrameStream s = stream_of(std::vector<Vector>(8, Vector{1, 0}));
  CHECK(code_of([&] { detect_segments(s, stream_of({{0, 0}}), c); }) == ErrorCode::kZeroVector);
  CHECK(code_of([&] { detect_segments(s, stream_of({{1, 0, 0}}), c); }) ==
        ErrorCode::kDimensionMismatch);
  c.s_max = 3;
  CHECK(code_of([&] { detect_segments(s, gt, c); }) == ErrorCode::kInvalidConfig);
  c = {0.5, 0, 16, 2};
  CHECK(code_of([&] { detect_segments(s, gt, c); }) == ErrorCode::kInvalidConfig);
  c = {0.5, 4, 16, 0};
  CHECK(code_of([&] { detect_segments(s, gt, c); }) == ErrorCode::kInvalidConfig);
}

TEST_CASE("an all-background stream yields nothing") {
  const FrameStream gt = stream_of({{1, 0}});
  const FrameStream s = stream_of(std::vector<Vector>(40, Vector{0, 1}));
  std::vector<DetectorEvent> trace;
  CHECK(detect_segments(s, gt, {0.5, 4, 16, 2}, &trace).empty());
  CHECK(trace.size() == 10);
  for (const auto& e : trace) CHECK(e.action == DetectorAction::kDiscard);
}

TEST_CASE("a single target region is recovered") {
  std::vector<Vector> frames(32, Vector{0, 1});
  for (std::size_t f = 6; f < 18; ++f) frames[f] = {1, 0};
  const FrameStream s = stream_of(frames);
  const FrameStream gt = stream_of({{1, 0}});
  const DetectorConfig c{0.5, 4, 16, 2};
  std::vector<DetectorEvent> trace;
  const auto segs = detect_segments(s, gt, c, &trace);
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].start == 4);
  CHECK(segs[0].end == 18);
  CHECK(segs[0].score == doctest::Approx(12 / std::sqrt(148.0)));

  // Within one window the score only grows and the length stays within s_max.
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i].action != DetectorAction::kExtend || trace[i].start != trace[i - 1].start) continue;
    CHECK(trace[i].end > trace[i - 1].end);
    CHECK(trace[i].score > trace[i - 1].score);
  }
  for (const auto& e : trace) CHECK(e.end - e.start <= c.s_max);
}

TEST_CASE("s_max caps growth") {
  const FrameStream s = stream_of(std::vector<Vector>(50, Vector{1, 0.0}));
  std::vector<Vector> ramp;
  for (int f = 0; f < 50; ++f) ramp.push_back({1.0, 1.0 - f / 50.0});
  const FrameStream gt = stream_of({{1, 0}});
  const DetectorConfig c{0.1, 4, 10, 3};
  const auto segs = detect_segments(stream_of(ramp), gt, c);
  CHECK_FALSE(segs.empty());
  for (const auto& seg : segs) CHECK(seg.end - seg.start <= 10);
  const auto want = oracle_detect(stream_of(ramp), gt, c);
  REQUIRE(segs.size() == want.size());
  for (std::size_t i = 0; i < segs.size(); ++i) {
    CHECK(segs[i].end == want[i].end);
    CHECK(segs[i].score == doctest::Approx(want[i].score).epsilon(1e-12));
  }
  // Constant frames never strictly improve, so windows stay at s_min.
  for (const auto& seg : detect_segments(s, gt, c)) CHECK(seg.end - seg.start == 4);
}

TEST_CASE("detector agrees with the reference on random streams") {
  Rng rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    // One-dimensional cosines are all +-1, so ties would hinge on rounding.
    const std::size_t d = 2 + rng.index(3);
    DetectorConfig c;
    c.s_min = 1 + rng.index(6);
    c.s_max = c.s_min + rng.index(20);
    c.s_step = 1 + rng.index(5);
    c.threshold = rng.uniform() * 1.6 - 0.8;
    const std::size_t len = c.s_min + rng.index(80);
    std::vector<Vector> frames(len, Vector(d));
    for (auto& f : frames)
      for (auto& x : f) x = rng.normal() + (rng.uniform() < 0.3 ? 0.0 : 1.0);
    std::vector<Vector> g(3, Vector(d));
    for (auto& f : g)
      for (auto& x : f) x = rng.normal() + 1.0;
    const FrameStream s = stream_of(frames), gt = stream_of(g);
    const auto got = detect_segments(s, gt, c);
    const auto want = oracle_detect(s, gt, c);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].start == want[i].start);
      CHECK(got[i].end == want[i].end);
      CHECK(got[i].score == doctest::Approx(want[i].score).epsilon(1e-12));
      CHECK(got[i].score > c.threshold);
      if (i > 0) CHECK(got[i].start >= got[i - 1].end);
    }
  }
}

TEST_CASE("retention by modality threshold") {
  Rng rng(4);
  std::vector<ScoredItem<int>> items;
  for (int i = 0; i < 200; ++i) {
    items.push_back({i, rng.uniform(), rng.uniform() < 0.5 ? Modality::kFace : Modality::kVoice});
  }
  items.push_back({999, 0.3, Modality::kFace});  // exactly at threshold: dropped
  const auto kept = retain_by_thresholds(std::span<const ScoredItem<int>>(items), 0.3, 0.6);
  std::vector<int> want;
  for (const auto& it : items) {
    const bool face = it.modality == Modality::kFace;
    if ((face && it.score > 0.3) || (!face && it.score > 0.6)) want.push_back(it.payload);
  }
  REQUIRE(kept.size() == want.size());
  for (std::size_t i = 0; i < kept.size(); ++i) CHECK(kept[i].payload == want[i]);
}

TEST_CASE("frame stream serialization") {
  const FrameStream s{{{0.1, -2.5}, {1e-300, 3.0}, {0.0, 1.0 / 3}}, 25.0};
  const std::string text = frame_stream_to_jsonl(s);
  CHECK(text.rfind("{\"dim\":2,\"format\":\"vfmr-frames\"", 0) == 0);
  const FrameStream back = frame_stream_from_jsonl(text);
  CHECK(back.frame_rate == 25.0);
  CHECK(back.frames == s.frames);

  CHECK(code_of([] { frame_stream_from_jsonl(""); }) == ErrorCode::kInvalidData);
  CHECK(code_of([] { frame_stream_from_jsonl("[1,2]\n"); }) == ErrorCode::kInvalidData);
  CHECK(code_of([] { frame_stream_from_jsonl("{\"frame_rate\":1,\"dim\":2}\n[1,\n"); }) ==
        ErrorCode::kInvalidData);
  CHECK(code_of([] { frame_stream_from_jsonl("{\"frame_rate\":1,\"dim\":2}\n[1]\n"); }) ==
        ErrorCode::kDimensionMismatch);
  CHECK(code_of([] { load_frame_stream("/nonexistent/frames.jsonl"); }) == ErrorCode::kIo);
}

TEST_CASE("segments CSV") {
  const std::vector<Segment> segs{{4, 18, 0.5}, {20, 24, 0.75}};
  CHECK(segments_csv(segs) == "start_frame,end_frame,score\n4,18,0.5\n20,24,0.75\n");
  CHECK(segments_csv(std::vector<Segment>{}) == "start_frame,end_frame,score\n");
}
