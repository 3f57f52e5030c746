// Copyright 2026  The spanalign Authors
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

#include "spanalign/segmentation.h"

#include <algorithm>
#include <cmath>

#include "spanalign/text_io.h"

namespace spanalign {

void SegmentationConfig::validate() const {
  if (!(threshold_ratio >= 0.0 && threshold_ratio <= 1.0))
    throw Error("threshold_ratio must lie in [0, 1]");
  if (!(min_silence_ms > 0.0)) throw Error("min_silence_ms must be positive");
  if (smooth_frames < 1) throw Error("smooth_frames must be >= 1");
  if (grid_stride < 0) throw Error("grid_stride must be >= 0");
  if (span_min_len < 1) throw Error("span_min_len must be >= 1");
  if (span_max_len < span_min_len) throw Error("span_max_len must be >= span_min_len");
}

SilenceSpans detect_silence(std::span<const double> energy, double frame_shift_ms,
                            double threshold_ratio, double min_ms, int smooth_frames) {
  SilenceSpans out;
  const int m = static_cast<int>(energy.size());
  if (m == 0 || smooth_frames < 1 || !(frame_shift_ms > 0.0)) return out;

  const int half = smooth_frames / 2;
  std::vector<double> smoothed(m);
  std::vector<double> window;
  for (int t = 0; t < m; ++t) {
    int lo = std::max(0, t - half);
    int hi = std::min(m - 1, t - half + smooth_frames - 1);
    window.assign(energy.begin() + lo, energy.begin() + hi + 1);
    auto mid = window.begin() + (window.size() - 1) / 2;
    std::nth_element(window.begin(), mid, window.end());
    smoothed[t] = *mid;
  }

  const double threshold = threshold_ratio * *std::max_element(smoothed.begin(), smoothed.end());
  const int min_run = std::max(1, static_cast<int>(std::ceil(min_ms / frame_shift_ms - 1e-9)));
  int t = 0;
  while (t < m) {
    if (!(smoothed[t] < threshold)) {
      ++t;
      continue;
    }
    int start = t;
    while (t < m && smoothed[t] < threshold) ++t;
    if (t - start >= min_run) out.spans.push_back({start + 1, t + 1});
  }
  return out;
}

SilenceSpans utterance_silences(const SentencePair& pair, const SegmentationConfig& config) {
  if (!pair.energy_track) return {};
  return detect_silence(*pair.energy_track, pair.source.frame_shift_ms(), config.threshold_ratio,
                        config.min_silence_ms, config.smooth_frames);
}

std::vector<int> candidate_boundaries(const SentencePair& pair, const SilenceSpans& silences,
                                      const SegmentationConfig& config) {
  const int m = static_cast<int>(pair.num_frames());
  if (m < 1) throw Error(pair.utt_id + ": no frames");
  std::vector<int> points{1, m};
  if (pair.boundaries) {
    for (int b : *pair.boundaries) {
      if (b < 1 || b > m)
        throw Error(pair.utt_id + ": boundary " + std::to_string(b) + " outside 1.." +
                    std::to_string(m));
      points.push_back(b);
    }
  }
  for (const auto& s : silences.spans) {
    if (s.start >= 1 && s.start <= m) points.push_back(s.start);
    if (s.end >= 1 && s.end <= m) points.push_back(s.end);
  }
  if (config.grid_stride > 0)
    for (int g = config.grid_stride; g <= m; g += config.grid_stride) points.push_back(g);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

std::vector<int> candidate_boundaries(const SentencePair& pair, const SegmentationConfig& config) {
  return candidate_boundaries(pair, utterance_silences(pair, config), config);
}

CandidateSpans enumerate_spans(std::span<const int> boundaries, const SilenceSpans& silences,
                               int min_len, int max_len) {
  if (boundaries.empty()) throw Error("enumerate_spans: no boundaries");
  auto containing = [&](int frame) -> const SilenceSpan* {
    for (const auto& s : silences.spans)
      if (frame >= s.start && frame < s.end) return &s;
    return nullptr;
  };

  CandidateSpans out;
  for (std::size_t x = 0; x < boundaries.size(); ++x) {
    for (std::size_t y = x + 1; y < boundaries.size(); ++y) {
      int a = boundaries[x], b = boundaries[y];
      if (a >= b) continue;
      if (const auto* s = containing(a)) a = s->end;
      if (const auto* s = containing(b)) b = s->start - 1;
      if (a > b) continue;
      bool silent = std::any_of(silences.spans.begin(), silences.spans.end(),
                                [&](const SilenceSpan& s) { return a < s.end && b >= s.start; });
      if (silent) continue;
      int len = b - a + 1;
      if (len < min_len || len > max_len) continue;
      out.spans.push_back({a, b});
    }
  }
  std::sort(out.spans.begin(), out.spans.end());
  out.spans.erase(std::unique(out.spans.begin(), out.spans.end()), out.spans.end());
  if (out.spans.empty()) throw Error("enumerate_spans: no candidate span survives");
  return out;
}

CandidateSpans all_spans(int m, int min_len, int max_len) {
  if (max_len <= 0) max_len = m;
  CandidateSpans out;
  for (int a = 1; a <= m; ++a)
    for (int b = a + std::max(min_len, 1) - 1; b <= m && b - a + 1 <= max_len; ++b)
      out.spans.push_back({a, b});
  return out;
}

CandidateSpans utterance_candidates(const SentencePair& pair, const SegmentationConfig& config) {
  config.validate();
  const int m = static_cast<int>(pair.num_frames());
  auto silences = utterance_silences(pair, config);
  auto points = candidate_boundaries(pair, silences, config);
  try {
    return enumerate_spans(points, silences, config.span_min_len, config.span_max_len);
  } catch (const Error&) {
  }
  auto fallback = all_spans(m, config.span_min_len, config.span_max_len);
  if (fallback.spans.empty()) fallback = all_spans(m);
  return fallback;
}

std::vector<int> read_boundary_file(const std::filesystem::path& path) {
  std::vector<int> out;
  auto lines = read_lines(path);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    auto toks = tokenize(lines[ln]);
    if (toks.empty()) continue;
    auto v = toks.size() == 1 ? parse_int(toks[0]) : std::nullopt;
    if (!v || *v < 1)
      throw Error(path.string() + ":" + std::to_string(ln + 1) +
                  ": expected one positive frame index");
    out.push_back(static_cast<int>(*v));
  }
  return out;
}

void write_boundary_file(const std::filesystem::path& path, std::span<const int> boundaries) {
  std::string out;
  for (int b : boundaries) out += std::to_string(b) + "\n";
  write_file_atomic(path, out);
}

}  // namespace spanalign
