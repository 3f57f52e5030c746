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

// Candidate span generation for the E-step. Frame numbers in this module are
// 1-indexed: silences are half-open [start, end) and spans are inclusive
// (a, b).

#pragma once

#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "spanalign/corpus.h"

namespace spanalign {

struct SegmentationConfig {
  double threshold_ratio = 0.05;
  double min_silence_ms = 50.0;
  int smooth_frames = 5;
  /// 0 disables the uniform grid.
  int grid_stride = 5;
  int span_min_len = 3;
  int span_max_len = 150;

  void validate() const;
};

struct SilenceSpan {
  int start = 0;  // first silent frame
  int end = 0;    // one past the last silent frame
  bool operator==(const SilenceSpan&) const = default;
};

struct SilenceSpans {
  std::vector<SilenceSpan> spans;
};

struct Span {
  int a = 0;
  int b = 0;
  int length() const { return b - a + 1; }
  auto operator<=>(const Span&) const = default;
};

struct CandidateSpans {
  std::vector<Span> spans;  // sorted by (a, b), unique
};

/// Smooths the energy track with a centred median filter of width
/// smooth_frames and returns maximal runs of at least
/// ceil(min_ms / frame_shift_ms) frames whose smoothed value is strictly below
/// threshold_ratio times the smoothed maximum.
SilenceSpans detect_silence(std::span<const double> energy, double frame_shift_ms,
                            double threshold_ratio = 0.05, double min_ms = 50.0,
                            int smooth_frames = 5);

/// Sorted, deduplicated union of the pair's external boundaries, the silence
/// edges that fall inside [1, m], a grid of multiples of grid_stride, and the
/// endpoints 1 and m.
std::vector<int> candidate_boundaries(const SentencePair& pair, const SilenceSpans& silences,
                                      const SegmentationConfig& config);

/// Same, detecting silences from the pair's energy track when present.
std::vector<int> candidate_boundaries(const SentencePair& pair, const SegmentationConfig& config);

/// Silences of the pair's energy track; empty when there is no track.
SilenceSpans utterance_silences(const SentencePair& pair, const SegmentationConfig& config);

/// Spans (a, b) with a < b drawn from the boundary set. An endpoint inside a
/// silence moves to the nearest frame outside it in the direction of the
/// span's interior; spans that still contain a silent frame, or fall outside
/// [min_len, max_len], are dropped. Throws Error when nothing survives.
CandidateSpans enumerate_spans(std::span<const int> boundaries, const SilenceSpans& silences,
                               int min_len, int max_len);

/// Every span (a, b) with 1 <= a <= b <= m and min_len <= b - a + 1 <= max_len.
CandidateSpans all_spans(int m, int min_len = 1, int max_len = 0);

/// Silence detection (when an energy track is present), boundaries and span
/// enumeration for one utterance. Falls back to every span of admissible
/// length when the pruned set is empty.
CandidateSpans utterance_candidates(const SentencePair& pair, const SegmentationConfig& config);

/// Boundary sidecar: one 1-indexed frame index per line.
std::vector<int> read_boundary_file(const std::filesystem::path& path);
void write_boundary_file(const std::filesystem::path& path, std::span<const int> boundaries);

}  // namespace spanalign
