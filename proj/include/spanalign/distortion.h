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

// Span distortion model: two fast_align-style distributions over the start
// frame a and the end frame b of the span aligned to target word i,
//
//   h_a(i, j) = -| i/l - j/(m - mu) |
//   h_b(i, j) = -| i/l - (j - mu)/(m - mu) |
//   delta_x(j) = p0                                  if j = 0
//              = (1 - p0) exp(lambda h_x(i, j)) / Z  if j in 1..m
//
// where mu is the expected width of word i in frames. Word positions i and
// frame positions j are 1-indexed; j = 0 is the null outcome.

#pragma once

#include <span>
#include <vector>

namespace spanalign {

struct DistortionParams {
  double p0 = 0.0;
  double lambda = 0.5;

  bool operator==(const DistortionParams&) const = default;

  void validate() const;
};

/// Frames per word, proportional to character counts, summing to m.
struct MuAllocation {
  std::vector<int> mu;
};

/// Largest-remainder rounding of m * chars[i] / sum(chars) with ties to the
/// lower index; every word gets at least one frame. Throws Error if m < l.
MuAllocation allocate_mu(std::span<const int> char_lengths, int m);

/// Log-probabilities over j = 0..m (entry 0 is the null outcome, -inf when
/// p0 = 0). Throws Error unless 1 <= i <= l and 0 < mu < m.
std::vector<double> log_delta_a(int i, int l, int m, int mu, const DistortionParams& params);
std::vector<double> log_delta_b(int i, int l, int m, int mu, const DistortionParams& params);

/// Probability vectors over j = 0..m.
std::vector<double> delta_a(int i, int l, int m, int mu, const DistortionParams& params);
std::vector<double> delta_b(int i, int l, int m, int mu, const DistortionParams& params);

/// log delta_a(a) + log delta_b(b). A zero endpoint is the null outcome.
/// Throws Error when both endpoints are non-zero and a > b, or out of range.
double log_delta_span(int a, int b, int i, int l, int m, int mu,
                      const DistortionParams& params);

/// Width used inside h for a word of allocated width mu: the distributions
/// need mu < m, so a word that owns every frame is narrowed to m - 1.
int effective_mu(int mu, int m);

}  // namespace spanalign
