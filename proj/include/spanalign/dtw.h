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

// Dynamic time warping with the symmetric three-way step pattern
//
//   w(i, j) = d(x_i, y_j) + min{ w(i-1, j), w(i-1, j-1), w(i, j-1) }
//
// with w(0, 0) = 0 and every other border cell at +infinity. The reported
// distance is w(m, n) / (m + n). Frame distance d is Euclidean.

#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "spanalign/corpus.h"

namespace spanalign {

struct WarpResult {
  double raw_cost = 0.0;
  double normalized_cost = 0.0;
  /// 0-indexed (i, j) pairs from (0, 0) to (m-1, n-1).
  std::vector<std::pair<int, int>> path;
};

double frame_distance(std::span<const double> a, std::span<const double> b);

/// Throws Error on empty input or dimension mismatch.
WarpResult dtw_distance(FrameView x, FrameView y);

/// Normalized distance only; skips the traceback.
double dtw_cost(FrameView x, FrameView y);

/// Frame distances d(x_i, y_j), row-major over x.
struct DistanceMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

DistanceMatrix pairwise_distances(FrameView x, FrameView y);

/// Raw warping costs w(m, j) of x against every prefix y[first, first + j),
/// j = 1..max_len (clipped to the columns available). Entry j-1 is
/// bit-identical to the raw cost of dtw_distance(x, y.slice(first, j)).
std::vector<double> dtw_prefix_costs(const DistanceMatrix& dist, std::size_t first,
                                     std::size_t max_len);

struct DbaOptions {
  int iterations = 3;
  /// Stop once the objective improves by less than this fraction.
  double min_relative_improvement = 1e-6;
  /// When set, the skeleton is drawn with `seed` among the median-length
  /// members instead of taking the first one in input order.
  bool random_skeleton = false;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct DbaResult {
  FeatureSequence centroid;
  /// Sum of squared normalized DTW distances to the members: entry 0 for the
  /// skeleton, then one entry per accepted iteration.
  std::vector<double> objective;
};

/// Index of the skeleton member: a member of median length (upper median for
/// an even count).
std::size_t dba_skeleton_index(std::span<const FrameView> members,
                               const DbaOptions& opts = {});

/// Sum over members of dtw_cost(centroid, member)^2.
double dba_objective(FrameView centroid, std::span<const FrameView> members);

/// DTW barycenter averaging. Each iteration aligns every member to the current
/// skeleton and replaces each skeleton frame by the mean of the member frames
/// warped onto it. An update that would raise the objective is rejected and
/// ends the iterations. Throws Error on an empty member set.
DbaResult dba_centroid(std::span<const FrameView> members, const DbaOptions& opts = {});

}  // namespace spanalign
