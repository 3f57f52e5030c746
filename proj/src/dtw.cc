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

#include "spanalign/dtw.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "spanalign/parallel.h"

namespace spanalign {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_inputs(FrameView x, FrameView y) {
  if (x.empty() || y.empty()) throw Error("dtw: empty sequence");
  if (x.dim() != y.dim())
    throw Error("dtw: dimension mismatch (" + std::to_string(x.dim()) + " vs " +
                std::to_string(y.dim()) + ")");
}

// Full (m+1) x (n+1) cost table.
std::vector<double> cost_table(FrameView x, FrameView y) {
  const std::size_t m = x.frames(), n = y.frames();
  std::vector<double> w((m + 1) * (n + 1), kInf);
  w[0] = 0.0;
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      double best = std::min({w[(i - 1) * (n + 1) + j], w[(i - 1) * (n + 1) + j - 1],
                              w[i * (n + 1) + j - 1]});
      w[i * (n + 1) + j] = frame_distance(x.frame(i - 1), y.frame(j - 1)) + best;
    }
  }
  return w;
}

}  // namespace

double frame_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    double diff = a[k] - b[k];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

WarpResult dtw_distance(FrameView x, FrameView y) {
  check_inputs(x, y);
  const std::size_t m = x.frames(), n = y.frames();
  auto w = cost_table(x, y);
  auto cell = [&](std::size_t i, std::size_t j) { return w[i * (n + 1) + j]; };

  WarpResult result;
  result.raw_cost = cell(m, n);
  result.normalized_cost = result.raw_cost / static_cast<double>(m + n);

  // Traceback; ties prefer the diagonal, then (i-1, j), then (i, j-1).
  std::size_t i = m, j = n;
  result.path.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1));
  while (i > 1 || j > 1) {
    double diag = cell(i - 1, j - 1);
    double up = cell(i - 1, j);
    double left = cell(i, j - 1);
    if (diag <= up && diag <= left) {
      --i;
      --j;
    } else if (up <= left) {
      --i;
    } else {
      --j;
    }
    result.path.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1));
  }
  std::reverse(result.path.begin(), result.path.end());
  return result;
}

double dtw_cost(FrameView x, FrameView y) {
  check_inputs(x, y);
  const std::size_t m = x.frames(), n = y.frames();
  std::vector<double> prev(n + 1, kInf), cur(n + 1, kInf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= m; ++i) {
    cur[0] = kInf;
    for (std::size_t j = 1; j <= n; ++j) {
      double best = std::min({prev[j], prev[j - 1], cur[j - 1]});
      cur[j] = frame_distance(x.frame(i - 1), y.frame(j - 1)) + best;
    }
    std::swap(prev, cur);
  }
  return prev[n] / static_cast<double>(m + n);
}

DistanceMatrix pairwise_distances(FrameView x, FrameView y) {
  check_inputs(x, y);
  DistanceMatrix dist;
  dist.rows = x.frames();
  dist.cols = y.frames();
  dist.values.resize(dist.rows * dist.cols);
  for (std::size_t i = 0; i < dist.rows; ++i)
    for (std::size_t j = 0; j < dist.cols; ++j)
      dist.values[i * dist.cols + j] = frame_distance(x.frame(i), y.frame(j));
  return dist;
}

std::vector<double> dtw_prefix_costs(const DistanceMatrix& dist, std::size_t first,
                                     std::size_t max_len) {
  if (first >= dist.cols) return {};
  const std::size_t n = std::min(max_len, dist.cols - first);
  if (n == 0) return {};
  std::vector<double> prev(n + 1, kInf), cur(n + 1, kInf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= dist.rows; ++i) {
    cur[0] = kInf;
    const double* row = dist.values.data() + (i - 1) * dist.cols + first;
    for (std::size_t j = 1; j <= n; ++j) {
      double best = std::min({prev[j], prev[j - 1], cur[j - 1]});
      cur[j] = row[j - 1] + best;
    }
    std::swap(prev, cur);
  }
  return std::vector<double>(prev.begin() + 1, prev.end());
}

std::size_t dba_skeleton_index(std::span<const FrameView> members, const DbaOptions& opts) {
  if (members.empty()) throw Error("dba: empty member set");
  std::vector<std::size_t> lengths;
  lengths.reserve(members.size());
  for (const auto& s : members) lengths.push_back(s.frames());
  std::vector<std::size_t> sorted = lengths;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t median = sorted[sorted.size() / 2];

  std::vector<std::size_t> at_median;
  for (std::size_t k = 0; k < members.size(); ++k)
    if (lengths[k] == median) at_median.push_back(k);
  if (!opts.random_skeleton) return at_median.front();
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<std::size_t> pick(0, at_median.size() - 1);
  return at_median[pick(rng)];
}

double dba_objective(FrameView centroid, std::span<const FrameView> members) {
  double total = 0.0;
  for (const auto& s : members) {
    double c = dtw_cost(centroid, s);
    total += c * c;
  }
  return total;
}

DbaResult dba_centroid(std::span<const FrameView> members, const DbaOptions& opts) {
  if (members.empty()) throw Error("dba: empty member set");
  if (opts.iterations < 1) throw Error("dba: iterations must be >= 1");
  const std::size_t dim = members.front().dim();
  for (const auto& s : members) {
    if (s.empty()) throw Error("dba: empty member sequence");
    if (s.dim() != dim) throw Error("dba: members differ in dimension");
  }

  DbaResult result;
  result.centroid = FeatureSequence(members[dba_skeleton_index(members, opts)]);
  result.objective.push_back(dba_objective(result.centroid, members));

  const std::size_t len = result.centroid.frames();
  std::vector<WarpResult> warps(members.size());
  for (int it = 0; it < opts.iterations; ++it) {
    const FrameView skeleton = result.centroid;
    parallel_for(members.size(), opts.threads,
                 [&](std::size_t k) { warps[k] = dtw_distance(skeleton, members[k]); });

    // Sums run in member order.
    std::vector<double> sums(len * dim, 0.0);
    std::vector<std::size_t> counts(len, 0);
    for (std::size_t k = 0; k < members.size(); ++k) {
      for (auto [i, j] : warps[k].path) {
        auto src = members[k].frame(static_cast<std::size_t>(j));
        double* dst = sums.data() + static_cast<std::size_t>(i) * dim;
        for (std::size_t q = 0; q < dim; ++q) dst[q] += src[q];
        ++counts[static_cast<std::size_t>(i)];
      }
    }
    for (std::size_t i = 0; i < len; ++i) {
      // Every skeleton index lies on every warping path.
      if (counts[i] == 0) throw Error("dba: skeleton frame without aligned frames");
      for (std::size_t q = 0; q < dim; ++q)
        sums[i * dim + q] /= static_cast<double>(counts[i]);
    }
    FeatureSequence updated(std::move(sums), dim, result.centroid.frame_shift_ms());
    const double prev = result.objective.back();
    const double next = dba_objective(updated, members);
    if (next > prev) break;
    result.centroid = std::move(updated);
    result.objective.push_back(next);
    if (prev - next <= opts.min_relative_improvement * prev) break;
  }
  return result;
}

}  // namespace spanalign
