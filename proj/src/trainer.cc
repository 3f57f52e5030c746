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

#include "spanalign/trainer.h"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <tuple>

#include "spanalign/dtw.h"
#include "spanalign/parallel.h"

namespace spanalign {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Strictly better score, or equal score and earlier in (a, b, cluster) order.
bool better(double score, Span span, int cluster, double best_score, Span best_span,
            int best_cluster) {
  if (score != best_score) return score > best_score;
  return std::tie(span.a, span.b, cluster) < std::tie(best_span.a, best_span.b, best_cluster);
}

}  // namespace

void TrainConfig::validate() const {
  if (iterations < 1) throw Error("iterations must be >= 1");
  if (k < 1) throw Error("k must be >= 1");
  if (dba_iterations < 1) throw Error("dba_iterations must be >= 1");
  distortion.validate();
  segmentation.validate();
}

PreparedCorpus prepare_corpus(const Corpus& corpus, const TrainConfig& config) {
  config.validate();
  if (corpus.pairs.empty()) throw Error("empty corpus");
  PreparedCorpus data;
  data.corpus = config.normalize ? normalize_corpus(corpus) : corpus;
  const std::size_t n = data.corpus.pairs.size();
  data.candidates.resize(n);
  data.mu.resize(n);
  parallel_for(n, config.threads, [&](std::size_t u) {
    const auto& pair = data.corpus.pairs[u];
    try {
      data.mu[u] = utterance_mu(pair);
    } catch (const Error& e) {
      throw Error(pair.utt_id + ": no valid span for every word: " + e.what());
    }
    data.candidates[u] = utterance_candidates(pair, config.segmentation);
  });
  return data;
}

TrainState initialize(const PreparedCorpus& data, const TrainConfig& config) {
  config.validate();
  TrainState state;
  state.params = ModelParams::initial(ClusterInventory::from_corpus(data.corpus, config.k),
                                      config.distortion, config.variant);
  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<int> pick(0, config.k - 1);

  state.assignments.resize(data.corpus.pairs.size());
  for (std::size_t u = 0; u < data.corpus.pairs.size(); ++u) {
    const auto& pair = data.corpus.pairs[u];
    const auto& cands = data.candidates[u].spans;
    if (cands.empty()) throw Error(pair.utt_id + ": no candidate spans");
    const int l = static_cast<int>(pair.num_words());
    const int m = static_cast<int>(pair.num_frames());
    auto& align = state.assignments[u];
    align.words.resize(pair.num_words());
    for (int i = 1; i <= l; ++i) {
      auto& w = align.words[i - 1];
      const auto& owned = state.params.inventory.clusters_of(pair.target_words[i - 1]);
      w.cluster = owned[static_cast<std::size_t>(pick(rng))];

      auto la = log_delta_a(i, l, m, data.mu[u][i - 1], config.distortion);
      auto lb = log_delta_b(i, l, m, data.mu[u][i - 1], config.distortion);
      double best = kNegInf;
      for (const auto& span : cands) {
        double s = la[span.a] + lb[span.b];
        if (s > best || w.span.a == 0) {
          best = s;
          w.span = span;
        }
      }
      w.log_score = best;
    }
  }
  state.params = m_step(data, state.assignments, state.params, config);
  return state;
}

std::vector<Alignment> e_step(const PreparedCorpus& data, const ModelParams& params,
                              const std::vector<Alignment>& previous, int threads) {
  const std::size_t n = data.corpus.pairs.size();
  if (previous.size() != n) throw Error("e_step: previous assignments do not cover the corpus");
  std::vector<Alignment> out(n);
  parallel_for(n, threads, [&](std::size_t u) {
    const auto& pair = data.corpus.pairs[u];
    const auto& cands = data.candidates[u].spans;
    UtteranceScorer scorer(pair, params, data.candidates[u], data.mu[u]);
    auto& align = out[u];
    align.words.resize(pair.num_words());
    for (int i = 1; i <= static_cast<int>(pair.num_words()); ++i) {
      WordAlignment best{-1, {}, kNegInf};
      for (int f : params.inventory.clusters_of(pair.target_words[i - 1])) {
        if (!params.is_live(f)) continue;
        for (std::size_t c = 0; c < cands.size(); ++c) {
          double s = scorer.word_score(i, f, c);
          if (s == kNegInf) continue;
          if (best.cluster < 0 || better(s, cands[c], f, best.log_score, best.span, best.cluster))
            best = {f, cands[c], s};
        }
      }
      if (best.cluster < 0) {
        best = previous[u].words.at(static_cast<std::size_t>(i - 1));
        best.log_score = kNegInf;
      }
      align.words[i - 1] = best;
    }
  });
  return out;
}

ModelParams m_step(const PreparedCorpus& data, const std::vector<Alignment>& assignments,
                   const ModelParams& previous, const TrainConfig& config) {
  ModelParams params = previous;
  const int clusters = params.inventory.num_clusters();
  std::vector<std::vector<FrameView>> members(clusters);
  std::size_t total = 0;
  for (std::size_t u = 0; u < assignments.size(); ++u) {
    const auto& pair = data.corpus.pairs[u];
    for (const auto& w : assignments[u].words) {
      if (w.cluster < 0 || w.cluster >= clusters)
        throw Error(pair.utt_id + ": assignment to unknown cluster " + std::to_string(w.cluster));
      members[w.cluster].push_back(pair.source.span(w.span.a, w.span.b));
      ++total;
    }
  }
  if (total == 0) throw Error("m_step: no assignments");
  for (int f = 0; f < clusters; ++f)
    params.u[f] = static_cast<double>(members[f].size()) / static_cast<double>(total);

  parallel_for(static_cast<std::size_t>(clusters), config.threads, [&](std::size_t f) {
    if (members[f].empty()) return;
    DbaOptions opts;
    opts.iterations = config.dba_iterations;
    opts.seed = config.seed + f;
    params.prototypes[f] = dba_centroid(members[f], opts).centroid;
  });
  return params;
}

double total_log_score(const std::vector<Alignment>& assignments) {
  double total = 0.0;
  for (const auto& a : assignments)
    for (const auto& w : a.words) total += w.log_score;
  return total;
}

TrainState train(const PreparedCorpus& data, const TrainConfig& config,
                 const IterationCallback& on_iteration) {
  config.validate();
  TrainState state = initialize(data, config);
  for (int it = 1; it <= config.iterations; ++it) {
    auto start = std::chrono::steady_clock::now();
    state.assignments = e_step(data, state.params, state.assignments, config.threads);
    const double score = total_log_score(state.assignments);
    state.params = m_step(data, state.assignments, state.params, config);
    std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    state.iteration_log.push_back({it, score, elapsed.count()});
    if (on_iteration) on_iteration(state);
  }
  return state;
}

}  // namespace spanalign
