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

// Joint alignment model. For target word i with cluster f and source span
// (a, b) the word score is
//
//   deficient:  log u(f) + log s(a, b | f) + log delta(a, b | i, l, m)
//   proper:     log s(f | a, b)          + log delta(a, b | i, l, m)
//
// with s(a, b | f) proportional to exp(-DTW(proto_f, frames a..b)^2) over the
// utterance's candidate spans and s(f | a, b) proportional to the same
// quantity over live clusters. t(e | f) is the fixed ownership relation, so a
// cluster owned by another word scores -inf. The uniform p(l) is omitted.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spanalign/corpus.h"
#include "spanalign/distortion.h"
#include "spanalign/dtw.h"
#include "spanalign/segmentation.h"

namespace spanalign {

enum class ModelVariant { kDeficient, kProper };

std::string to_string(ModelVariant v);
ModelVariant parse_variant(const std::string& name);

/// k clusters per target word type; each cluster belongs to one word type.
class ClusterInventory {
 public:
  ClusterInventory() = default;
  /// Word types are numbered in sorted byte order; the clusters of type w are
  /// w*k .. w*k + k - 1.
  ClusterInventory(std::vector<std::string> word_types, int k);
  static ClusterInventory from_corpus(const Corpus& corpus, int k);

  int k() const { return k_; }
  int num_clusters() const { return static_cast<int>(owner_.size()); }
  const std::vector<std::string>& word_types() const { return word_types_; }
  bool knows(const std::string& word) const { return clusters_.count(word) != 0; }
  /// Throws Error for an unknown word.
  const std::vector<int>& clusters_of(const std::string& word) const;
  const std::string& owner(int cluster) const { return owner_.at(cluster); }
  bool owns(int cluster, const std::string& word) const;

  bool operator==(const ClusterInventory&) const = default;

 private:
  int k_ = 0;
  std::vector<std::string> word_types_;
  std::map<std::string, std::vector<int>> clusters_;
  std::vector<std::string> owner_;
};

struct ModelParams {
  ClusterInventory inventory;
  std::vector<double> u;
  std::vector<std::optional<FeatureSequence>> prototypes;
  DistortionParams distortion;
  ModelVariant variant = ModelVariant::kDeficient;

  /// Uniform prior, no prototypes.
  static ModelParams initial(ClusterInventory inventory, DistortionParams distortion,
                             ModelVariant variant);

  /// A cluster takes part in scoring when it has a prototype and non-zero prior.
  bool is_live(int cluster) const;
  /// Checks that u sums to one and sizes agree; throws Error otherwise.
  void validate() const;

  bool operator==(const ModelParams&) const = default;
};

struct WordAlignment {
  int cluster = -1;
  Span span;
  double log_score = 0.0;
  bool operator==(const WordAlignment&) const = default;
};

struct Alignment {
  std::vector<WordAlignment> words;
  bool operator==(const Alignment&) const = default;
};

/// Per-word widths for the distortion model, already narrowed to m - 1 where
/// needed.
std::vector<int> utterance_mu(const SentencePair& pair);

/// Squared normalized DTW between the prototype and every candidate span, in
/// candidate order.
std::vector<double> span_sq_dtw(FrameView prototype, const FeatureSequence& source,
                                const CandidateSpans& candidates);

/// log sum_k exp(-values[k]).
double log_sum_exp_neg(const std::vector<double>& values);

/// Caches per-cluster DTW tables and distortion vectors for one utterance.
/// Not thread-safe; use one scorer per worker.
class UtteranceScorer {
 public:
  UtteranceScorer(const SentencePair& pair, const ModelParams& params,
                  const CandidateSpans& candidates, std::vector<int> mu);

  const CandidateSpans& candidates() const { return candidates_; }
  std::optional<std::size_t> candidate_index(Span span) const;

  const std::vector<double>& sq_dtw(int cluster);
  double log_s_deficient(int cluster, std::size_t candidate);
  double log_s_proper(int cluster, std::size_t candidate);
  /// Word position i is 1-indexed.
  double log_delta(int i, Span span);
  double word_score(int i, int cluster, std::size_t candidate);
  double word_score(int i, int cluster, Span span);

 private:
  void require_prototype(int cluster) const;
  const std::vector<double>& proper_norms();

  const SentencePair& pair_;
  const ModelParams& params_;
  const CandidateSpans& candidates_;
  std::vector<int> mu_;
  std::map<int, std::vector<double>> sq_;
  std::map<int, double> log_norm_;
  std::optional<std::vector<double>> proper_norm_;
  std::map<int, std::pair<std::vector<double>, std::vector<double>>> delta_;
};

double log_s_deficient(int cluster, Span span, const SentencePair& pair,
                       const CandidateSpans& candidates, const ModelParams& params);
double log_s_proper(int cluster, Span span, const SentencePair& pair,
                    const CandidateSpans& candidates, const ModelParams& params);

/// Word position i is 1-indexed.
double word_log_score(int i, int cluster, Span span, const SentencePair& pair,
                      const ModelParams& params, const CandidateSpans& candidates,
                      const std::vector<int>& mu);

double sentence_log_score(const Alignment& alignment, const SentencePair& pair,
                          const ModelParams& params, const CandidateSpans& candidates,
                          const std::vector<int>& mu);

/// Versioned JSON checkpoint; doubles are written with round-trip precision.
void write_checkpoint(const std::filesystem::path& path, const ModelParams& params);
ModelParams read_checkpoint(const std::filesystem::path& path);

}  // namespace spanalign
