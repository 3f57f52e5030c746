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

#include "spanalign/model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "json.hpp"
#include "spanalign/text_io.h"

namespace spanalign {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::string to_string(ModelVariant v) {
  return v == ModelVariant::kDeficient ? "deficient" : "proper";
}

ModelVariant parse_variant(const std::string& name) {
  if (name == "deficient") return ModelVariant::kDeficient;
  if (name == "proper") return ModelVariant::kProper;
  throw Error("unknown model variant '" + name + "' (expected deficient or proper)");
}

ClusterInventory::ClusterInventory(std::vector<std::string> word_types, int k) : k_(k) {
  if (k < 1) throw Error("clusters per word type must be >= 1");
  std::sort(word_types.begin(), word_types.end());
  word_types.erase(std::unique(word_types.begin(), word_types.end()), word_types.end());
  word_types_ = std::move(word_types);
  for (const auto& w : word_types_) {
    auto& ids = clusters_[w];
    for (int j = 0; j < k; ++j) {
      ids.push_back(static_cast<int>(owner_.size()));
      owner_.push_back(w);
    }
  }
}

ClusterInventory ClusterInventory::from_corpus(const Corpus& corpus, int k) {
  std::vector<std::string> words;
  for (const auto& p : corpus.pairs)
    words.insert(words.end(), p.target_words.begin(), p.target_words.end());
  return ClusterInventory(std::move(words), k);
}

const std::vector<int>& ClusterInventory::clusters_of(const std::string& word) const {
  auto it = clusters_.find(word);
  if (it == clusters_.end()) throw Error("word '" + word + "' is not in the cluster inventory");
  return it->second;
}

bool ClusterInventory::owns(int cluster, const std::string& word) const {
  return cluster >= 0 && cluster < num_clusters() && owner_[cluster] == word;
}

ModelParams ModelParams::initial(ClusterInventory inventory, DistortionParams distortion,
                                 ModelVariant variant) {
  ModelParams params;
  const int n = inventory.num_clusters();
  params.inventory = std::move(inventory);
  params.u.assign(n, n > 0 ? 1.0 / n : 0.0);
  params.prototypes.resize(n);
  params.distortion = distortion;
  params.variant = variant;
  return params;
}

bool ModelParams::is_live(int cluster) const {
  return cluster >= 0 && cluster < static_cast<int>(u.size()) && u[cluster] > 0.0 &&
         prototypes[cluster].has_value();
}

void ModelParams::validate() const {
  const auto n = static_cast<std::size_t>(inventory.num_clusters());
  if (u.size() != n || prototypes.size() != n)
    throw Error("model parameters do not match the cluster inventory");
  double total = 0.0;
  for (double p : u) {
    if (!(p >= 0.0)) throw Error("cluster prior must be non-negative");
    total += p;
  }
  if (n > 0 && std::abs(total - 1.0) > 1e-9) throw Error("cluster prior does not sum to one");
  for (const auto& proto : prototypes)
    if (proto && proto->empty()) throw Error("empty prototype");
  distortion.validate();
}

std::vector<int> utterance_mu(const SentencePair& pair) {
  const int m = static_cast<int>(pair.num_frames());
  auto alloc = allocate_mu(pair.char_lengths, m);
  if (m < 2) throw Error(pair.utt_id + ": at least two frames are needed for span distortion");
  for (auto& mu : alloc.mu) mu = effective_mu(mu, m);
  return alloc.mu;
}

std::vector<double> span_sq_dtw(FrameView prototype, const FeatureSequence& source,
                                const CandidateSpans& candidates) {
  std::vector<double> out(candidates.spans.size());
  if (candidates.spans.empty()) return out;
  const auto dist = pairwise_distances(prototype, source);
  const double proto_len = static_cast<double>(prototype.frames());
  // Candidates are sorted by start, so each start is one contiguous block.
  std::size_t c = 0;
  while (c < candidates.spans.size()) {
    const int a = candidates.spans[c].a;
    std::size_t end = c;
    int longest = 0;
    while (end < candidates.spans.size() && candidates.spans[end].a == a) {
      longest = std::max(longest, candidates.spans[end].length());
      ++end;
    }
    auto costs = dtw_prefix_costs(dist, static_cast<std::size_t>(a - 1),
                                  static_cast<std::size_t>(longest));
    for (; c < end; ++c) {
      const int len = candidates.spans[c].length();
      const double norm = costs[static_cast<std::size_t>(len - 1)] / (proto_len + len);
      out[c] = norm * norm;
    }
  }
  return out;
}

double log_sum_exp_neg(const std::vector<double>& values) {
  if (values.empty()) return kNegInf;
  const double lo = *std::min_element(values.begin(), values.end());
  if (!std::isfinite(lo)) return -lo;
  double sum = 0.0;
  for (double v : values) sum += std::exp(-(v - lo));
  return -lo + std::log(sum);
}

UtteranceScorer::UtteranceScorer(const SentencePair& pair, const ModelParams& params,
                                 const CandidateSpans& candidates, std::vector<int> mu)
    : pair_(pair), params_(params), candidates_(candidates), mu_(std::move(mu)) {
  if (mu_.size() != pair_.num_words())
    throw Error(pair_.utt_id + ": word widths do not match the sentence length");
}

std::optional<std::size_t> UtteranceScorer::candidate_index(Span span) const {
  auto it = std::lower_bound(candidates_.spans.begin(), candidates_.spans.end(), span);
  if (it == candidates_.spans.end() || *it != span) return std::nullopt;
  return static_cast<std::size_t>(it - candidates_.spans.begin());
}

void UtteranceScorer::require_prototype(int cluster) const {
  if (cluster < 0 || cluster >= params_.inventory.num_clusters())
    throw Error("cluster " + std::to_string(cluster) + " is not in the inventory");
  if (!params_.prototypes[cluster])
    throw Error("cluster " + std::to_string(cluster) + " has no prototype");
}

const std::vector<double>& UtteranceScorer::sq_dtw(int cluster) {
  auto it = sq_.find(cluster);
  if (it != sq_.end()) return it->second;
  require_prototype(cluster);
  auto values = span_sq_dtw(*params_.prototypes[cluster], pair_.source, candidates_);
  log_norm_[cluster] = log_sum_exp_neg(values);
  return sq_.emplace(cluster, std::move(values)).first->second;
}

double UtteranceScorer::log_s_deficient(int cluster, std::size_t candidate) {
  const auto& sq = sq_dtw(cluster);
  return -sq[candidate] - log_norm_.at(cluster);
}

const std::vector<double>& UtteranceScorer::proper_norms() {
  if (proper_norm_) return *proper_norm_;
  std::vector<int> live;
  for (int f = 0; f < params_.inventory.num_clusters(); ++f)
    if (params_.is_live(f)) live.push_back(f);
  if (live.empty()) throw Error("proper model: no live clusters");
  std::vector<const std::vector<double>*> tables;
  for (int f : live) tables.push_back(&sq_dtw(f));
  std::vector<double> norms(candidates_.spans.size());
  std::vector<double> column(live.size());
  for (std::size_t c = 0; c < norms.size(); ++c) {
    for (std::size_t q = 0; q < live.size(); ++q) column[q] = (*tables[q])[c];
    norms[c] = log_sum_exp_neg(column);
  }
  proper_norm_ = std::move(norms);
  return *proper_norm_;
}

double UtteranceScorer::log_s_proper(int cluster, std::size_t candidate) {
  const auto& norms = proper_norms();
  return -sq_dtw(cluster)[candidate] - norms[candidate];
}

double UtteranceScorer::log_delta(int i, Span span) {
  auto it = delta_.find(i);
  if (it == delta_.end()) {
    const int l = static_cast<int>(pair_.num_words());
    const int m = static_cast<int>(pair_.num_frames());
    it = delta_
             .emplace(i, std::make_pair(log_delta_a(i, l, m, mu_[i - 1], params_.distortion),
                                        log_delta_b(i, l, m, mu_[i - 1], params_.distortion)))
             .first;
  }
  const int m = static_cast<int>(pair_.num_frames());
  if (span.a < 0 || span.b < 0 || span.a > m || span.b > m || (span.a > 0 && span.b > 0 && span.a > span.b))
    throw Error(pair_.utt_id + ": invalid span (" + std::to_string(span.a) + ", " +
                std::to_string(span.b) + ")");
  return it->second.first[span.a] + it->second.second[span.b];
}

double UtteranceScorer::word_score(int i, int cluster, std::size_t candidate) {
  const auto& word = pair_.target_words.at(static_cast<std::size_t>(i - 1));
  const Span span = candidates_.spans.at(candidate);
  const double distortion = log_delta(i, span);
  if (!params_.inventory.owns(cluster, word) || !params_.is_live(cluster)) return kNegInf;
  if (params_.variant == ModelVariant::kDeficient)
    return (std::log(params_.u[cluster]) + log_s_deficient(cluster, candidate)) + distortion;
  return log_s_proper(cluster, candidate) + distortion;
}

double UtteranceScorer::word_score(int i, int cluster, Span span) {
  auto c = candidate_index(span);
  if (!c) {
    log_delta(i, span);  // rejects malformed spans
    throw Error(pair_.utt_id + ": span (" + std::to_string(span.a) + ", " +
                std::to_string(span.b) + ") is not a candidate");
  }
  return word_score(i, cluster, *c);
}

double log_s_deficient(int cluster, Span span, const SentencePair& pair,
                       const CandidateSpans& candidates, const ModelParams& params) {
  UtteranceScorer scorer(pair, params, candidates, std::vector<int>(pair.num_words(), 1));
  auto c = scorer.candidate_index(span);
  if (!c) throw Error(pair.utt_id + ": span is not a candidate");
  return scorer.log_s_deficient(cluster, *c);
}

double log_s_proper(int cluster, Span span, const SentencePair& pair,
                    const CandidateSpans& candidates, const ModelParams& params) {
  UtteranceScorer scorer(pair, params, candidates, std::vector<int>(pair.num_words(), 1));
  auto c = scorer.candidate_index(span);
  if (!c) throw Error(pair.utt_id + ": span is not a candidate");
  return scorer.log_s_proper(cluster, *c);
}

double word_log_score(int i, int cluster, Span span, const SentencePair& pair,
                      const ModelParams& params, const CandidateSpans& candidates,
                      const std::vector<int>& mu) {
  UtteranceScorer scorer(pair, params, candidates, mu);
  return scorer.word_score(i, cluster, span);
}

double sentence_log_score(const Alignment& alignment, const SentencePair& pair,
                          const ModelParams& params, const CandidateSpans& candidates,
                          const std::vector<int>& mu) {
  if (alignment.words.size() != pair.num_words())
    throw Error(pair.utt_id + ": alignment does not cover every word");
  UtteranceScorer scorer(pair, params, candidates, mu);
  double total = 0.0;
  for (std::size_t i = 0; i < alignment.words.size(); ++i) {
    const auto& w = alignment.words[i];
    total += scorer.word_score(static_cast<int>(i + 1), w.cluster, w.span);
  }
  return total;
}

// Checkpoint format, version 1:
//   {"format": "spanalign-model", "version": 1, "k": k,
//    "word_types": [...], "u": [...],
//    "prototypes": [null | {"dim": d, "frame_shift_ms": s, "data": [...]}],
//    "distortion": {"p0": p0, "lambda": lambda}, "variant": "deficient"}
void write_checkpoint(const std::filesystem::path& path, const ModelParams& params) {
  params.validate();
  nlohmann::json j;
  j["format"] = "spanalign-model";
  j["version"] = 1;
  j["k"] = params.inventory.k();
  j["word_types"] = params.inventory.word_types();
  j["u"] = params.u;
  auto protos = nlohmann::json::array();
  for (const auto& p : params.prototypes) {
    if (!p) {
      protos.push_back(nullptr);
      continue;
    }
    protos.push_back({{"dim", p->dim()}, {"frame_shift_ms", p->frame_shift_ms()}, {"data", p->data()}});
  }
  j["prototypes"] = std::move(protos);
  j["distortion"] = {{"p0", params.distortion.p0}, {"lambda", params.distortion.lambda}};
  j["variant"] = to_string(params.variant);
  write_file_atomic(path, j.dump(1) + "\n");
}

ModelParams read_checkpoint(const std::filesystem::path& path) {
  std::string text;
  for (const auto& line : read_lines(path)) text += line + "\n";
  try {
    auto j = nlohmann::json::parse(text);
    if (j.at("format") != "spanalign-model") throw Error("not a spanalign model checkpoint");
    if (j.at("version") != 1)
      throw Error("unsupported checkpoint version " + j.at("version").dump());
    ModelParams params;
    params.inventory = ClusterInventory(j.at("word_types").get<std::vector<std::string>>(),
                                        j.at("k").get<int>());
    params.u = j.at("u").get<std::vector<double>>();
    for (const auto& p : j.at("prototypes")) {
      if (p.is_null()) {
        params.prototypes.emplace_back();
        continue;
      }
      params.prototypes.emplace_back(FeatureSequence(p.at("data").get<std::vector<double>>(),
                                                     p.at("dim").get<std::size_t>(),
                                                     p.at("frame_shift_ms").get<double>()));
    }
    params.distortion.p0 = j.at("distortion").at("p0").get<double>();
    params.distortion.lambda = j.at("distortion").at("lambda").get<double>();
    params.variant = parse_variant(j.at("variant").get<std::string>());
    params.validate();
    return params;
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": malformed checkpoint: " + e.what());
  }
}

}  // namespace spanalign
