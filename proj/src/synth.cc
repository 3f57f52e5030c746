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

#include "spanalign/synth.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace spanalign {

void SynthConfig::validate() const {
  if (vocab_size < 1) throw Error("synth: vocab_size must be >= 1");
  if (num_sentences < 1) throw Error("synth: num_sentences must be >= 1");
  if (min_words < 1 || max_words < min_words) throw Error("synth: bad sentence length range");
  if (min_proto_len < 1 || max_proto_len < min_proto_len)
    throw Error("synth: prototype lengths must be positive and ordered");
  if (min_phone_len < 1 || max_phone_len < min_phone_len)
    throw Error("synth: bad phone length range");
  if (!repeat_words && max_words > vocab_size)
    throw Error("synth: max_words exceeds vocab_size without repeat_words");
  if (num_phones < 1) throw Error("synth: num_phones must be >= 1");
  if (feature_dim < 1) throw Error("synth: feature_dim must be >= 1");
  if (!(noise_std >= 0.0) || !(phone_jitter >= 0.0)) throw Error("synth: negative spread");
  if (!(reorder_prob >= 0.0 && reorder_prob <= 1.0)) throw Error("synth: reorder_prob outside [0, 1]");
  if (!(silence_prob >= 0.0 && silence_prob <= 1.0)) throw Error("synth: silence_prob outside [0, 1]");
  if (min_silence_len < 1 || max_silence_len < min_silence_len)
    throw Error("synth: bad silence length range");
  if (!(frames_per_char > 0.0)) throw Error("synth: frames_per_char must be positive");
  if (!(frame_shift_ms > 0.0)) throw Error("synth: frame_shift_ms must be positive");
}

namespace {

struct WordModel {
  std::string spelling;
  std::vector<double> frames;      // row-major, feature_dim columns
  std::vector<int> phone_starts;   // 0-indexed offsets of phone onsets
};

int uniform(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace

SynthOutput synth_generate(const SynthConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto d = static_cast<std::size_t>(cfg.feature_dim);

  std::vector<std::vector<double>> phones(cfg.num_phones, std::vector<double>(d));
  for (auto& p : phones)
    for (auto& x : p) x = gauss(rng);
  std::vector<double> silence_mean(d);
  for (auto& x : silence_mean) x = 0.3 * gauss(rng);

  std::vector<WordModel> vocab;
  std::set<std::string> spellings;
  for (int w = 0; w < cfg.vocab_size; ++w) {
    WordModel word;
    const int len = uniform(rng, cfg.min_proto_len, cfg.max_proto_len);
    int pos = 0;
    while (pos < len) {
      int plen = std::min(len - pos, uniform(rng, cfg.min_phone_len, cfg.max_phone_len));
      // Never leave a remainder shorter than the minimum phone.
      if (len - pos - plen > 0 && len - pos - plen < cfg.min_phone_len) plen = len - pos;
      const auto& mean = phones[uniform(rng, 0, cfg.num_phones - 1)];
      word.phone_starts.push_back(pos);
      for (int t = 0; t < plen; ++t)
        for (std::size_t k = 0; k < d; ++k) word.frames.push_back(mean[k] + cfg.phone_jitter * gauss(rng));
      pos += plen;
    }
    const int chars = std::max(1, static_cast<int>(std::lround(len / cfg.frames_per_char)));
    do {
      word.spelling.clear();
      for (int c = 0; c < chars; ++c) word.spelling += static_cast<char>('a' + uniform(rng, 0, 25));
    } while (!spellings.insert(word.spelling).second);
    vocab.push_back(std::move(word));
  }

  SynthOutput out;
  out.corpus.gold.emplace();
  std::vector<int> counts(cfg.vocab_size, 0);
  int total_words = 0;
  const int digits = static_cast<int>(std::to_string(cfg.num_sentences - 1).size());

  for (int n = 0; n < cfg.num_sentences; ++n) {
    std::string id = std::to_string(n);
    id = "utt" + std::string(static_cast<std::size_t>(std::max(0, digits - static_cast<int>(id.size()))), '0') + id;

    const int l = uniform(rng, cfg.min_words, cfg.max_words);
    std::vector<int> words;
    while (static_cast<int>(words.size()) < l) {
      const int w = uniform(rng, 0, cfg.vocab_size - 1);
      if (!cfg.repeat_words && std::find(words.begin(), words.end(), w) != words.end()) continue;
      words.push_back(w);
      ++counts[w];
      ++total_words;
    }
    std::vector<int> order(l);
    for (int i = 0; i < l; ++i) order[i] = i;
    for (int i = 0; i + 1 < l; ++i) {
      if (unit(rng) < cfg.reorder_prob) {
        std::swap(order[i], order[i + 1]);
        ++i;
      }
    }

    std::vector<double> data, energy;
    std::vector<int> bounds;
    GoldAlignment gold{id, {}};
    auto add_silence = [&] {
      if (!(unit(rng) < cfg.silence_prob)) return;
      const int len = uniform(rng, cfg.min_silence_len, cfg.max_silence_len);
      for (int t = 0; t < len; ++t) {
        for (std::size_t k = 0; k < d; ++k) data.push_back(silence_mean[k] + 0.1 * gauss(rng));
        energy.push_back(0.01 * (0.5 + unit(rng)));
      }
    };
    add_silence();
    for (int pos = 0; pos < l; ++pos) {
      if (pos > 0) add_silence();
      const int i = order[pos];
      const auto& word = vocab[words[i]];
      const int start = static_cast<int>(data.size() / d);
      const int len = static_cast<int>(word.frames.size() / d);
      for (std::size_t p = 0; p < word.phone_starts.size(); ++p) {
        int first = start + word.phone_starts[p];
        int last = start + (p + 1 < word.phone_starts.size() ? word.phone_starts[p + 1] : len) - 1;
        bounds.push_back(first + 1);
        bounds.push_back(last + 1);
      }
      for (double x : word.frames) data.push_back(x + cfg.noise_std * gauss(rng));
      for (int t = 0; t < len; ++t) {
        energy.push_back(0.5 + 0.5 * unit(rng));
        gold.links.emplace(i, start + t);
      }
    }
    add_silence();

    std::vector<std::string> tokens;
    for (int w : words) tokens.push_back(vocab[w].spelling);
    auto pair = make_sentence_pair(id, FeatureSequence(std::move(data), d, cfg.frame_shift_ms),
                                   std::move(tokens));
    if (cfg.emit_energy) pair.energy_track = std::move(energy);
    if (cfg.emit_boundaries) {
      std::sort(bounds.begin(), bounds.end());
      bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
      pair.boundaries = std::move(bounds);
    }
    (*out.corpus.gold)[id] = std::move(gold);
    out.corpus.pairs.push_back(std::move(pair));
  }
  out.corpus.validate();

  out.truth = ModelParams::initial(ClusterInventory::from_corpus(out.corpus, 1), DistortionParams{},
                                   ModelVariant::kDeficient);
  for (int w = 0; w < cfg.vocab_size; ++w) {
    if (counts[w] == 0) continue;
    const int f = out.truth.inventory.clusters_of(vocab[w].spelling).front();
    out.truth.u[f] = static_cast<double>(counts[w]) / total_words;
    out.truth.prototypes[f] = FeatureSequence(vocab[w].frames, d, cfg.frame_shift_ms);
  }
  return out;
}

}  // namespace spanalign
