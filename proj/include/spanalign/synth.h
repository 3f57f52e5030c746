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

// Synthetic parallel corpora sampled from the alignment model's own story:
// every word type owns one prototype built from "phone" segments, an
// utterance concatenates the prototypes of its words, distinct unless
// repeat_words is set, with adjacent words swapped with reorder_prob. Words
// are optionally separated by low-energy silences, and Gaussian noise is
// added to every frame.

#pragma once

#include <cstdint>

#include "spanalign/corpus.h"
#include "spanalign/model.h"

namespace spanalign {

struct SynthConfig {
  int vocab_size = 20;
  int num_sentences = 50;
  int min_words = 1;
  int max_words = 4;
  int min_proto_len = 8;
  int max_proto_len = 20;
  int min_phone_len = 2;
  int max_phone_len = 5;
  int num_phones = 24;
  int feature_dim = 39;
  /// Spread of frames around their phone mean inside a prototype.
  double phone_jitter = 0.6;
  double noise_std = 0.0;
  double reorder_prob = 0.0;
  /// Allow a word type to occur more than once in a sentence.
  bool repeat_words = false;
  /// Probability of a pause at each word boundary, utterance edges included.
  double silence_prob = 1.0;
  int min_silence_len = 6;
  int max_silence_len = 10;
  /// Prototype frames per character of the word's spelling.
  double frames_per_char = 3.0;
  double frame_shift_ms = 10.0;
  /// Write phone boundaries as the external boundary sidecar.
  bool emit_boundaries = true;
  bool emit_energy = true;

  void validate() const;
};

struct SynthOutput {
  Corpus corpus;
  /// One cluster per word type holding its true prototype; u is the word
  /// frequency.
  ModelParams truth;
};

/// Deterministic for a fixed (config, seed). Throws Error on a degenerate
/// config.
SynthOutput synth_generate(const SynthConfig& config, std::uint64_t seed);

}  // namespace spanalign
