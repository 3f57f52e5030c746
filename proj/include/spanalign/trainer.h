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

// Hard (Viterbi) EM for the span alignment model.
//
// Initialization draws a random cluster per word occurrence and puts each
// span at the distortion model's mode, then runs one M-step. Each iteration
// is an E-step (independent per-word argmax over owned live clusters and
// candidate spans) followed by an M-step (cluster prior by relative
// frequency, prototypes by DBA over the assigned segments).

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "spanalign/corpus.h"
#include "spanalign/model.h"
#include "spanalign/segmentation.h"

namespace spanalign {

struct TrainConfig {
  int iterations = 3;
  std::uint64_t seed = 1;
  int k = 2;
  int dba_iterations = 3;
  ModelVariant variant = ModelVariant::kDeficient;
  DistortionParams distortion;
  SegmentationConfig segmentation;
  /// Per-utterance zero-mean unit-variance features before training.
  bool normalize = true;
  /// Worker cap; <= 0 means all cores. Results do not depend on it.
  int threads = 0;

  void validate() const;
};

/// Features, candidate spans and word widths the trainer works on.
struct PreparedCorpus {
  Corpus corpus;
  std::vector<CandidateSpans> candidates;
  std::vector<std::vector<int>> mu;
};

struct IterationRecord {
  int iteration = 0;
  double total_log_score = 0.0;
  double seconds = 0.0;
};

struct TrainState {
  ModelParams params;
  std::vector<Alignment> assignments;  // one per utterance, corpus order
  std::vector<IterationRecord> iteration_log;
};

/// Normalizes (if configured) and computes candidates and widths. Throws
/// Error naming the utterance when a sentence cannot be aligned.
PreparedCorpus prepare_corpus(const Corpus& corpus, const TrainConfig& config);

TrainState initialize(const PreparedCorpus& data, const TrainConfig& config);

/// Words whose every score is -inf keep their entry from `previous`.
std::vector<Alignment> e_step(const PreparedCorpus& data, const ModelParams& params,
                              const std::vector<Alignment>& previous, int threads = 1);

/// Relative-frequency prior and DBA prototypes. Clusters without assignments
/// get u = 0 and keep the prototype from `previous`.
ModelParams m_step(const PreparedCorpus& data, const std::vector<Alignment>& assignments,
                   const ModelParams& previous, const TrainConfig& config);

/// Sum of the word scores stored in the assignments.
double total_log_score(const std::vector<Alignment>& assignments);

using IterationCallback = std::function<void(const TrainState&)>;

/// initialize, then `iterations` rounds of E-step and M-step. The callback
/// runs after every round.
TrainState train(const PreparedCorpus& data, const TrainConfig& config,
                 const IterationCallback& on_iteration = {});

}  // namespace spanalign
