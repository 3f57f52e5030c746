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

// Frame-word link evaluation and the proportional-length baseline.

#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "spanalign/corpus.h"
#include "spanalign/model.h"

namespace spanalign {

using LinkSet = std::set<std::pair<int, int>>;  // (word_index, frame_index), 0-based

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
};

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
  std::map<std::string, Prf> per_utterance;
  std::map<std::string, double> per_word_type;
};

/// Links (i-1, j-1) for every word i and frame j in its inclusive span.
LinkSet alignment_to_links(const Alignment& alignment);

/// Precision, recall and F from link counts, with the empty-set conventions:
/// both empty scores 1, exactly one empty scores 0.
Prf prf_from_counts(std::size_t shared, std::size_t predicted, std::size_t gold);

/// Single-utterance score.
Prf score(const LinkSet& predicted, const LinkSet& gold);

/// One utterance's predicted and gold links plus the words owning each index.
struct EvalItem {
  std::string utt_id;
  LinkSet predicted;
  LinkSet gold;
  std::vector<std::string> words;
};

/// Corpus metrics micro-averaged over pooled links; the per-word-type F pools
/// links by the type of the word that owns them.
EvalReport evaluate(const std::vector<EvalItem>& items);

/// Builds the items for `alignments` (corpus order) against the corpus gold.
std::vector<EvalItem> eval_items(const Corpus& corpus, const std::vector<Alignment>& alignments);

/// Monotone partition of [1, m] with widths allocate_mu(char_lengths, m).
/// Clusters are left at -1. Throws Error if m < l.
Alignment naive_baseline(const SentencePair& pair);

/// "key value" lines for the corpus metrics, then an utterance table.
std::string format_report(const EvalReport& report);
/// Tab-separated: scope, id, precision, recall, f_score.
std::string format_report_tsv(const EvalReport& report);

/// Alignment TSV: utt_id, word_index, word, cluster_id, start_frame,
/// end_frame, log_score; frames 0-indexed with exclusive end.
std::string format_alignments(const Corpus& corpus, const std::vector<Alignment>& alignments);

struct AlignmentRow {
  std::string utt_id;
  int word_index = 0;
  std::string word;
  int cluster = -1;
  int start_frame = 0;
  int end_frame = 0;
  double log_score = 0.0;
};

std::vector<AlignmentRow> read_alignment_file(const std::filesystem::path& path);

}  // namespace spanalign
