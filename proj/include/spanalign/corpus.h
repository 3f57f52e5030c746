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

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spanalign {

/// Base class of every error raised by the library. Messages carry enough
/// context (utterance id, file, line) to locate the offending input.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Read-only view of a row-major block of frames. Cheap to copy; the
/// referenced storage must outlive the view.
class FrameView {
 public:
  FrameView() = default;
  FrameView(std::span<const double> data, std::size_t dim)
      : data_(data), dim_(dim) {}

  std::size_t frames() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  bool empty() const { return data_.empty(); }
  std::span<const double> frame(std::size_t i) const {
    return data_.subspan(i * dim_, dim_);
  }
  std::span<const double> data() const { return data_; }

  /// Frames [first, first + count), 0-indexed.
  FrameView slice(std::size_t first, std::size_t count) const {
    return {data_.subspan(first * dim_, count * dim_), dim_};
  }

 private:
  std::span<const double> data_;
  std::size_t dim_ = 0;
};

/// m frames of d real-valued features for one utterance.
class FeatureSequence {
 public:
  FeatureSequence() = default;
  /// Throws Error unless data.size() is a positive multiple of dim and every
  /// entry is finite.
  FeatureSequence(std::vector<double> data, std::size_t dim,
                  double frame_shift_ms = 10.0);
  /// Copies a view into owned storage.
  explicit FeatureSequence(FrameView view, double frame_shift_ms = 10.0);

  std::size_t frames() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  double frame_shift_ms() const { return frame_shift_ms_; }
  bool empty() const { return data_.empty(); }

  std::span<const double> frame(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * dim_, dim_);
  }
  std::span<double> frame(std::size_t i) {
    return std::span<double>(data_).subspan(i * dim_, dim_);
  }
  double at(std::size_t i, std::size_t k) const { return data_[i * dim_ + k]; }
  const std::vector<double>& data() const { return data_; }

  FrameView view() const { return {data_, dim_}; }
  operator FrameView() const { return view(); }  // NOLINT

  /// Inclusive 1-indexed frame range [a, b], the convention used for spans.
  FrameView span(std::size_t a, std::size_t b) const {
    return view().slice(a - 1, b - a + 1);
  }

  bool operator==(const FeatureSequence& other) const = default;

 private:
  std::vector<double> data_;
  std::size_t dim_ = 0;
  double frame_shift_ms_ = 10.0;
};

struct SentencePair {
  std::string utt_id;
  FeatureSequence source;
  std::vector<std::string> target_words;
  std::vector<int> char_lengths;
  std::optional<std::vector<double>> energy_track;
  /// Externally supplied candidate boundaries, 1-indexed frame numbers.
  std::optional<std::vector<int>> boundaries;

  std::size_t num_frames() const { return source.frames(); }
  std::size_t num_words() const { return target_words.size(); }

  bool operator==(const SentencePair& other) const = default;
};

/// Gold frame-word links for one utterance. Both indices are 0-based.
struct GoldAlignment {
  std::string utt_id;
  std::set<std::pair<int, int>> links;  // (word_index, frame_index)

  bool operator==(const GoldAlignment& other) const = default;
};

struct Corpus {
  std::vector<SentencePair> pairs;
  std::optional<std::map<std::string, GoldAlignment>> gold;

  bool operator==(const Corpus& other) const = default;

  /// Throws Error on duplicate utt_ids, gold entries for unknown utterances
  /// or out-of-range links.
  void validate() const;
};

/// Number of Unicode scalar values in a UTF-8 string. Throws Error on
/// malformed UTF-8.
int count_scalars(const std::string& utf8);

/// Splits on ASCII whitespace.
std::vector<std::string> tokenize(const std::string& line);

/// Builds a validated SentencePair; char_lengths are computed from the tokens.
SentencePair make_sentence_pair(std::string utt_id, FeatureSequence source,
                                std::vector<std::string> words);

FeatureSequence read_feature_file(const std::filesystem::path& path);
void write_feature_file(const std::filesystem::path& path,
                        const FeatureSequence& fs);

/// Gold file: "utt_id<TAB>word_index<TAB>start_frame<TAB>end_frame", frames
/// 0-indexed with exclusive end.
std::map<std::string, GoldAlignment> read_gold_file(
    const std::filesystem::path& path);
void write_gold_file(const std::filesystem::path& path,
                     const std::vector<GoldAlignment>& gold);

std::vector<std::string> read_manifest(const std::filesystem::path& path);

/// Loads manifest, `<feature_dir>/<utt_id>.feat` plus optional `.energy` and
/// `.bounds` sidecars, translations and optional gold.
Corpus load_corpus(const std::filesystem::path& manifest_path,
                   const std::filesystem::path& feature_dir,
                   const std::filesystem::path& translations_path,
                   const std::optional<std::filesystem::path>& gold_path = {});

/// Paths written by write_corpus.
struct CorpusFiles {
  std::filesystem::path manifest;
  std::filesystem::path feature_dir;
  std::filesystem::path translations;
  std::optional<std::filesystem::path> gold;
};

/// Writes the on-disk layout that load_corpus reads back losslessly.
CorpusFiles write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

/// Per dimension: zero mean, unit population variance over the utterance's
/// frames. Constant dimensions are centred only.
FeatureSequence normalize_utterance(const FeatureSequence& fs);

/// Copy of the corpus with every utterance normalized.
Corpus normalize_corpus(const Corpus& corpus);

}  // namespace spanalign
