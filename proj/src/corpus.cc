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

#include "spanalign/corpus.h"

#include <cmath>
#include <sstream>
#include <unordered_set>

#include "spanalign/segmentation.h"
#include "spanalign/text_io.h"

namespace spanalign {

namespace fs = std::filesystem;

FeatureSequence::FeatureSequence(std::vector<double> data, std::size_t dim,
                                 double frame_shift_ms)
    : data_(std::move(data)), dim_(dim), frame_shift_ms_(frame_shift_ms) {
  if (dim_ == 0) throw Error("feature dimension must be positive");
  if (data_.empty()) throw Error("feature sequence must have at least one frame");
  if (data_.size() % dim_ != 0)
    throw Error("feature data size " + std::to_string(data_.size()) +
                " is not a multiple of dimension " + std::to_string(dim_));
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i]))
      throw Error("non-finite feature value at frame " +
                  std::to_string(i / dim_) + ", dim " + std::to_string(i % dim_));
  }
  if (!(frame_shift_ms_ > 0.0)) throw Error("frame shift must be positive");
}

FeatureSequence::FeatureSequence(FrameView view, double frame_shift_ms)
    : FeatureSequence(std::vector<double>(view.data().begin(), view.data().end()),
                      view.dim(), frame_shift_ms) {}

int count_scalars(const std::string& utf8) {
  int count = 0;
  std::size_t i = 0;
  while (i < utf8.size()) {
    auto c = static_cast<unsigned char>(utf8[i]);
    std::size_t len = 0;
    if (c < 0x80) len = 1;
    else if ((c & 0xE0) == 0xC0) len = 2;
    else if ((c & 0xF0) == 0xE0) len = 3;
    else if ((c & 0xF8) == 0xF0) len = 4;
    else throw Error("malformed UTF-8 in token '" + utf8 + "'");
    if (i + len > utf8.size()) throw Error("truncated UTF-8 in token '" + utf8 + "'");
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(utf8[i + k]) & 0xC0) != 0x80)
        throw Error("malformed UTF-8 in token '" + utf8 + "'");
    }
    i += len;
    ++count;
  }
  return count;
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

SentencePair make_sentence_pair(std::string utt_id, FeatureSequence source,
                                std::vector<std::string> words) {
  if (words.empty()) throw Error(utt_id + ": empty sentence");
  if (source.empty()) throw Error(utt_id + ": empty feature sequence");
  SentencePair pair;
  pair.utt_id = std::move(utt_id);
  pair.source = std::move(source);
  pair.char_lengths.reserve(words.size());
  for (const auto& w : words) {
    int n = count_scalars(w);
    if (n == 0) throw Error(pair.utt_id + ": empty token");
    pair.char_lengths.push_back(n);
  }
  pair.target_words = std::move(words);
  return pair;
}

FeatureSequence read_feature_file(const fs::path& path) {
  if (!fs::exists(path)) throw Error("missing feature file " + path.string());
  auto lines = read_lines(path);
  if (lines.empty()) throw Error(path.string() + ":1: missing header");
  auto header = tokenize(lines[0]);
  std::optional<long long> rows, dim;
  if (header.size() == 2) {
    rows = parse_int(header[0]);
    dim = parse_int(header[1]);
  }
  if (!rows || !dim || *rows < 1 || *dim < 1)
    throw Error(path.string() + ":1: header must be \"m d\" with m, d >= 1");

  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(*rows * *dim));
  long long seen = 0;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    auto toks = tokenize(lines[ln]);
    if (toks.empty()) continue;
    ++seen;
    if (seen > *rows) continue;
    if (static_cast<long long>(toks.size()) != *dim)
      throw Error(path.string() + ":" + std::to_string(ln + 1) + ": expected " +
                  std::to_string(*dim) + " values, found " +
                  std::to_string(toks.size()));
    for (const auto& t : toks) {
      auto v = parse_double(t);
      if (!v) throw Error(path.string() + ":" + std::to_string(ln + 1) +
                          ": cannot parse '" + t + "'");
      if (!std::isfinite(*v))
        throw Error(path.string() + ":" + std::to_string(ln + 1) +
                    ": non-finite feature value '" + t + "'");
      data.push_back(*v);
    }
  }
  if (seen != *rows)
    throw Error(path.string() + ": header declares " + std::to_string(*rows) +
                " rows but file contains " + std::to_string(seen));
  return FeatureSequence(std::move(data), static_cast<std::size_t>(*dim));
}

void write_feature_file(const fs::path& path, const FeatureSequence& fs) {
  std::string out = std::to_string(fs.frames()) + " " + std::to_string(fs.dim()) + "\n";
  for (std::size_t i = 0; i < fs.frames(); ++i) {
    auto row = fs.frame(i);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out += ' ';
      out += format_double(row[k]);
    }
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::vector<std::string> read_manifest(const fs::path& path) {
  if (!fs::exists(path)) throw Error("missing manifest " + path.string());
  std::vector<std::string> ids;
  auto lines = read_lines(path);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    auto toks = tokenize(lines[ln]);
    if (toks.empty()) continue;
    if (toks.size() != 1)
      throw Error(path.string() + ":" + std::to_string(ln + 1) +
                  ": expected a single utterance id");
    ids.push_back(toks[0]);
  }
  return ids;
}

std::map<std::string, GoldAlignment> read_gold_file(const fs::path& path) {
  if (!fs::exists(path)) throw Error("missing gold file " + path.string());
  std::map<std::string, GoldAlignment> gold;
  auto lines = read_lines(path);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    auto toks = tokenize(lines[ln]);
    if (toks.empty()) continue;
    auto where = path.string() + ":" + std::to_string(ln + 1);
    if (toks.size() != 4)
      throw Error(where + ": expected utt_id, word_index, start_frame, end_frame");
    auto word = parse_int(toks[1]);
    auto start = parse_int(toks[2]);
    auto end = parse_int(toks[3]);
    if (!word || !start || !end || *word < 0 || *start < 0 || *end <= *start)
      throw Error(where + ": invalid link range");
    auto& g = gold[toks[0]];
    g.utt_id = toks[0];
    for (long long f = *start; f < *end; ++f)
      g.links.emplace(static_cast<int>(*word), static_cast<int>(f));
  }
  return gold;
}

void write_gold_file(const fs::path& path, const std::vector<GoldAlignment>& gold) {
  std::string out;
  for (const auto& g : gold) {
    // Collapse each word's frames into maximal contiguous runs.
    auto it = g.links.begin();
    while (it != g.links.end()) {
      int word = it->first;
      int start = it->second;
      int end = start + 1;
      ++it;
      while (it != g.links.end() && it->first == word && it->second == end) {
        ++end;
        ++it;
      }
      out += g.utt_id + "\t" + std::to_string(word) + "\t" + std::to_string(start) +
             "\t" + std::to_string(end) + "\n";
    }
  }
  write_file_atomic(path, out);
}

void Corpus::validate() const {
  std::unordered_set<std::string> ids;
  std::map<std::string, const SentencePair*> by_id;
  for (const auto& p : pairs) {
    if (!ids.insert(p.utt_id).second) throw Error("duplicate utterance id " + p.utt_id);
    by_id[p.utt_id] = &p;
    if (p.target_words.empty()) throw Error(p.utt_id + ": empty sentence");
    if (p.char_lengths.size() != p.target_words.size())
      throw Error(p.utt_id + ": char_lengths do not match words");
    for (std::size_t i = 0; i < p.target_words.size(); ++i) {
      if (p.char_lengths[i] != count_scalars(p.target_words[i]))
        throw Error(p.utt_id + ": wrong character length for '" + p.target_words[i] + "'");
    }
    if (p.energy_track && p.energy_track->size() != p.num_frames())
      throw Error(p.utt_id + ": energy track has " +
                  std::to_string(p.energy_track->size()) + " values for " +
                  std::to_string(p.num_frames()) + " frames");
    if (p.energy_track) {
      for (double e : *p.energy_track)
        if (!(e >= 0.0) || !std::isfinite(e))
          throw Error(p.utt_id + ": energy values must be finite and non-negative");
    }
    if (p.boundaries) {
      for (int b : *p.boundaries)
        if (b < 1 || static_cast<std::size_t>(b) > p.num_frames())
          throw Error(p.utt_id + ": boundary " + std::to_string(b) + " out of range");
    }
  }
  if (!gold) return;
  for (const auto& [id, g] : *gold) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error("gold alignment for unknown utterance " + id);
    int l = static_cast<int>(it->second->num_words());
    int m = static_cast<int>(it->second->num_frames());
    for (auto [w, f] : g.links) {
      if (w < 0 || w >= l || f < 0 || f >= m)
        throw Error(id + ": gold link (" + std::to_string(w) + ", " +
                    std::to_string(f) + ") out of range");
    }
  }
}

namespace {

std::vector<double> read_energy_file(const fs::path& path, const std::string& utt_id) {
  std::vector<double> energy;
  auto lines = read_lines(path);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    auto toks = tokenize(lines[ln]);
    if (toks.empty()) continue;
    auto v = toks.size() == 1 ? parse_double(toks[0]) : std::nullopt;
    if (!v || !std::isfinite(*v) || *v < 0.0)
      throw Error(utt_id + ": " + path.string() + ":" + std::to_string(ln + 1) +
                  ": expected one non-negative value");
    energy.push_back(*v);
  }
  return energy;
}

}  // namespace

Corpus load_corpus(const fs::path& manifest_path, const fs::path& feature_dir,
                   const fs::path& translations_path,
                   const std::optional<fs::path>& gold_path) {
  auto ids = read_manifest(manifest_path);
  if (!fs::exists(translations_path))
    throw Error("missing translations file " + translations_path.string());
  auto sentences = read_lines(translations_path);
  // A trailing blank line past the last utterance is tolerated.
  while (sentences.size() > ids.size() && tokenize(sentences.back()).empty())
    sentences.pop_back();
  if (sentences.size() != ids.size())
    throw Error(translations_path.string() + ": " + std::to_string(sentences.size()) +
                " sentences for " + std::to_string(ids.size()) + " manifest entries");

  Corpus corpus;
  corpus.pairs.reserve(ids.size());
  for (std::size_t n = 0; n < ids.size(); ++n) {
    const auto& id = ids[n];
    auto words = tokenize(sentences[n]);
    if (words.empty())
      throw Error(id + ": " + translations_path.string() + ":" + std::to_string(n + 1) +
                  ": empty sentence");
    FeatureSequence feats;
    try {
      feats = read_feature_file(feature_dir / (id + ".feat"));
    } catch (const Error& e) {
      throw Error(id + ": " + e.what());
    }
    auto pair = make_sentence_pair(id, std::move(feats), std::move(words));
    auto energy_path = feature_dir / (id + ".energy");
    if (fs::exists(energy_path)) pair.energy_track = read_energy_file(energy_path, id);
    auto bounds_path = feature_dir / (id + ".bounds");
    if (fs::exists(bounds_path)) {
      try {
        pair.boundaries = read_boundary_file(bounds_path);
      } catch (const Error& e) {
        throw Error(id + ": " + e.what());
      }
    }
    corpus.pairs.push_back(std::move(pair));
  }
  if (gold_path) corpus.gold = read_gold_file(*gold_path);
  corpus.validate();
  return corpus;
}

CorpusFiles write_corpus(const Corpus& corpus, const fs::path& dir) {
  CorpusFiles files;
  files.manifest = dir / "manifest.txt";
  files.feature_dir = dir / "feats";
  files.translations = dir / "translations.txt";
  fs::create_directories(files.feature_dir);

  std::string manifest, translations;
  for (const auto& p : corpus.pairs) {
    manifest += p.utt_id + "\n";
    for (std::size_t i = 0; i < p.target_words.size(); ++i) {
      if (i) translations += ' ';
      translations += p.target_words[i];
    }
    translations += '\n';
    write_feature_file(files.feature_dir / (p.utt_id + ".feat"), p.source);
    if (p.energy_track) {
      std::string e;
      for (double v : *p.energy_track) e += format_double(v) + "\n";
      write_file_atomic(files.feature_dir / (p.utt_id + ".energy"), e);
    }
    if (p.boundaries) write_boundary_file(files.feature_dir / (p.utt_id + ".bounds"), *p.boundaries);
  }
  write_file_atomic(files.manifest, manifest);
  write_file_atomic(files.translations, translations);
  if (corpus.gold) {
    files.gold = dir / "gold.tsv";
    std::vector<GoldAlignment> ordered;
    for (const auto& p : corpus.pairs) {
      auto it = corpus.gold->find(p.utt_id);
      if (it != corpus.gold->end()) ordered.push_back(it->second);
    }
    write_gold_file(*files.gold, ordered);
  }
  return files;
}

FeatureSequence normalize_utterance(const FeatureSequence& fs) {
  const std::size_t m = fs.frames();
  const std::size_t d = fs.dim();
  std::vector<double> out = fs.data();
  for (std::size_t k = 0; k < d; ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) mean += fs.at(i, k);
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double c = fs.at(i, k) - mean;
      var += c * c;
    }
    var /= static_cast<double>(m);
    double scale = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
    for (std::size_t i = 0; i < m; ++i) out[i * d + k] = (fs.at(i, k) - mean) * scale;
  }
  return FeatureSequence(std::move(out), d, fs.frame_shift_ms());
}

Corpus normalize_corpus(const Corpus& corpus) {
  Corpus out = corpus;
  for (auto& p : out.pairs) p.source = normalize_utterance(p.source);
  return out;
}

}  // namespace spanalign
