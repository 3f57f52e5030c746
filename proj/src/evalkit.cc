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

#include "spanalign/evalkit.h"

#include <algorithm>
#include <cmath>

#include "spanalign/distortion.h"
#include "spanalign/text_io.h"

namespace spanalign {

LinkSet alignment_to_links(const Alignment& alignment) {
  LinkSet links;
  for (std::size_t i = 0; i < alignment.words.size(); ++i) {
    const auto& span = alignment.words[i].span;
    for (int j = span.a; j <= span.b; ++j) links.emplace(static_cast<int>(i), j - 1);
  }
  return links;
}

Prf prf_from_counts(std::size_t shared, std::size_t predicted, std::size_t gold) {
  Prf out;
  if (predicted == 0 && gold == 0) return {1.0, 1.0, 1.0};
  out.precision = predicted == 0 ? 0.0 : static_cast<double>(shared) / predicted;
  out.recall = gold == 0 ? 0.0 : static_cast<double>(shared) / gold;
  const double sum = out.precision + out.recall;
  out.f_score = sum > 0.0 ? 2.0 * out.precision * out.recall / sum : 0.0;
  return out;
}

namespace {

std::size_t intersection_size(const LinkSet& a, const LinkSet& b) {
  std::size_t n = 0;
  auto x = a.begin();
  auto y = b.begin();
  while (x != a.end() && y != b.end()) {
    if (*x < *y) {
      ++x;
    } else if (*y < *x) {
      ++y;
    } else {
      ++n;
      ++x;
      ++y;
    }
  }
  return n;
}

}  // namespace

Prf score(const LinkSet& predicted, const LinkSet& gold) {
  return prf_from_counts(intersection_size(predicted, gold), predicted.size(), gold.size());
}

EvalReport evaluate(const std::vector<EvalItem>& items) {
  EvalReport report;
  std::size_t shared = 0, predicted = 0, gold = 0;
  struct Counts {
    std::size_t shared = 0, predicted = 0, gold = 0;
  };
  std::map<std::string, Counts> by_type;
  for (const auto& item : items) {
    const std::size_t s = intersection_size(item.predicted, item.gold);
    shared += s;
    predicted += item.predicted.size();
    gold += item.gold.size();
    report.per_utterance[item.utt_id] = prf_from_counts(s, item.predicted.size(), item.gold.size());

    auto type_of = [&](int word) -> const std::string& {
      if (word < 0 || static_cast<std::size_t>(word) >= item.words.size())
        throw Error(item.utt_id + ": link to word " + std::to_string(word) + " outside sentence");
      return item.words[static_cast<std::size_t>(word)];
    };
    for (const auto& w : item.words) by_type[w];
    for (const auto& link : item.predicted) {
      auto& c = by_type[type_of(link.first)];
      ++c.predicted;
      if (item.gold.count(link)) ++c.shared;
    }
    for (const auto& link : item.gold) ++by_type[type_of(link.first)].gold;
  }
  auto total = prf_from_counts(shared, predicted, gold);
  report.precision = total.precision;
  report.recall = total.recall;
  report.f_score = total.f_score;
  for (const auto& [type, c] : by_type)
    report.per_word_type[type] = prf_from_counts(c.shared, c.predicted, c.gold).f_score;
  return report;
}

std::vector<EvalItem> eval_items(const Corpus& corpus, const std::vector<Alignment>& alignments) {
  if (!corpus.gold) throw Error("corpus has no gold alignments");
  if (alignments.size() != corpus.pairs.size())
    throw Error("alignments do not cover the corpus");
  std::vector<EvalItem> items;
  for (std::size_t u = 0; u < corpus.pairs.size(); ++u) {
    const auto& pair = corpus.pairs[u];
    auto it = corpus.gold->find(pair.utt_id);
    if (it == corpus.gold->end()) continue;
    items.push_back({pair.utt_id, alignment_to_links(alignments[u]), it->second.links,
                     pair.target_words});
  }
  return items;
}

Alignment naive_baseline(const SentencePair& pair) {
  const int m = static_cast<int>(pair.num_frames());
  auto alloc = allocate_mu(pair.char_lengths, m);
  Alignment out;
  int next = 1;
  for (int width : alloc.mu) {
    out.words.push_back({-1, {next, next + width - 1}, 0.0});
    next += width;
  }
  return out;
}

std::string format_report(const EvalReport& report) {
  std::string out;
  out += "precision " + format_double(report.precision) + "\n";
  out += "recall " + format_double(report.recall) + "\n";
  out += "f_score " + format_double(report.f_score) + "\n";
  out += "\n# utt_id precision recall f_score\n";
  for (const auto& [id, prf] : report.per_utterance)
    out += id + " " + format_double(prf.precision) + " " + format_double(prf.recall) + " " +
           format_double(prf.f_score) + "\n";
  return out;
}

std::string format_report_tsv(const EvalReport& report) {
  std::string out = "scope\tid\tprecision\trecall\tf_score\n";
  out += "corpus\t*\t" + format_double(report.precision) + "\t" + format_double(report.recall) +
         "\t" + format_double(report.f_score) + "\n";
  for (const auto& [id, prf] : report.per_utterance)
    out += "utterance\t" + id + "\t" + format_double(prf.precision) + "\t" +
           format_double(prf.recall) + "\t" + format_double(prf.f_score) + "\n";
  for (const auto& [type, f] : report.per_word_type)
    out += "word_type\t" + type + "\t\t\t" + format_double(f) + "\n";
  return out;
}

std::string format_alignments(const Corpus& corpus, const std::vector<Alignment>& alignments) {
  if (alignments.size() != corpus.pairs.size()) throw Error("alignments do not cover the corpus");
  std::string out = "utt_id\tword_index\tword\tcluster_id\tstart_frame\tend_frame\tlog_score\n";
  for (std::size_t u = 0; u < corpus.pairs.size(); ++u) {
    const auto& pair = corpus.pairs[u];
    for (std::size_t i = 0; i < alignments[u].words.size(); ++i) {
      const auto& w = alignments[u].words[i];
      out += pair.utt_id + "\t" + std::to_string(i) + "\t" + pair.target_words.at(i) + "\t" +
             std::to_string(w.cluster) + "\t" + std::to_string(w.span.a - 1) + "\t" +
             std::to_string(w.span.b) + "\t" + format_double(w.log_score) + "\n";
    }
  }
  return out;
}

std::vector<AlignmentRow> read_alignment_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error("missing alignment file " + path.string());
  std::vector<AlignmentRow> rows;
  auto lines = read_lines(path);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (lines[ln].empty() || lines[ln].rfind("utt_id\t", 0) == 0) continue;
    std::vector<std::string> cols;
    std::size_t pos = 0;
    for (;;) {
      auto tab = lines[ln].find('\t', pos);
      cols.push_back(lines[ln].substr(pos, tab - pos));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    auto where = path.string() + ":" + std::to_string(ln + 1);
    if (cols.size() != 7) throw Error(where + ": expected 7 tab-separated columns");
    AlignmentRow row;
    row.utt_id = cols[0];
    row.word = cols[2];
    auto wi = parse_int(cols[1]);
    auto cl = parse_int(cols[3]);
    auto s = parse_int(cols[4]);
    auto e = parse_int(cols[5]);
    auto sc = parse_double(cols[6]);
    if (!wi || !cl || !s || !e || !sc || *wi < 0 || *s < 0 || *e <= *s)
      throw Error(where + ": malformed alignment row");
    row.word_index = static_cast<int>(*wi);
    row.cluster = static_cast<int>(*cl);
    row.start_frame = static_cast<int>(*s);
    row.end_frame = static_cast<int>(*e);
    row.log_score = *sc;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace spanalign
