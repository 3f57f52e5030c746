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


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>

#include "oracles.h"
#include "spanalign/corpus.h"
#include "spanalign/synth.h"
#include "spanalign/text_io.h"

using namespace spanalign;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p);
  out << s;
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal corpus loads with character lengths") {
  auto dir = oracle::scratch_dir("corpus_min");
  fs::create_directories(dir / "feats");
  write_text(dir / "manifest.txt", "u1\n");
  write_text(dir / "feats" / "u1.feat", "3 2\n0 1\n2 3\n4 5\n");
  write_text(dir / "tr.txt", "il pane\n");
  auto c = load_corpus(dir / "manifest.txt", dir / "feats", dir / "tr.txt");
  REQUIRE(c.pairs.size() == 1);
  const auto& p = c.pairs[0];
  CHECK(p.num_frames() == 3);
  CHECK(p.source.dim() == 2);
  CHECK(p.num_words() == 2);
  CHECK(p.char_lengths == std::vector<int>{2, 4});
  CHECK(p.source.at(2, 1) == 5.0);
  CHECK_FALSE(p.energy_track);
  CHECK_FALSE(c.gold);
}

TEST_CASE("empty sentence is rejected with its utterance") {
  auto dir = oracle::scratch_dir("corpus_empty");
  fs::create_directories(dir / "feats");
  write_text(dir / "manifest.txt", "u1\nu2\n");
  write_text(dir / "feats" / "u1.feat", "1 1\n0\n");
  write_text(dir / "feats" / "u2.feat", "1 1\n0\n");
  write_text(dir / "tr.txt", "ciao\n\n");
  auto msg = error_of([&] { load_corpus(dir / "manifest.txt", dir / "feats", dir / "tr.txt"); });
  CHECK(msg.find("empty sentence") != std::string::npos);
  CHECK(msg.find("u2") != std::string::npos);
  CHECK(msg.find(":2") != std::string::npos);
}

TEST_CASE("short feature file names the file and both row counts") {
  auto dir = oracle::scratch_dir("corpus_rows");
  write_text(dir / "x.feat", "3 2\n0 1\n2 3\n");
  auto msg = error_of([&] { read_feature_file(dir / "x.feat"); });
  CHECK(msg.find("x.feat") != std::string::npos);
  CHECK(msg.find('3') != std::string::npos);
  CHECK(msg.find('2') != std::string::npos);
}

TEST_CASE("malformed feature rows are rejected") {
  auto dir = oracle::scratch_dir("corpus_bad");
  write_text(dir / "nan.feat", "1 2\n0 nan\n");
  CHECK_THROWS_AS(read_feature_file(dir / "nan.feat"), Error);
  write_text(dir / "wide.feat", "1 2\n0 1 2\n");
  CHECK_THROWS_AS(read_feature_file(dir / "wide.feat"), Error);
  write_text(dir / "word.feat", "1 1\nabc\n");
  CHECK_THROWS_AS(read_feature_file(dir / "word.feat"), Error);
  CHECK_THROWS_AS(read_feature_file(dir / "missing.feat"), Error);
}

TEST_CASE("missing feature file for a manifest entry") {
  auto dir = oracle::scratch_dir("corpus_missing");
  fs::create_directories(dir / "feats");
  write_text(dir / "manifest.txt", "ghost\n");
  write_text(dir / "tr.txt", "x\n");
  auto msg = error_of([&] { load_corpus(dir / "manifest.txt", dir / "feats", dir / "tr.txt"); });
  CHECK(msg.find("ghost") != std::string::npos);
}

TEST_CASE("FeatureSequence invariants") {
  CHECK_THROWS_AS(FeatureSequence(std::vector<double>{}, 2), Error);
  CHECK_THROWS_AS(FeatureSequence({1, 2, 3}, 2), Error);
  CHECK_THROWS_AS(FeatureSequence({1.0, std::nan("")}, 1), Error);
  CHECK_THROWS_AS(FeatureSequence({1.0}, 0), Error);
  FeatureSequence fs({1, 2, 3, 4, 5, 6}, 2);
  auto v = fs.span(2, 3);
  CHECK(v.frames() == 2);
  CHECK(v.frame(0)[0] == 3.0);
}

TEST_CASE("character lengths count Unicode scalar values, punctuation included") {
  CHECK(count_scalars("pane") == 4);
  CHECK(count_scalars("caff\xc3\xa8") == 5);
  CHECK(count_scalars("\xe6\x97\xa5\xe6\x9c\xac") == 2);
  CHECK(count_scalars("ciao,") == 5);
  CHECK_THROWS_AS(count_scalars("\xff"), Error);
  auto p = make_sentence_pair("u", FeatureSequence({0, 0, 0}, 1), tokenize("  pi\xc3\xb9  tardi! "));
  CHECK(p.target_words == std::vector<std::string>{"pi\xc3\xb9", "tardi!"});
  CHECK(p.char_lengths == std::vector<int>{3, 6});
}

TEST_CASE("normalize_utterance") {
  SUBCASE("single dimension") {
    auto out = normalize_utterance(FeatureSequence({1, 3}, 1));
    CHECK(out.at(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(out.at(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("constant dimension is centered only") {
    auto out = normalize_utterance(FeatureSequence({5, 5, 5}, 1));
    for (std::size_t i = 0; i < 3; ++i) CHECK(out.at(i, 0) == 0.0);
  }
  SUBCASE("idempotent on standardized input") {
    auto once = normalize_utterance(FeatureSequence({1, 7, 2, 3, 9, 4, 0, 1, 6, 5}, 2));
    auto twice = normalize_utterance(once);
    for (std::size_t k = 0; k < once.data().size(); ++k)
      CHECK(std::abs(once.data()[k] - twice.data()[k]) < 1e-9);
  }
  SUBCASE("zero mean and unit variance per dimension") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      auto x = oracle::random_sequence(rng, 2 + trial, 4, 3.0);
      auto y = normalize_utterance(x);
      for (std::size_t k = 0; k < 4; ++k) {
        double mean = 0, var = 0;
        for (std::size_t i = 0; i < y.frames(); ++i) mean += y.at(i, k);
        mean /= static_cast<double>(y.frames());
        for (std::size_t i = 0; i < y.frames(); ++i) var += (y.at(i, k) - mean) * (y.at(i, k) - mean);
        var /= static_cast<double>(y.frames());
        CHECK(std::abs(mean) < 1e-9);
        CHECK(std::abs(var - 1.0) < 1e-6);
      }
    }
  }
}

TEST_CASE("write_corpus then load_corpus round-trips") {
  SynthConfig cfg;
  cfg.vocab_size = 5;
  cfg.num_sentences = 6;
  cfg.noise_std = 0.3;
  auto synth = synth_generate(cfg, 11);
  auto dir = oracle::scratch_dir("corpus_roundtrip");
  auto files = write_corpus(synth.corpus, dir);
  REQUIRE(files.gold);
  auto back = load_corpus(files.manifest, files.feature_dir, files.translations, files.gold);
  CHECK(back == synth.corpus);
  auto dir2 = oracle::scratch_dir("corpus_roundtrip2");
  auto files2 = write_corpus(back, dir2);
  CHECK(load_corpus(files2.manifest, files2.feature_dir, files2.translations, files2.gold) == back);
}

TEST_CASE("gold file validation") {
  auto dir = oracle::scratch_dir("corpus_gold");
  write_text(dir / "g.tsv", "u1\t0\t3\t2\n");
  CHECK_THROWS_AS(read_gold_file(dir / "g.tsv"), Error);
  write_text(dir / "g.tsv", "u1\t0\t0\t2\nu1\t1\t2\t4\n");
  auto g = read_gold_file(dir / "g.tsv");
  CHECK(g.at("u1").links.size() == 4);
  Corpus c;
  c.pairs.push_back(make_sentence_pair("u1", FeatureSequence({0, 0, 0}, 1), {"a", "b"}));
  c.gold = g;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("synth_generate") {
  SUBCASE("noiseless utterances concatenate true prototypes and gold tiles the words") {
    SynthConfig cfg;
    cfg.vocab_size = 3;
    cfg.num_sentences = 5;
    cfg.max_words = 3;
    cfg.silence_prob = 0.0;
    auto out = synth_generate(cfg, 4);
    for (const auto& p : out.corpus.pairs) {
      const auto& gold = out.corpus.gold->at(p.utt_id);
      std::set<int> frames;
      for (auto [w, f] : gold.links) CHECK(frames.insert(f).second);
      CHECK(frames.size() == p.num_frames());
      CHECK(*frames.rbegin() == static_cast<int>(p.num_frames()) - 1);
      for (std::size_t i = 0; i < p.num_words(); ++i) {
        int lo = 1 << 30, hi = -1;
        for (auto [w, f] : gold.links)
          if (w == static_cast<int>(i)) lo = std::min(lo, f), hi = std::max(hi, f);
        const int f = out.truth.inventory.clusters_of(p.target_words[i]).front();
        const auto& proto = *out.truth.prototypes[f];
        REQUIRE(static_cast<std::size_t>(hi - lo + 1) == proto.frames());
        auto seg = p.source.span(lo + 1, hi + 1);
        for (std::size_t t = 0; t < proto.frames(); ++t)
          for (std::size_t k = 0; k < proto.dim(); ++k) CHECK(seg.frame(t)[k] == proto.at(t, k));
      }
    }
  }
  SUBCASE("same seed gives identical corpora") {
    SynthConfig cfg;
    cfg.noise_std = 0.1;
    cfg.reorder_prob = 0.2;
    auto a = synth_generate(cfg, 9);
    auto b = synth_generate(cfg, 9);
    CHECK(a.corpus == b.corpus);
    CHECK(a.truth == b.truth);
    CHECK_FALSE(synth_generate(cfg, 10).corpus == a.corpus);
  }
  SUBCASE("gold spans are in bounds, contiguous and disjoint") {
    SynthConfig cfg;
    cfg.noise_std = 0.1;
    cfg.reorder_prob = 0.5;
    auto out = synth_generate(cfg, 2);
    for (const auto& p : out.corpus.pairs) {
      const auto& gold = out.corpus.gold->at(p.utt_id);
      std::map<int, std::vector<int>> by_word;
      std::set<int> seen;
      for (auto [w, f] : gold.links) {
        CHECK(f >= 0);
        CHECK(f < static_cast<int>(p.num_frames()));
        CHECK(seen.insert(f).second);
        by_word[w].push_back(f);
      }
      CHECK(by_word.size() == p.num_words());
      for (auto& [w, fs] : by_word) CHECK(fs.back() - fs.front() + 1 == static_cast<int>(fs.size()));
    }
  }
  SUBCASE("degenerate configs") {
    SynthConfig cfg;
    cfg.vocab_size = 0;
    CHECK_THROWS_AS(synth_generate(cfg, 1), Error);
    cfg = {};
    cfg.min_proto_len = 0;
    CHECK_THROWS_AS(synth_generate(cfg, 1), Error);
  }
}

TEST_CASE("text helpers") {
  CHECK(parse_double("1.5") == 1.5);
  CHECK_FALSE(parse_double("1.5x"));
  CHECK_FALSE(parse_double(""));
  CHECK(parse_int("+7") == 7);
  CHECK_FALSE(parse_int("7.0"));
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345.678})
    CHECK(parse_double(format_double(v)) == v);
  auto dir = oracle::scratch_dir("text_io");
  write_file_atomic(dir / "f.txt", "a\r\nb\n");
  CHECK(read_lines(dir / "f.txt") == std::vector<std::string>{"a", "b"});
  CHECK_FALSE(fs::exists(dir / "f.txt.tmp"));
}
