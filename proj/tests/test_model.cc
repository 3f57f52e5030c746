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
#include "spanalign/model.h"
#include "spanalign/synth.h"

using namespace spanalign;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

FeatureSequence seq1d(std::vector<double> v) { return FeatureSequence(std::move(v), 1); }

ModelParams one_word_params(std::vector<FeatureSequence> protos, const std::string& word = "w") {
  auto params = ModelParams::initial(ClusterInventory({word}, static_cast<int>(protos.size())),
                                     {}, ModelVariant::kDeficient);
  for (std::size_t f = 0; f < protos.size(); ++f) params.prototypes[f] = protos[f];
  return params;
}

}  // namespace

TEST_CASE("cluster inventory") {
  ClusterInventory inv({"pane", "il", "pane", "acqua"}, 2);
  CHECK(inv.word_types() == std::vector<std::string>{"acqua", "il", "pane"});
  CHECK(inv.num_clusters() == 6);
  CHECK(inv.clusters_of("il") == std::vector<int>{2, 3});
  CHECK(inv.owner(5) == "pane");
  CHECK(inv.owns(0, "acqua"));
  CHECK_FALSE(inv.owns(0, "il"));
  CHECK_FALSE(inv.owns(9, "il"));
  CHECK_THROWS_AS(inv.clusters_of("vino"), Error);
  CHECK_THROWS_AS(ClusterInventory({"a"}, 0), Error);
  for (int f = 0; f < inv.num_clusters(); ++f) {
    const auto& ids = inv.clusters_of(inv.owner(f));
    CHECK(std::find(ids.begin(), ids.end(), f) != ids.end());
  }
}

TEST_CASE("deficient clustering factor") {
  auto pair = make_sentence_pair("u", seq1d({0, 0, 2, 2}), {"w"});
  auto params = one_word_params({seq1d({0, 0})});
  SUBCASE("single candidate") {
    CandidateSpans c{{{1, 2}}};
    CHECK(log_s_deficient(0, {1, 2}, pair, c, params) == 0.0);
  }
  SUBCASE("equal distances split evenly") {
    auto sym = make_sentence_pair("u", seq1d({1, 1, 1, 1}), {"w"});
    CandidateSpans c{{{1, 2}, {3, 4}}};
    CHECK(log_s_deficient(0, {1, 2}, sym, c, params) == doctest::Approx(std::log(0.5)));
    CHECK(log_s_deficient(0, {3, 4}, sym, c, params) == doctest::Approx(std::log(0.5)));
  }
  SUBCASE("squared distances 0 and 1") {
    CandidateSpans c{{{1, 2}, {3, 4}}};
    CHECK(span_sq_dtw(*params.prototypes[0], pair.source, c) == std::vector<double>{0.0, 1.0});
    const double p0 = std::exp(log_s_deficient(0, {1, 2}, pair, c, params));
    const double p1 = std::exp(log_s_deficient(0, {3, 4}, pair, c, params));
    CHECK(p0 == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-12));
    CHECK(p0 == doctest::Approx(0.731).epsilon(1e-3));
    CHECK(p1 == doctest::Approx(0.269).epsilon(2e-3));
  }
  SUBCASE("missing prototype") {
    auto dead = params;
    dead.prototypes[0].reset();
    CandidateSpans c{{{1, 2}}};
    CHECK_THROWS_AS(log_s_deficient(0, {1, 2}, pair, c, dead), Error);
    CHECK_THROWS_AS(log_s_deficient(0, {2, 3}, pair, c, params), Error);
  }
}

TEST_CASE("proper clustering factor") {
  auto pair = make_sentence_pair("u", seq1d({0, 0, 5}), {"w"});
  CandidateSpans c{{{1, 2}}};
  SUBCASE("one live cluster") {
    auto params = one_word_params({seq1d({3})});
    params.variant = ModelVariant::kProper;
    CHECK(log_s_proper(0, {1, 2}, pair, c, params) == 0.0);
  }
  SUBCASE("squared distances 0 and 1 across clusters") {
    auto params = one_word_params({seq1d({0, 0}), seq1d({2, 2})});
    params.variant = ModelVariant::kProper;
    CHECK(std::exp(log_s_proper(0, {1, 2}, pair, c, params)) ==
          doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-12));
    CHECK(std::exp(log_s_proper(1, {1, 2}, pair, c, params)) ==
          doctest::Approx(std::exp(-1.0) / (1.0 + std::exp(-1.0))).epsilon(1e-12));
  }
  SUBCASE("equidistant clusters") {
    auto params = one_word_params({seq1d({1, 1}), seq1d({-1, -1})});
    CHECK(log_s_proper(0, {1, 2}, pair, c, params) == doctest::Approx(std::log(0.5)));
  }
  SUBCASE("no live clusters") {
    auto params = one_word_params({seq1d({1})});
    params.u[0] = 0.0;
    CHECK_THROWS_AS(log_s_proper(0, {1, 2}, pair, c, params), Error);
  }
}

TEST_CASE("word score") {
  auto pair = make_sentence_pair("u", seq1d({0, 1, 2, 3, 4, 5}), {"a", "b"});
  auto params = ModelParams::initial(ClusterInventory({"a", "b"}, 1), {}, ModelVariant::kDeficient);
  params.prototypes[0] = seq1d({0, 1});
  params.prototypes[1] = seq1d({4, 5});
  auto mu = utterance_mu(pair);
  CHECK(mu == std::vector<int>{3, 3});
  CandidateSpans one{{{2, 4}}};
  SUBCASE("cluster of another word") {
    CHECK(word_log_score(1, 1, {2, 4}, pair, params, one, mu) == kNegInf);
  }
  SUBCASE("single candidate reduces to distortion") {
    auto solo = ModelParams::initial(ClusterInventory({"a", "b"}, 1), {}, ModelVariant::kDeficient);
    solo.u = {1.0, 0.0};
    solo.prototypes[0] = seq1d({7});
    const double expect = log_delta_span(2, 4, 1, 2, 6, 3, {});
    CHECK(word_log_score(1, 0, {2, 4}, pair, solo, one, mu) == doctest::Approx(expect).epsilon(1e-14));
    solo.variant = ModelVariant::kProper;
    CHECK(word_log_score(1, 0, {2, 4}, pair, solo, one, mu) == doctest::Approx(expect).epsilon(1e-14));
  }
  SUBCASE("span outside the candidate set") {
    CHECK_THROWS_AS(word_log_score(1, 0, {1, 3}, pair, params, one, mu), Error);
    CHECK_THROWS_AS(word_log_score(1, 0, {4, 2}, pair, params, one, mu), Error);
  }
  SUBCASE("sentence score sums word scores") {
    auto cands = all_spans(6, 2);
    Alignment al;
    al.words = {{0, {1, 2}, 0.0}, {1, {5, 6}, 0.0}};
    const double total = sentence_log_score(al, pair, params, cands, mu);
    CHECK(total == doctest::Approx(word_log_score(1, 0, {1, 2}, pair, params, cands, mu) +
                                   word_log_score(2, 1, {5, 6}, pair, params, cands, mu)));
    al.words[1].cluster = 0;
    CHECK(sentence_log_score(al, pair, params, cands, mu) == kNegInf);
    auto single = make_sentence_pair("s", seq1d({0, 1, 2}), {"a"});
    Alignment one_word;
    one_word.words = {{0, {1, 2}, 0.0}};
    auto c3 = all_spans(3, 2);
    auto mu1 = utterance_mu(single);
    CHECK(mu1 == std::vector<int>{2});
    CHECK(sentence_log_score(one_word, single, params, c3, mu1) ==
          word_log_score(1, 0, {1, 2}, single, params, c3, mu1));
  }
}

TEST_CASE("scores match the factor-by-factor reference") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = 6 + trial % 7;
    auto source = oracle::random_sequence(rng, m, 2);
    auto pair = make_sentence_pair("u", source, {"x", "y", "x"});
    auto params = ModelParams::initial(ClusterInventory({"x", "y"}, 2), {0.0, 0.3 + trial * 0.05},
                                       trial % 2 ? ModelVariant::kProper : ModelVariant::kDeficient);
    params.u = {0.4, 0.1, 0.3, 0.2};
    for (int f = 0; f < 4; ++f) params.prototypes[f] = oracle::random_sequence(rng, 2 + f % 3, 2);
    if (trial % 5 == 0) params.u = {0.5, 0.0, 0.3, 0.2};
    auto cands = all_spans(m, 2, 5);
    auto mu = utterance_mu(pair);
    UtteranceScorer scorer(pair, params, cands, mu);
    for (int i = 1; i <= 3; ++i)
      for (int f = 0; f < 4; ++f)
        for (std::size_t c = 0; c < cands.spans.size(); ++c) {
          double got = scorer.word_score(i, f, c);
          double want = oracle::word_score(i, f, cands.spans[c], pair, params, cands.spans, mu);
          if (want == kNegInf) {
            CHECK(got == kNegInf);
          } else {
            CHECK(got == doctest::Approx(want).epsilon(1e-10));
          }
        }
  }
}

TEST_CASE("clustering factors are normalized") {
  std::mt19937_64 rng(77);
  auto source = oracle::random_sequence(rng, 15, 3);
  auto pair = make_sentence_pair("u", source, {"x", "y"});
  auto params = ModelParams::initial(ClusterInventory({"x", "y"}, 2), {}, ModelVariant::kDeficient);
  for (int f = 0; f < 4; ++f) params.prototypes[f] = oracle::random_sequence(rng, 3 + f, 3);
  params.prototypes[3].reset();
  auto cands = all_spans(15, 3, 8);
  UtteranceScorer scorer(pair, params, cands, utterance_mu(pair));
  for (int f = 0; f < 3; ++f) {
    double total = 0.0;
    for (std::size_t c = 0; c < cands.spans.size(); ++c) total += std::exp(scorer.log_s_deficient(f, c));
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
  for (std::size_t c = 0; c < cands.spans.size(); ++c) {
    double total = 0.0;
    for (int f = 0; f < 3; ++f) total += std::exp(scorer.log_s_proper(f, c));
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
}

TEST_CASE("relabeling clusters of a word leaves scores unchanged") {
  std::mt19937_64 rng(3);
  auto pair = make_sentence_pair("u", oracle::random_sequence(rng, 10, 2), {"x"});
  auto params = ModelParams::initial(ClusterInventory({"x"}, 2), {}, ModelVariant::kDeficient);
  params.u = {0.7, 0.3};
  params.prototypes[0] = oracle::random_sequence(rng, 3, 2);
  params.prototypes[1] = oracle::random_sequence(rng, 4, 2);
  auto swapped = params;
  std::swap(swapped.u[0], swapped.u[1]);
  std::swap(swapped.prototypes[0], swapped.prototypes[1]);
  auto cands = all_spans(10, 2, 6);
  auto mu = utterance_mu(pair);
  for (auto s : cands.spans) {
    CHECK(word_log_score(1, 0, s, pair, params, cands, mu) ==
          word_log_score(1, 1, s, pair, swapped, cands, mu));
  }
}

TEST_CASE("gold beats every other alignment on a tiny noiseless instance") {
  SynthConfig cfg;
  cfg.vocab_size = 3;
  cfg.num_sentences = 3;
  cfg.min_words = 2;
  cfg.max_words = 2;
  cfg.min_proto_len = 4;
  cfg.max_proto_len = 6;
  auto out = synth_generate(cfg, 8);
  for (const auto& pair : out.corpus.pairs) {
    const auto& gold = out.corpus.gold->at(pair.utt_id);
    auto cands = utterance_candidates(pair, {});
    auto mu = utterance_mu(pair);
    Alignment best_gold;
    for (std::size_t i = 0; i < pair.num_words(); ++i) {
      int lo = 1 << 30, hi = -1;
      for (auto [w, f] : gold.links)
        if (w == static_cast<int>(i)) lo = std::min(lo, f + 1), hi = std::max(hi, f + 1);
      best_gold.words.push_back({out.truth.inventory.clusters_of(pair.target_words[i]).front(), {lo, hi}, 0.0});
    }
    const double gold_score = sentence_log_score(best_gold, pair, out.truth, cands, mu);
    for (auto s1 : cands.spans)
      for (auto s2 : cands.spans) {
        Alignment other = best_gold;
        other.words[0].span = s1;
        other.words[1].span = s2;
        CHECK(sentence_log_score(other, pair, out.truth, cands, mu) <= gold_score);
      }
  }
}

TEST_CASE("checkpoint round-trip") {
  auto params = ModelParams::initial(ClusterInventory({"caff\xc3\xa8", "b"}, 2), {0.1, 1.0 / 3.0},
                                     ModelVariant::kProper);
  params.u = {0.1, 0.2, 0.3, 0.4};
  std::mt19937_64 rng(1);
  params.prototypes[0] = oracle::random_sequence(rng, 3, 4);
  params.prototypes[2] = FeatureSequence({1e-300, -0.1, 1.0 / 7.0}, 1, 25.0);
  auto dir = oracle::scratch_dir("checkpoint");
  write_checkpoint(dir / "m.json", params);
  auto back = read_checkpoint(dir / "m.json");
  CHECK(back == params);
  {
    std::ofstream bad(dir / "bad.json");
    bad << "{\"format\": \"spanalign-model\", \"version\": 99}";
  }
  CHECK_THROWS_AS(read_checkpoint(dir / "bad.json"), Error);
  CHECK_THROWS_AS(read_checkpoint(dir / "none.json"), Error);
}

TEST_CASE("parameter validation") {
  auto params = one_word_params({seq1d({1})});
  CHECK_NOTHROW(params.validate());
  params.u[0] = 0.5;
  CHECK_THROWS_AS(params.validate(), Error);
  CHECK(parse_variant("proper") == ModelVariant::kProper);
  CHECK_THROWS_AS(parse_variant("improper"), Error);
}
