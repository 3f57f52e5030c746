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

#include <numeric>

#include "oracles.h"
#include "spanalign/distortion.h"

using namespace spanalign;

namespace {

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin() + 1, v.end()) - v.begin());
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("allocate_mu") {
  auto mu = [](std::vector<int> chars, int m) {
    return allocate_mu(chars, m).mu;
  };
  CHECK(mu({2, 4}, 60) == std::vector<int>{20, 40});
  CHECK(mu({1, 1, 1}, 10) == std::vector<int>{4, 3, 3});
  CHECK(mu({10}, 7) == std::vector<int>{7});
  CHECK(mu({100, 1, 1}, 3) == std::vector<int>{1, 1, 1});
  CHECK_THROWS_AS(allocate_mu(std::vector<int>{1, 1, 1}, 2), Error);
  CHECK_THROWS_AS(allocate_mu(std::vector<int>{}, 2), Error);

  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> chars(1, 12), count(1, 8);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<int> c(count(rng));
    for (auto& x : c) x = chars(rng);
    const int m = static_cast<int>(c.size()) + trial % 200;
    auto r = allocate_mu(c, m).mu;
    CHECK(std::accumulate(r.begin(), r.end(), 0) == m);
    for (int x : r) CHECK(x >= 1);
    std::vector<int> rev(c.rbegin(), c.rend());
    auto r2 = allocate_mu(rev, m).mu;
    std::sort(r.begin(), r.end());
    std::sort(r2.begin(), r2.end());
    // Permuting the lengths permutes the widths up to one frame of tie-breaking.
    for (std::size_t k = 0; k < r.size(); ++k) CHECK(std::abs(r[k] - r2[k]) <= 1);
  }
}

TEST_CASE("figure parameter set: modes at 16 and 36") {
  DistortionParams p;
  auto a = delta_a(1, 5, 100, 20, p);
  auto b = delta_b(1, 5, 100, 20, p);
  CHECK(argmax(a) == 16);
  CHECK(argmax(b) == 36);
  CHECK(a[0] == 0.0);
  CHECK(sum(a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sum(b) == doctest::Approx(1.0).epsilon(1e-12));
  double best = -1e300;
  Span arg;
  for (int x = 1; x <= 100; ++x)
    for (int y = x; y <= 100; ++y) {
      double v = log_delta_span(x, y, 1, 5, 100, 20, p);
      if (v > best) best = v, arg = {x, y};
    }
  CHECK(arg == Span{16, 36});
}

TEST_CASE("last word ends at the last frame") {
  DistortionParams p;
  for (int m : {10, 37, 120})
    for (int l : {1, 2, 6}) CHECK(argmax(delta_b(l, l, m, std::max(1, m / (l + 1)), p)) == std::size_t(m));
}

TEST_CASE("tiny lambda approaches uniform") {
  DistortionParams p;
  p.lambda = 1e-8;
  auto a = delta_a(2, 3, 50, 10, p);
  for (int j = 1; j <= 50; ++j) CHECK(std::abs(a[j] - 1.0 / 50) < 1e-6);
}

TEST_CASE("matches the definition and the analytic mode") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> lam(0.01, 5.0), null(0.0, 0.5);
  for (int trial = 0; trial < 300; ++trial) {
    const int l = 1 + static_cast<int>(rng() % 8);
    const int i = 1 + static_cast<int>(rng() % l);
    const int m = 2 + static_cast<int>(rng() % 150);
    const int mu = 1 + static_cast<int>(rng() % (m - 1));
    DistortionParams p{trial % 3 == 0 ? null(rng) : 0.0, lam(rng)};
    auto a = delta_a(i, l, m, mu, p);
    auto b = delta_b(i, l, m, mu, p);
    auto ea = oracle::delta(i, l, m, mu, p.lambda, p.p0, 0);
    auto eb = oracle::delta(i, l, m, mu, p.lambda, p.p0, mu);
    for (int j = 0; j <= m; ++j) {
      CHECK(a[j] == doctest::Approx(ea[j]).epsilon(1e-10));
      CHECK(b[j] == doctest::Approx(eb[j]).epsilon(1e-10));
    }
    CHECK(std::abs(sum(a) - 1.0) < 1e-9);
    CHECK(std::abs(sum(b) - 1.0) < 1e-9);
    CHECK(argmax(a) == std::size_t(oracle::closest_positions(i, l, m, mu, 0).front()));
    CHECK(argmax(b) == std::size_t(oracle::closest_positions(i, l, m, mu, mu).front()));

    const int x = 1 + static_cast<int>(rng() % m);
    const int y = x + static_cast<int>(rng() % (m - x + 1));
    CHECK(log_delta_span(x, y, i, l, m, mu, p) ==
          doctest::Approx(std::log(ea[x]) + std::log(eb[y])).epsilon(1e-10));
  }
}

TEST_CASE("sharper lambda never lowers the mode") {
  for (int m : {20, 100})
    for (int i = 1; i <= 4; ++i) {
      double prev = 0.0;
      for (double lambda : {0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0}) {
        auto a = delta_a(i, 4, m, m / 4, {0.0, lambda});
        double peak = a[argmax(a)];
        CHECK(peak >= prev - 1e-15);
        prev = peak;
      }
    }
}

TEST_CASE("null outcome and invalid spans") {
  DistortionParams p;
  CHECK(log_delta_span(0, 5, 1, 2, 10, 5, p) == -std::numeric_limits<double>::infinity());
  DistortionParams q{0.2, 0.5};
  CHECK(log_delta_span(0, 0, 1, 2, 10, 5, q) == doctest::Approx(2 * std::log(0.2)));
  CHECK_THROWS_AS(log_delta_span(6, 5, 1, 2, 10, 5, p), Error);
  CHECK_THROWS_AS(log_delta_span(1, 11, 1, 2, 10, 5, p), Error);
  CHECK_THROWS_AS(delta_a(1, 2, 10, 10, p), Error);
  CHECK_THROWS_AS(delta_a(3, 2, 10, 4, p), Error);
  CHECK_THROWS_AS((DistortionParams{1.5, 0.5}.validate()), Error);
  CHECK_THROWS_AS((DistortionParams{0.0, -1.0}.validate()), Error);
}

TEST_CASE("effective_mu keeps one frame outside the word") {
  CHECK(effective_mu(7, 7) == 6);
  CHECK(effective_mu(3, 7) == 3);
}
