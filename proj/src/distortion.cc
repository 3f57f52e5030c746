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

#include "spanalign/distortion.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "spanalign/corpus.h"

namespace spanalign {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_args(int i, int l, int m, int mu) {
  if (l < 1 || i < 1 || i > l)
    throw Error("distortion: word position " + std::to_string(i) + " outside 1.." +
                std::to_string(l));
  if (mu <= 0 || mu >= m)
    throw Error("distortion: need 0 < mu < m, got mu=" + std::to_string(mu) +
                " m=" + std::to_string(m));
}

// `shift` is 0 for the start distribution and mu for the end distribution.
// h is evaluated as an exact integer numerator over l (m - mu).
std::vector<double> log_delta(int i, int l, int m, int mu, int shift,
                              const DistortionParams& params) {
  check_args(i, l, m, mu);
  params.validate();
  const long long width = m - mu;
  const double den = static_cast<double>(static_cast<long long>(l) * width);
  std::vector<double> out(static_cast<std::size_t>(m) + 1);
  double best = kNegInf;
  for (int j = 1; j <= m; ++j) {
    long long num = static_cast<long long>(i) * width - static_cast<long long>(j - shift) * l;
    double h = -static_cast<double>(num < 0 ? -num : num) / den;
    out[j] = params.lambda * h;
    best = std::max(best, out[j]);
  }
  double z = 0.0;
  for (int j = 1; j <= m; ++j) z += std::exp(out[j] - best);
  const double log_z = best + std::log(z);
  const double log_mass = params.p0 < 1.0 ? std::log1p(-params.p0) : kNegInf;
  for (int j = 1; j <= m; ++j) out[j] = log_mass + out[j] - log_z;
  out[0] = params.p0 > 0.0 ? std::log(params.p0) : kNegInf;
  return out;
}

std::vector<double> exp_all(std::vector<double> v) {
  for (auto& x : v) x = std::exp(x);
  return v;
}

}  // namespace

void DistortionParams::validate() const {
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw Error("distortion: p0 must lie in [0, 1]");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw Error("distortion: lambda must be finite and non-negative");
}

MuAllocation allocate_mu(std::span<const int> char_lengths, int m) {
  const int l = static_cast<int>(char_lengths.size());
  if (l < 1) throw Error("allocate_mu: no words");
  if (m < l)
    throw Error("allocate_mu: " + std::to_string(m) + " frames cannot cover " +
                std::to_string(l) + " words");
  long long total = 0;
  for (int c : char_lengths) {
    if (c < 1) throw Error("allocate_mu: character lengths must be positive");
    total += c;
  }

  MuAllocation alloc;
  alloc.mu.resize(l);
  std::vector<long long> remainder(l);
  long long assigned = 0;
  for (int i = 0; i < l; ++i) {
    long long scaled = static_cast<long long>(m) * char_lengths[i];
    alloc.mu[i] = static_cast<int>(scaled / total);
    remainder[i] = scaled % total;
    assigned += alloc.mu[i];
  }
  std::vector<int> order(l);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return remainder[x] > remainder[y]; });
  for (long long k = 0; k < m - assigned; ++k) ++alloc.mu[order[k]];

  // Words rounded down to nothing borrow from the widest word.
  for (int i = 0; i < l; ++i) {
    while (alloc.mu[i] == 0) {
      auto widest = std::max_element(alloc.mu.begin(), alloc.mu.end());
      --*widest;
      ++alloc.mu[i];
    }
  }
  return alloc;
}

int effective_mu(int mu, int m) { return std::min(mu, m - 1); }

std::vector<double> log_delta_a(int i, int l, int m, int mu, const DistortionParams& params) {
  return log_delta(i, l, m, mu, 0, params);
}

std::vector<double> log_delta_b(int i, int l, int m, int mu, const DistortionParams& params) {
  return log_delta(i, l, m, mu, mu, params);
}

std::vector<double> delta_a(int i, int l, int m, int mu, const DistortionParams& params) {
  return exp_all(log_delta_a(i, l, m, mu, params));
}

std::vector<double> delta_b(int i, int l, int m, int mu, const DistortionParams& params) {
  return exp_all(log_delta_b(i, l, m, mu, params));
}

double log_delta_span(int a, int b, int i, int l, int m, int mu,
                      const DistortionParams& params) {
  if (a < 0 || b < 0 || a > m || b > m)
    throw Error("log_delta_span: endpoint outside 0.." + std::to_string(m));
  if (a > 0 && b > 0 && a > b)
    throw Error("log_delta_span: span start " + std::to_string(a) + " after end " +
                std::to_string(b));
  auto da = log_delta_a(i, l, m, mu, params);
  auto db = log_delta_b(i, l, m, mu, params);
  return da[a] + db[b];
}

}  // namespace spanalign
