// Copyright 2026 The ske Authors
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

// Small estimators used by the Monte-Carlo harnesses.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ske {

inline constexpr double kZ95 = 1.959963984540054;
inline constexpr double kZ99 = 2.5758293035489;

struct ProportionEstimate {
  std::size_t successes = 0;
  std::size_t trials = 0;
  double rate = 0.0;
  double lo = 0.0;  // Wilson score interval
  double hi = 1.0;
};

/// Wilson score interval for a binomial proportion.
inline ProportionEstimate wilson(std::size_t successes, std::size_t trials, double z = kZ99)
{
  ProportionEstimate e{successes, trials};
  if (trials == 0) return e;
  const double n = static_cast<double>(trials), p = static_cast<double>(successes) / n;
  const double z2 = z * z, denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
  e.rate = p;
  // The limits are exactly 0 and 1 at the extremes; the formula only gets
  // there up to rounding.
  e.lo = successes == 0 ? 0.0 : std::max(0.0, centre - half);
  e.hi = successes == trials ? 1.0 : std::min(1.0, centre + half);
  return e;
}

/// Regularized upper incomplete gamma Q(a, x).
inline double gamma_q(double a, double x)
{
  if (a <= 0.0) throw std::invalid_argument("gamma_q: a must be > 0");
  if (x <= 0.0) return 1.0;
  const double log_prefix = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    // series for P(a, x)
    double term = 1.0 / a, sum = term;
    for (int k = 1; k < 1000; ++k) {
      term *= x / (a + k);
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return std::max(0.0, 1.0 - sum * std::exp(log_prefix));
  }
  // Lentz continued fraction for Q(a, x)
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return std::min(1.0, std::exp(log_prefix) * h);
}

/// Upper tail probability of a chi-square variable with `df` degrees of freedom.
inline double chi_square_sf(double stat, double df) { return gamma_q(df / 2.0, stat / 2.0); }

struct ChiSquareResult {
  std::size_t bins = 0;
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

/// Goodness of fit of `counts` against the uniform law over the bins.
inline ChiSquareResult chi_square_uniform(const std::vector<std::size_t>& counts)
{
  ChiSquareResult r;
  r.bins = counts.size();
  std::size_t total = 0;
  for (auto c : counts) total += c;
  if (r.bins < 2 || total == 0) return r;
  const double e = static_cast<double>(total) / static_cast<double>(r.bins);
  for (auto c : counts) r.statistic += (static_cast<double>(c) - e) * (static_cast<double>(c) - e) / e;
  r.df = static_cast<double>(r.bins - 1);
  r.p_value = chi_square_sf(r.statistic, r.df);
  return r;
}

/// Entropy in bits of the empirical law of `samples`.
template <class T>
double plugin_entropy(const std::vector<T>& samples)
{
  std::map<T, std::size_t> counts;
  for (const auto& s : samples) ++counts[s];
  const double n = static_cast<double>(samples.size());
  double h = 0.0;
  for (const auto& [k, c] : counts) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

/// Mutual information in bits of the empirical joint law of paired samples.
template <class A, class B>
double plugin_mutual_information(const std::vector<A>& a, const std::vector<B>& b)
{
  if (a.size() != b.size()) throw std::invalid_argument("plugin_mutual_information: sample counts differ");
  std::vector<std::pair<A, B>> ab;
  ab.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) ab.emplace_back(a[i], b[i]);
  return std::max(0.0, plugin_entropy(a) + plugin_entropy(b) - plugin_entropy(ab));
}

}  // namespace ske
