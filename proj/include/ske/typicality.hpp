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

// Weak (entropy) typicality, single-block and bipartite.
//
// A bipartite sequence is u^n followed by t^d, the two parts drawn from
// different laws. It is typical when
//   | -(1/N) log2 P(x^N) - (n H(U) + d H(T)) / N | < eps,   N = n + d.
// Setting d = 0 gives ordinary typicality. Probabilities are handled in the
// log domain; a zero-probability symbol makes a sequence atypical.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "infotheory.hpp"
#include "random.hpp"
#include "stats.hpp"

namespace ske {

struct TypicalityParams {
  double epsilon = 0.1;
  std::size_t n = 0;
  std::size_t d = 0;

  std::size_t N() const noexcept { return n + d; }

  void validate() const
  {
    if (!(epsilon > 0.0)) throw std::invalid_argument("TypicalityParams: epsilon must be > 0");
  }
};

/// log2 of every symbol probability of a law, with -inf for zero mass.
class LogTable {
 public:
  LogTable() = default;

  explicit LogTable(std::span<const double> p) : log_(p.size()), entropy_(0.0)
  {
    for (std::size_t i = 0; i < p.size(); ++i) {
      log_[i] = p[i] > 0.0 ? std::log2(p[i]) : -std::numeric_limits<double>::infinity();
      if (p[i] > 0.0) entropy_ -= p[i] * log_[i];
    }
  }

  explicit LogTable(const Distribution& p) : LogTable(p.probs()) {}

  double operator[](std::size_t i) const { return log_[i]; }
  std::size_t size() const noexcept { return log_.size(); }
  double entropy() const noexcept { return entropy_; }

  /// Sum of log2 P over the sequence; throws out_of_range for an unknown symbol.
  double log_prob(std::span<const Symbol> seq) const
  {
    double s = 0.0;
    for (Symbol c : seq) {
      if (c >= log_.size()) throw std::out_of_range("typicality: symbol out of range");
      s += log_[c];
    }
    return s;
  }

 private:
  std::vector<double> log_;
  double entropy_ = 0.0;
};

namespace detail {

/// Weak-typicality window on a total log-probability. Vacuous when N = 0.
inline bool within_window(double log_prob, double expected_entropy_bits, std::size_t N, double eps)
{
  if (N == 0) return true;
  if (!std::isfinite(log_prob)) return false;
  return std::abs(-log_prob / static_cast<double>(N) - expected_entropy_bits / static_cast<double>(N)) < eps;
}

inline void check_pair_joint(const JointDistribution& j, const char* what)
{
  if (j.rank() != 2) throw std::invalid_argument(std::string(what) + ": joint law must have two axes");
}

}  // namespace detail

inline bool is_typical(std::span<const Symbol> seq, const Distribution& p, double epsilon)
{
  const LogTable t(p);
  return detail::within_window(t.log_prob(seq), static_cast<double>(seq.size()) * t.entropy(), seq.size(), epsilon);
}

/// Precomputed tester for pairs (a, b) of a two-axis joint law: both
/// marginals typical and the pair typical for the joint.
class JointTypicality {
 public:
  JointTypicality() = default;

  JointTypicality(const JointDistribution& joint, double epsilon)
      : a_(joint.marginal({0}).probs()), b_(joint.marginal({1}).probs()), ab_(joint.probs()),
        nb_(joint.shape()[1]), eps_(epsilon)
  {
    detail::check_pair_joint(joint, "JointTypicality");
  }

  const LogTable& first() const noexcept { return a_; }
  const LogTable& second() const noexcept { return b_; }
  const LogTable& pair() const noexcept { return ab_; }
  std::size_t second_size() const noexcept { return nb_; }
  double epsilon() const noexcept { return eps_; }

  double pair_log_prob(std::span<const Symbol> a, std::span<const Symbol> b) const
  {
    if (a.size() != b.size()) throw std::invalid_argument("joint typicality: sequence lengths differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] >= a_.size() || b[i] >= nb_) throw std::out_of_range("typicality: symbol out of range");
      s += ab_[a[i] * nb_ + b[i]];
    }
    return s;
  }

  bool operator()(std::span<const Symbol> a, std::span<const Symbol> b) const
  {
    if (a.size() != b.size()) throw std::invalid_argument("joint typicality: sequence lengths differ");
    const std::size_t n = a.size();
    const double dn = static_cast<double>(n);
    return detail::within_window(a_.log_prob(a), dn * a_.entropy(), n, eps_) &&
           detail::within_window(b_.log_prob(b), dn * b_.entropy(), n, eps_) &&
           detail::within_window(pair_log_prob(a, b), dn * ab_.entropy(), n, eps_);
  }

 private:
  LogTable a_, b_, ab_;
  std::size_t nb_ = 1;
  double eps_ = 0.1;
};

inline bool is_jointly_typical(std::span<const Symbol> a, std::span<const Symbol> b, const JointDistribution& joint,
                               double epsilon)
{
  return JointTypicality(joint, epsilon)(a, b);
}

inline bool is_bipartite_typical(std::span<const Symbol> x, const Distribution& pU, const Distribution& pT,
                                 const TypicalityParams& params)
{
  params.validate();
  if (x.size() != params.N()) throw std::invalid_argument("is_bipartite_typical: length differs from n + d");
  const LogTable u(pU), t(pT);
  const double lp = u.log_prob(x.first(params.n)) + t.log_prob(x.subspan(params.n));
  const double h = static_cast<double>(params.n) * u.entropy() + static_cast<double>(params.d) * t.entropy();
  return detail::within_window(lp, h, params.N(), params.epsilon);
}

/// Precomputed tester for bipartite pairs: x = (u^n, t^d), y = (u'^n, t'^d)
/// with (U, U') ~ jointU and (T, T') ~ jointT.
class BipartiteJointTypicality {
 public:
  BipartiteJointTypicality(const JointDistribution& jointU, const JointDistribution& jointT,
                           const TypicalityParams& params)
      : u_(jointU, params.epsilon), t_(jointT, params.epsilon), params_(params)
  {
    params.validate();
  }

  bool operator()(std::span<const Symbol> x, std::span<const Symbol> y) const
  {
    const std::size_t n = params_.n, N = params_.N();
    if (x.size() != N || y.size() != N) throw std::invalid_argument("bipartite typicality: length differs from n + d");
    return accepts(x.first(n), x.subspan(n), y.first(n), y.subspan(n));
  }

  /// Same test with the four sub-blocks passed separately: x = (xu, xt), y = (yu, yt).
  bool accepts(std::span<const Symbol> xu, std::span<const Symbol> xt, std::span<const Symbol> yu,
               std::span<const Symbol> yt) const
  {
    const std::size_t N = params_.N();
    if (xu.size() != params_.n || xt.size() != params_.d) {
      throw std::invalid_argument("bipartite typicality: sub-block lengths differ from (n, d)");
    }
    const double dn = static_cast<double>(params_.n), dd = static_cast<double>(params_.d), eps = params_.epsilon;
    const double lx = u_.first().log_prob(xu) + t_.first().log_prob(xt);
    const double ly = u_.second().log_prob(yu) + t_.second().log_prob(yt);
    return detail::within_window(lx, dn * u_.first().entropy() + dd * t_.first().entropy(), N, eps) &&
           detail::within_window(ly, dn * u_.second().entropy() + dd * t_.second().entropy(), N, eps) &&
           detail::within_window(u_.pair_log_prob(xu, yu) + t_.pair_log_prob(xt, yt),
                                 dn * u_.pair().entropy() + dd * t_.pair().entropy(), N, eps);
  }

  const TypicalityParams& params() const noexcept { return params_; }

 private:
  JointTypicality u_, t_;
  TypicalityParams params_;
};

inline bool is_bipartite_jointly_typical(std::span<const Symbol> x, std::span<const Symbol> y,
                                         const JointDistribution& jointU, const JointDistribution& jointT,
                                         const TypicalityParams& params)
{
  return BipartiteJointTypicality(jointU, jointT, params)(x, y);
}

// ---------------------------------------------------------------------------
// Monte-Carlo check of the joint AEP

struct AepReport {
  TypicalityParams params;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  ProportionEstimate paired;       // (x, y) drawn from the joint laws
  ProportionEstimate independent;  // x and y drawn independently from the marginals
  double info_u = 0.0, info_t = 0.0;
  double log2_upper = 0.0;  // -n I_U - d I_T + 3 N eps
  double log2_lower = 0.0;  // log2(1 - eps) - n I_U - d I_T - 3 N eps
  bool paired_ok = false;       // Wilson upper limit of the paired rate reaches 1 - eps
  bool envelope_ok = false;     // Wilson interval of the independent rate meets [lower, upper]
  bool ok() const noexcept { return paired_ok && envelope_ok; }
};

/// Trials are cut into a fixed number of chunks; chunk k draws from
/// Rng(seed + k). `jobs` only decides how many threads work through the
/// chunks, so the report does not depend on it.
inline AepReport verify_joint_aep(const JointDistribution& jointU, const JointDistribution& jointT,
                                  const TypicalityParams& params, std::size_t trials, std::uint64_t seed,
                                  unsigned jobs = 1)
{
  if (trials == 0) throw std::invalid_argument("verify_joint_aep: trials must be >= 1");
  params.validate();
  detail::check_pair_joint(jointU, "verify_joint_aep");
  detail::check_pair_joint(jointT, "verify_joint_aep");
  const BipartiteJointTypicality test(jointU, jointT, params);

  const std::size_t n = params.n, N = params.N();
  const std::size_t ncu = jointU.shape()[1], nct = jointT.shape()[1];
  const auto mu_x = jointU.marginal({0}), mu_y = jointU.marginal({1});
  const auto mt_x = jointT.marginal({0}), mt_y = jointT.marginal({1});

  constexpr std::size_t kChunks = 64;
  std::vector<std::size_t> paired(kChunks, 0), indep(kChunks, 0);
  auto run_chunk = [&](std::size_t k) {
    const std::size_t begin = trials * k / kChunks, end = trials * (k + 1) / kChunks;
    Rng rng(seed + k);
    Sequence x(N), y(N);
    for (std::size_t t = begin; t < end; ++t) {
      for (std::size_t i = 0; i < N; ++i) {
        const bool first = i < n;
        const std::size_t c = rng.categorical(first ? jointU.probs() : jointT.probs());
        const std::size_t cols = first ? ncu : nct;
        x[i] = static_cast<Symbol>(c / cols);
        y[i] = static_cast<Symbol>(c % cols);
      }
      paired[k] += test(x, y);
      for (std::size_t i = 0; i < N; ++i) {
        const bool first = i < n;
        x[i] = static_cast<Symbol>(rng.categorical(first ? mu_x.probs() : mt_x.probs()));
        y[i] = static_cast<Symbol>(rng.categorical(first ? mu_y.probs() : mt_y.probs()));
      }
      indep[k] += test(x, y);
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, kChunks));
  if (workers == 1) {
    for (std::size_t k = 0; k < kChunks; ++k) run_chunk(k);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < kChunks; k += workers) run_chunk(k);
      });
    }
    for (auto& th : pool) th.join();
  }

  AepReport r;
  r.params = params;
  r.trials = trials;
  r.seed = seed;
  std::size_t ps = 0, is = 0;
  for (std::size_t k = 0; k < kChunks; ++k) {
    ps += paired[k];
    is += indep[k];
  }
  r.paired = wilson(ps, trials);
  r.independent = wilson(is, trials);
  r.info_u = mutual_information(jointU, {0}, {1});
  r.info_t = mutual_information(jointT, {0}, {1});
  const double exponent = -static_cast<double>(n) * r.info_u - static_cast<double>(params.d) * r.info_t;
  const double slack = 3.0 * static_cast<double>(N) * params.epsilon;
  r.log2_upper = exponent + slack;
  r.log2_lower = std::log2(1.0 - std::min(params.epsilon, 1.0 - 1e-300)) + exponent - slack;
  r.paired_ok = r.paired.hi >= 1.0 - params.epsilon;
  const double log_lo = r.independent.lo > 0 ? std::log2(r.independent.lo) : -std::numeric_limits<double>::infinity();
  const double log_hi = r.independent.hi > 0 ? std::log2(r.independent.hi) : -std::numeric_limits<double>::infinity();
  r.envelope_ok = log_lo <= r.log2_upper && log_hi >= r.log2_lower;
  return r;
}

}  // namespace ske
