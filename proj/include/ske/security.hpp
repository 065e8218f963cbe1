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

// Monte-Carlo estimates of key rate, disagreement and leakage, and an exact
// enumeration of Eve's uncertainty for very small instances.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "protocol.hpp"
#include "stats.hpp"

namespace ske {

struct SecurityOptions {
  std::size_t trials = 200;
  std::uint64_t seed = 1;
  bool fresh_codebooks = true;
  std::size_t min_trials = 200;
  unsigned jobs = 1;
  std::size_t attack_log2_cap = 20;  // skip the unaided attack above 2^eta pairs
};

struct SecurityEstimate {
  std::size_t trials = 0;
  std::size_t kappa = 0;
  std::size_t n_total = 0;
  double key_entropy = 0.0;       // plug-in H(S), bits
  double key_entropy_rate = 0.0;  // key_entropy / N
  double rate_ceiling = 0.0;      // kappa / N
  ProportionEstimate error;       // Pr(S-hat != S), Wilson at 95%
  std::size_t null_bob = 0, null_alice1 = 0, null_alice2 = 0;
  ProportionEstimate eve_reconstruct;  // genie decoder recovers (F, B)
  std::optional<double> leakage_ratio;  // plug-in I(S; unaided guess) / H(S)
  ChiSquareResult key_uniformity;
};

/// Per-trial record; exposed so callers can run their own statistics.
struct TrialOutcome {
  std::uint64_t key = 0;
  bool agreed = false;
  NullFlags nulls;
  bool eve_reconstructed = false;
  std::uint64_t eve_guess = 0;  // 0 when the unaided decoder returns NULL
};

inline TrialOutcome run_trial(const TwoDmbc& actual, const CodebookSet& books, const EveModel& eve,
                              std::uint64_t seed, bool attack)
{
  const auto tr = run_protocol(actual, books, derive_seed(seed, 101));
  TrialOutcome o;
  o.key = tr.S;
  o.agreed = tr.agreed();
  o.nulls = tr.nulls;
  const auto r = eve_reconstruct(books, eve, tr.S, tr.T2, tr.B2, tr.z_f, tr.z_b);
  o.eve_reconstructed = r && r->first == tr.F && r->second == tr.B;
  if (attack) o.eve_guess = eve_guess_key(books, eve, tr.z_f, tr.z_b).value_or(0);
  return o;
}

/// Key counts grouped by their high bits into at most trials / 5 bins.
inline ChiSquareResult key_uniformity(const std::vector<std::uint64_t>& keys, std::size_t kappa)
{
  std::size_t bits = 0;
  while (bits < kappa && (std::size_t{2} << bits) * 5 <= keys.size()) ++bits;
  if (bits == 0) return {};
  std::vector<std::size_t> counts(std::size_t{1} << bits, 0);
  for (auto k : keys) ++counts[(k - 1) >> (kappa - bits)];
  return chi_square_uniform(counts);
}

/// Runs independent trials over the channel pair `actual`. With fixed
/// codebooks, `books` is used for every trial; otherwise each trial draws
/// its own from `model`.
inline std::pair<SecurityEstimate, std::vector<TrialOutcome>> estimate_security(
    const TwoDmbc& actual, std::shared_ptr<const ProtocolModel> model, const CodingParameters& params,
    const SecurityOptions& opt, std::shared_ptr<const CodebookSet> books = nullptr)
{
  if (opt.trials < std::max<std::size_t>(1, opt.min_trials)) {
    throw std::invalid_argument("estimate_security: " + std::to_string(opt.trials) + " trials, at least " +
                                std::to_string(opt.min_trials) + " required");
  }
  params.validate();
  if (!opt.fresh_codebooks && !books) books = build_codebooks(params, model, derive_seed(opt.seed, 0xb00c));
  const EveModel eve(actual, model->scheme, model->input_f, params);
  const bool attack = params.eta <= opt.attack_log2_cap;

  std::vector<TrialOutcome> out(opt.trials);
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t t = first; t < opt.trials; t += stride) {
      const auto ts = derive_seed(opt.seed, t);
      auto b = opt.fresh_codebooks ? build_codebooks(params, model, derive_seed(ts, 100)) : books;
      out[t] = run_trial(actual, *b, eve, ts, attack);
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(opt.trials)));
  if (jobs == 1) {
    work(0, 1);
  } else {
    std::vector<std::future<void>> fs;
    for (unsigned j = 0; j < jobs; ++j) fs.push_back(std::async(std::launch::async, work, j, jobs));
    for (auto& f : fs) f.get();
  }

  SecurityEstimate e;
  e.trials = opt.trials;
  e.kappa = params.kappa;
  e.n_total = params.N();
  std::vector<std::uint64_t> keys, guesses;
  std::size_t errors = 0, eve_hits = 0;
  for (const auto& o : out) {
    keys.push_back(o.key);
    guesses.push_back(o.eve_guess);
    errors += !o.agreed;
    eve_hits += o.eve_reconstructed;
    e.null_bob += o.nulls.bob_search;
    e.null_alice1 += o.nulls.alice_level1;
    e.null_alice2 += o.nulls.alice_level2;
  }
  const double N = static_cast<double>(params.N());
  e.key_entropy = plugin_entropy(keys);
  e.key_entropy_rate = e.key_entropy / N;
  e.rate_ceiling = static_cast<double>(params.kappa) / N;
  e.error = wilson(errors, opt.trials, kZ95);
  e.eve_reconstruct = wilson(eve_hits, opt.trials, kZ95);
  if (attack) {
    e.leakage_ratio = e.key_entropy > 0.0 ? plugin_mutual_information(keys, guesses) / e.key_entropy : 0.0;
  }
  e.key_uniformity = key_uniformity(keys, params.kappa);
  return {e, std::move(out)};
}

inline std::pair<SecurityEstimate, std::vector<TrialOutcome>> estimate_security(
    const TwoDmbc& two, const AuxScheme& scheme, const Distribution& input_f, const CodingParameters& params,
    const SecurityOptions& opt)
{
  return estimate_security(two, ProtocolModel::make(two, scheme, input_f, params.epsilon), params, opt);
}

// ---------------------------------------------------------------------------
// Exact enumeration

struct ExactSecrecy {
  double h_s = 0.0;                // H(S)
  double h_s_given_z = 0.0;        // H(S | Z_f, Z_b)
  double h_fb_given_s_c_z = 0.0;   // H(F, B | S, T2, B2, Z_f, Z_b)
  double leakage = 0.0;            // H(S) - H(S|Z)
  double slack = 0.0;              // 19 N epsilon
  double view_log2 = 0.0;          // log2 |Z_f^n_f x Z_b^n_b|
  bool holds = false;              // leakage <= h_fb_given_s_c_z + slack
};

inline constexpr double kExactViewLimitLog2 = 20.0;

namespace detail {

/// Mixed-radix decode of `index` into a length-n sequence over an alphabet of size k.
inline void to_sequence(std::uint64_t index, std::size_t k, Sequence& out)
{
  for (auto& s : out) {
    s = static_cast<Symbol>(index % k);
    index /= k;
  }
}

inline double plogp(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

}  // namespace detail

/// Exact H(S), H(S|Z) and H(F,B|S,T2,B2,Z) for one fixed code over `actual`,
/// with Bob's choice uniform over the typical matches of Y_f (uniform over the
/// pool when there are none) and Z the pair (Z_f, Z_b).
inline ExactSecrecy exact_secrecy(const TwoDmbc& actual, const CodebookSet& books)
{
  const auto& p = books.params();
  const auto& m = books.model();
  const auto& keys = books.keys();
  const Dmbc& fw = actual.forward;
  const std::size_t ny = fw.y_size(), nzf = fw.z_size(), nzb = actual.backward.z_size();
  const double view = static_cast<double>(p.n_f) * std::log2(static_cast<double>(nzf)) +
                      static_cast<double>(p.n_b) * std::log2(static_cast<double>(nzb));
  const double yz = static_cast<double>(p.n_f) * std::log2(static_cast<double>(ny * nzf));
  if (view > kExactViewLimitLog2 + 1e-9 || yz > 24.0 || p.eta > 20) {
    throw std::invalid_argument("exact_secrecy: instance too large to enumerate");
  }
  const std::uint64_t n_zf = std::llround(std::pow(nzf, p.n_f)), n_zb = std::llround(std::pow(nzb, p.n_b));
  const std::uint64_t n_yf = std::llround(std::pow(ny, p.n_f));

  // Per-symbol law of (Y_f, Z_f).
  std::vector<double> q(ny * nzf, 0.0);
  for (std::size_t x = 0; x < fw.x_size(); ++x) {
    for (std::size_t y = 0; y < ny; ++y) {
      for (std::size_t z = 0; z < nzf; ++z) q[y * nzf + z] += m.input_f[x] * fw(x, y, z);
    }
  }
  // P(f, z_f)
  const std::uint64_t nF = books.pool_size();
  std::vector<double> pfz(nF * n_zf, 0.0);
  Sequence yseq(p.n_f), zseq(p.n_f);
  const auto& jt = m.bob;
  const double dn = static_cast<double>(p.n_f);
  for (std::uint64_t yi = 0; yi < n_yf; ++yi) {
    detail::to_sequence(yi, ny, yseq);
    std::vector<std::uint64_t> match;
    if (detail::within_window(jt.second().log_prob(yseq), dn * jt.second().entropy(), p.n_f, p.epsilon)) {
      for (std::uint64_t f = 0; f < nF; ++f) {
        if (detail::within_window(jt.pair_log_prob(books.pool(f), yseq), dn * jt.pair().entropy(), p.n_f,
                                  p.epsilon)) {
          match.push_back(f);
        }
      }
    }
    if (match.empty()) {
      match.resize(nF);
      for (std::uint64_t f = 0; f < nF; ++f) match[f] = f;
    }
    for (std::uint64_t zi = 0; zi < n_zf; ++zi) {
      detail::to_sequence(zi, nzf, zseq);
      double pr = 1.0;
      for (std::size_t i = 0; i < p.n_f; ++i) pr *= q[yseq[i] * nzf + zseq[i]];
      if (pr == 0.0) continue;
      pr /= static_cast<double>(match.size());
      for (auto f : match) pfz[f * n_zf + zi] += pr;
    }
  }
  // P(z_b | w1) for every codeword.
  std::vector<double> ez(m.scheme.card_W1 * nzb, 0.0);
  for (std::size_t w = 0; w < m.scheme.card_W1; ++w) {
    for (std::size_t x = 0; x < actual.backward.x_size(); ++x) {
      for (std::size_t y = 0; y < actual.backward.y_size(); ++y) {
        for (std::size_t z = 0; z < nzb; ++z) ez[w * nzb + z] += m.scheme.kernel_X_given_W1(w, x) * actual.backward(x, y, z);
      }
    }
  }
  const std::uint64_t nC = books.codeword_count();
  std::vector<double> pzw(nC * n_zb);
  Sequence zb(p.n_b);
  for (std::uint64_t c = 0; c < nC; ++c) {
    const auto w1 = books.codeword(c);
    for (std::uint64_t zi = 0; zi < n_zb; ++zi) {
      detail::to_sequence(zi, nzb, zb);
      double pr = 1.0;
      for (std::size_t i = 0; i < p.n_b; ++i) pr *= ez[w1[i] * nzb + zb[i]];
      pzw[c * n_zb + zi] = pr;
    }
  }

  const std::uint64_t nB = std::uint64_t{1} << p.eta_b, nS = std::uint64_t{1} << p.kappa;
  const double pb = 1.0 / static_cast<double>(nB);
  std::vector<double> ps(nS, 0.0), psz(nS, 0.0), pscz(nS << p.eta_2, 0.0);
  std::vector<std::uint64_t> touched, touched_c;
  double h_fbz = 0.0, h_z = 0.0, h_sz = 0.0, h_scz = 0.0;
  for (std::uint64_t zf = 0; zf < n_zf; ++zf) {
    for (std::uint64_t zbi = 0; zbi < n_zb; ++zbi) {
      double pz = 0.0;
      for (std::uint64_t f = 0; f < nF; ++f) {
        const double a = pfz[f * n_zf + zf];
        if (a == 0.0) continue;
        for (std::uint64_t b = 0; b < nB; ++b) {
          const double pr = a * pb * pzw[keys.codeword_index(f, b) * n_zb + zbi];
          if (pr == 0.0) continue;
          const std::uint64_t s = keys.key(f, b) - 1;
          const std::uint64_t sc = (s << p.eta_2) | keys.cloud_index(keys.t2_of(f), keys.b2_of(b));
          pz += pr;
          h_fbz += detail::plogp(pr);
          if (psz[s] == 0.0) touched.push_back(s);
          psz[s] += pr;
          if (pscz[sc] == 0.0) touched_c.push_back(sc);
          pscz[sc] += pr;
        }
      }
      h_z += detail::plogp(pz);
      for (auto s : touched) {
        h_sz += detail::plogp(psz[s]);
        ps[s] += psz[s];
        psz[s] = 0.0;
      }
      for (auto c : touched_c) {
        h_scz += detail::plogp(pscz[c]);
        pscz[c] = 0.0;
      }
      touched.clear();
      touched_c.clear();
    }
  }
  ExactSecrecy r;
  for (double v : ps) r.h_s += detail::plogp(v);
  r.h_s_given_z = h_sz - h_z;
  r.h_fb_given_s_c_z = h_fbz - h_scz;
  r.leakage = r.h_s - r.h_s_given_z;
  r.slack = 19.0 * static_cast<double>(p.N()) * p.epsilon;
  r.view_log2 = view;
  r.holds = r.leakage <= r.h_fb_given_s_c_z + r.slack + kInfoTol;
  return r;
}

}  // namespace ske
