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

// Two-round key agreement over a pair of broadcast channels.
//
// Round 1: Alice sends an i.i.d. X_f block; Bob quantizes his output Y_f to a
// cover sequence V from a pool, whose index F carries a bin index T. Round 2:
// Bob sends (T, B), B uniform, with a superposition code (W2 cloud, W1
// satellite). Alice decodes (T, B) from Y_b, then V from bin T using X_f.
// The key is a balanced function S = g(F, B).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_set>
#include <utility>
#include <vector>

#include "bounds.hpp"
#include "channel.hpp"
#include "random.hpp"
#include "typicality.hpp"

namespace ske {

/// Thrown when no valid parameter set exists for the requested configuration.
struct ProtocolInfeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Desk-scale limits on code sizes.
struct ParameterCaps {
  std::size_t eta_f = 20;                             // pool exponent
  std::size_t pool_cells = std::size_t{1} << 24;      // 2^eta_f * n_f symbols
  std::size_t codebook_log2 = 20;                     // eta_t + eta_b
  std::size_t codebook_cells = std::size_t{1} << 22;  // 2^(eta_t + eta_b) * n_b symbols
};

/// Exponents before integer rounding and capping.
struct RealExponents {
  double eta_f = 0, eta_t = 0, eta_t1 = 0, eta_t2 = 0, eta_b = 0, eta_b1 = 0, eta_b2 = 0, eta = 0, kappa = 0;
};

struct CodingParameters {
  std::size_t n_f = 0, n_b = 0, n_b1 = 0, n_b2 = 0;
  double alpha = 0, beta = 0, epsilon = 0;
  std::size_t eta_f = 0, eta_t = 0, eta_t1 = 0, eta_t2 = 0;
  std::size_t eta_b = 0, eta_b1 = 0, eta_b2 = 0;
  std::size_t eta_1 = 0, eta_2 = 0, eta = 0, kappa = 0, gamma = 0;

  SchemeInformation info;
  RealExponents exact;
  std::vector<std::string> capped;  // exponents reduced by a cap

  std::size_t N() const noexcept { return n_f + n_b; }

  /// Throws invalid_argument naming the first broken invariant.
  void validate() const
  {
    auto fail = [](const std::string& m) { throw std::invalid_argument("CodingParameters: " + m); };
    if (n_b != n_b1 + n_b2) fail("n_b != n_b1 + n_b2");
    if (eta != eta_f + eta_b) fail("eta != eta_f + eta_b");
    if (eta_t != eta_t1 + eta_t2) fail("eta_t != eta_t1 + eta_t2");
    if (eta_b != eta_b1 + eta_b2) fail("eta_b != eta_b1 + eta_b2");
    if (eta_1 != eta_t1 + eta_b1 || eta_2 != eta_t2 + eta_b2) fail("eta_1 / eta_2 split");
    if (eta_t > eta_f) fail("eta_t > eta_f");
    if (gamma > eta || kappa != eta - gamma) fail("kappa != eta - gamma");
    if (kappa < 1) fail("kappa < 1");
    if (eta > 62) fail("eta exceeds 62 bits");
  }

  friend bool operator==(const CodingParameters& a, const CodingParameters& b)
  {
    auto key = [](const CodingParameters& p) {
      return std::tuple(p.n_f, p.n_b, p.n_b1, p.n_b2, p.alpha, p.beta, p.epsilon, p.eta_f, p.eta_t, p.eta_t1,
                        p.eta_t2, p.eta_b, p.eta_b1, p.eta_b2, p.eta_1, p.eta_2, p.eta, p.kappa, p.gamma);
    };
    return key(a) == key(b);
  }
};

namespace detail {

inline std::uint64_t low_mask(std::size_t bits)
{
  return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

/// Calls fn(counts) for every composition of n into k nonnegative parts.
template <class Fn>
void for_each_type(std::size_t k, std::size_t n, Fn&& fn)
{
  std::vector<std::size_t> c(k, 0);
  auto rec = [&](auto&& self, std::size_t i, std::size_t left) -> void {
    if (i + 1 == k) {
      c[i] = left;
      fn(c);
      return;
    }
    for (std::size_t v = 0; v <= left; ++v) {
      c[i] = v;
      self(self, i + 1, left - v);
    }
  };
  rec(rec, 0, n);
}

inline double log2_type_count(std::size_t k, std::size_t n)
{
  return (std::lgamma(static_cast<double>(n + k)) - std::lgamma(static_cast<double>(k)) -
          std::lgamma(static_cast<double>(n + 1))) /
         std::log(2.0);
}

inline bool type_is_typical(const std::vector<std::size_t>& counts, const LogTable& lp, double eps)
{
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    s += static_cast<double>(counts[i]) * lp[i];
    n += counts[i];
  }
  return within_window(s, static_cast<double>(n) * lp.entropy(), n, eps);
}

inline double log2_multinomial(const std::vector<std::size_t>& counts, std::size_t n)
{
  double r = std::lgamma(static_cast<double>(n + 1));
  for (auto c : counts) r -= std::lgamma(static_cast<double>(c + 1));
  return r / std::log(2.0);
}

}  // namespace detail

inline constexpr double kTypeEnumerationLimit = 22.0;  // log2 of the number of types we are willing to walk

/// log2 of the number of eps-typical length-n sequences under p. Returns
/// nullopt when there are too many types to enumerate.
inline std::optional<double> log2_typical_count(const Distribution& p, std::size_t n, double eps)
{
  if (detail::log2_type_count(p.size(), n) > kTypeEnumerationLimit) return std::nullopt;
  const LogTable lp(p);
  double acc = -std::numeric_limits<double>::infinity();
  detail::for_each_type(p.size(), n, [&](const std::vector<std::size_t>& c) {
    if (!detail::type_is_typical(c, lp, eps)) return;
    const double l = detail::log2_multinomial(c, n);
    const double hi = std::max(acc, l);
    acc = hi + std::log2(std::exp2(acc - hi) + std::exp2(l - hi));
  });
  return acc;
}

/// Law of V induced by the input law and Bob's quantizer.
inline Distribution cover_law(const TwoDmbc& two, const AuxScheme& s, const Distribution& input_f)
{
  return two.forward.joint(input_f).extend({1}, s.kernel_V).marginal_distribution(3);
}

inline CodingParameters derive_parameters(const TwoDmbc& two, const AuxScheme& scheme, const Distribution& input_f,
                                          std::size_t n_f, double alpha, double beta, double epsilon,
                                          const ParameterCaps& caps = {})
{
  if (n_f == 0) throw std::invalid_argument("derive_parameters: n_f must be >= 1");
  if (!(alpha > 0.0 && beta > 0.0 && epsilon > 0.0)) {
    throw std::invalid_argument("derive_parameters: alpha, beta, epsilon must be > 0");
  }
  CodingParameters p;
  p.n_f = n_f;
  p.alpha = alpha;
  p.beta = beta;
  p.epsilon = epsilon;
  p.info = scheme_information(two, scheme, input_f);
  const auto& I = p.info;
  const double nf = static_cast<double>(n_f);

  p.n_b = static_cast<std::size_t>(std::ceil(nf * alpha / beta - 1e-9));
  if (p.n_b == 0) throw ProtocolInfeasible("n_b rounds to 0");
  const double N = static_cast<double>(n_f + p.n_b);
  if (!(3.0 * N * epsilon < nf * alpha)) {
    throw ProtocolInfeasible("slack: 3 N epsilon = " + std::to_string(3.0 * N * epsilon) +
                             " must be below n_f alpha = " + std::to_string(nf * alpha));
  }
  if (I.i_w1_y <= kNormTol) throw ProtocolInfeasible("I(W1;Y_b) = 0: the backward code carries nothing");
  p.n_b2 = static_cast<std::size_t>(std::ceil(nf * (I.i_v_y_given_x + 3.0 * alpha) / I.i_w1_y - 1e-9));
  if (p.n_b2 > p.n_b) {
    throw ProtocolInfeasible("backward length: n_b2 = " + std::to_string(p.n_b2) + " exceeds n_b = " +
                             std::to_string(p.n_b));
  }
  p.n_b1 = p.n_b - p.n_b2;
  const double nb = static_cast<double>(p.n_b), nb1 = static_cast<double>(p.n_b1),
               nb2 = static_cast<double>(p.n_b2);

  auto& e = p.exact;
  e.eta_f = nf * (I.i_v_y + alpha);
  e.eta_t = nb2 * (I.i_w1_y - beta);
  e.eta_t2 = nb2 * I.i_w2_y;
  e.eta_t1 = e.eta_t - e.eta_t2;
  e.eta_b = nb1 * (I.i_w1_y - beta);
  e.eta_b2 = nb1 * I.i_w2_y;
  e.eta_b1 = e.eta_b - e.eta_b2;
  e.eta = e.eta_f + e.eta_b;
  e.kappa = nf * (I.i_v_x - I.i_v_z) + nb * std::max(0.0, I.i_w1_y_given_w2 - I.i_w1_z_given_w2);

  auto down = [](double x) { return x <= 0.0 ? std::size_t{0} : static_cast<std::size_t>(std::floor(x + 1e-9)); };
  auto log2_floor = [](std::size_t v) {
    std::size_t r = 0;
    while (v > 1) {
      v >>= 1;
      ++r;
    }
    return r;
  };

  p.eta_f = down(e.eta_f);
  auto cap_f = [&](std::size_t limit, const char* why) {
    if (p.eta_f > limit) {
      p.eta_f = limit;
      p.capped.push_back(std::string("eta_f: ") + why);
    }
  };
  cap_f(caps.eta_f, "exponent cap");
  if (auto lc = log2_typical_count(cover_law(two, scheme, input_f), n_f, epsilon)) {
    cap_f(*lc < 0.0 ? 0 : down(*lc), "typical set size");
  }
  cap_f(log2_floor(std::max<std::size_t>(1, caps.pool_cells / n_f)), "pool memory budget");

  p.eta_t = down(e.eta_t);
  p.eta_b = down(e.eta_b);
  if (p.eta_t > p.eta_f) {
    p.eta_t = p.eta_f;
    p.capped.push_back("eta_t: bounded by eta_f");
  }
  const std::size_t code_limit =
      std::min(caps.codebook_log2, log2_floor(std::max<std::size_t>(1, caps.codebook_cells / p.n_b)));
  if (p.eta_t + p.eta_b > code_limit) {
    const std::size_t excess = p.eta_t + p.eta_b - code_limit;
    const std::size_t from_b = std::min(excess, p.eta_b);
    p.eta_b -= from_b;
    p.eta_t -= excess - from_b;
    p.capped.push_back("eta_t + eta_b: codebook budget");
  }
  p.eta_t2 = std::min(down(e.eta_t2), p.eta_t);
  p.eta_t1 = p.eta_t - p.eta_t2;
  p.eta_b2 = std::min(down(e.eta_b2), p.eta_b);
  p.eta_b1 = p.eta_b - p.eta_b2;
  p.eta_1 = p.eta_t1 + p.eta_b1;
  p.eta_2 = p.eta_t2 + p.eta_b2;
  p.eta = p.eta_f + p.eta_b;

  const double g = std::ceil(e.eta - e.kappa - 1e-9);
  p.gamma = g <= 0.0 ? 0 : static_cast<std::size_t>(g);
  if (p.gamma + 1 > p.eta) {
    throw ProtocolInfeasible("kappa < 1 after rounding: eta = " + std::to_string(p.eta) +
                             ", gamma = " + std::to_string(p.gamma));
  }
  p.kappa = p.eta - p.gamma;
  p.validate();
  return p;
}

/// Laws used by Alice and Bob, from the channel the code was designed for.
struct ProtocolModel {
  AuxScheme scheme;
  Distribution input_f;
  Distribution p_v;
  Distribution p_w1;
  JointTypicality bob;     // (V, Y_f)
  JointTypicality alice2;  // (V, X_f)
  JointTypicality alice1;  // (W1, Y_b)
  double epsilon = 0.1;

  static std::shared_ptr<const ProtocolModel> make(const TwoDmbc& design, const AuxScheme& s,
                                                   const Distribution& input_f, double epsilon)
  {
    s.validate(design);
    const auto f = design.forward.joint(input_f).extend({1}, s.kernel_V, "V");  // X Y Z V
    const auto b = detail::backward_joint(design.backward, s);                  // W2 W1 X Y Z
    auto m = std::make_shared<ProtocolModel>();
    m->scheme = s;
    m->input_f = input_f;
    m->p_v = f.marginal_distribution(3);
    m->p_w1 = b.marginal_distribution(1);
    m->bob = JointTypicality(f.marginal({3, 1}), epsilon);
    m->alice2 = JointTypicality(f.marginal({3, 0}), epsilon);
    m->alice1 = JointTypicality(b.marginal({1, 3}), epsilon);
    m->epsilon = epsilon;
    return m;
  }
};

/// Eve's laws P_{V,Z_f} and P_{W1,Z_b}, from the channel she actually observes.
struct EveModel {
  JointTypicality forward;   // (V, Z_f)
  JointTypicality backward;  // (W1, Z_b)
  std::optional<BipartiteJointTypicality> tester;

  EveModel(const TwoDmbc& actual, const AuxScheme& s, const Distribution& input_f, const CodingParameters& p)
  {
    const auto f = actual.forward.joint(input_f).extend({1}, s.kernel_V).marginal({3, 2});
    const auto b = detail::backward_joint(actual.backward, s).marginal({1, 4});
    forward = JointTypicality(f, p.epsilon);
    backward = JointTypicality(b, p.epsilon);
    tester.emplace(f, b, TypicalityParams{p.epsilon, p.n_f, p.n_b});
  }
};

/// Index bookkeeping and the balanced key function g.
///
/// F has eta_f bits; its top eta_t bits are T = (T2, T1). B has eta_b bits,
/// split as (B2, B1). The W2 codeword is indexed by (T2, B2) and the W1
/// codeword within that cloud by (T1, B1). The key packs the remaining bits of
/// (F, B) through a keyed bijection m, appends (T2, B2) as the low eta_2 bits,
/// and drops the low gamma bits. Every key value therefore has 2^gamma
/// preimages, and within one (T2, B2) class 2^(gamma - eta_2) when
/// gamma >= eta_2.
class KeyMap {
 public:
  KeyMap() = default;

  KeyMap(const CodingParameters& p, std::uint64_t seed) : p_(p), w_(p.eta - p.eta_2)
  {
    Rng rng(derive_seed(seed, 0x6b6579));
    mul_ = rng.next() | 1u;
    add_ = rng.next();
    shift_ = std::max<std::size_t>(1, (w_ + 1) / 2);
    inv_ = mul_;
    for (int i = 0; i < 6; ++i) inv_ *= 2 - mul_ * inv_;
  }

  std::uint64_t t_of(std::uint64_t f) const { return f >> (p_.eta_f - p_.eta_t); }
  std::uint64_t t1_of(std::uint64_t f) const { return t_of(f) & detail::low_mask(p_.eta_t1); }
  std::uint64_t t2_of(std::uint64_t f) const { return t_of(f) >> p_.eta_t1; }
  std::uint64_t b1_of(std::uint64_t b) const { return b & detail::low_mask(p_.eta_b1); }
  std::uint64_t b2_of(std::uint64_t b) const { return b >> p_.eta_b1; }

  std::uint64_t cloud_index(std::uint64_t t2, std::uint64_t b2) const { return (t2 << p_.eta_b2) | b2; }

  /// Flat index of the W1 codeword carrying (T, B).
  std::uint64_t codeword_index(std::uint64_t f, std::uint64_t b) const
  {
    const std::uint64_t inner = (t1_of(f) << p_.eta_b1) | b1_of(b);
    return (cloud_index(t2_of(f), b2_of(b)) << p_.eta_1) | inner;
  }

  /// (T, B) carried by a flat W1 codeword index.
  std::pair<std::uint64_t, std::uint64_t> decode_codeword_index(std::uint64_t idx) const
  {
    const std::uint64_t inner = idx & detail::low_mask(p_.eta_1), cloud = idx >> p_.eta_1;
    const std::uint64_t t2 = cloud >> p_.eta_b2, b2 = cloud & detail::low_mask(p_.eta_b2);
    const std::uint64_t t1 = inner >> p_.eta_b1, b1 = inner & detail::low_mask(p_.eta_b1);
    return {(t2 << p_.eta_t1) | t1, (b2 << p_.eta_b1) | b1};
  }

  /// Key value in {1, ..., 2^kappa}.
  std::uint64_t key(std::uint64_t f, std::uint64_t b) const
  {
    const std::uint64_t r = ((f & detail::low_mask(p_.eta_f - p_.eta_t2)) << p_.eta_b1) | b1_of(b);
    const std::uint64_t y = (mix(r) << p_.eta_2) | cloud_index(t2_of(f), b2_of(b));
    return (y >> p_.gamma) + 1;
  }

  /// All (f, b) with key s and the given (t2, b2).
  std::vector<std::pair<std::uint64_t, std::uint64_t>> candidates(std::uint64_t s, std::uint64_t t2,
                                                                  std::uint64_t b2) const
  {
    if (s < 1 || s > (std::uint64_t{1} << p_.kappa) || t2 >> p_.eta_t2 || b2 >> p_.eta_b2) {
      throw std::out_of_range("KeyMap::candidates: argument out of range");
    }
    const std::uint64_t hi = s - 1, c = cloud_index(t2, b2);
    std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
    if (p_.gamma >= p_.eta_2) {
      const std::size_t free = p_.gamma - p_.eta_2;
      const std::uint64_t base = hi << free;
      out.reserve(std::size_t{1} << free);
      for (std::uint64_t j = 0; j < (std::uint64_t{1} << free); ++j) out.push_back(unpack(base | j, t2, b2));
    } else {
      const std::size_t shown = p_.eta_2 - p_.gamma;
      if ((hi & detail::low_mask(shown)) == (c >> p_.gamma)) out.push_back(unpack(hi >> shown, t2, b2));
    }
    return out;
  }

 private:
  std::uint64_t xorshift(std::uint64_t x) const { return x ^ (x >> shift_); }

  std::uint64_t unxorshift(std::uint64_t y) const
  {
    std::uint64_t x = 0;
    for (std::size_t k = 0; k < w_; k += shift_) x ^= y >> k;
    return x;
  }

  std::uint64_t mix(std::uint64_t x) const
  {
    if (w_ == 0) return 0;
    const std::uint64_t m = detail::low_mask(w_);
    return xorshift((mul_ * xorshift(x) + add_) & m);
  }

  std::uint64_t unmix(std::uint64_t y) const
  {
    if (w_ == 0) return 0;
    const std::uint64_t m = detail::low_mask(w_);
    return unxorshift((inv_ * (unxorshift(y) - add_)) & m);
  }

  std::pair<std::uint64_t, std::uint64_t> unpack(std::uint64_t m, std::uint64_t t2, std::uint64_t b2) const
  {
    const std::uint64_t r = unmix(m);
    const std::uint64_t f = (t2 << (p_.eta_f - p_.eta_t2)) | (r >> p_.eta_b1);
    return {f, (b2 << p_.eta_b1) | (r & detail::low_mask(p_.eta_b1))};
  }

  CodingParameters p_;
  std::size_t w_ = 0, shift_ = 1;
  std::uint64_t mul_ = 1, add_ = 0, inv_ = 1;
};

/// Pool of cover sequences and the two-level backward codebook. Immutable
/// after construction; safe to share across threads.
class CodebookSet {
 public:
  CodebookSet(const CodingParameters& p, std::shared_ptr<const ProtocolModel> model, std::uint64_t seed)
      : params_(p), model_(std::move(model)), seed_(seed), keys_(p, seed)
  {
    p.validate();
    build_pool(Rng(derive_seed(seed, 1)));
    build_backward(Rng(derive_seed(seed, 2)));
  }

  const CodingParameters& params() const noexcept { return params_; }
  const ProtocolModel& model() const noexcept { return *model_; }
  std::shared_ptr<const ProtocolModel> model_ptr() const noexcept { return model_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const KeyMap& keys() const noexcept { return keys_; }

  std::uint64_t pool_size() const noexcept { return std::uint64_t{1} << params_.eta_f; }
  std::uint64_t cloud_count() const noexcept { return std::uint64_t{1} << params_.eta_2; }
  std::uint64_t codeword_count() const noexcept { return std::uint64_t{1} << (params_.eta_1 + params_.eta_2); }

  std::span<const Symbol> pool(std::uint64_t f) const { return row(pool_, f, params_.n_f); }
  std::span<const Symbol> cloud(std::uint64_t i) const { return row(c2_, i, params_.n_b); }
  std::span<const Symbol> codeword(std::uint64_t i) const { return row(c1_, i, params_.n_b); }
  bool codeword_typical(std::uint64_t i) const { return c1_typical_[i] != 0; }

  /// Pool indices of bin t.
  std::pair<std::uint64_t, std::uint64_t> bin(std::uint64_t t) const
  {
    const std::size_t w = params_.eta_f - params_.eta_t;
    return {t << w, (t + 1) << w};
  }

  bool pool_enumerated() const noexcept { return enumerated_; }

 private:
  static std::span<const Symbol> row(const Sequence& v, std::uint64_t i, std::size_t n)
  {
    return std::span<const Symbol>(v).subspan(i * n, n);
  }

  void build_pool(Rng rng)
  {
    const std::size_t n = params_.n_f;
    const std::uint64_t want = pool_size();
    const auto& pv = model_->p_v;
    const double eps = params_.epsilon;
    pool_.reserve(want * n);

    const auto lc = log2_typical_count(pv, n, eps);
    if (lc && *lc < static_cast<double>(params_.eta_f) - 1e-9) {
      throw std::runtime_error("build_codebooks: fewer than 2^eta_f typical sequences");
    }
    if (lc && *lc <= kTypeEnumerationLimit && std::exp2(*lc) <= 4.0 * static_cast<double>(want)) {
      // Small typical set: list it and draw without replacement.
      std::vector<Sequence> all;
      const LogTable lp(pv);
      detail::for_each_type(pv.size(), n, [&](const std::vector<std::size_t>& c) {
        if (!detail::type_is_typical(c, lp, eps)) return;
        Sequence s;
        for (std::size_t i = 0; i < c.size(); ++i) s.insert(s.end(), c[i], static_cast<Symbol>(i));
        do all.push_back(s);
        while (std::next_permutation(s.begin(), s.end()));
      });
      rng.shuffle(all);
      for (std::uint64_t i = 0; i < want; ++i) pool_.insert(pool_.end(), all[i].begin(), all[i].end());
      enumerated_ = true;
      return;
    }
    std::unordered_set<std::string> seen;
    const std::uint64_t budget = 64 * want + 100000;
    for (std::uint64_t draws = 0; seen.size() < want; ++draws) {
      if (draws >= budget) {
        throw std::runtime_error("build_codebooks: rejection sampling found only " + std::to_string(seen.size()) +
                                 " of 2^" + std::to_string(params_.eta_f) + " typical sequences");
      }
      const auto s = rng.iid(pv, n);
      if (!is_typical(s, pv, eps)) continue;
      if (seen.emplace(s.begin(), s.end()).second) pool_.insert(pool_.end(), s.begin(), s.end());
    }
  }

  void build_backward(Rng rng)
  {
    const std::size_t n = params_.n_b;
    const auto& s = model_->scheme;
    c2_.reserve(cloud_count() * n);
    c1_.reserve(codeword_count() * n);
    for (std::uint64_t i = 0; i < cloud_count(); ++i) {
      const auto w2 = rng.iid(s.dist_W2, n);
      c2_.insert(c2_.end(), w2.begin(), w2.end());
    }
    const std::uint64_t per_cloud = std::uint64_t{1} << params_.eta_1;
    for (std::uint64_t i = 0; i < cloud_count(); ++i) {
      const auto w2 = cloud(i);
      for (std::uint64_t j = 0; j < per_cloud; ++j) {
        for (std::size_t k = 0; k < n; ++k) c1_.push_back(static_cast<Symbol>(rng.categorical(s.kernel_W1_given_W2.row(w2[k]))));
      }
    }
    const auto& t = model_->alice1;
    c1_typical_.resize(codeword_count());
    for (std::uint64_t i = 0; i < codeword_count(); ++i) {
      c1_typical_[i] = detail::within_window(t.first().log_prob(codeword(i)),
                                             static_cast<double>(n) * t.first().entropy(), n, params_.epsilon);
    }
  }

  CodingParameters params_;
  std::shared_ptr<const ProtocolModel> model_;
  std::uint64_t seed_ = 0;
  KeyMap keys_;
  Sequence pool_, c2_, c1_;
  std::vector<char> c1_typical_;
  bool enumerated_ = false;
};

inline std::shared_ptr<const CodebookSet> build_codebooks(const CodingParameters& p,
                                                          std::shared_ptr<const ProtocolModel> model,
                                                          std::uint64_t seed)
{
  return std::make_shared<const CodebookSet>(p, std::move(model), seed);
}

struct NullFlags {
  bool bob_search = false;
  bool alice_level1 = false;
  bool alice_level2 = false;

  bool any() const noexcept { return bob_search || alice_level1 || alice_level2; }

  friend bool operator==(const NullFlags&, const NullFlags&) = default;
};

struct Transcript {
  Sequence x_f, y_f, z_f, v, w1, x_b, y_b, z_b;
  std::uint64_t F = 0, T = 0, B = 0, T1 = 0, T2 = 0, B1 = 0, B2 = 0;
  std::optional<std::uint64_t> T_hat, B_hat, F_hat;
  std::optional<Sequence> v_hat;
  std::uint64_t S = 0;
  std::optional<std::uint64_t> S_hat;
  NullFlags nulls;

  /// A NULL anywhere counts as disagreement.
  bool agreed() const noexcept { return !nulls.any() && S_hat && *S_hat == S; }

  friend bool operator==(const Transcript&, const Transcript&) = default;
};

namespace detail {

/// Indices i in [lo, hi) whose candidate sequence is jointly typical with
/// `obs`; stops counting past `limit`.
template <class Seq>
std::vector<std::uint64_t> typical_matches(const JointTypicality& jt, std::span<const Symbol> obs, std::uint64_t lo,
                                           std::uint64_t hi, Seq&& candidate, std::size_t limit)
{
  std::vector<std::uint64_t> out;
  const std::size_t n = obs.size();
  const double dn = static_cast<double>(n), eps = jt.epsilon();
  if (!within_window(jt.second().log_prob(obs), dn * jt.second().entropy(), n, eps)) return out;
  for (std::uint64_t i = lo; i < hi && out.size() < limit; ++i) {
    const auto c = candidate(i);
    if (c.size() != n) continue;  // filtered out by the caller
    if (!within_window(jt.first().log_prob(c), dn * jt.first().entropy(), n, eps)) continue;
    if (within_window(jt.pair_log_prob(c, obs), dn * jt.pair().entropy(), n, eps)) out.push_back(i);
  }
  return out;
}

}  // namespace detail

/// One execution over the channel pair `actual`. Never throws on protocol
/// failure: every failed search is recorded in `nulls`.
inline Transcript run_protocol(const TwoDmbc& actual, const CodebookSet& books, std::uint64_t seed)
{
  const auto& p = books.params();
  const auto& m = books.model();
  const auto& keys = books.keys();
  Transcript tr;

  Rng xf_rng(derive_seed(seed, 1));
  tr.x_f = xf_rng.iid(m.input_f, p.n_f);
  std::tie(tr.y_f, tr.z_f) = transmit(actual.forward, tr.x_f, derive_seed(seed, 2));

  // Bob: a uniformly chosen jointly typical pool entry (reservoir sampling),
  // which is the first hit of a random-order scan.
  {
    Rng pick(derive_seed(seed, 3));
    const std::size_t n = p.n_f;
    const double dn = static_cast<double>(n), eps = p.epsilon;
    const auto& jt = m.bob;
    std::uint64_t seen = 0, chosen = 0;
    // Pool entries are P_V-typical by construction; only Y_f and the pair are tested.
    if (detail::within_window(jt.second().log_prob(tr.y_f), dn * jt.second().entropy(), n, eps)) {
      for (std::uint64_t f = 0; f < books.pool_size(); ++f) {
        if (detail::within_window(jt.pair_log_prob(books.pool(f), tr.y_f), dn * jt.pair().entropy(), n, eps)) {
          if (pick.below(++seen) == 0) chosen = f;
        }
      }
    }
    if (seen == 0) {
      tr.nulls.bob_search = true;
      chosen = pick.below(books.pool_size());
    }
    tr.F = chosen;
  }
  const auto v = books.pool(tr.F);
  tr.v.assign(v.begin(), v.end());
  tr.T = keys.t_of(tr.F);
  tr.T1 = keys.t1_of(tr.F);
  tr.T2 = keys.t2_of(tr.F);
  tr.B = Rng(derive_seed(seed, 4)).below(std::uint64_t{1} << p.eta_b);
  tr.B1 = keys.b1_of(tr.B);
  tr.B2 = keys.b2_of(tr.B);
  tr.S = keys.key(tr.F, tr.B);

  const auto w1 = books.codeword(keys.codeword_index(tr.F, tr.B));
  tr.w1.assign(w1.begin(), w1.end());
  {
    Rng dmc(derive_seed(seed, 5));
    tr.x_b.resize(p.n_b);
    for (std::size_t i = 0; i < p.n_b; ++i) {
      tr.x_b[i] = static_cast<Symbol>(dmc.categorical(m.scheme.kernel_X_given_W1.row(tr.w1[i])));
    }
  }
  std::tie(tr.y_b, tr.z_b) = transmit(actual.backward, tr.x_b, derive_seed(seed, 6));

  // Alice, level 1: the unique W1 codeword typical with Y_b.
  const auto level1 = detail::typical_matches(
      m.alice1, tr.y_b, 0, books.codeword_count(),
      [&](std::uint64_t i) { return books.codeword_typical(i) ? books.codeword(i) : std::span<const Symbol>(); },
      2);
  if (level1.size() != 1) {
    tr.nulls.alice_level1 = true;
    return tr;
  }
  std::tie(tr.T_hat, tr.B_hat) = keys.decode_codeword_index(level1.front());

  // Level 2: the unique cover sequence in bin T-hat typical with X_f.
  const auto [lo, hi] = books.bin(*tr.T_hat);
  const auto level2 =
      detail::typical_matches(m.alice2, tr.x_f, lo, hi, [&](std::uint64_t f) { return books.pool(f); }, 2);
  if (level2.size() != 1) {
    tr.nulls.alice_level2 = true;
    return tr;
  }
  tr.F_hat = level2.front();
  const auto vh = books.pool(*tr.F_hat);
  tr.v_hat = Sequence(vh.begin(), vh.end());
  tr.S_hat = keys.key(*tr.F_hat, *tr.B_hat);
  return tr;
}

/// Eve's decoder with genie side information (key s and cloud index t2, b2):
/// searches the candidate set for the unique pair (v, w1) bipartite jointly
/// typical with (z_f, z_b). A single candidate is returned without testing.
inline std::optional<std::pair<std::uint64_t, std::uint64_t>> eve_reconstruct(const CodebookSet& books,
                                                                               const EveModel& eve, std::uint64_t s,
                                                                               std::uint64_t t2, std::uint64_t b2,
                                                                               std::span<const Symbol> z_f,
                                                                               std::span<const Symbol> z_b)
{
  const auto& keys = books.keys();
  const auto cands = keys.candidates(s, t2, b2);
  if (cands.size() == 1) return cands.front();
  std::optional<std::pair<std::uint64_t, std::uint64_t>> hit;
  for (const auto& [f, b] : cands) {
    if (eve.tester->accepts(books.pool(f), books.codeword(keys.codeword_index(f, b)), z_f, z_b)) {
      if (hit) return std::nullopt;
      hit = std::pair{f, b};
    }
  }
  return hit;
}

/// The same decoder without side information: the unique (f, b) over the
/// whole code. Returns its key, or nullopt. Cost 2^eta plus one pass over
/// the pool and the codebook.
inline std::optional<std::uint64_t> eve_guess_key(const CodebookSet& books, const EveModel& eve,
                                                  std::span<const Symbol> z_f, std::span<const Symbol> z_b)
{
  const auto& p = books.params();
  const auto& F = eve.forward;
  const auto& Bk = eve.backward;
  const double nf = static_cast<double>(p.n_f), nb = static_cast<double>(p.n_b);
  const double eps = p.epsilon;
  const double ly = F.second().log_prob(z_f) + Bk.second().log_prob(z_b);
  if (!detail::within_window(ly, nf * F.second().entropy() + nb * Bk.second().entropy(), p.N(), eps)) {
    return std::nullopt;
  }
  const double hx = nf * F.first().entropy() + nb * Bk.first().entropy();
  const double hp = nf * F.pair().entropy() + nb * Bk.pair().entropy();

  std::vector<double> fx(books.pool_size()), fp(books.pool_size());
  for (std::uint64_t f = 0; f < books.pool_size(); ++f) {
    fx[f] = F.first().log_prob(books.pool(f));
    fp[f] = F.pair_log_prob(books.pool(f), z_f);
  }
  std::vector<double> bx(books.codeword_count()), bp(books.codeword_count());
  for (std::uint64_t i = 0; i < books.codeword_count(); ++i) {
    bx[i] = Bk.first().log_prob(books.codeword(i));
    bp[i] = Bk.pair_log_prob(books.codeword(i), z_b);
  }
  const auto& keys = books.keys();
  std::optional<std::uint64_t> hit;
  const std::uint64_t nbv = std::uint64_t{1} << p.eta_b;
  for (std::uint64_t f = 0; f < books.pool_size(); ++f) {
    if (!std::isfinite(fx[f]) || !std::isfinite(fp[f])) continue;
    for (std::uint64_t b = 0; b < nbv; ++b) {
      const auto c = keys.codeword_index(f, b);
      if (!detail::within_window(fx[f] + bx[c], hx, p.N(), eps)) continue;
      if (!detail::within_window(fp[f] + bp[c], hp, p.N(), eps)) continue;
      if (hit) return std::nullopt;
      hit = keys.key(f, b);
    }
  }
  return hit;
}

}  // namespace ske
