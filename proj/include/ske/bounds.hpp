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

// Capacity expressions for the one-way wiretap channel and the two-way pair:
// one-way secrecy capacity, the auxiliary-variable lower bound L_A / L_B,
// the conditional-information upper bound and the degraded capacity.
//
// The optimizers call small closed-form evaluators written against the
// channel tensors directly. rate_terms() recomputes the same quantities from
// explicitly built joint tensors and is what the reported terms come from.

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "channel.hpp"
#include "infotheory.hpp"
#include "optimize.hpp"

namespace ske {

/// Test-channel variables for one direction. V is drawn from the first
/// channel's Bob output; (W2, W1) is a superposition pair driving the second
/// channel's input through kernel_X_given_W1.
struct AuxScheme {
  std::size_t card_V = 1, card_W1 = 1, card_W2 = 1;
  Kernel kernel_V;            // P(v|y), |Y| rows of size card_V
  Distribution dist_W2;       // P(w2)
  Kernel kernel_W1_given_W2;  // P(w1|w2)
  Kernel kernel_X_given_W1;   // P(x|w1) on the second channel's input

  /// Throws invalid_argument unless all shapes agree with `two`.
  void validate(const TwoDmbc& two) const
  {
    auto fail = [](const std::string& m) { throw std::invalid_argument("AuxScheme: " + m); };
    if (card_V == 0 || card_W1 == 0 || card_W2 == 0) fail("cardinalities must be >= 1");
    if (kernel_V.in_size() != two.forward.y_size() || kernel_V.out_size() != card_V) fail("kernel_V shape");
    if (dist_W2.size() != card_W2) fail("dist_W2 size");
    if (kernel_W1_given_W2.in_size() != card_W2 || kernel_W1_given_W2.out_size() != card_W1) {
      fail("kernel_W1_given_W2 shape");
    }
    if (kernel_X_given_W1.in_size() != card_W1 || kernel_X_given_W1.out_size() != two.backward.x_size()) {
      fail("kernel_X_given_W1 shape");
    }
  }

  /// Law of the second channel's input induced by (W2, W1).
  Distribution induced_input() const
  {
    std::vector<double> p(kernel_X_given_W1.out_size(), 0.0);
    for (std::size_t w2 = 0; w2 < card_W2; ++w2) {
      for (std::size_t w1 = 0; w1 < card_W1; ++w1) {
        const double m = dist_W2[w2] * kernel_W1_given_W2(w2, w1);
        for (std::size_t x = 0; x < p.size(); ++x) p[x] += m * kernel_X_given_W1(w1, x);
      }
    }
    return Distribution::normalized(std::move(p));
  }

  friend bool operator==(const AuxScheme&, const AuxScheme&) = default;
};

/// Which eavesdropper output enters the V-rate of direction B. Symmetric uses
/// the eavesdropper of the channel V is drawn from. Literal uses the other
/// channel's eavesdropper, which is independent of V in the single-letter
/// joint, so that term is zero.
enum class RateReading { Symmetric, Literal };

struct RateTerms {
  double r_s1 = 0.0;            // I(V;X) - I(V;Z)
  double r_s2 = 0.0;            // I(W1;Y|W2) - I(W1;Z|W2), before clamping
  double constraint_lhs = 0.0;  // I(V;Y|X), per first-channel use
  double constraint_rhs = 0.0;  // I(W1;Y), per second-channel use
};

/// Every information quantity of one direction, from explicit joints.
struct SchemeInformation {
  double i_v_x = 0, i_v_y = 0, i_v_z = 0, i_v_y_given_x = 0;
  double i_w1_y = 0, i_w2_y = 0, i_w1_y_given_w2 = 0, i_w1_z_given_w2 = 0;
};

struct Ratio {
  int nf = 1;
  int nb = 1;
  friend bool operator==(const Ratio&, const Ratio&) = default;
};

inline std::vector<Ratio> default_ratio_grid()
{
  std::vector<Ratio> r;
  for (int a = 1; a <= 9; ++a) {
    for (int b = 1; b <= 9; ++b) {
      if (std::gcd(a, b) == 1) r.push_back({a, b});
    }
  }
  r.push_back({1, 99});
  r.push_back({99, 1});
  return r;
}

struct BoundMetadata {
  double grid = 0.0;
  int restarts = 0;
  std::size_t evaluations = 0;
  std::string method;
};

struct BoundResult {
  double value = 0.0;
  std::vector<Distribution> inputs;  // argmax input laws; forward first when both apply
  std::optional<AuxScheme> scheme;
  std::optional<Ratio> ratio;        // n_f : n_b
  std::optional<RateTerms> terms;
  std::string direction;             // "A", "B", "forward", "backward" or "" when not applicable
  bool feasible = true;              // false when no ratio satisfied the rate constraint
  BoundMetadata meta;
  std::vector<BoundResult> parts;    // per-direction or per-channel detail
};

// ---------------------------------------------------------------------------
// Exact evaluation on explicit joints

namespace detail {

/// (W2, W1, X, Y, Z) for the second channel of a direction.
inline JointDistribution backward_joint(const Dmbc& ch, const AuxScheme& s)
{
  auto j = JointDistribution::from(s.dist_W2, "W2")
               .extend({0}, s.kernel_W1_given_W2, "W1")
               .extend({1}, s.kernel_X_given_W1, "X")
               .extend({2}, ch.pair_kernel(), "YZ");
  auto shape = j.shape();
  shape.back() = ch.y_size();
  shape.push_back(ch.z_size());
  return JointDistribution(std::move(shape), {j.probs().begin(), j.probs().end()}, {"W2", "W1", "X", "Y", "Z"});
}

}  // namespace detail

inline SchemeInformation scheme_information(const TwoDmbc& two, const AuxScheme& s, const Distribution& input_f)
{
  s.validate(two);
  const auto f = two.forward.joint(input_f).extend({1}, s.kernel_V, "V");  // X Y Z V
  const auto b = detail::backward_joint(two.backward, s);                  // W2 W1 X Y Z
  SchemeInformation r;
  r.i_v_x = mutual_information(f, {3}, {0});
  r.i_v_y = mutual_information(f, {3}, {1});
  r.i_v_z = mutual_information(f, {3}, {2});
  r.i_v_y_given_x = conditional_mutual_information(f, {3}, {1}, {0});
  r.i_w1_y = mutual_information(b, {1}, {3});
  r.i_w2_y = mutual_information(b, {0}, {3});
  r.i_w1_y_given_w2 = conditional_mutual_information(b, {1}, {3}, {0});
  r.i_w1_z_given_w2 = conditional_mutual_information(b, {1}, {4}, {0});
  return r;
}

inline RateTerms rate_terms(const TwoDmbc& two, const AuxScheme& s, const Distribution& input_f,
                            RateReading reading = RateReading::Symmetric)
{
  const auto info = scheme_information(two, s, input_f);
  double eve_term = info.i_v_z;
  if (reading == RateReading::Literal) {
    const auto v = two.forward.joint(input_f).extend({1}, s.kernel_V).marginal({3});
    const auto z = detail::backward_joint(two.backward, s).marginal({4});
    eve_term = mutual_information(v.independent_product(z), {0}, {1});
  }
  return {info.i_v_x - eve_term, info.i_w1_y_given_w2 - info.i_w1_z_given_w2, info.i_v_y_given_x, info.i_w1_y};
}

// ---------------------------------------------------------------------------
// Closed-form evaluators used inside the optimizers

namespace detail {

inline double h(const double* p, std::size_t n)
{
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] > 0.0) s -= p[i] * std::log2(p[i]);
  }
  return s;
}

inline double h(const std::vector<double>& p) { return h(p.data(), p.size()); }

/// Per-input-symbol entropies of the Bob, Eve and joint output rows.
struct RowEntropies {
  std::vector<double> y, z, yz;
  std::vector<double> py, pz;  // P(y|x), P(z|x), row-major

  explicit RowEntropies(const Dmbc& ch)
  {
    const std::size_t nx = ch.x_size(), ny = ch.y_size(), nz = ch.z_size();
    py.assign(nx * ny, 0.0);
    pz.assign(nx * nz, 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t a = 0; a < ny; ++a) {
        for (std::size_t c = 0; c < nz; ++c) {
          py[x * ny + a] += ch(x, a, c);
          pz[x * nz + c] += ch(x, a, c);
        }
      }
      y.push_back(h(&py[x * ny], ny));
      z.push_back(h(&pz[x * nz], nz));
      yz.push_back(h(ch.tensor().data() + x * ny * nz, ny * nz));
    }
  }
};

/// I(X;Y) - I(X;Z)
inline double wiretap_objective(const Dmbc& ch, const RowEntropies& r, const std::vector<double>& px)
{
  const std::size_t ny = ch.y_size(), nz = ch.z_size();
  std::vector<double> y(ny, 0.0), z(nz, 0.0);
  double cond = 0.0;
  for (std::size_t x = 0; x < px.size(); ++x) {
    if (px[x] <= 0.0) continue;
    for (std::size_t a = 0; a < ny; ++a) y[a] += px[x] * r.py[x * ny + a];
    for (std::size_t c = 0; c < nz; ++c) z[c] += px[x] * r.pz[x * nz + c];
    cond += px[x] * (r.z[x] - r.y[x]);
  }
  return h(y) - h(z) + cond;
}

/// I(X;Y|Z)
inline double conditional_objective(const Dmbc& ch, const RowEntropies& r, const std::vector<double>& px)
{
  const std::size_t ny = ch.y_size(), nz = ch.z_size();
  std::vector<double> yz(ny * nz, 0.0), z(nz, 0.0);
  double cond = 0.0;
  const auto w = ch.tensor();
  for (std::size_t x = 0; x < px.size(); ++x) {
    if (px[x] <= 0.0) continue;
    for (std::size_t i = 0; i < ny * nz; ++i) yz[i] += px[x] * w[x * ny * nz + i];
    for (std::size_t c = 0; c < nz; ++c) z[c] += px[x] * r.pz[x * nz + c];
    cond += px[x] * (r.z[x] - r.yz[x]);
  }
  return cond + h(yz) - h(z);
}

/// I(W;Y) - I(W;Z) for blocks [P_W, P(x|w=0), P(x|w=1), ...].
inline double aux_wiretap_objective(const Dmbc& ch, const RowEntropies& r, const SimplexPoint& pt)
{
  const std::size_t ny = ch.y_size(), nz = ch.z_size(), nx = ch.x_size();
  std::vector<double> y(ny, 0.0), z(nz, 0.0), qy(ny), qz(nz);
  double cond = 0.0;
  const auto& pw = pt[0];
  for (std::size_t w = 0; w < pw.size(); ++w) {
    if (pw[w] <= 0.0) continue;
    std::fill(qy.begin(), qy.end(), 0.0);
    std::fill(qz.begin(), qz.end(), 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
      const double m = pt[1 + w][x];
      if (m <= 0.0) continue;
      for (std::size_t a = 0; a < ny; ++a) qy[a] += m * r.py[x * ny + a];
      for (std::size_t c = 0; c < nz; ++c) qz[c] += m * r.pz[x * nz + c];
    }
    for (std::size_t a = 0; a < ny; ++a) y[a] += pw[w] * qy[a];
    for (std::size_t c = 0; c < nz; ++c) z[c] += pw[w] * qz[c];
    cond += pw[w] * (h(qz) - h(qy));
  }
  return h(y) - h(z) + cond;
}

/// Objective of one direction of the lower bound. Block layout:
///   0                      P_X on the first channel
///   1 .. |Y|               P(v|y) rows
///   1+|Y|                  P_W2
///   next card_W2 blocks    P(w1|w2) rows
///   next card_W1 blocks    P(x|w1) rows on the second channel
/// Terms of the untouched channel are cached between calls.
class DirectionObjective {
 public:
  DirectionObjective(const Dmbc& first, const Dmbc& second, std::size_t cv, std::size_t c1, std::size_t c2,
                     std::vector<Ratio> ratios, RateReading reading)
      : f_(first), b_(second), rb_(second), cv_(cv), c1_(c1), c2_(c2), ratios_(std::move(ratios)), reading_(reading)
  {
  }

  std::vector<std::size_t> block_sizes() const
  {
    std::vector<std::size_t> s{f_.x_size()};
    s.insert(s.end(), f_.y_size(), cv_);
    s.push_back(c2_);
    s.insert(s.end(), c2_, c1_);
    s.insert(s.end(), c1_, b_.x_size());
    return s;
  }

  std::size_t first_backward_block() const { return 1 + f_.y_size(); }

  double operator()(const SimplexPoint& pt, std::size_t changed)
  {
    if (changed == kAllBlocks || changed < first_backward_block()) forward(pt);
    if (changed == kAllBlocks || changed >= first_backward_block()) backward(pt);
    return combine().first;
  }

  /// (objective, index of the best feasible ratio or -1)
  std::pair<double, int> combine() const
  {
    double best = -std::numeric_limits<double>::infinity();
    int arg = -1;
    double least_violation = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < ratios_.size(); ++k) {
      const double a = ratios_[k].nf, b = ratios_[k].nb;
      const double excess = a * lhs_ - (b * rhs_ - 1e-12);
      if (excess <= 0.0) {
        const double v = (a * r1_ + b * std::max(0.0, r2_)) / (a + b);
        if (v > best) {
          best = v;
          arg = static_cast<int>(k);
        }
      } else {
        least_violation = std::min(least_violation, excess / (a + b));
      }
    }
    // Infeasible points score below every feasible one and still point toward feasibility.
    if (arg < 0) return {-1.0 - least_violation, -1};
    return {best, arg};
  }

 private:
  void forward(const SimplexPoint& pt)
  {
    const std::size_t nx = f_.x_size(), ny = f_.y_size(), nz = f_.z_size();
    const auto& px = pt[0];
    xv_.assign(nx * cv_, 0.0);
    zv_.assign(nz * cv_, 0.0);
    xyv_.assign(nx * ny * cv_, 0.0);
    xy_.assign(nx * ny, 0.0);
    v_.assign(cv_, 0.0);
    z_.assign(nz, 0.0);
    std::vector<double> pxv(nx, 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
      if (px[x] <= 0.0) continue;
      for (std::size_t y = 0; y < ny; ++y) {
        for (std::size_t z = 0; z < nz; ++z) {
          const double m = px[x] * f_(x, y, z);
          if (m <= 0.0) continue;
          xy_[x * ny + y] += m;
          z_[z] += m;
          const auto& row = pt[1 + y];
          for (std::size_t v = 0; v < cv_; ++v) zv_[z * cv_ + v] += m * row[v];
        }
        const double m = xy_[x * ny + y];
        const auto& row = pt[1 + y];
        for (std::size_t v = 0; v < cv_; ++v) {
          xyv_[(x * ny + y) * cv_ + v] = m * row[v];
          xv_[x * cv_ + v] += m * row[v];
          v_[v] += m * row[v];
        }
      }
    }
    const double hx = h(px), hv = h(v_), hxv = h(xv_);
    const double i_vx = hx + hv - hxv;
    const double i_vz = reading_ == RateReading::Literal ? 0.0 : h(z_) + hv - h(zv_);
    r1_ = i_vx - i_vz;
    lhs_ = std::max(0.0, hxv + h(xy_) - h(xyv_) - hx);
  }

  void backward(const SimplexPoint& pt)
  {
    const std::size_t nx = b_.x_size(), ny = b_.y_size(), nz = b_.z_size();
    const std::size_t base = first_backward_block();
    const auto& pw2 = pt[base];
    qy_.assign(c1_ * ny, 0.0);
    qz_.assign(c1_ * nz, 0.0);
    hqy_.assign(c1_, 0.0);
    hqz_.assign(c1_, 0.0);
    for (std::size_t w1 = 0; w1 < c1_; ++w1) {
      const auto& xr = pt[base + 1 + c2_ + w1];
      for (std::size_t x = 0; x < nx; ++x) {
        if (xr[x] <= 0.0) continue;
        for (std::size_t a = 0; a < ny; ++a) qy_[w1 * ny + a] += xr[x] * rb_.py[x * ny + a];
        for (std::size_t c = 0; c < nz; ++c) qz_[w1 * nz + c] += xr[x] * rb_.pz[x * nz + c];
      }
      hqy_[w1] = h(&qy_[w1 * ny], ny);
      hqz_[w1] = h(&qz_[w1 * nz], nz);
    }
    // With H(Y|W2,W1) = sum P(w2,w1) H(qy_w1):
    //   I(W1;Y|W2) = H(Y|W2) - H(Y|W1,W2),  I(W1;Y) = H(Y) - H(Y|W1).
    std::vector<double> w1(c1_, 0.0), y(ny, 0.0), yw(ny), zw(nz);
    double hy_w2 = 0.0, hz_w2 = 0.0, hy_w12 = 0.0, hz_w12 = 0.0;
    for (std::size_t w2 = 0; w2 < c2_; ++w2) {
      if (pw2[w2] <= 0.0) continue;
      const auto& row = pt[base + 1 + w2];
      std::fill(yw.begin(), yw.end(), 0.0);
      std::fill(zw.begin(), zw.end(), 0.0);
      for (std::size_t a = 0; a < c1_; ++a) {
        if (row[a] <= 0.0) continue;
        w1[a] += pw2[w2] * row[a];
        for (std::size_t k = 0; k < ny; ++k) yw[k] += row[a] * qy_[a * ny + k];
        for (std::size_t k = 0; k < nz; ++k) zw[k] += row[a] * qz_[a * nz + k];
        hy_w12 += pw2[w2] * row[a] * hqy_[a];
        hz_w12 += pw2[w2] * row[a] * hqz_[a];
      }
      hy_w2 += pw2[w2] * h(yw);
      hz_w2 += pw2[w2] * h(zw);
    }
    double hy_w1 = 0.0;
    for (std::size_t a = 0; a < c1_; ++a) {
      if (w1[a] <= 0.0) continue;
      hy_w1 += w1[a] * hqy_[a];
      for (std::size_t k = 0; k < ny; ++k) y[k] += w1[a] * qy_[a * ny + k];
    }
    r2_ = std::max(0.0, hy_w2 - hy_w12) - std::max(0.0, hz_w2 - hz_w12);
    rhs_ = std::max(0.0, h(y) - hy_w1);
  }

  const Dmbc& f_;
  const Dmbc& b_;
  RowEntropies rb_;
  std::size_t cv_, c1_, c2_;
  std::vector<Ratio> ratios_;
  RateReading reading_;
  double r1_ = 0, lhs_ = 0, r2_ = 0, rhs_ = 0;
  std::vector<double> xv_, zv_, xyv_, xy_, v_, z_, qy_, qz_, hqy_, hqz_;
};

inline std::vector<double> point_mass(std::size_t k, std::size_t i)
{
  std::vector<double> p(k, 0.0);
  p[i % k] = 1.0;
  return p;
}

inline std::vector<double> resize_law(const std::vector<double>& p, std::size_t k)
{
  std::vector<double> out(k, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) out[i % k] += p[i];
  return out;
}

inline std::vector<double> blend_uniform(std::vector<double> p, double w)
{
  for (auto& v : p) v = (1.0 - w) * v + w / static_cast<double>(p.size());
  return p;
}

inline Kernel kernel_from_blocks(const SimplexPoint& pt, std::size_t first, std::size_t count)
{
  std::vector<Distribution> rows;
  for (std::size_t i = 0; i < count; ++i) rows.push_back(Distribution::normalized(pt[first + i]));
  return Kernel(std::move(rows));
}

inline std::string method_name(std::size_t largest_block, int restarts)
{
  std::ostringstream o;
  if (largest_block <= 2) {
    o << "grid+golden";
  } else {
    o << "pairwise coordinate ascent";
  }
  o << ", " << restarts << " restart" << (restarts == 1 ? "" : "s");
  return o.str();
}

/// Maximizes a single-block objective over P_X of `ch`.
template <class F>
BoundResult maximize_input(const Dmbc& ch, F&& objective, double grid, int restarts, std::uint64_t seed)
{
  const std::size_t nx = ch.x_size();
  BoundResult res;
  res.meta.grid = grid;
  if (nx == 1) {
    res.value = std::max(0.0, objective(std::vector<double>{1.0}));
    res.inputs = {Distribution::point(1, 0)};
    res.meta.restarts = 1;
    res.meta.method = "single input symbol";
    return res;
  }
  OptimizerOptions opt;
  opt.grid = grid;
  opt.seed = seed;
  // A binary simplex is one segment and the first sweep already scans it exhaustively.
  opt.restarts = nx == 2 ? 1 : std::max(1, restarts);
  std::vector<SimplexPoint> starts{{std::vector<double>(nx, 1.0 / static_cast<double>(nx))}};
  auto r = maximize_over_simplices({nx}, [&](const SimplexPoint& p, std::size_t) { return objective(p[0]); }, opt,
                                   starts);
  res.value = std::max(0.0, r.value);
  res.inputs = {Distribution::normalized(r.argmax[0])};
  res.meta.restarts = opt.restarts;
  res.meta.evaluations = r.evaluations;
  res.meta.method = method_name(nx, opt.restarts);
  return res;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Public bounds

/// max over P_X of I(X;Y) - I(X;Z), clamped at 0.
inline BoundResult secrecy_capacity_simple(const Dmbc& ch, double grid = 0.01, int restarts = 20,
                                           std::uint64_t seed = 1)
{
  const detail::RowEntropies r(ch);
  return detail::maximize_input(
      ch, [&](const std::vector<double>& p) { return detail::wiretap_objective(ch, r, p); }, grid, restarts, seed);
}

/// max over P_W, P(x|w) of I(W;Y) - I(W;Z), clamped at 0. One start puts
/// W = X at the simple optimizer's argmax, so the result is never below the
/// simple bound when card_W >= |X|.
inline BoundResult secrecy_capacity_aux(const Dmbc& ch, std::size_t card_w, double grid = 0.01, int restarts = 20,
                                        std::uint64_t seed = 1)
{
  if (card_w == 0) throw std::invalid_argument("secrecy_capacity_aux: card_W must be >= 1");
  const std::size_t nx = ch.x_size();
  const detail::RowEntropies r(ch);
  const auto simple = secrecy_capacity_simple(ch, grid, restarts, seed);

  std::vector<std::size_t> sizes{card_w};
  sizes.insert(sizes.end(), card_w, nx);
  SimplexPoint as_x;
  as_x.push_back(detail::resize_law({simple.inputs[0].probs().begin(), simple.inputs[0].probs().end()}, card_w));
  for (std::size_t w = 0; w < card_w; ++w) as_x.push_back(detail::point_mass(nx, w));

  OptimizerOptions opt;
  opt.grid = grid;
  opt.restarts = std::max(1, restarts);
  opt.seed = seed;
  auto best = maximize_over_simplices(
      sizes, [&](const SimplexPoint& p, std::size_t) { return detail::aux_wiretap_objective(ch, r, p); }, opt, {as_x});

  BoundResult res;
  res.value = std::max(0.0, best.value);
  std::vector<double> px(nx, 0.0);
  for (std::size_t w = 0; w < card_w; ++w) {
    for (std::size_t x = 0; x < nx; ++x) px[x] += best.argmax[0][w] * best.argmax[1 + w][x];
  }
  res.inputs = {Distribution::normalized(std::move(px))};
  res.meta = {grid, opt.restarts, best.evaluations + simple.meta.evaluations,
              detail::method_name(std::max(card_w, nx), opt.restarts)};
  return res;
}

/// max over P_X of I(X;Y|Z) for one channel.
inline BoundResult conditional_information_max(const Dmbc& ch, double grid = 0.01, int restarts = 20,
                                               std::uint64_t seed = 1)
{
  const detail::RowEntropies r(ch);
  return detail::maximize_input(
      ch, [&](const std::vector<double>& p) { return detail::conditional_objective(ch, r, p); }, grid, restarts, seed);
}

/// Larger of the two per-channel maxima of I(X;Y|Z).
inline BoundResult upper_bound(const TwoDmbc& two, double grid = 0.01, int restarts = 20, std::uint64_t seed = 1)
{
  auto f = conditional_information_max(two.forward, grid, restarts, seed);
  auto b = conditional_information_max(two.backward, grid, restarts, seed);
  f.direction = "forward";
  b.direction = "backward";
  BoundResult res = f.value >= b.value ? f : b;
  res.inputs = {f.inputs[0], b.inputs[0]};
  res.meta.evaluations = f.meta.evaluations + b.meta.evaluations;
  res.parts = {f, b};
  return res;
}

struct CardinalityCaps {
  std::size_t v = 0, w1 = 0, w2 = 0;  // 0 selects |Y|+1, |X|+1, |X| of the relevant channel
};

struct LowerBoundOptions {
  double grid = 0.01;
  int restarts = 20;
  std::vector<Ratio> ratios = default_ratio_grid();
  CardinalityCaps caps;
  RateReading reading = RateReading::Symmetric;
  std::uint64_t seed = 1;
  int jobs = 1;  // > 1 evaluates the two directions concurrently
};

namespace detail {

/// One direction: V on `two.forward`, (W2, W1) on `two.backward`, ratio as (first : second).
inline BoundResult lower_bound_direction(const TwoDmbc& two, const LowerBoundOptions& o, RateReading reading)
{
  const Dmbc& f = two.forward;
  const Dmbc& b = two.backward;
  const std::size_t cv = o.caps.v ? o.caps.v : f.y_size() + 1;
  const std::size_t c1 = o.caps.w1 ? o.caps.w1 : b.x_size() + 1;
  const std::size_t c2 = o.caps.w2 ? o.caps.w2 : b.x_size();
  if (o.ratios.empty()) throw std::invalid_argument("lower_bound: empty ratio grid");
  for (const auto& r : o.ratios) {
    if (r.nf <= 0 || r.nb <= 0) throw std::invalid_argument("lower_bound: ratio entries must be positive");
  }

  DirectionObjective obj(f, b, cv, c1, c2, o.ratios, reading);
  const auto sizes = obj.block_sizes();

  // Seeded starts: V constant or V = Y, W2 constant, W1 = X at the one-way optimum.
  const auto simple = secrecy_capacity_simple(b, o.grid, o.restarts, o.seed);
  const std::vector<double> pb(simple.inputs[0].probs().begin(), simple.inputs[0].probs().end());
  auto make_start = [&](bool v_is_y) {
    SimplexPoint s;
    s.push_back(std::vector<double>(f.x_size(), 1.0 / static_cast<double>(f.x_size())));
    for (std::size_t y = 0; y < f.y_size(); ++y) s.push_back(point_mass(cv, v_is_y ? y : 0));
    s.push_back(point_mass(c2, 0));
    for (std::size_t w2 = 0; w2 < c2; ++w2) s.push_back(blend_uniform(resize_law(pb, c1), 0.02));
    for (std::size_t w1 = 0; w1 < c1; ++w1) s.push_back(point_mass(b.x_size(), w1));
    return s;
  };

  OptimizerOptions opt;
  opt.grid = o.grid;
  opt.restarts = std::max(2, o.restarts);
  opt.seed = o.seed;
  auto best = maximize_over_simplices(
      sizes, [&](const SimplexPoint& p, std::size_t changed) { return obj(p, changed); }, opt,
      {make_start(false), make_start(true)});

  obj(best.argmax, kAllBlocks);
  const auto [value, ratio_index] = obj.combine();

  BoundResult res;
  const std::size_t bb = obj.first_backward_block();
  AuxScheme s;
  s.card_V = cv;
  s.card_W1 = c1;
  s.card_W2 = c2;
  s.kernel_V = kernel_from_blocks(best.argmax, 1, f.y_size());
  s.dist_W2 = Distribution::normalized(best.argmax[bb]);
  s.kernel_W1_given_W2 = kernel_from_blocks(best.argmax, bb + 1, c2);
  s.kernel_X_given_W1 = kernel_from_blocks(best.argmax, bb + 1 + c2, c1);
  const auto input_f = Distribution::normalized(best.argmax[0]);
  res.terms = rate_terms(two, s, input_f, reading);
  res.inputs = {input_f, s.induced_input()};
  res.scheme = std::move(s);
  res.feasible = ratio_index >= 0;
  res.value = res.feasible ? std::max(0.0, value) : 0.0;
  if (res.feasible) res.ratio = o.ratios[static_cast<std::size_t>(ratio_index)];
  std::size_t largest = 0;
  for (auto k : sizes) largest = std::max(largest, k);
  res.meta = {o.grid, opt.restarts, best.evaluations + simple.meta.evaluations, method_name(largest, opt.restarts)};
  return res;
}

}  // namespace detail

/// max{L_A, L_B} over input laws, auxiliary schemes within the caps and the
/// ratio grid. Direction A draws V from the forward channel and codes over
/// the backward channel; direction B swaps the roles. Ratios are always
/// reported as n_f : n_b. When no point satisfies the rate constraint the
/// value is 0 and `feasible` is false.
inline BoundResult lower_bound(const TwoDmbc& two, const LowerBoundOptions& o = {})
{
  auto run_a = [&] {
    auto r = detail::lower_bound_direction(two, o, RateReading::Symmetric);
    r.direction = "A";
    return r;
  };
  auto run_b = [&] {
    LowerBoundOptions flipped = o;
    for (auto& r : flipped.ratios) std::swap(r.nf, r.nb);
    auto r = detail::lower_bound_direction(two.swapped(), flipped, o.reading);
    r.direction = "B";
    if (r.ratio) std::swap(r.ratio->nf, r.ratio->nb);
    std::swap(r.inputs[0], r.inputs[1]);  // forward input first
    return r;
  };

  BoundResult a, b;
  if (o.jobs > 1) {
    auto fut = std::async(std::launch::async, run_b);
    a = run_a();
    b = fut.get();
  } else {
    a = run_a();
    b = run_b();
  }

  BoundResult res = (b.feasible && (!a.feasible || b.value > a.value)) ? b : a;
  res.meta.evaluations = a.meta.evaluations + b.meta.evaluations;
  res.parts = {a, b};
  return res;
}

struct DegradedSplits {
  ChannelSplit forward;
  ChannelSplit backward;
};

/// Capacity of a degraded pair: max of I(X_O;Y_O|Z_O) over the obverse
/// subchannel of each direction. Throws invalid_argument naming the failing
/// residual when either channel does not decompose under its split.
inline BoundResult degraded_capacity(const TwoDmbc& two, const DegradedSplits& splits, double grid = 0.01,
                                     int restarts = 20, std::uint64_t seed = 1, double tol = kInfoTol)
{
  auto sub = [&](const Dmbc& ch, const ChannelSplit& split, const char* name) {
    const auto rep = analyze_degraded(ch, split, tol);
    if (!rep.degraded()) {
      std::ostringstream m;
      m << "degraded_capacity: " << name << " channel is not degraded under split " << split.to_string()
        << " (independence residual " << rep.residuals.independence << ", obverse residual "
        << rep.residuals.obverse << ", reverse residual " << rep.residuals.reverse << ", tol " << tol << ")";
      throw std::invalid_argument(m.str());
    }
    return obverse_subchannel(ch, split);
  };
  const Dmbc fo = sub(two.forward, splits.forward, "forward");
  const Dmbc bo = sub(two.backward, splits.backward, "backward");
  return upper_bound({fo, bo}, grid, restarts, seed);
}

}  // namespace ske
