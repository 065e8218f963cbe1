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

// Discrete memoryless broadcast channels X -> (Y, Z), where Y is the
// legitimate receiver and Z the eavesdropper, plus degradedness tests.

#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "infotheory.hpp"
#include "random.hpp"

namespace ske {

/// Broadcast channel P(y,z|x), stored as a dense [x][y][z] tensor.
class Dmbc {
 public:
  Dmbc() = default;

  Dmbc(std::size_t x_size, std::size_t y_size, std::size_t z_size, std::vector<double> tensor)
      : nx_(x_size), ny_(y_size), nz_(z_size), w_(std::move(tensor))
  {
    if (nx_ == 0 || ny_ == 0 || nz_ == 0) throw std::invalid_argument("Dmbc: empty alphabet");
    if (nx_ > 256 || ny_ > 256 || nz_ > 256) throw std::invalid_argument("Dmbc: alphabet larger than 256");
    if (w_.size() != nx_ * ny_ * nz_) throw std::invalid_argument("Dmbc: tensor size mismatch");
    for (std::size_t x = 0; x < nx_; ++x) {
      try {
        detail::check_probabilities(std::span<const double>(w_).subspan(x * ny_ * nz_, ny_ * nz_), kNormTol,
                                    "Dmbc row");
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string(e.what()) + " (input symbol " + std::to_string(x) + ")");
      }
    }
  }

  /// Y and Z drawn independently given X.
  static Dmbc independent(const Kernel& to_bob, const Kernel& to_eve)
  {
    if (to_bob.in_size() != to_eve.in_size()) throw std::invalid_argument("Dmbc::independent: input sizes differ");
    const std::size_t nx = to_bob.in_size(), ny = to_bob.out_size(), nz = to_eve.out_size();
    std::vector<double> w;
    w.reserve(nx * ny * nz);
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t y = 0; y < ny; ++y) {
        for (std::size_t z = 0; z < nz; ++z) w.push_back(to_bob(x, y) * to_eve(x, z));
      }
    }
    return Dmbc(nx, ny, nz, std::move(w));
  }

  /// X -> Y -> Z: Eve sees a degraded copy of Bob's output.
  static Dmbc obverse_cascade(const Kernel& to_bob, const Kernel& bob_to_eve)
  {
    if (bob_to_eve.in_size() != to_bob.out_size()) throw std::invalid_argument("Dmbc::obverse_cascade: sizes");
    const std::size_t nx = to_bob.in_size(), ny = to_bob.out_size(), nz = bob_to_eve.out_size();
    std::vector<double> w;
    w.reserve(nx * ny * nz);
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t y = 0; y < ny; ++y) {
        for (std::size_t z = 0; z < nz; ++z) w.push_back(to_bob(x, y) * bob_to_eve(y, z));
      }
    }
    return Dmbc(nx, ny, nz, std::move(w));
  }

  /// X -> Z -> Y: Bob sees a degraded copy of Eve's output.
  static Dmbc reverse_cascade(const Kernel& to_eve, const Kernel& eve_to_bob)
  {
    if (eve_to_bob.in_size() != to_eve.out_size()) throw std::invalid_argument("Dmbc::reverse_cascade: sizes");
    const std::size_t nx = to_eve.in_size(), nz = to_eve.out_size(), ny = eve_to_bob.out_size();
    std::vector<double> w;
    w.reserve(nx * ny * nz);
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t y = 0; y < ny; ++y) {
        for (std::size_t z = 0; z < nz; ++z) w.push_back(to_eve(x, z) * eve_to_bob(z, y));
      }
    }
    return Dmbc(nx, ny, nz, std::move(w));
  }

  /// Two channels side by side: X = [X_O, X_R] with symbol x_o * |X_R| + x_r,
  /// and likewise for Y and Z.
  static Dmbc product(const Dmbc& o, const Dmbc& r)
  {
    const std::size_t nx = o.nx_ * r.nx_, ny = o.ny_ * r.ny_, nz = o.nz_ * r.nz_;
    std::vector<double> w(nx * ny * nz, 0.0);
    for (std::size_t xo = 0; xo < o.nx_; ++xo)
      for (std::size_t xr = 0; xr < r.nx_; ++xr)
        for (std::size_t yo = 0; yo < o.ny_; ++yo)
          for (std::size_t yr = 0; yr < r.ny_; ++yr)
            for (std::size_t zo = 0; zo < o.nz_; ++zo)
              for (std::size_t zr = 0; zr < r.nz_; ++zr) {
                const std::size_t x = xo * r.nx_ + xr, y = yo * r.ny_ + yr, z = zo * r.nz_ + zr;
                w[(x * ny + y) * nz + z] = o(xo, yo, zo) * r(xr, yr, zr);
              }
    return Dmbc(nx, ny, nz, std::move(w));
  }

  std::size_t x_size() const noexcept { return nx_; }
  std::size_t y_size() const noexcept { return ny_; }
  std::size_t z_size() const noexcept { return nz_; }
  double operator()(std::size_t x, std::size_t y, std::size_t z) const { return w_[(x * ny_ + y) * nz_ + z]; }
  std::span<const double> tensor() const noexcept { return w_; }

  /// P(y,z|x) flattened over y * |Z| + z.
  Kernel pair_kernel() const
  {
    std::vector<Distribution> rows;
    for (std::size_t x = 0; x < nx_; ++x) {
      rows.push_back(Distribution::normalized({w_.begin() + x * ny_ * nz_, w_.begin() + (x + 1) * ny_ * nz_}));
    }
    return Kernel(std::move(rows));
  }

  Kernel bob_kernel() const { return marginal_kernel(true); }
  Kernel eve_kernel() const { return marginal_kernel(false); }

  /// Joint law of (X, Y, Z) for the given input law; axes 0, 1, 2.
  JointDistribution joint(const Distribution& input) const
  {
    if (input.size() != nx_) throw std::invalid_argument("Dmbc::joint: input law size");
    std::vector<double> p(w_.size());
    for (std::size_t x = 0; x < nx_; ++x) {
      for (std::size_t i = 0; i < ny_ * nz_; ++i) p[x * ny_ * nz_ + i] = input[x] * w_[x * ny_ * nz_ + i];
    }
    return JointDistribution({nx_, ny_, nz_}, std::move(p), {"X", "Y", "Z"});
  }

  friend bool operator==(const Dmbc&, const Dmbc&) = default;

 private:
  Kernel marginal_kernel(bool bob) const
  {
    std::vector<Distribution> rows;
    for (std::size_t x = 0; x < nx_; ++x) {
      std::vector<double> r(bob ? ny_ : nz_, 0.0);
      for (std::size_t y = 0; y < ny_; ++y) {
        for (std::size_t z = 0; z < nz_; ++z) r[bob ? y : z] += (*this)(x, y, z);
      }
      rows.push_back(Distribution::normalized(std::move(r)));
    }
    return Kernel(std::move(rows));
  }

  std::size_t nx_ = 0, ny_ = 0, nz_ = 0;
  std::vector<double> w_;
};

/// Forward channel (Alice -> Bob, Eve) and backward channel (Bob -> Alice, Eve).
struct TwoDmbc {
  Dmbc forward;
  Dmbc backward;

  TwoDmbc swapped() const { return {backward, forward}; }
};

/// Sends `x` through `ch` symbol by symbol. Returns (Bob's output, Eve's output).
inline std::pair<Sequence, Sequence> transmit(const Dmbc& ch, const Sequence& x, Rng& rng)
{
  const std::size_t nyz = ch.y_size() * ch.z_size();
  std::pair<Sequence, Sequence> out;
  out.first.reserve(x.size());
  out.second.reserve(x.size());
  for (Symbol s : x) {
    if (s >= ch.x_size()) throw std::out_of_range("transmit: input symbol out of range");
    const std::size_t yz = rng.categorical(ch.tensor().subspan(s * nyz, nyz));
    out.first.push_back(static_cast<Symbol>(yz / ch.z_size()));
    out.second.push_back(static_cast<Symbol>(yz % ch.z_size()));
  }
  return out;
}

inline std::pair<Sequence, Sequence> transmit(const Dmbc& ch, const Sequence& x, std::uint64_t seed)
{
  Rng rng(seed);
  return transmit(ch, x, rng);
}

// ---- degradedness ----

/// I(X;Z|Y) under `input`; zero iff X <-> Y <-> Z.
inline double obverse_residual(const Dmbc& ch, const Distribution& input)
{
  return conditional_mutual_information(ch.joint(input), {0}, {2}, {1});
}

/// I(X;Y|Z) under `input`; zero iff X <-> Z <-> Y.
inline double reverse_residual(const Dmbc& ch, const Distribution& input)
{
  return conditional_mutual_information(ch.joint(input), {0}, {1}, {2});
}

inline bool check_obversely_degraded(const Dmbc& ch, const Distribution& input, double tol = kInfoTol)
{
  return obverse_residual(ch, input) <= tol;
}

inline bool check_obversely_degraded(const Dmbc& ch, double tol = kInfoTol)
{
  return check_obversely_degraded(ch, Distribution::uniform(ch.x_size()), tol);
}

inline bool check_reversely_degraded(const Dmbc& ch, const Distribution& input, double tol = kInfoTol)
{
  return reverse_residual(ch, input) <= tol;
}

inline bool check_reversely_degraded(const Dmbc& ch, double tol = kInfoTol)
{
  return check_reversely_degraded(ch, Distribution::uniform(ch.x_size()), tol);
}

/// Factorization of one alphabet as |O| x |R|; symbol = o * |R| + r.
struct AlphabetSplit {
  std::size_t o = 1;
  std::size_t r = 1;
  friend bool operator==(const AlphabetSplit&, const AlphabetSplit&) = default;
};

struct ChannelSplit {
  AlphabetSplit x, y, z;

  /// Everything in the obverse part (R trivial).
  static ChannelSplit obverse_only(const Dmbc& ch)
  {
    return {{ch.x_size(), 1}, {ch.y_size(), 1}, {ch.z_size(), 1}};
  }
  /// Everything in the reverse part (O trivial).
  static ChannelSplit reverse_only(const Dmbc& ch)
  {
    return {{1, ch.x_size()}, {1, ch.y_size()}, {1, ch.z_size()}};
  }

  std::string to_string() const
  {
    std::ostringstream os;
    os << x.o << 'x' << x.r << ':' << y.o << 'x' << y.r << ':' << z.o << 'x' << z.r;
    return os.str();
  }

  friend bool operator==(const ChannelSplit&, const ChannelSplit&) = default;
};

struct DegradednessResiduals {
  double independence = 0.0;  // (Y_O,Z_O) <-> X_O <-> X_R <-> (Y_R,Z_R)
  double obverse = 0.0;       // I(X_O; Z_O | Y_O)
  double reverse = 0.0;       // I(X_R; Y_R | Z_R)
};

struct DegradednessReport {
  bool independent_subchannels = false;
  bool obversely_degraded = false;  // of the O subchannel
  bool reversely_degraded = false;  // of the R subchannel
  std::optional<ChannelSplit> subchannel_split;
  DegradednessResiduals residuals;
  double tol = kInfoTol;

  bool degraded() const { return independent_subchannels && obversely_degraded && reversely_degraded; }
};

namespace detail {

inline void check_split(const Dmbc& ch, const ChannelSplit& s)
{
  auto bad = [](const AlphabetSplit& a, std::size_t n) { return a.o == 0 || a.r == 0 || a.o * a.r != n; };
  if (bad(s.x, ch.x_size()) || bad(s.y, ch.y_size()) || bad(s.z, ch.z_size())) {
    throw std::invalid_argument("split " + s.to_string() + " inconsistent with alphabet sizes " +
                                std::to_string(ch.x_size()) + "," + std::to_string(ch.y_size()) + "," +
                                std::to_string(ch.z_size()));
  }
}

}  // namespace detail

/// Tests whether `ch` decomposes under `split` into an obversely degraded O
/// subchannel and a reversely degraded R subchannel that are independent.
inline DegradednessReport analyze_degraded(const Dmbc& ch, const ChannelSplit& split, const Distribution& input,
                                           double tol = kInfoTol)
{
  detail::check_split(ch, split);
  // The row-major [x][y][z] layout with x = x_o*|X_R| + x_r is already the
  // [x_o][x_r][y_o][y_r][z_o][z_r] tensor.
  const auto j3 = ch.joint(input);
  const JointDistribution j({split.x.o, split.x.r, split.y.o, split.y.r, split.z.o, split.z.r},
                            {j3.probs().begin(), j3.probs().end()}, {"XO", "XR", "YO", "YR", "ZO", "ZR"});
  enum : std::size_t { XO, XR, YO, YR, ZO, ZR };

  DegradednessReport rep;
  rep.tol = tol;
  rep.subchannel_split = split;
  rep.residuals.independence = conditional_mutual_information(j, {YO, ZO}, {XR, YR, ZR}, {XO}) +
                               conditional_mutual_information(j, {YO, ZO, XO}, {YR, ZR}, {XR});
  rep.residuals.obverse = conditional_mutual_information(j, {XO}, {ZO}, {YO});
  rep.residuals.reverse = conditional_mutual_information(j, {XR}, {YR}, {ZR});
  rep.independent_subchannels = rep.residuals.independence <= tol;
  rep.obversely_degraded = rep.residuals.obverse <= tol;
  rep.reversely_degraded = rep.residuals.reverse <= tol;
  return rep;
}

inline DegradednessReport analyze_degraded(const Dmbc& ch, const ChannelSplit& split, double tol = kInfoTol)
{
  return analyze_degraded(ch, split, Distribution::uniform(ch.x_size()), tol);
}

/// Largest alphabet for which `find_degraded_split` enumerates factorizations.
inline constexpr std::size_t kMaxSplitSearchAlphabet = 4;

/// Tries every factorization of the three alphabets (sizes <= 4 only) and
/// returns the first degraded one, preferring the trivial splits.
inline std::optional<DegradednessReport> find_degraded_split(const Dmbc& ch, const Distribution& input,
                                                             double tol = kInfoTol)
{
  if (ch.x_size() > kMaxSplitSearchAlphabet || ch.y_size() > kMaxSplitSearchAlphabet ||
      ch.z_size() > kMaxSplitSearchAlphabet) {
    throw std::invalid_argument("split required: automatic split search is limited to alphabets of size <= 4");
  }
  auto factors = [](std::size_t n) {
    std::vector<AlphabetSplit> out{{n, 1}, {1, n}};
    for (std::size_t o = 2; o < n; ++o) {
      if (n % o == 0) out.push_back({o, n / o});
    }
    if (n == 1) out.pop_back();
    return out;
  };
  for (const auto& x : factors(ch.x_size()))
    for (const auto& y : factors(ch.y_size()))
      for (const auto& z : factors(ch.z_size())) {
        auto rep = analyze_degraded(ch, {x, y, z}, input, tol);
        if (rep.degraded()) return rep;
      }
  return std::nullopt;
}

/// The O subchannel X_O -> (Y_O, Z_O), averaged over X_R uniformly.
/// Meaningful when the split passed the independence test.
inline Dmbc obverse_subchannel(const Dmbc& ch, const ChannelSplit& split)
{
  detail::check_split(ch, split);
  const auto& s = split;
  std::vector<double> w(s.x.o * s.y.o * s.z.o, 0.0);
  for (std::size_t xo = 0; xo < s.x.o; ++xo)
    for (std::size_t xr = 0; xr < s.x.r; ++xr)
      for (std::size_t y = 0; y < ch.y_size(); ++y)
        for (std::size_t z = 0; z < ch.z_size(); ++z) {
          const std::size_t yo = y / s.y.r, zo = z / s.z.r;
          w[(xo * s.y.o + yo) * s.z.o + zo] += ch(xo * s.x.r + xr, y, z) / static_cast<double>(s.x.r);
        }
  // Undo rounding drift from the averaging.
  for (std::size_t xo = 0; xo < s.x.o; ++xo) {
    double sum = 0.0;
    for (std::size_t i = 0; i < s.y.o * s.z.o; ++i) sum += w[xo * s.y.o * s.z.o + i];
    for (std::size_t i = 0; i < s.y.o * s.z.o; ++i) w[xo * s.y.o * s.z.o + i] /= sum;
  }
  return Dmbc(s.x.o, s.y.o, s.z.o, std::move(w));
}

}  // namespace ske
