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

// Finite-alphabet probability calculus. All logarithms are base 2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ske {

/// Tolerance on total probability mass.
inline constexpr double kNormTol = 1e-12;
/// Tolerance for information identities (Markov tests, chain rules).
inline constexpr double kInfoTol = 1e-9;

using Axes = std::vector<std::size_t>;

namespace detail {

inline double plogp_sum(std::span<const double> p)
{
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return h;
}

inline void check_probabilities(std::span<const double> p, double tol, const char* what)
{
  if (p.empty()) throw std::invalid_argument(std::string(what) + ": empty alphabet");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string(what) + ": negative or non-finite probability");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol) {
    throw std::invalid_argument(std::string(what) + ": mass " + std::to_string(sum) + " is not 1");
  }
}

}  // namespace detail

/// Probability vector over the alphabet {0, ..., k-1}.
class Distribution {
 public:
  Distribution() = default;

  explicit Distribution(std::vector<double> probs) : p_(std::move(probs))
  {
    detail::check_probabilities(p_, kNormTol, "Distribution");
  }

  /// Rescales non-negative weights to unit mass. Throws if all weights are zero.
  static Distribution normalized(std::vector<double> weights)
  {
    double sum = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("Distribution::normalized: negative weight");
      sum += w;
    }
    if (!(sum > 0.0)) throw std::invalid_argument("Distribution::normalized: zero mass");
    for (double& w : weights) w /= sum;
    return Distribution(std::move(weights));
  }

  static Distribution uniform(std::size_t k)
  {
    if (k == 0) throw std::invalid_argument("Distribution::uniform: empty alphabet");
    return Distribution(std::vector<double>(k, 1.0 / static_cast<double>(k)));
  }

  static Distribution point(std::size_t k, std::size_t symbol)
  {
    if (symbol >= k) throw std::out_of_range("Distribution::point: symbol out of range");
    std::vector<double> p(k, 0.0);
    p[symbol] = 1.0;
    return Distribution(std::move(p));
  }

  std::size_t size() const noexcept { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  std::span<const double> probs() const noexcept { return p_; }

  bool full_support() const noexcept
  {
    return std::all_of(p_.begin(), p_.end(), [](double v) { return v > 0.0; });
  }

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  std::vector<double> p_;
};

/// Stochastic matrix: one output Distribution per input symbol.
class Kernel {
 public:
  Kernel() = default;

  explicit Kernel(std::vector<Distribution> rows) : rows_(std::move(rows))
  {
    if (rows_.empty()) throw std::invalid_argument("Kernel: no rows");
    for (const auto& r : rows_) {
      if (r.size() != rows_.front().size()) throw std::invalid_argument("Kernel: ragged rows");
    }
  }

  static Kernel from_rows(const std::vector<std::vector<double>>& rows)
  {
    std::vector<Distribution> d;
    d.reserve(rows.size());
    for (const auto& r : rows) d.emplace_back(r);
    return Kernel(std::move(d));
  }

  static Kernel identity(std::size_t k)
  {
    std::vector<Distribution> rows;
    for (std::size_t i = 0; i < k; ++i) rows.push_back(Distribution::point(k, i));
    return Kernel(std::move(rows));
  }

  /// Every input maps to the same output law.
  static Kernel constant(std::size_t in_size, const Distribution& out)
  {
    return Kernel(std::vector<Distribution>(in_size, out));
  }

  /// Binary symmetric channel with crossover probability p.
  static Kernel bsc(double p)
  {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("Kernel::bsc: crossover outside [0,1]");
    return from_rows({{1.0 - p, p}, {p, 1.0 - p}});
  }

  std::size_t in_size() const noexcept { return rows_.size(); }
  std::size_t out_size() const noexcept { return rows_.empty() ? 0 : rows_.front().size(); }
  const Distribution& row(std::size_t x) const { return rows_.at(x); }
  double operator()(std::size_t x, std::size_t y) const { return rows_[x][y]; }
  const std::vector<Distribution>& rows() const noexcept { return rows_; }

  /// Cascade: this kernel followed by `next`.
  Kernel then(const Kernel& next) const
  {
    if (next.in_size() != out_size()) throw std::invalid_argument("Kernel::then: size mismatch");
    std::vector<Distribution> out;
    out.reserve(in_size());
    for (const auto& r : rows_) {
      std::vector<double> q(next.out_size(), 0.0);
      for (std::size_t y = 0; y < r.size(); ++y) {
        for (std::size_t z = 0; z < q.size(); ++z) q[z] += r[y] * next(y, z);
      }
      out.push_back(Distribution::normalized(std::move(q)));
    }
    return Kernel(std::move(out));
  }

  friend bool operator==(const Kernel&, const Kernel&) = default;

 private:
  std::vector<Distribution> rows_;
};

/// Dense joint law over a product alphabet, stored row-major (last axis fastest).
class JointDistribution {
 public:
  JointDistribution() = default;

  JointDistribution(std::vector<std::size_t> shape, std::vector<double> probs,
                    std::vector<std::string> labels = {})
      : shape_(std::move(shape)), p_(std::move(probs)), labels_(std::move(labels))
  {
    if (shape_.empty()) throw std::invalid_argument("JointDistribution: rank 0");
    std::size_t cells = 1;
    for (auto s : shape_) {
      if (s == 0) throw std::invalid_argument("JointDistribution: empty axis");
      cells *= s;
    }
    if (cells != p_.size()) throw std::invalid_argument("JointDistribution: shape/size mismatch");
    if (!labels_.empty() && labels_.size() != shape_.size()) {
      throw std::invalid_argument("JointDistribution: label count mismatch");
    }
    detail::check_probabilities(p_, kNormTol, "JointDistribution");
  }

  static JointDistribution from(const Distribution& p, std::string label = {})
  {
    std::vector<std::string> labels;
    if (!label.empty()) labels.push_back(std::move(label));
    return JointDistribution({p.size()}, {p.probs().begin(), p.probs().end()}, std::move(labels));
  }

  std::size_t rank() const noexcept { return shape_.size(); }
  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::span<const double> probs() const noexcept { return p_; }
  std::size_t cells() const noexcept { return p_.size(); }

  double at(const std::vector<std::size_t>& index) const { return p_.at(flat_index(index)); }

  std::size_t flat_index(const std::vector<std::size_t>& index) const
  {
    if (index.size() != shape_.size()) throw std::invalid_argument("JointDistribution: index rank");
    std::size_t flat = 0;
    for (std::size_t a = 0; a < shape_.size(); ++a) {
      if (index[a] >= shape_[a]) throw std::out_of_range("JointDistribution: index out of range");
      flat = flat * shape_[a] + index[a];
    }
    return flat;
  }

  /// Marginal over `axes`, kept in the order given.
  JointDistribution marginal(const Axes& axes) const
  {
    check_axes(axes);
    std::vector<std::size_t> out_shape;
    for (auto a : axes) out_shape.push_back(shape_[a]);
    std::vector<double> out(product(out_shape), 0.0);

    // Stride of each source axis inside the output tensor (0 if summed out).
    std::vector<std::size_t> stride(shape_.size(), 0);
    std::size_t s = 1;
    for (std::size_t i = axes.size(); i-- > 0;) {
      stride[axes[i]] = s;
      s *= shape_[axes[i]];
    }
    std::vector<std::size_t> idx(shape_.size(), 0);
    std::size_t target = 0;
    for (std::size_t flat = 0; flat < p_.size(); ++flat) {
      out[target] += p_[flat];
      for (std::size_t a = shape_.size(); a-- > 0;) {
        if (++idx[a] < shape_[a]) {
          target += stride[a];
          break;
        }
        target -= stride[a] * (shape_[a] - 1);
        idx[a] = 0;
      }
    }
    std::vector<std::string> out_labels;
    if (!labels_.empty()) {
      for (auto a : axes) out_labels.push_back(labels_[a]);
    }
    return JointDistribution(std::move(out_shape), renormalize(std::move(out)), std::move(out_labels));
  }

  Distribution marginal_distribution(std::size_t axis) const
  {
    auto m = marginal({axis});
    return Distribution::normalized({m.p_.begin(), m.p_.end()});
  }

  /// Joint entropy of the variables in `axes`; all axes when empty.
  double entropy_of(const Axes& axes) const
  {
    if (axes.empty()) return detail::plogp_sum(p_);
    return detail::plogp_sum(marginal(axes).p_);
  }

  /// Appends a new axis drawn from `kernel` given the variables in `cond`.
  /// The kernel input index is the row-major flattening of the `cond` axes.
  JointDistribution extend(const Axes& cond, const Kernel& kernel, std::string label = {}) const
  {
    if (!cond.empty()) check_axes(cond);
    std::size_t in = 1;
    for (auto a : cond) in *= shape_[a];
    if (kernel.in_size() != in) throw std::invalid_argument("JointDistribution::extend: kernel input size");
    const std::size_t m = kernel.out_size();

    std::vector<std::size_t> shape = shape_;
    shape.push_back(m);
    std::vector<double> out(p_.size() * m, 0.0);
    std::vector<std::size_t> idx(shape_.size(), 0);
    for (std::size_t flat = 0; flat < p_.size(); ++flat) {
      std::size_t row = 0;
      for (auto a : cond) row = row * shape_[a] + idx[a];
      const auto& r = kernel.row(row);
      for (std::size_t j = 0; j < m; ++j) out[flat * m + j] = p_[flat] * r[j];
      for (std::size_t a = shape_.size(); a-- > 0;) {
        if (++idx[a] < shape_[a]) break;
        idx[a] = 0;
      }
    }
    std::vector<std::string> labels = labels_;
    if (!labels.empty() || !label.empty()) {
      labels.resize(shape_.size());
      labels.push_back(std::move(label));
    }
    return JointDistribution(std::move(shape), renormalize(std::move(out)), std::move(labels));
  }

  /// Joint of two independent laws; axes of `other` follow those of `*this`.
  JointDistribution independent_product(const JointDistribution& other) const
  {
    std::vector<std::size_t> shape = shape_;
    shape.insert(shape.end(), other.shape_.begin(), other.shape_.end());
    std::vector<double> out;
    out.reserve(p_.size() * other.p_.size());
    for (double a : p_) {
      for (double b : other.p_) out.push_back(a * b);
    }
    std::vector<std::string> labels;
    if (!labels_.empty() || !other.labels_.empty()) {
      labels = labels_;
      labels.resize(shape_.size());
      auto rhs = other.labels_;
      rhs.resize(other.shape_.size());
      labels.insert(labels.end(), rhs.begin(), rhs.end());
    }
    return JointDistribution(std::move(shape), renormalize(std::move(out)), std::move(labels));
  }

  void check_axes(const Axes& axes) const
  {
    if (axes.empty()) throw std::invalid_argument("JointDistribution: empty axis set");
    std::vector<bool> seen(shape_.size(), false);
    for (auto a : axes) {
      if (a >= shape_.size()) throw std::out_of_range("JointDistribution: axis out of range");
      if (seen[a]) throw std::invalid_argument("JointDistribution: repeated axis");
      seen[a] = true;
    }
  }

 private:
  static std::size_t product(const std::vector<std::size_t>& s)
  {
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
  }

  // Products of valid laws drift from unit mass only by rounding.
  static std::vector<double> renormalize(std::vector<double> v)
  {
    double sum = 0.0;
    for (double x : v) sum += x;
    if (sum > 0.0 && std::abs(sum - 1.0) < 1e-9) {
      for (double& x : v) x /= sum;
    }
    return v;
  }

  std::vector<std::size_t> shape_;
  std::vector<double> p_;
  std::vector<std::string> labels_;
};

inline double entropy(const Distribution& p) { return detail::plogp_sum(p.probs()); }

inline double binary_entropy(double e)
{
  if (!(e >= 0.0 && e <= 1.0)) throw std::domain_error("binary_entropy: argument outside [0,1]");
  if (e == 0.0 || e == 1.0) return 0.0;
  return -e * std::log2(e) - (1.0 - e) * std::log2(1.0 - e);
}

namespace detail {

inline void require_disjoint(std::initializer_list<const Axes*> sets)
{
  std::vector<std::size_t> all;
  for (const Axes* s : sets) {
    if (s->empty()) throw std::invalid_argument("information measure: empty axis set");
    all.insert(all.end(), s->begin(), s->end());
  }
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
    throw std::invalid_argument("information measure: overlapping axis sets");
  }
}

inline Axes join(const Axes& a, const Axes& b)
{
  Axes out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace detail

/// I(A;B) = H(A) + H(B) - H(A,B).
inline double mutual_information(const JointDistribution& joint, const Axes& a, const Axes& b)
{
  detail::require_disjoint({&a, &b});
  const double v = joint.entropy_of(a) + joint.entropy_of(b) - joint.entropy_of(detail::join(a, b));
  return std::max(0.0, v);
}

/// I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C).
inline double conditional_mutual_information(const JointDistribution& joint, const Axes& a, const Axes& b,
                                             const Axes& c)
{
  detail::require_disjoint({&a, &b, &c});
  const auto ac = detail::join(a, c);
  const auto bc = detail::join(b, c);
  const auto abc = detail::join(a, bc);
  const double v = joint.entropy_of(ac) + joint.entropy_of(bc) - joint.entropy_of(abc) - joint.entropy_of(c);
  return std::max(0.0, v);
}

/// joint(x, y) = p(x) k(y|x).
inline JointDistribution compose(const Distribution& p, const Kernel& k)
{
  if (k.in_size() != p.size()) throw std::invalid_argument("compose: kernel input size != alphabet size");
  return JointDistribution::from(p).extend({0}, k);
}

/// A <-> B <-> C holds iff I(A;C|B) <= tol.
inline bool is_markov_chain(const JointDistribution& joint, const Axes& a, const Axes& b, const Axes& c,
                            double tol = kInfoTol)
{
  return conditional_mutual_information(joint, a, c, b) <= tol;
}

}  // namespace ske
