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

// Maximization over a product of probability simplices.
//
// Each block is a probability vector. A sweep visits every block and, inside
// it, every pair of coordinates (i, j), and line-searches the split of the
// mass p_i + p_j between them. The first sweep of a restart scans the split
// on a uniform grid before golden-section refinement; later sweeps refine
// locally. For a single binary block the first sweep is therefore an
// exhaustive grid search followed by refinement.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "random.hpp"

namespace ske {

using SimplexPoint = std::vector<std::vector<double>>;

/// Objective over a SimplexPoint. `changed_block` names the only block that
/// differs from the previous call, or kAllBlocks when any may have changed,
/// so evaluators can cache work on untouched blocks.
using SimplexObjective = std::function<double(const SimplexPoint&, std::size_t changed_block)>;

inline constexpr std::size_t kAllBlocks = std::numeric_limits<std::size_t>::max();

struct OptimizerOptions {
  double grid = 0.01;          // step of the first-sweep scan, in [0,1] split units
  int restarts = 20;           // total starting points including the supplied ones
  int max_sweeps = 60;
  double sweep_tol = 1e-11;    // stop when a sweep improves less than this
  double local_radius = 0.05;  // bracket half-width for later sweeps
  int golden_iterations = 32;
  std::uint64_t seed = 1;
};

struct OptimizerResult {
  SimplexPoint argmax;
  double value = -std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
  int best_restart = -1;
};

namespace detail {

class PairLineSearch {
 public:
  PairLineSearch(const SimplexObjective& f, std::size_t& evals) : f_(f), evals_(evals) {}

  /// Optimizes the split of mass between x[b][i] and x[b][j]. Returns the new value.
  double run(SimplexPoint& x, std::size_t b, std::size_t i, std::size_t j, double current, bool scan,
             const OptimizerOptions& opt)
  {
    const double mass = x[b][i] + x[b][j];
    if (mass <= 0.0) return current;
    const double t0 = x[b][i] / mass;
    auto eval = [&](double t) {
      x[b][i] = t * mass;
      x[b][j] = mass - x[b][i];
      ++evals_;
      return f_(x, b);
    };

    double best_t = t0, best = current;
    double lo, hi;
    if (scan) {
      const int n = std::max(1, static_cast<int>(std::lround(1.0 / opt.grid)));
      for (int k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) / n;
        const double v = eval(t);
        if (v > best) {
          best = v;
          best_t = t;
        }
      }
      lo = std::max(0.0, best_t - 1.0 / n);
      hi = std::min(1.0, best_t + 1.0 / n);
    } else {
      lo = std::max(0.0, t0 - opt.local_radius);
      hi = std::min(1.0, t0 + opt.local_radius);
    }

    // Golden-section refinement on [lo, hi].
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, c = hi;
    double x1 = c - kInvPhi * (c - a), x2 = a + kInvPhi * (c - a);
    double f1 = eval(x1), f2 = eval(x2);
    for (int it = 0; it < opt.golden_iterations; ++it) {
      if (f1 >= f2) {
        c = x2;
        x2 = x1;
        f2 = f1;
        x1 = c - kInvPhi * (c - a);
        f1 = eval(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + kInvPhi * (c - a);
        f2 = eval(x2);
      }
      if (f1 > best) {
        best = f1;
        best_t = x1;
      }
      if (f2 > best) {
        best = f2;
        best_t = x2;
      }
    }
    // Commit the best split seen and leave the evaluator's cache consistent with it.
    return std::max(best, eval(best_t));
  }

 private:
  const SimplexObjective& f_;
  std::size_t& evals_;
};

inline std::vector<double> random_simplex(Rng& rng, std::size_t k)
{
  std::vector<double> p(k);
  double sum = 0.0;
  for (auto& v : p) {
    v = -std::log(1.0 - rng.uniform());  // Exp(1) gives a flat Dirichlet draw
    sum += v;
  }
  for (auto& v : p) v /= sum;
  return p;
}

}  // namespace detail

/// Block-coordinate ascent from `starts` followed by random starting points,
/// `opt.restarts` in total (at least the supplied starts). Restart k >= |starts|
/// draws its point from a stream derived from (opt.seed, k), so a run with more
/// restarts visits a superset of the starting points of a run with fewer.
inline OptimizerResult maximize_over_simplices(const std::vector<std::size_t>& block_sizes, const SimplexObjective& f,
                                               const OptimizerOptions& opt, const std::vector<SimplexPoint>& starts = {})
{
  OptimizerResult result;
  const int total = std::max<int>(opt.restarts, static_cast<int>(starts.size()));
  detail::PairLineSearch search(f, result.evaluations);

  for (int r = 0; r < total; ++r) {
    SimplexPoint x;
    if (r < static_cast<int>(starts.size())) {
      x = starts[r];
    } else {
      Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(r)));
      for (auto k : block_sizes) x.push_back(detail::random_simplex(rng, k));
    }
    ++result.evaluations;
    double value = f(x, kAllBlocks);
    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
      const double before = value;
      for (std::size_t b = 0; b < x.size(); ++b) {
        for (std::size_t i = 0; i + 1 < x[b].size(); ++i) {
          for (std::size_t j = i + 1; j < x[b].size(); ++j) {
            value = search.run(x, b, i, j, value, sweep == 0, opt);
          }
        }
      }
      if (sweep > 0 && value - before < opt.sweep_tol) break;
    }
    if (value > result.value) {
      result.value = value;
      result.argmax = x;
      result.best_restart = r;
    }
  }
  return result;
}

}  // namespace ske
