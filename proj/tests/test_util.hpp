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

// Random generators and brute-force oracles shared by the test binaries.
// Nothing here calls into the optimizers under test.

#include <ske/infotheory.hpp>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace testutil {

inline ske::Distribution random_distribution(std::mt19937_64& rng, std::size_t k)
{
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(k);
  for (auto& x : w) x = e(rng) + 1e-12;
  return ske::Distribution::normalized(w);
}

inline ske::Kernel random_kernel(std::mt19937_64& rng, std::size_t in, std::size_t out)
{
  std::vector<ske::Distribution> rows;
  for (std::size_t i = 0; i < in; ++i) rows.push_back(random_distribution(rng, out));
  return ske::Kernel(std::move(rows));
}

inline ske::JointDistribution random_joint(std::mt19937_64& rng, std::vector<std::size_t> shape)
{
  std::size_t cells = 1;
  for (auto s : shape) cells *= s;
  auto d = random_distribution(rng, cells);
  return ske::JointDistribution(std::move(shape), {d.probs().begin(), d.probs().end()});
}

/// Plain grid over the binary simplex {(p, 1-p)}: p = 0, step, 2 step, ..., 1.
inline double binary_grid_max(const std::function<double(double)>& f, double step = 1e-3)
{
  const int n = static_cast<int>(std::lround(1.0 / step));
  double best = -1e300;
  for (int i = 0; i <= n; ++i) best = std::max(best, f(static_cast<double>(i) / n));
  return best;
}

/// I(X;Y) - I(X;Z) and I(X;Y|Z) for a binary input law (p0, 1-p0), written out
/// from the definition over the full (x,y,z) table.
struct BinaryOracle {
  // tensor[x][y][z]
  std::vector<std::vector<std::vector<double>>> w;

  double h(const std::vector<double>& v) const
  {
    double s = 0.0;
    for (double x : v) {
      if (x > 0) s -= x * std::log2(x);
    }
    return s;
  }

  // Returns {I(X;Y)-I(X;Z), I(X;Y|Z)}.
  std::pair<double, double> eval(double p0) const
  {
    const std::size_t ny = w[0].size(), nz = w[0][0].size();
    const double px[2] = {p0, 1.0 - p0};
    std::vector<double> pxyz, pxy, pxz, pyz, py(ny, 0.0), pz(nz, 0.0);
    std::vector<double> pyz_m(ny * nz, 0.0);
    for (int x = 0; x < 2; ++x) {
      for (std::size_t y = 0; y < ny; ++y) {
        double sxy = 0.0;
        for (std::size_t z = 0; z < nz; ++z) {
          const double v = px[x] * w[x][y][z];
          pxyz.push_back(v);
          sxy += v;
          py[y] += v;
          pz[z] += v;
          pyz_m[y * nz + z] += v;
        }
        pxy.push_back(sxy);
      }
      for (std::size_t z = 0; z < nz; ++z) {
        double s = 0.0;
        for (std::size_t y = 0; y < ny; ++y) s += px[x] * w[x][y][z];
        pxz.push_back(s);
      }
    }
    const double hx = h({px[0], px[1]});
    const double ixy = hx + h(py) - h(pxy);
    const double ixz = hx + h(pz) - h(pxz);
    const double ixy_z = h(pxz) + h(pyz_m) - h(pxyz) - h(pz);
    return {ixy - ixz, ixy_z};
  }
};

}  // namespace testutil
