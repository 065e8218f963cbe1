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

#include <ske/infotheory.hpp>

#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"

using namespace ske;

TEST(Entropy, UniformAndDeterministic)
{
  EXPECT_DOUBLE_EQ(entropy(Distribution({0.5, 0.5})), 1.0);
  EXPECT_DOUBLE_EQ(entropy(Distribution({1.0, 0.0})), 0.0);
  // -sum p log2 p evaluated with 30-digit arithmetic
  EXPECT_NEAR(entropy(Distribution({0.25, 0.75})), 0.811278124459132864, 1e-12);
}

TEST(Entropy, BoundedByLogAlphabet)
{
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    auto p = testutil::random_distribution(rng, 1 + i % 7);
    const double h = entropy(p);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log2(static_cast<double>(p.size())) + 1e-12);
  }
}

TEST(BinaryEntropy, Values)
{
  EXPECT_DOUBLE_EQ(binary_entropy(0.5), 1.0);
  EXPECT_DOUBLE_EQ(binary_entropy(0.0), 0.0);
  EXPECT_DOUBLE_EQ(binary_entropy(1.0), 0.0);
  EXPECT_NEAR(binary_entropy(0.2), 0.721928094887362348, 1e-12);
  EXPECT_NEAR(binary_entropy(0.3), binary_entropy(0.7), 1e-15);
  EXPECT_THROW(binary_entropy(-0.1), std::domain_error);
  EXPECT_THROW(binary_entropy(1.5), std::domain_error);
}

TEST(Distribution, RejectsInvalid)
{
  EXPECT_THROW(Distribution({0.5, 0.6}), std::invalid_argument);
  EXPECT_THROW(Distribution({-0.1, 1.1}), std::invalid_argument);
  EXPECT_THROW(Distribution(std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW(Kernel::from_rows({{0.5, 0.5}, {1.0}}), std::invalid_argument);
}

TEST(MutualInformation, Examples)
{
  auto id = compose(Distribution::uniform(2), Kernel::identity(2));
  EXPECT_NEAR(mutual_information(id, {0}, {1}), 1.0, 1e-12);

  auto indep = compose(Distribution({0.3, 0.7}), Kernel::constant(2, Distribution({0.4, 0.6})));
  EXPECT_NEAR(mutual_information(indep, {0}, {1}), 0.0, 1e-12);

  auto bsc = compose(Distribution::uniform(2), Kernel::bsc(0.1));
  EXPECT_NEAR(mutual_information(bsc, {0}, {1}), 1.0 - binary_entropy(0.1), 1e-12);
  EXPECT_NEAR(mutual_information(bsc, {0}, {1}), 0.531004406410718779, 1e-12);

  EXPECT_THROW(mutual_information(bsc, {0}, {0}), std::invalid_argument);
  EXPECT_THROW(mutual_information(bsc, {0, 1}, {1}), std::invalid_argument);
  EXPECT_THROW(mutual_information(bsc, {}, {1}), std::invalid_argument);
}

TEST(ConditionalMutualInformation, Examples)
{
  // X uniform; Y = BSC(0.1)(X); Z = BSC(0.2)(X), independent flips.
  auto j = compose(Distribution::uniform(2), Kernel::bsc(0.1)).extend({0}, Kernel::bsc(0.2));
  // Explicit 8-cell tensor evaluated with 30-digit arithmetic.
  EXPECT_NEAR(conditional_mutual_information(j, {0}, {1}, {2}), 0.357750778903336674, 1e-12);

  // C independent of (A,B)
  auto jc = compose(Distribution::uniform(2), Kernel::bsc(0.1))
                .independent_product(JointDistribution::from(Distribution({0.2, 0.8})));
  EXPECT_NEAR(conditional_mutual_information(jc, {0}, {1}, {2}), mutual_information(jc, {0}, {1}), 1e-12);

  // C identical to B
  auto jb = compose(Distribution::uniform(2), Kernel::bsc(0.1)).extend({1}, Kernel::identity(2));
  EXPECT_NEAR(conditional_mutual_information(jb, {0}, {1}, {2}), 0.0, 1e-12);

  EXPECT_THROW(conditional_mutual_information(j, {0}, {1}, {1}), std::invalid_argument);
}

TEST(Compose, Examples)
{
  auto diag = compose(Distribution::uniform(2), Kernel::identity(2));
  EXPECT_DOUBLE_EQ(diag.at({0, 0}), 0.5);
  EXPECT_DOUBLE_EQ(diag.at({0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(diag.at({1, 1}), 0.5);

  Distribution q({0.4, 0.6});
  auto prod = compose(Distribution({0.3, 0.7}), Kernel::constant(2, q));
  for (std::size_t x = 0; x < 2; ++x) {
    for (std::size_t y = 0; y < 2; ++y) EXPECT_NEAR(prod.at({x, y}), (x ? 0.7 : 0.3) * q[y], 1e-15);
  }

  auto j = compose(Distribution({0.3, 0.7}), Kernel::bsc(0.1));
  EXPECT_NEAR(j.at({0, 0}), 0.27, 1e-15);
  EXPECT_NEAR(j.at({0, 1}), 0.03, 1e-15);
  EXPECT_NEAR(j.at({1, 0}), 0.07, 1e-15);
  EXPECT_NEAR(j.at({1, 1}), 0.63, 1e-15);

  EXPECT_THROW(compose(Distribution::uniform(3), Kernel::bsc(0.1)), std::invalid_argument);
}

TEST(MarkovChain, Examples)
{
  // C a deterministic function of B
  auto j = compose(Distribution({0.3, 0.7}), Kernel::bsc(0.2))
               .extend({1}, Kernel::from_rows({{0.0, 1.0}, {1.0, 0.0}}));
  EXPECT_TRUE(is_markov_chain(j, {0}, {1}, {2}));

  // C copies A, B independent of A
  auto jc = JointDistribution::from(Distribution({0.4, 0.6}))
                .extend({0}, Kernel::constant(2, Distribution::uniform(2)))
                .extend({0}, Kernel::identity(2));
  EXPECT_FALSE(is_markov_chain(jc, {0}, {1}, {2}));

  // Degraded cascade X -> Y -> Z
  auto cascade = compose(Distribution::uniform(2), Kernel::bsc(0.1)).extend({1}, Kernel::bsc(0.15));
  EXPECT_LE(conditional_mutual_information(cascade, {0}, {2}, {1}), 1e-12);
  EXPECT_TRUE(is_markov_chain(cascade, {0}, {1}, {2}, 1e-9));
}

// ---- properties over random tensors ----

TEST(InfoProperties, ChainRule)
{
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    auto j = testutil::random_joint(rng, {static_cast<std::size_t>(2 + i % 3), static_cast<std::size_t>(2 + (i / 3) % 3)});
    const double hab = j.entropy_of({0, 1});
    const double ha = j.entropy_of({0});
    // H(B|A) = sum_a P(a) H(B|A=a)
    double hb_a = 0.0;
    for (std::size_t a = 0; a < j.shape()[0]; ++a) {
      double pa = 0.0;
      for (std::size_t b = 0; b < j.shape()[1]; ++b) pa += j.at({a, b});
      for (std::size_t b = 0; b < j.shape()[1]; ++b) {
        const double pab = j.at({a, b});
        if (pab > 0) hb_a -= pab * std::log2(pab / pa);
      }
    }
    EXPECT_NEAR(hab, ha + hb_a, 1e-9);
  }
}

TEST(InfoProperties, MutualInformationBounds)
{
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    auto j = testutil::random_joint(rng, {2, 3, 2});
    const double i_ab = mutual_information(j, {0}, {1});
    EXPECT_GE(i_ab, 0.0);
    EXPECT_LE(i_ab, std::min(j.entropy_of({0}), j.entropy_of({1})) + 1e-12);
    EXPECT_GE(conditional_mutual_information(j, {0}, {1}, {2}), 0.0);
    EXPECT_NEAR(i_ab, mutual_information(j, {1}, {0}), 1e-12);
  }
}

TEST(InfoProperties, EntropyConcave)
{
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const std::size_t k = 2 + i % 5;
    auto p = testutil::random_distribution(rng, k);
    auto q = testutil::random_distribution(rng, k);
    const double lam = u(rng);
    std::vector<double> mix(k);
    for (std::size_t s = 0; s < k; ++s) mix[s] = lam * p[s] + (1 - lam) * q[s];
    EXPECT_GE(entropy(Distribution::normalized(mix)), lam * entropy(p) + (1 - lam) * entropy(q) - 1e-12);
  }
}

TEST(InfoProperties, ComposeMarginalIsIdentity)
{
  std::mt19937_64 rng(17);
  for (int i = 0; i < 100; ++i) {
    auto p = testutil::random_distribution(rng, 2 + i % 4);
    auto k = testutil::random_kernel(rng, p.size(), 1 + i % 3);
    auto m = compose(p, k).marginal_distribution(0);
    for (std::size_t s = 0; s < p.size(); ++s) EXPECT_NEAR(m[s], p[s], 1e-15);
  }
}

TEST(InfoProperties, MarkovTestMatchesFactorization)
{
  std::mt19937_64 rng(19);
  int markov_cases = 0;
  for (int i = 0; i < 300; ++i) {
    JointDistribution j;
    if (i % 2 == 0) {
      // A -> B -> C by construction
      j = compose(testutil::random_distribution(rng, 2), testutil::random_kernel(rng, 2, 3))
              .extend({1}, testutil::random_kernel(rng, 3, 2));
    } else {
      j = testutil::random_joint(rng, {2, 3, 2});
    }
    // Direct check: P(a,b,c) P(b) == P(a,b) P(b,c)
    auto ab = j.marginal({0, 1});
    auto bc = j.marginal({1, 2});
    auto b = j.marginal({1});
    double worst = 0.0;
    for (std::size_t x = 0; x < 2; ++x) {
      for (std::size_t y = 0; y < 3; ++y) {
        for (std::size_t z = 0; z < 2; ++z) {
          worst = std::max(worst, std::abs(j.at({x, y, z}) * b.at({y}) - ab.at({x, y}) * bc.at({y, z})));
        }
      }
    }
    const bool factorizes = worst < 1e-12;
    markov_cases += factorizes;
    EXPECT_EQ(is_markov_chain(j, {0}, {1}, {2}, 1e-9), factorizes) << "case " << i;
  }
  EXPECT_EQ(markov_cases, 150);
}

TEST(JointDistribution, MarginalKeepsAxisOrder)
{
  auto j = compose(Distribution({0.3, 0.7}), Kernel::bsc(0.1));
  auto t = j.marginal({1, 0});
  EXPECT_NEAR(t.at({1, 0}), j.at({0, 1}), 1e-15);
  EXPECT_NEAR(t.at({0, 1}), j.at({1, 0}), 1e-15);
  EXPECT_THROW(j.marginal({0, 0}), std::invalid_argument);
  EXPECT_THROW(j.marginal({2}), std::out_of_range);
}
