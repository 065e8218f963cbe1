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

#include <ske/channel.hpp>

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace ske;

namespace {

Dmbc bob_identity_eve_blind()
{
  return Dmbc::independent(Kernel::identity(2), Kernel::constant(2, Distribution::point(2, 0)));
}

}  // namespace

TEST(Transmit, IdentityToBobConstantToEve)
{
  auto [y, z] = transmit(bob_identity_eve_blind(), Sequence{0, 1, 0}, 42);
  EXPECT_EQ(y, (Sequence{0, 1, 0}));
  EXPECT_EQ(z, (Sequence{0, 0, 0}));
}

TEST(Transmit, EmptySequence)
{
  auto [y, z] = transmit(Dmbc::independent(Kernel::bsc(0.1), Kernel::bsc(0.2)), Sequence{}, 1);
  EXPECT_TRUE(y.empty());
  EXPECT_TRUE(z.empty());
}

TEST(Transmit, OutOfRangeSymbol)
{
  EXPECT_THROW(transmit(bob_identity_eve_blind(), Sequence{0, 2}, 1), std::out_of_range);
}

TEST(Transmit, EmpiricalFlipRates)
{
  const auto ch = Dmbc::independent(Kernel::bsc(0.1), Kernel::bsc(0.2));
  Rng rng(5);
  const auto x = rng.iid(Distribution::uniform(2), 100000);
  auto [y, z] = transmit(ch, x, 99);
  std::size_t fy = 0, fz = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    fy += y[i] != x[i];
    fz += z[i] != x[i];
  }
  EXPECT_NEAR(static_cast<double>(fy) / 1e5, 0.1, 0.01);
  EXPECT_NEAR(static_cast<double>(fz) / 1e5, 0.2, 0.01);
}

TEST(Transmit, ReproducibleWithSeed)
{
  const auto ch = Dmbc::independent(Kernel::bsc(0.3), Kernel::bsc(0.4));
  const Sequence x(500, 1);
  EXPECT_EQ(transmit(ch, x, 1234), transmit(ch, x, 1234));
  EXPECT_NE(transmit(ch, x, 1234), transmit(ch, x, 1235));
}

TEST(Transmit, ChiSquareAgainstTensor)
{
  std::mt19937_64 g(3);
  const auto pair = testutil::random_kernel(g, 2, 4);  // (y,z) pairs for binary y,z
  std::vector<double> w;
  for (std::size_t x = 0; x < 2; ++x) {
    for (std::size_t c = 0; c < 4; ++c) w.push_back(pair(x, c));
  }
  const Dmbc ch(2, 2, 2, w);
  const std::size_t n = 100000;
  for (Symbol xs : {Symbol{0}, Symbol{1}}) {
    auto [y, z] = transmit(ch, Sequence(n, xs), 77 + xs);
    std::vector<double> counts(4, 0.0);
    for (std::size_t i = 0; i < n; ++i) counts[y[i] * 2 + z[i]] += 1;
    double chi2 = 0.0;
    for (std::size_t c = 0; c < 4; ++c) {
      const double e = n * ch(xs, c / 2, c % 2);
      chi2 += (counts[c] - e) * (counts[c] - e) / e;
    }
    EXPECT_LT(chi2, 16.27) << "df=3 critical value at 0.999";
  }
}

TEST(Degradedness, Obverse)
{
  // Z a deterministic function of Y
  auto f = Dmbc::obverse_cascade(Kernel::bsc(0.2), Kernel::from_rows({{0, 1}, {1, 0}}));
  EXPECT_TRUE(check_obversely_degraded(f));
  // Z copies X, Y noisy
  auto c = Dmbc::independent(Kernel::bsc(0.2), Kernel::identity(2));
  EXPECT_FALSE(check_obversely_degraded(c));
  // Cascade Y = BSC(0.1)(X), Z = BSC(0.15)(Y)
  auto cascade = Dmbc::obverse_cascade(Kernel::bsc(0.1), Kernel::bsc(0.15));
  EXPECT_LE(obverse_residual(cascade, Distribution::uniform(2)), 1e-12);
  EXPECT_TRUE(check_obversely_degraded(cascade, Distribution::uniform(2), 1e-9));
}

TEST(Degradedness, Reverse)
{
  auto f = Dmbc::reverse_cascade(Kernel::bsc(0.2), Kernel::from_rows({{0, 1}, {1, 0}}));
  EXPECT_TRUE(check_reversely_degraded(f));
  auto c = Dmbc::independent(Kernel::identity(2), Kernel::bsc(0.2));
  EXPECT_FALSE(check_reversely_degraded(c));
  auto cascade = Dmbc::reverse_cascade(Kernel::bsc(0.1), Kernel::bsc(0.15));
  EXPECT_TRUE(check_reversely_degraded(cascade, Distribution::uniform(2), 1e-9));
  EXPECT_FALSE(check_obversely_degraded(cascade));
}

TEST(AnalyzeDegraded, TrivialReversePart)
{
  auto ch = Dmbc::obverse_cascade(Kernel::bsc(0.1), Kernel::bsc(0.2));
  auto rep = analyze_degraded(ch, ChannelSplit::obverse_only(ch));
  EXPECT_TRUE(rep.degraded());
  EXPECT_TRUE(rep.subchannel_split.has_value());
}

TEST(AnalyzeDegraded, ProductOfCascades)
{
  auto o = Dmbc::obverse_cascade(Kernel::bsc(0.1), Kernel::bsc(0.2));
  auto r = Dmbc::reverse_cascade(Kernel::bsc(0.05), Kernel::bsc(0.3));
  auto ch = Dmbc::product(o, r);
  ASSERT_EQ(ch.x_size(), 4u);
  auto rep = analyze_degraded(ch, {{2, 2}, {2, 2}, {2, 2}});
  EXPECT_TRUE(rep.degraded());
  EXPECT_LT(rep.residuals.independence, 1e-9);
  EXPECT_LT(rep.residuals.obverse, 1e-9);
  EXPECT_LT(rep.residuals.reverse, 1e-9);

  // The whole product is neither obversely nor reversely degraded.
  EXPECT_FALSE(check_obversely_degraded(ch));
  EXPECT_FALSE(check_reversely_degraded(ch));

  auto sub = obverse_subchannel(ch, {{2, 2}, {2, 2}, {2, 2}});
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(sub.tensor()[i], o.tensor()[i], 1e-12);
}

TEST(AnalyzeDegraded, EveCopiesInputOnObversePart)
{
  auto o = Dmbc::independent(Kernel::bsc(0.1), Kernel::identity(2));
  auto r = Dmbc::reverse_cascade(Kernel::bsc(0.05), Kernel::bsc(0.3));
  auto rep = analyze_degraded(Dmbc::product(o, r), {{2, 2}, {2, 2}, {2, 2}});
  EXPECT_FALSE(rep.degraded());
  EXPECT_FALSE(rep.obversely_degraded);
  EXPECT_TRUE(rep.independent_subchannels);
  EXPECT_GT(rep.residuals.obverse, 1e-3);
}

TEST(AnalyzeDegraded, CrossTalkBreaksIndependence)
{
  // Y carries X_R on the O half: not two independent subchannels.
  std::vector<double> w(4 * 4 * 1, 0.0);
  for (std::size_t x = 0; x < 4; ++x) w[x * 4 + ((x % 2) * 2)] = 1.0;  // y = (x_r, 0)
  Dmbc ch(4, 4, 1, w);
  auto rep = analyze_degraded(ch, {{2, 2}, {2, 2}, {1, 1}});
  EXPECT_FALSE(rep.independent_subchannels);
}

TEST(AnalyzeDegraded, SplitMustMatchAlphabets)
{
  auto ch = Dmbc::independent(Kernel::bsc(0.1), Kernel::bsc(0.2));
  EXPECT_THROW(analyze_degraded(ch, {{2, 2}, {2, 1}, {2, 1}}), std::invalid_argument);
  EXPECT_THROW(analyze_degraded(ch, {{0, 2}, {2, 1}, {2, 1}}), std::invalid_argument);
}

TEST(AnalyzeDegraded, ConsistentWithObverseCheck)
{
  std::mt19937_64 g(21);
  for (int i = 0; i < 50; ++i) {
    auto ch = Dmbc::obverse_cascade(testutil::random_kernel(g, 3, 2), testutil::random_kernel(g, 2, 3));
    ASSERT_TRUE(check_obversely_degraded(ch));
    EXPECT_TRUE(analyze_degraded(ch, ChannelSplit::obverse_only(ch)).degraded());
    auto any = Dmbc::independent(testutil::random_kernel(g, 3, 2), testutil::random_kernel(g, 3, 3));
    EXPECT_EQ(check_obversely_degraded(any), analyze_degraded(any, ChannelSplit::obverse_only(any)).degraded());
  }
}

TEST(FindDegradedSplit, SmallAlphabets)
{
  auto o = Dmbc::obverse_cascade(Kernel::bsc(0.1), Kernel::bsc(0.2));
  auto r = Dmbc::reverse_cascade(Kernel::bsc(0.05), Kernel::bsc(0.3));
  auto found = find_degraded_split(Dmbc::product(o, r), Distribution::uniform(4));
  ASSERT_TRUE(found.has_value());
  EXPECT_EQ(*found->subchannel_split, (ChannelSplit{{2, 2}, {2, 2}, {2, 2}}));

  auto none = find_degraded_split(Dmbc::independent(Kernel::bsc(0.1), Kernel::bsc(0.2)), Distribution::uniform(2));
  EXPECT_FALSE(none.has_value());

  auto big = Dmbc::independent(Kernel::identity(5), Kernel::identity(5));
  EXPECT_THROW(find_degraded_split(big, Distribution::uniform(5)), std::invalid_argument);
}
