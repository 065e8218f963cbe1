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

#include <ske/bounds.hpp>

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace ske;

namespace {

Dmbc random_binary_dmbc(std::mt19937_64& g)
{
  const auto k = testutil::random_kernel(g, 2, 4);
  std::vector<double> w;
  for (std::size_t x = 0; x < 2; ++x) {
    for (std::size_t c = 0; c < 4; ++c) w.push_back(k(x, c));
  }
  return Dmbc(2, 2, 2, w);
}

testutil::BinaryOracle oracle_for(const Dmbc& ch)
{
  testutil::BinaryOracle o;
  o.w.assign(2, std::vector<std::vector<double>>(ch.y_size(), std::vector<double>(ch.z_size())));
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < ch.y_size(); ++y)
      for (std::size_t z = 0; z < ch.z_size(); ++z) o.w[x][y][z] = ch(x, y, z);
  return o;
}

Dmbc perfect_blind() { return Dmbc::independent(Kernel::identity(2), Kernel::constant(2, Distribution::point(2, 0))); }

Dmbc useless()
{
  return Dmbc::independent(Kernel::constant(2, Distribution::uniform(2)), Kernel::constant(2, Distribution::uniform(2)));
}

AuxScheme simple_scheme(std::size_t ny, std::size_t nxb)
{
  AuxScheme s;
  s.card_V = ny;
  s.card_W1 = nxb;
  s.card_W2 = 1;
  s.kernel_V = Kernel::identity(ny);
  s.dist_W2 = Distribution::point(1, 0);
  s.kernel_W1_given_W2 = Kernel::constant(1, Distribution::uniform(nxb));
  s.kernel_X_given_W1 = Kernel::identity(nxb);
  return s;
}

}  // namespace

TEST(SecrecyCapacitySimple, Examples)
{
  EXPECT_NEAR(secrecy_capacity_simple(perfect_blind()).value, 1.0, 1e-9);
  const auto same = Dmbc::independent(Kernel::bsc(0.2), Kernel::bsc(0.2));
  EXPECT_NEAR(secrecy_capacity_simple(same).value, 0.0, 1e-12);

  // Z = BSC(0.125)(Y) is statistically a BSC(0.2) of X; the degraded value is h(0.2) - h(0.1).
  const auto cascade = Dmbc::obverse_cascade(Kernel::bsc(0.1), Kernel::bsc(0.125));
  EXPECT_NEAR(secrecy_capacity_simple(cascade).value, 0.252932501298081127, 1e-9);

  const auto split = Dmbc::independent(Kernel::bsc(0.1), Kernel::bsc(0.2));
  const auto o = oracle_for(split);
  const double ref = testutil::binary_grid_max([&](double p) { return o.eval(p).first; });
  EXPECT_NEAR(secrecy_capacity_simple(split).value, std::max(0.0, ref), 1e-4);
}

TEST(SecrecyCapacitySimple, MatchesGridOracle)
{
  std::mt19937_64 g(101);
  for (int i = 0; i < 25; ++i) {
    const auto ch = random_binary_dmbc(g);
    const auto o = oracle_for(ch);
    const double ref = std::max(0.0, testutil::binary_grid_max([&](double p) { return o.eval(p).first; }));
    const auto r = secrecy_capacity_simple(ch);
    EXPECT_NEAR(r.value, ref, 1e-4) << "instance " << i;
    EXPECT_GE(r.value, ref - 1e-12) << "grid refinement never loses to the coarse oracle";
    // The reported argmax attains the reported value.
    if (r.value > 0) EXPECT_NEAR(o.eval(r.inputs[0][0]).first, r.value, 1e-12);
  }
}

TEST(SecrecyCapacityAux, Examples)
{
  const auto ch = Dmbc::independent(Kernel::bsc(0.1), Kernel::bsc(0.3));
  EXPECT_NEAR(secrecy_capacity_aux(ch, 1).value, 0.0, 1e-12);
  EXPECT_GE(secrecy_capacity_aux(ch, 2).value, secrecy_capacity_simple(ch).value - 1e-9);
  EXPECT_THROW(secrecy_capacity_aux(ch, 0), std::invalid_argument);
}

TEST(SecrecyCapacityAux, DominatesSimple)
{
  std::mt19937_64 g(103);
  for (int i = 0; i < 20; ++i) {
    const auto ch = random_binary_dmbc(g);
    EXPECT_GE(secrecy_capacity_aux(ch, 2, 0.01, 50).value, secrecy_capacity_simple(ch).value - 1e-6) << i;
  }
}

TEST(UpperBound, Examples)
{
  EXPECT_NEAR(upper_bound({perfect_blind(), useless()}).value, 1.0, 1e-9);
  const auto eve_is_bob = Dmbc::obverse_cascade(Kernel::bsc(0.1), Kernel::identity(2));
  EXPECT_NEAR(upper_bound({eve_is_bob, eve_is_bob}).value, 0.0, 1e-12);

  const auto split = Dmbc::independent(Kernel::bsc(0.1), Kernel::bsc(0.2));
  const auto o = oracle_for(split);
  const double ref = testutil::binary_grid_max([&](double p) { return o.eval(p).second; });
  const auto r = upper_bound({split, useless()});
  EXPECT_NEAR(r.value, ref, 1e-4);
  EXPECT_EQ(r.direction, "forward");
}

TEST(UpperBound, MatchesGridOracle)
{
  std::mt19937_64 g(107);
  for (int i = 0; i < 25; ++i) {
    const auto f = random_binary_dmbc(g), b = random_binary_dmbc(g);
    const auto of = oracle_for(f), ob = oracle_for(b);
    const double ref = std::max(testutil::binary_grid_max([&](double p) { return of.eval(p).second; }),
                                testutil::binary_grid_max([&](double p) { return ob.eval(p).second; }));
    EXPECT_NEAR(upper_bound({f, b}).value, ref, 1e-4) << "instance " << i;
  }
}

TEST(UpperBound, LargerAlphabetMatchesDirectEvaluation)
{
  std::mt19937_64 g(109);
  for (int i = 0; i < 5; ++i) {
    const Dmbc ch = Dmbc::independent(testutil::random_kernel(g, 3, 3), testutil::random_kernel(g, 3, 2));
    const auto r = conditional_information_max(ch);
    const auto j = ch.joint(r.inputs[0]);
    EXPECT_NEAR(r.value, conditional_mutual_information(j, {0}, {1}, {2}), 1e-9);
    // No random input law does better.
    for (int k = 0; k < 200; ++k) {
      const auto p = testutil::random_distribution(g, 3);
      EXPECT_LE(conditional_mutual_information(ch.joint(p), {0}, {1}, {2}), r.value + 1e-6);
    }
  }
}

TEST(BoundProperties, ConditionalInformationConcaveInInput)
{
  std::mt19937_64 g(113);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const std::size_t nx = 2 + i % 3;
    const Dmbc ch = Dmbc::independent(testutil::random_kernel(g, nx, 2 + i % 2), testutil::random_kernel(g, nx, 2));
    const auto p = testutil::random_distribution(g, nx), q = testutil::random_distribution(g, nx);
    const double lam = u(g);
    std::vector<double> m(nx);
    for (std::size_t x = 0; x < nx; ++x) m[x] = lam * p[x] + (1 - lam) * q[x];
    auto obj = [&](const Distribution& d) { return conditional_mutual_information(ch.joint(d), {0}, {1}, {2}); };
    EXPECT_GE(obj(Distribution::normalized(m)), lam * obj(p) + (1 - lam) * obj(q) - 1e-9);
  }
}

TEST(RateTerms, ConstantV)
{
  TwoDmbc two{Dmbc::independent(Kernel::bsc(0.1), Kernel::bsc(0.2)), Dmbc::independent(Kernel::bsc(0.05), Kernel::bsc(0.3))};
  auto s = simple_scheme(2, 2);
  s.card_V = 1;
  s.kernel_V = Kernel::constant(2, Distribution::point(1, 0));
  const auto t = rate_terms(two, s, Distribution::uniform(2));
  EXPECT_NEAR(t.r_s1, 0.0, 1e-12);
  EXPECT_NEAR(t.constraint_lhs, 0.0, 1e-12);
}

TEST(RateTerms, BscPairAgainstClosedForms)
{
  // Forward: Y = X + BSC(0.1), Z = X + BSC(0.2), independent flips. Y xor Z is Bernoulli(0.26).
  // Backward: Y = X + BSC(0.05), Z = X + BSC(0.3).
  TwoDmbc two{Dmbc::independent(Kernel::bsc(0.1), Kernel::bsc(0.2)), Dmbc::independent(Kernel::bsc(0.05), Kernel::bsc(0.3))};
  const auto t = rate_terms(two, simple_scheme(2, 2), Distribution::uniform(2));
  EXPECT_NEAR(t.r_s1, (1 - binary_entropy(0.1)) - (1 - binary_entropy(0.26)), 1e-12);
  EXPECT_NEAR(t.constraint_lhs, binary_entropy(0.1), 1e-12);
  EXPECT_NEAR(t.r_s2, binary_entropy(0.3) - binary_entropy(0.05), 1e-12);
  EXPECT_NEAR(t.constraint_rhs, 1 - binary_entropy(0.05), 1e-12);

  const auto lit = rate_terms(two, simple_scheme(2, 2), Distribution::uniform(2), RateReading::Literal);
  EXPECT_NEAR(lit.r_s1, 1 - binary_entropy(0.1), 1e-12);
}

TEST(RateTerms, RejectsMismatchedScheme)
{
  TwoDmbc two{perfect_blind(), perfect_blind()};
  EXPECT_THROW(rate_terms(two, simple_scheme(3, 2), Distribution::uniform(2)), std::invalid_argument);
}

TEST(LowerBound, UselessChannels)
{
  const auto r = lower_bound({useless(), useless()});
  EXPECT_EQ(r.value, 0.0);
  EXPECT_FALSE(r.feasible);
}

TEST(LowerBound, PerfectBackwardApproachesOneWayCapacity)
{
  // V constant, W2 constant, W1 = X_b: the value tends to the backward one-way capacity as n_b grows.
  const auto r = lower_bound({useless(), perfect_blind()});
  EXPECT_TRUE(r.feasible);
  EXPECT_NEAR(r.value, 0.99, 1e-6);
  ASSERT_TRUE(r.ratio.has_value());
  EXPECT_EQ(*r.ratio, (Ratio{1, 99}));
  EXPECT_EQ(r.direction, "A");

  const auto swapped = lower_bound({perfect_blind(), useless()});
  EXPECT_NEAR(swapped.value, 0.99, 1e-6);
  EXPECT_EQ(*swapped.ratio, (Ratio{99, 1}));
  EXPECT_EQ(swapped.direction, "B");
}

TEST(LowerBound, ReportedValueMatchesExactTerms)
{
  std::mt19937_64 g(127);
  for (int i = 0; i < 10; ++i) {
    TwoDmbc two{random_binary_dmbc(g), random_binary_dmbc(g)};
    const auto r = lower_bound(two);
    for (const auto& part : r.parts) {
      if (!part.feasible) continue;
      const auto& t = *part.terms;
      // The term of the first channel of the direction gets the first-channel count.
      const double a = part.direction == "A" ? part.ratio->nf : part.ratio->nb;
      const double b = part.direction == "A" ? part.ratio->nb : part.ratio->nf;
      EXPECT_NEAR(part.value, (a * t.r_s1 + b * std::max(0.0, t.r_s2)) / (a + b), 1e-9);
      EXPECT_LE(a * t.constraint_lhs, b * t.constraint_rhs + 1e-9);
    }
  }
}

TEST(LowerBound, BelowUpperBound)
{
  std::mt19937_64 g(131);
  for (int i = 0; i < 20; ++i) {
    TwoDmbc two{random_binary_dmbc(g), random_binary_dmbc(g)};
    EXPECT_LE(lower_bound(two).value, upper_bound(two).value + 1e-3) << "instance " << i;
  }
}

TEST(LowerBound, MonotoneInRestarts)
{
  std::mt19937_64 g(137);
  for (int i = 0; i < 5; ++i) {
    TwoDmbc two{random_binary_dmbc(g), random_binary_dmbc(g)};
    LowerBoundOptions few, many;
    few.restarts = 4;
    many.restarts = 12;
    EXPECT_LE(lower_bound(two, few).value, lower_bound(two, many).value + 1e-12);
  }
}

TEST(LowerBound, LargerCapsDoNotHurt)
{
  std::mt19937_64 g(139);
  double worst = 0.0;
  for (int i = 0; i < 8; ++i) {
    TwoDmbc two{random_binary_dmbc(g), random_binary_dmbc(g)};
    LowerBoundOptions small;
    small.caps = {2, 2, 1};
    worst = std::max(worst, lower_bound(two, small).value - lower_bound(two).value);
  }
  EXPECT_LE(worst, 1e-3);
}

TEST(LowerBound, LiteralReadingNeverLowersDirectionB)
{
  std::mt19937_64 g(149);
  for (int i = 0; i < 5; ++i) {
    TwoDmbc two{random_binary_dmbc(g), random_binary_dmbc(g)};
    LowerBoundOptions lit;
    lit.reading = RateReading::Literal;
    EXPECT_GE(lower_bound(two, lit).parts[1].value, lower_bound(two).parts[1].value - 1e-4);
  }
}

TEST(LowerBound, ParallelDirectionsMatchSerial)
{
  std::mt19937_64 g(151);
  TwoDmbc two{random_binary_dmbc(g), random_binary_dmbc(g)};
  LowerBoundOptions par;
  par.jobs = 2;
  EXPECT_EQ(lower_bound(two).value, lower_bound(two, par).value);
}

TEST(DegradedCapacity, Examples)
{
  TwoDmbc blind{perfect_blind(), useless()};
  DegradedSplits s{ChannelSplit::obverse_only(blind.forward), ChannelSplit::obverse_only(blind.backward)};
  EXPECT_NEAR(degraded_capacity(blind, s).value, 1.0, 1e-9);

  // Eve sees Bob's output exactly on both channels.
  const auto copy = Dmbc::obverse_cascade(Kernel::bsc(0.1), Kernel::identity(2));
  TwoDmbc zero{copy, copy};
  EXPECT_NEAR(degraded_capacity(zero, {ChannelSplit::obverse_only(copy), ChannelSplit::obverse_only(copy)}).value, 0.0,
              1e-12);

  const auto not_degraded = Dmbc::independent(Kernel::bsc(0.1), Kernel::bsc(0.2));
  TwoDmbc bad{not_degraded, copy};
  EXPECT_THROW(degraded_capacity(bad, {ChannelSplit::obverse_only(not_degraded), ChannelSplit::obverse_only(copy)}),
               std::invalid_argument);
}

TEST(DegradedCapacity, EqualsUpperBoundOnCascades)
{
  std::mt19937_64 g(157);
  for (int i = 0; i < 10; ++i) {
    const auto o = Dmbc::obverse_cascade(testutil::random_kernel(g, 2, 2), testutil::random_kernel(g, 2, 2));
    const auto r = Dmbc::reverse_cascade(testutil::random_kernel(g, 2, 2), testutil::random_kernel(g, 2, 2));
    const auto f = Dmbc::product(o, r);
    const auto b = Dmbc::obverse_cascade(testutil::random_kernel(g, 2, 2), testutil::random_kernel(g, 2, 2));
    TwoDmbc two{f, b};
    const DegradedSplits s{{{2, 2}, {2, 2}, {2, 2}}, ChannelSplit::obverse_only(b)};
    EXPECT_NEAR(degraded_capacity(two, s).value, upper_bound(two, 0.01, 40).value, 1e-6) << i;
  }
}
