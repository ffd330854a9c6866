// Copyright 2026 The TBSG Workbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tbsg/experiments.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "tbsg/analysis.hpp"

namespace tbsg {
namespace {

GeneratorSpec spec(std::size_t ns, std::size_t na, std::uint64_t seed) {
  GeneratorSpec g;
  g.ns = ns;
  g.na = na;
  g.seed = seed;
  return g;
}

TEST(GenerateGame, IsDeterministicInTheSpec) {
  auto g = spec(6, 3, 42);
  g.support = 3;
  EXPECT_EQ(generate_game(g), generate_game(g));
  auto h = g;
  h.seed = 43;
  EXPECT_NE(generate_game(g), generate_game(h));
}

TEST(GenerateGame, SupportOneIsDeterministic) {
  auto g = spec(7, 2, 5);
  g.support = 1;
  const auto m = generate_game(g);
  for (double x : m.transitions) EXPECT_TRUE(x == 0.0 || x == 1.0);
  std::vector<double> v = {0.3, 1.0, -2.0, 5.0, 0.0, 0.1, 9.0};
  for (double x : one_step_variance(m, v).values) EXPECT_EQ(x, 0.0);
}

TEST(GenerateGame, RowsHaveRequestedSupport) {
  auto g = spec(8, 3, 6);
  g.support = 3;
  const auto m = generate_game(g);
  for (std::size_t s = 0; s < 8; ++s) {
    for (std::size_t a = 0; a < 3; ++a) {
      int nonzero = 0;
      for (double x : m.row(s, a)) nonzero += x > 0.0 ? 1 : 0;
      EXPECT_EQ(nonzero, 3);
    }
  }
}

TEST(GenerateGame, OwnerPatterns) {
  auto g = spec(4, 2, 1);
  const auto alt = generate_game(g);
  EXPECT_EQ(alt.owner, (std::vector<Player>{Player::kMax, Player::kMin, Player::kMax, Player::kMin}));
  g.owner_pattern = OwnerPattern::kAllMax;
  for (Player p : generate_game(g).owner) EXPECT_EQ(p, Player::kMax);
  g.ns = 400;
  g.owner_pattern = OwnerPattern::kRandom;
  g.p_max = 0.25;
  int max_states = 0;
  for (Player p : generate_game(g).owner) max_states += p == Player::kMax ? 1 : 0;
  EXPECT_NEAR(max_states / 400.0, 0.25, 0.07);
}

TEST(GenerateGame, RewardLaws) {
  auto g = spec(5, 2, 9);
  g.reward_law = RewardLaw::kBernoulli;
  g.bernoulli_p = 0.3;
  for (double r : generate_game(g).rewards) EXPECT_TRUE(r == 0.0 || r == 1.0);
  g.reward_law = RewardLaw::kCustom;
  g.custom_rewards = {0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  EXPECT_EQ(generate_game(g).rewards, g.custom_rewards);
  g.custom_rewards.pop_back();
  EXPECT_THROW(generate_game(g), Error);
}

TEST(GenerateGame, RejectsDegenerateSpecs) {
  auto g = spec(3, 2, 0);
  g.support = 4;
  EXPECT_THROW(generate_game(g), Error);
  g = spec(0, 2, 0);
  EXPECT_THROW(generate_game(g), Error);
  g = spec(3, 2, 0);
  g.gamma = 1.0;
  EXPECT_THROW(generate_game(g), Error);
  try {
    g = spec(3, 2, 0);
    g.bernoulli_p = 2.0;
    g.reward_law = RewardLaw::kBernoulli;
    generate_game(g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateSpec);
  }
}

TEST(LogUniformMargins, CoverTheRangeInLogScale) {
  const auto m = log_uniform_margins(1e-4, 0.3, 30);
  ASSERT_EQ(m.size(), 30u);
  std::set<double> distinct(m.begin(), m.end());
  EXPECT_EQ(distinct.size(), 30u);
  EXPECT_GE(*distinct.begin(), 1e-4);
  EXPECT_LE(*distinct.rbegin(), 0.3);
  std::vector<double> sorted(distinct.begin(), distinct.end());
  for (std::size_t i = 2; i < sorted.size(); ++i) {
    EXPECT_NEAR(std::log(sorted[i] / sorted[i - 1]), std::log(sorted[1] / sorted[0]), 1e-9);
  }
}

TEST(MarginGame, KeepsEquilibriumAndSetsMargins) {
  auto g = spec(6, 3, 11);
  g.reward_law = RewardLaw::kCustom;
  for (int i = 0; i < 18; ++i) g.custom_rewards.push_back(0.4 + 0.01 * i);
  const std::vector<double> margins = {0.01, 0.02, 0.05};
  const auto base = generate_game(g);
  const auto m = generate_margin_game(g, margins);
  const auto base_q = oracle::nash_q(base);
  const auto q = oracle::nash_q(m);
  const auto pi = oracle::greedy(base, base_q, 1e-10);
  EXPECT_EQ(oracle::greedy(m, q, 1e-10), pi);
  std::vector<double> seen;
  for (std::size_t s = 0; s < 6; ++s) {
    const double v = q[s * 3 + pi[s]];
    EXPECT_NEAR(v, base_q[s * 3 + pi[s]], 1e-9);
    for (std::size_t a = 0; a < 3; ++a) {
      if (a != pi[s]) seen.push_back(std::abs(q[s * 3 + a] - v));
    }
  }
  for (std::size_t k = 0; k < seen.size(); ++k) EXPECT_NEAR(seen[k], margins[k % 3], 1e-9);
}

TEST(NearTieGame, GapIsTheSmallestMargin) {
  auto g = spec(10, 4, 2);
  g.gamma = 0.9;
  const auto m = near_tie_game(g, 1e-4, 0.3);
  const auto sol = nash_strategy_iteration(m);
  const auto gap = suboptimality_gap_nash(m, sol.table);
  // Smallest of 30 log-spaced midpoints on [1e-4, 0.3].
  EXPECT_NEAR(gap.nash_gap, 1e-4 * std::pow(3000.0, 0.5 / 30.0), 1e-9);
}

TEST(LotteryGame, GapAndStructure) {
  const auto m = lottery_game(8, 4, 0.9, 0.1, 0.15);
  EXPECT_EQ(m.num_states, 10u);
  const auto sol = nash_strategy_iteration(m);
  EXPECT_NEAR(suboptimality_gap_nash(m, sol.table).nash_gap, 0.1, 1e-9);
  for (std::size_t s = 0; s < 10; ++s) EXPECT_EQ(joint_actions(m, sol.pair)[s], 0u);
  EXPECT_LE(oracle::sup_diff(sol.table.q, oracle::evaluate(m, std::vector<std::size_t>(10, 0))), 1e-9);
  EXPECT_THROW(lottery_game(8, 4, 0.9, 0.0, 0.1), Error);
  EXPECT_THROW(lottery_game(8, 4, 0.9, 0.1, 10.0), Error);
  EXPECT_THROW(lottery_game(8, 1, 0.9, 0.1, 0.15), Error);
}

TEST(LotteryGame, WrongDecisionsShowUpInTheDeviation) {
  const auto m = lottery_game(4, 2, 0.9, 0.1, 0.1);
  const auto qstar = nash_strategy_iteration(m).table.q;
  StrategyPair pair{{1, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0}};
  EXPECT_GT(certify_epsilon_nash(m, pair, qstar, 0.0).deviation(), 1e-6);
}

TEST(Statistics, MedianAndSlope) {
  EXPECT_DOUBLE_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_DOUBLE_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_DOUBLE_EQ(least_squares_slope({1, 2, 3, 4}, {3, 5, 7, 9}), 2.0);
}

TEST(ScalingStudy, DeterministicTruthHasZeroDeviation) {
  ScalingConfig c;
  c.truth = fixtures::deterministic_2x2();
  for (int k = 4; k <= 10; ++k) c.budgets.push_back(std::size_t{1} << k);
  c.trials = 3;
  std::vector<ResultRow> rows;
  const auto summary = run_scaling_study(c, [&](const ResultRow& r) { rows.push_back(r); });
  ASSERT_EQ(rows.size(), 21u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.deviation_max, 0.0);
    EXPECT_TRUE(r.exact_match);
    EXPECT_EQ(r.total_n, r.n_per_pair * 4);
    EXPECT_EQ(r.wall_ms, 0.0);
  }
  EXPECT_FALSE(summary.slope.has_value());
  EXPECT_EQ(summary.recovery_budget, std::optional<std::size_t>(16));
  EXPECT_NEAR(summary.gap, 0.75, 1e-12);
}

TEST(ScalingStudy, RowsAreOrderedPairedAndWorkerIndependent) {
  ScalingConfig c;
  auto g = spec(5, 2, 3);
  c.truth = generate_game(g);
  c.budgets = {8, 32, 128};
  c.trials = 4;
  c.master_seed = 17;
  std::vector<ResultRow> one, many;
  run_scaling_study(c, [&](const ResultRow& r) { one.push_back(r); });
  c.workers = 3;
  run_scaling_study(c, [&](const ResultRow& r) { many.push_back(r); });
  ASSERT_EQ(one.size(), 12u);
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].n_per_pair, c.budgets[i / 4]);
    EXPECT_EQ(one[i].seed, scaling_trial_seed(17, i % 4));
    EXPECT_EQ(one[i].deviation_max, many[i].deviation_max);
    EXPECT_EQ(one[i].exact_match, many[i].exact_match);
    EXPECT_GE(one[i].deviation_max, 0.0);
    if (one[i].exact_match && one[i].gap > 0.0) {
      EXPECT_LE(one[i].deviation_max, c.tol);
    }
  }
}

TEST(ScalingStudy, DeviationFallsOnNearTieGame) {
  auto g = spec(10, 4, 2);
  g.gamma = 0.9;
  ScalingConfig c;
  c.truth = near_tie_game(g, 1e-4, 0.3);
  c.budgets = {1024, 4096, 16384};
  c.trials = 10;
  c.master_seed = 1;
  c.epsilon_grid = {1.0, 1e-9};
  const auto s = run_scaling_study(c);
  ASSERT_EQ(s.budgets.size(), 3u);
  EXPECT_GT(s.budgets[0].median_deviation, s.budgets[2].median_deviation);
  ASSERT_EQ(s.epsilon_budgets.size(), 2u);
  EXPECT_EQ(s.epsilon_budgets[0], std::optional<std::size_t>(1024));
}

TEST(ScalingStudy, RejectsBadConfigs) {
  ScalingConfig c;
  c.truth = fixtures::deterministic_2x2();
  EXPECT_THROW(run_scaling_study(c), Error);
  c.budgets = {4, 4};
  EXPECT_THROW(run_scaling_study(c), Error);
  c.budgets = {4, 8};
  c.trials = 0;
  EXPECT_THROW(run_scaling_study(c), Error);
}

TEST(ScalingCsv, HeaderAndRowFormat) {
  EXPECT_STREQ(kScalingCsvHeader, "n_per_pair,total_n,seed,deviation_max,exact_match,gap,wall_ms");
  std::ostringstream os;
  write_scaling_row(os, ResultRow{16, 64, 5, 0.25, true, 0.5, 0.0});
  EXPECT_EQ(os.str(), "16,64,5,0.25,1,0.5,0\n");
}

}  // namespace
}  // namespace tbsg
