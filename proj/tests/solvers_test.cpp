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

#include "tbsg/solvers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"

namespace tbsg {
namespace {

GameModel random_tiny(std::mt19937_64& rng, std::size_t k) {
  const std::size_t ns = 1 + k % 4;
  const std::size_t na = 1 + (k / 4) % 3;
  const double gamma = k % 2 == 0 ? 0.5 : 0.9;
  return oracle::random_game(rng, ns, na, gamma, k % 3 == 0);
}

TEST(Evaluate, SelfLoopIsGeometricSeries) {
  const auto m = fixtures::make(1, 1, {Player::kMax}, {1.0}, {1.0}, 0.9);
  const auto t = evaluate_pair(m, StrategyPair{{0}, {0}});
  EXPECT_NEAR(t.q[0], 10.0, 1e-12);
  EXPECT_NEAR(t.v[0], 10.0, 1e-12);
}

TEST(Evaluate, TwoStateCycleMatchesTruncatedBellman) {
  const auto m = fixtures::two_state_cycle();
  const auto t = evaluate_pair(m, StrategyPair{{0, 0}, {0, 0}});
  EXPECT_NEAR(t.v[0], 4.0 / 3.0, 1e-12);
  EXPECT_NEAR(t.v[1], 2.0 / 3.0, 1e-12);
  const auto q = oracle::truncated_bellman(m, {0, 0}, 200);
  EXPECT_LT(oracle::sup_diff(t.q, q), 1e-12);
}

TEST(Evaluate, ZeroDiscountGivesRewards) {
  auto m = fixtures::deterministic_2x2();
  m.discount = 0.0;
  const auto t = evaluate_pair(m, StrategyPair{{1, 0}, {0, 1}});
  EXPECT_EQ(t.q, m.rewards);
}

TEST(Evaluate, ResolventMatchesDirectSolve) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 20; ++k) {
    const auto m = oracle::random_game(rng, 4, 3, 0.9);
    const std::vector<std::size_t> act{0, 1, 2, 1};
    const auto x = apply_resolvent(m, act, m.rewards);
    EXPECT_LT(oracle::sup_diff(x, oracle::evaluate(m, act)), 1e-10);
  }
}

TEST(ShapleyOperator, FixedPointAtNashValues) {
  const auto m = fixtures::deterministic_2x2();
  const std::vector<double> q{1.0, 0.25, 1.25, 0.5};
  EXPECT_LT(shapley_residual(m, q), 1e-15);
  EXPECT_THROW(shapley_operator(m, std::vector<double>{1.0}), Error);
}

TEST(Greedy, LowestIndexWinsTies) {
  const auto m = fixtures::duplicate_actions();
  const std::vector<double> q{1.0, 1.0, 2.0, 2.0};
  EXPECT_EQ(greedy_action(m, q, 0), 0u);
  EXPECT_EQ(greedy_action(m, q, 1), 0u);
  const std::vector<double> near{1.0, 1.0 + 1e-11, 2.0, 2.0 - 1e-11};
  EXPECT_EQ(greedy_action(m, near, 0), 0u);
  EXPECT_EQ(greedy_action(m, near, 1), 0u);
}

TEST(Counterstrategy, SingleMaxStatePicksBestAction) {
  const auto m = fixtures::one_state_two_actions();
  const auto r = counterstrategy(m, Strategy{0}, Player::kMin);
  EXPECT_EQ(r.strategy, Strategy{0});
  EXPECT_NEAR(r.table.q[0], 2.0, 1e-12);
  EXPECT_NEAR(r.table.q[1], 1.0, 1e-12);
}

TEST(Counterstrategy, SingleActionOpponentReducesToMdp) {
  std::mt19937_64 rng(5);
  auto m = oracle::random_game(rng, 3, 1, 0.9);
  m.owner = {Player::kMax, Player::kMin, Player::kMax};
  const auto r = counterstrategy(m, Strategy{0, 0, 0}, Player::kMin);
  EXPECT_LT(oracle::sup_diff(r.table.q, oracle::evaluate(m, {0, 0, 0})), 1e-12);
}

TEST(Counterstrategy, DominatesEveryEnumeratedResponse) {
  std::mt19937_64 rng(2024);
  for (std::size_t k = 0; k < 50; ++k) {
    const auto m = random_tiny(rng, k);
    const Strategy nu(m.num_states, 0);
    const auto best = counterstrategy(m, nu, Player::kMin);
    oracle::for_each_strategy(m, Player::kMax, [&](const std::vector<std::size_t>& mu) {
      const auto q = oracle::evaluate(m, oracle::joint(m, mu, nu));
      for (std::size_t i = 0; i < q.size(); ++i) EXPECT_GE(best.table.q[i], q[i] - 1e-8);
    });
    EXPECT_LT(oracle::sup_diff(best.table.q, oracle::best_response_to_min(m, nu)), 1e-8);

    const Strategy mu(m.num_states, 0);
    const auto worst = counterstrategy(m, mu, Player::kMax);
    EXPECT_LT(oracle::sup_diff(worst.table.q, oracle::best_response_to_max(m, mu)), 1e-8);
  }
}

TEST(Counterstrategy, RejectsMalformedStrategy) {
  const auto m = fixtures::deterministic_2x2();
  EXPECT_THROW(counterstrategy(m, Strategy{0}, Player::kMax), Error);
  EXPECT_THROW(counterstrategy(m, Strategy{3, 0}, Player::kMax), Error);
}

TEST(NashValueIteration, OneStateExample) {
  const auto m = fixtures::one_state_two_actions();
  const auto s = nash_value_iteration(m);
  EXPECT_NEAR(s.table.q[0], 2.0, 1e-9);
  EXPECT_NEAR(s.table.q[1], 1.0, 1e-9);
  EXPECT_EQ(s.pair.mu, Strategy{0});
}

TEST(NashValueIteration, ZeroGameIsZero) {
  const auto m = fixtures::zero_game();
  for (auto kind : {SolverKind::kValueIteration, SolverKind::kStrategyIteration}) {
    const auto s = solve_nash(m, kind);
    for (double q : s.table.q) EXPECT_EQ(q, 0.0);
    EXPECT_EQ(s.pair.mu, Strategy(3, 0));
    EXPECT_EQ(s.pair.nu, Strategy(3, 0));
  }
  EXPECT_EQ(brute_force_nash(m).table.q, std::vector<double>(6, 0.0));
}

TEST(NashValueIteration, ZeroDiscountReturnsRewards) {
  auto m = fixtures::deterministic_2x2();
  m.discount = 0.0;
  const auto s = nash_value_iteration(m);
  EXPECT_EQ(s.table.q, m.rewards);
  EXPECT_EQ(s.iterations, 1u);
}

TEST(NashValueIteration, ReportsNoConvergence) {
  std::mt19937_64 rng(3);
  const auto m = oracle::random_game(rng, 3, 2, 0.99);
  try {
    nash_value_iteration(m, 1e-12, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoConvergence);
    EXPECT_TRUE(e.is_solver_failure());
  }
}

TEST(NashStrategyIteration, DeterministicExample) {
  const auto m = fixtures::deterministic_2x2();
  const auto s = nash_strategy_iteration(m);
  const std::vector<double> expected{1.0, 0.25, 1.25, 0.5};
  EXPECT_LT(oracle::sup_diff(s.table.q, expected), 1e-12);
  EXPECT_EQ(s.pair.mu, (Strategy{0, 0}));
  EXPECT_EQ(s.pair.nu, (Strategy{0, 1}));
}

TEST(NashStrategyIteration, ZeroGameStopsAfterOneRound) {
  EXPECT_EQ(nash_strategy_iteration(fixtures::zero_game()).iterations, 1u);
}

TEST(NashStrategyIteration, MaximizerValuesImproveMonotonically) {
  std::mt19937_64 rng(77);
  for (int k = 0; k < 30; ++k) {
    const auto m = oracle::random_game(rng, 6, 3, 0.9);
    const auto s = nash_strategy_iteration(m);
    ASSERT_FALSE(s.max_side_values.empty());
    for (std::size_t i = 1; i < s.max_side_values.size(); ++i) {
      for (std::size_t st = 0; st < m.num_states; ++st) {
        EXPECT_GE(s.max_side_values[i][st], s.max_side_values[i - 1][st] - 1e-10);
      }
    }
  }
}

// Property: the three solvers agree with the enumeration oracle on Q* and,
// under the lowest-index tie rule, on the strategy pair.
TEST(NashSolvers, AgreeWithEnumerationOracle) {
  std::mt19937_64 rng(1);
  for (std::size_t k = 0; k < 100; ++k) {
    const auto m = random_tiny(rng, k);
    const auto truth = oracle::nash_q(m);
    const auto expected_actions = oracle::greedy(m, truth, kTieTolerance);
    const auto vi = nash_value_iteration(m);
    const auto si = nash_strategy_iteration(m);
    const auto bf = brute_force_nash(m);
    EXPECT_LT(oracle::sup_diff(vi.table.q, truth), 1e-8) << "game " << k;
    EXPECT_LT(oracle::sup_diff(si.table.q, truth), 1e-8) << "game " << k;
    EXPECT_LT(oracle::sup_diff(bf.table.q, truth), 1e-8) << "game " << k;
    EXPECT_EQ(joint_actions(m, si.pair), expected_actions) << "game " << k;
    EXPECT_EQ(vi.pair, si.pair) << "game " << k;
    EXPECT_EQ(bf.pair, si.pair) << "game " << k;
    EXPECT_LT(oracle::sup_diff(vi.table.q, si.table.q), 2 * kDefaultTolerance);
  }
}

TEST(BruteForce, OneStateGamesPickBestOrWorst) {
  const auto mx = fixtures::one_state_two_actions();
  EXPECT_EQ(brute_force_nash(mx).pair.mu, Strategy{0});
  auto mn = mx;
  mn.owner = {Player::kMin};
  EXPECT_EQ(brute_force_nash(mn).pair.nu, Strategy{1});
  EXPECT_NEAR(brute_force_nash(mn).table.q[1], 0.0, 1e-12);
}

TEST(BruteForce, RefusesHugeEnumerations) {
  std::mt19937_64 rng(9);
  const auto m = oracle::random_game(rng, 12, 4, 0.5);
  try {
    brute_force_nash(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooLarge);
  }
}

TEST(Gap, OneStateExampleHasGapOne) {
  const auto m = fixtures::one_state_two_actions();
  const auto s = nash_strategy_iteration(m);
  const auto g = suboptimality_gap_nash(m, s.table);
  EXPECT_NEAR(g.nash_gap, 1.0, 1e-12);
  ASSERT_TRUE(g.witness.has_value());
  EXPECT_EQ(g.witness->state, 0u);
  EXPECT_EQ(g.witness->best_action, 0u);
  EXPECT_EQ(g.witness->runner_up, 1u);
}

TEST(Gap, DuplicateActionsHaveZeroGap) {
  const auto m = fixtures::duplicate_actions();
  EXPECT_EQ(suboptimality_gap_nash(m, nash_strategy_iteration(m).table).nash_gap, 0.0);
  EXPECT_EQ(suboptimality_gap_counter(m, Strategy{0, 0}, Player::kMin).nash_gap, 0.0);
}

TEST(Gap, SingleActionGamesReportInfinity) {
  const auto m = fixtures::two_state_cycle();
  const auto g = suboptimality_gap_nash(m, nash_strategy_iteration(m).table);
  EXPECT_TRUE(std::isinf(g.nash_gap));
  EXPECT_FALSE(g.witness.has_value());
}

TEST(Gap, RejectsNonOptimalTable) {
  const auto m = fixtures::one_state_two_actions();
  try {
    suboptimality_gap_nash(m, ValueTable{{1.0, 1.0}, {1.0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotOptimalTable);
  }
}

TEST(Gap, CounterWithoutMinStatesMatchesNash) {
  const auto m = fixtures::one_state_two_actions();
  const auto g = suboptimality_gap_counter(m, Strategy{0}, Player::kMin);
  EXPECT_NEAR(g.nash_gap, 1.0, 1e-12);
  std::mt19937_64 rng(4);
  auto r = oracle::random_game(rng, 4, 3, 0.9);
  r.owner.assign(4, Player::kMax);
  EXPECT_NEAR(suboptimality_gap_counter(r, Strategy(4, 0), Player::kMin).nash_gap,
              suboptimality_gap_nash(r, nash_strategy_iteration(r).table).nash_gap, 1e-10);
}

TEST(Certify, ExactEquilibriumCertifiesAtZero) {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 20; ++k) {
    const auto m = oracle::random_game(rng, 3, 2, 0.9);
    const auto c = certify_epsilon_nash(m, brute_force_nash(m).pair, 0.0, 1e-8);
    EXPECT_TRUE(c.pass);
    EXPECT_LE(c.deviation(), 1e-8);
  }
}

TEST(Certify, WrongActionFailsWithDeviationOne) {
  const auto m = fixtures::one_state_two_actions();
  const auto c = certify_epsilon_nash(m, StrategyPair{{1}, {0}}, 0.5);
  EXPECT_FALSE(c.pass);
  EXPECT_NEAR(c.max_side_deviation, 1.0, 1e-12);
  EXPECT_NEAR(c.deviation(), 1.0, 1e-12);
}

TEST(Certify, AnyPairCertifiesOnZeroGame) {
  const auto m = fixtures::zero_game();
  EXPECT_TRUE(certify_epsilon_nash(m, StrategyPair{{1, 0, 1}, {0, 1, 0}}, 0.0).pass);
}

}  // namespace
}  // namespace tbsg
