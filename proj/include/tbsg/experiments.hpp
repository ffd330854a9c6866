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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tbsg/game.hpp"
#include "tbsg/solvers.hpp"

namespace tbsg {

// ---------------------------------------------------------------------------
// Random game generation.

enum class OwnerPattern { kAlternate, kRandom, kAllMax };
enum class RewardLaw { kUniform01, kBernoulli, kCustom };

struct GeneratorSpec {
  std::size_t ns = 2;
  std::size_t na = 2;
  double gamma = 0.9;
  OwnerPattern owner_pattern = OwnerPattern::kAlternate;
  double p_max = 0.5;  // probability of a MAX state under kRandom
  std::size_t support = 0;  // successors per row; 0 means |S|
  RewardLaw reward_law = RewardLaw::kUniform01;
  double bernoulli_p = 0.5;
  std::vector<double> custom_rewards;  // |S||A| entries under kCustom
  std::uint64_t seed = 0;
};

// Deterministic in `spec`. Each row picks `support` distinct successors
// uniformly and normalizes positive weights over them.
GameModel generate_game(const GeneratorSpec& spec);

// Margin-controlled game: starts from generate_game(spec) and rewrites the
// reward of every non-equilibrium action so that its Q* sits exactly
// `margins[k]` below (MAX) or above (MIN) the state's value. The equilibrium
// and V* are unchanged. Margins are consumed in (state, action) order and
// cycled. Throws DegenerateSpec when a rewritten reward leaves [0, 1].
GameModel generate_margin_game(const GeneratorSpec& spec, const std::vector<double>& margins);

// `count` margins spaced evenly in log scale on [lo, hi], listed with a
// stride-7 interleave so consecutive states do not get neighbouring values.
std::vector<double> log_uniform_margins(double lo, double hi, std::size_t count);

// Near-tie game: generate_game(spec) with rewards mapped affinely into
// [0.3, 0.7], then passed to generate_margin_game with
// log_uniform_margins(lo, hi, |S| (|A| - 1)).
GameModel near_tie_game(GeneratorSpec spec, double lo, double hi);

// Lottery game: `decision_states` states, alternately MAX and MIN, whose
// actions move to a reward-1 "good" state with probability 1/2 (action 0) or
// 1/2 -+ m / (gamma D) (other actions), otherwise to a reward-0 "bad" state.
// Good and bad stay put with probability 1 - return_prob and otherwise return
// to a uniformly chosen decision state, so D = 1 / (1 - gamma (1 - return_prob))
// is their value difference and m is the exact Q margin. The margins are
// spread linearly over [margin_lo, margin_hi] in a stride-7 order.
// Alternative actions at good and bad pay 1/2, so the Nash gap is
// min(margin_lo, 1/2).
GameModel lottery_game(std::size_t decision_states, std::size_t na, double gamma,
                       double margin_lo, double margin_hi, double return_prob = 0.01);

// ---------------------------------------------------------------------------
// Scaling studies.

struct ScalingConfig {
  GameModel truth;
  std::vector<std::size_t> budgets;  // n_per_pair, strictly increasing
  std::size_t trials = 1;
  double xi = 0.0;
  std::uint64_t master_seed = 0;
  SolverKind solver = SolverKind::kStrategyIteration;
  double tol = kDefaultTolerance;
  // Optional epsilon levels; the summary reports the smallest budget whose
  // median deviation is at most each level.
  std::vector<double> epsilon_grid;
  bool record_timing = false;  // wall_ms stays 0 otherwise
  std::size_t workers = 1;
};

void validate_scaling_config(const ScalingConfig& config);

struct ResultRow {
  std::size_t n_per_pair = 0;
  std::uint64_t total_n = 0;
  std::uint64_t seed = 0;
  double deviation_max = 0.0;
  bool exact_match = false;
  double gap = 0.0;
  double wall_ms = 0.0;
};

struct BudgetSummary {
  std::size_t n_per_pair = 0;
  std::uint64_t total_n = 0;
  double median_deviation = 0.0;
  double exact_match_frequency = 0.0;
};

struct ScalingSummary {
  std::vector<BudgetSummary> budgets;
  double gap = 0.0;
  // Least-squares slope of log(median deviation) on log(total N) over the
  // budgets with a positive median; nullopt with fewer than two such points.
  std::optional<double> slope;
  std::size_t slope_points = 0;
  // Fraction of adjacent budget pairs with strictly decreasing median.
  double decreasing_fraction = 0.0;
  // Smallest budget with exact_match frequency >= 0.9, when the truth has a
  // positive gap.
  std::optional<std::size_t> recovery_budget;
  std::vector<std::optional<std::size_t>> epsilon_budgets;
};

// Seed of trial t; shared across budgets so trials are paired.
std::uint64_t scaling_trial_seed(std::uint64_t master_seed, std::size_t trial);

// One row per (budget, trial) in that order. `on_row` sees each row as soon
// as its budget completes.
ScalingSummary run_scaling_study(const ScalingConfig& config,
                                 const std::function<void(const ResultRow&)>& on_row = {});

inline constexpr const char* kScalingCsvHeader =
    "n_per_pair,total_n,seed,deviation_max,exact_match,gap,wall_ms";

void write_scaling_row(std::ostream& os, const ResultRow& row);

// Least-squares slope of y on x.
double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> values);

}  // namespace tbsg
