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
#include <span>
#include <vector>

#include "tbsg/game.hpp"

namespace tbsg {

// Actions whose values differ by at most this much are treated as tied, and
// ties always go to the lowest action index. The value is twice the
// worst-case error of value iteration at the default tolerance, so the
// approximate and exact solvers agree on genuinely tied actions.
inline constexpr double kTieTolerance = 1e-10;

// Margins at or below this are reported as an exact zero gap.
inline constexpr double kZeroGapTolerance = 1e-10;

inline constexpr double kDefaultTolerance = 1e-10;

enum class SolverKind { kValueIteration, kStrategyIteration };

const char* to_string(SolverKind kind);

// ---------------------------------------------------------------------------
// Exact linear algebra for fixed strategies.

// x = (I - gamma P^pi)^{-1} y for a vector y over state-action pairs, where
// P^pi(s,a)(s',a') = P(s'|s,a) 1(a' = pi(s')). Solved through the |S| x |S|
// system of the induced chain.
std::vector<double> apply_resolvent(const GameModel& model,
                                    std::span<const std::size_t> actions,
                                    std::span<const double> y);

// V(s) = Q(s, pi(s)).
std::vector<double> project(const GameModel& model, std::span<const std::size_t> actions,
                            std::span<const double> q);

// Exact Q^pi = (I - gamma P^pi)^{-1} r.
ValueTable evaluate_pair(const GameModel& model, const StrategyPair& pair);
ValueTable evaluate_actions(const GameModel& model, std::span<const std::size_t> actions);

// ---------------------------------------------------------------------------
// Greedy selection and optimality residuals.

// Best action at s for its owner, lowest index among ties.
std::size_t greedy_action(const GameModel& model, std::span<const double> q, std::size_t s);

StrategyPair greedy_pair(const GameModel& model, std::span<const double> q);

// sup_{s,a} |(TQ)(s,a) - Q(s,a)| for the Shapley operator
// (TQ)(s,a) = r(s,a) + gamma sum_s' P(s'|s,a) m(s'),
// m(s') = max_a' Q(s',a') on max states and min_a' Q(s',a') on min states.
double shapley_residual(const GameModel& model, std::span<const double> q);

std::vector<double> shapley_operator(const GameModel& model, std::span<const double> q);

// ---------------------------------------------------------------------------
// Solvers.

struct CounterstrategyResult {
  Strategy strategy;  // for the responding side
  ValueTable table;   // Q^{*,nu} or Q^{mu,*}
  std::size_t iterations = 0;
};

// Best response of the side opposite to `fixed_side` against `fixed`, found
// by policy iteration on the induced MDP. The returned table is exact up to
// floating point, hence within any positive `tol`.
CounterstrategyResult counterstrategy(const GameModel& model, const Strategy& fixed,
                                      Player fixed_side, double tol = kDefaultTolerance,
                                      std::size_t max_iters = 10'000);

struct NashSolution {
  ValueTable table;
  StrategyPair pair;
  std::size_t iterations = 0;
  // Strategy iteration only: V^{mu_k,*} after each round, for auditing the
  // monotone improvement of the maximizer.
  std::vector<std::vector<double>> max_side_values;
};

// Iterates the Shapley operator from Q = 0 until the residual drops to
// tol (1 - gamma) / (2 gamma), so the result is within tol of Q*.
NashSolution nash_value_iteration(const GameModel& model, double tol = kDefaultTolerance,
                                  std::size_t max_iters = 1'000'000);

// Hoffman-Karp style strategy iteration: the maximizer improves greedily
// against exact minimizer counterstrategies until no improvement exists.
NashSolution nash_strategy_iteration(const GameModel& model, double tol = kDefaultTolerance,
                                     std::size_t max_iters = 10'000);

NashSolution solve_nash(const GameModel& model, SolverKind kind,
                        double tol = kDefaultTolerance);

// Reference oracle: enumerates every pure strategy pair, evaluates each one
// exactly and takes Q* = max_mu min_nu Q^{mu,nu} entrywise.
inline constexpr double kBruteForceLimit = 1e6;
NashSolution brute_force_nash(const GameModel& model);

// ---------------------------------------------------------------------------
// Gaps and certification.

// Throws NotOptimalTable if the Shapley residual of qstar exceeds this.
inline constexpr double kOptimalTableResidual = 1e-6;

GapReport suboptimality_gap_nash(const GameModel& model, const ValueTable& qstar);

GapReport suboptimality_gap_counter(const GameModel& model, const Strategy& fixed,
                                    Player fixed_side);

// Margins of `q` at states owned by the players in `sides`. Exposed for
// callers that already hold an optimal table.
GapReport margins_of(const GameModel& model, std::span<const double> q, bool include_max,
                     bool include_min);

struct Certification {
  double max_side_deviation = 0.0;  // |Q^{mu,*} - Q*|
  double min_side_deviation = 0.0;  // |Q^{*,nu} - Q*|
  double epsilon = 0.0;
  double tol = 0.0;
  bool pass = false;

  double deviation() const {
    return max_side_deviation > min_side_deviation ? max_side_deviation : min_side_deviation;
  }
};

Certification certify_epsilon_nash(const GameModel& model, const StrategyPair& pair,
                                   double epsilon, double tol = kDefaultTolerance);

// Same check against a precomputed Q*.
Certification certify_epsilon_nash(const GameModel& model, const StrategyPair& pair,
                                   std::span<const double> qstar, double epsilon,
                                   double tol = kDefaultTolerance);

double sup_distance(std::span<const double> a, std::span<const double> b);

}  // namespace tbsg
