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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tbsg {

const char* to_string(SolverKind kind) {
  return kind == SolverKind::kValueIteration ? "vi" : "si";
}

namespace {

void require_positive_tol(double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::kDegenerateParams, "tolerance must be positive");
}

// Threshold for switching actions in policy and strategy iteration. Far
// below any tolerance a caller would ask for, but large enough that
// round-off in the linear solves cannot make the iteration cycle.
double improvement_threshold(const GameModel& model) {
  const double scale = std::max(1.0, model.reward_scale()) / (1.0 - model.discount);
  return 1e-12 * scale;
}

bool better_for(Player owner, double candidate, double incumbent, double threshold) {
  return owner == Player::kMax ? candidate > incumbent + threshold
                               : candidate < incumbent - threshold;
}

// m(s) = value of the owner's best action.
std::vector<double> state_values(const GameModel& model, std::span<const double> q) {
  std::vector<double> m(model.num_states);
  for (std::size_t s = 0; s < model.num_states; ++s) {
    const double* qs = q.data() + model.index(s, 0);
    m[s] = model.owner[s] == Player::kMax ? *std::max_element(qs, qs + model.num_actions)
                                          : *std::min_element(qs, qs + model.num_actions);
  }
  return m;
}

ValueTable table_for(const GameModel& model, std::vector<double> q, const StrategyPair& pair) {
  ValueTable table;
  table.v = project(model, joint_actions(model, pair), q);
  table.q = std::move(q);
  return table;
}

}  // namespace

std::vector<double> apply_resolvent(const GameModel& model, std::span<const std::size_t> actions,
                                    std::span<const double> y) {
  const std::size_t n = model.num_states;
  if (actions.size() != n || y.size() != model.num_pairs()) {
    throw Error(ErrorCode::kLengthMismatch, "resolvent operands have the wrong size");
  }
  const double gamma = model.discount;
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                                     static_cast<Eigen::Index>(n));
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
  for (std::size_t s = 0; s < n; ++s) {
    const auto row = model.row(s, actions[s]);
    for (std::size_t t = 0; t < n; ++t) {
      system(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) -= gamma * row[t];
    }
    rhs(static_cast<Eigen::Index>(s)) = y[model.index(s, actions[s])];
  }
  const Eigen::VectorXd w = system.partialPivLu().solve(rhs);
  if (!w.allFinite()) throw Error(ErrorCode::kSingularSystem, "policy evaluation broke down");

  std::vector<double> x(model.num_pairs());
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < model.num_actions; ++a) {
      const auto row = model.row(s, a);
      double next = 0.0;
      for (std::size_t t = 0; t < n; ++t) next += row[t] * w(static_cast<Eigen::Index>(t));
      x[model.index(s, a)] = y[model.index(s, a)] + gamma * next;
    }
  }
  return x;
}

std::vector<double> project(const GameModel& model, std::span<const std::size_t> actions,
                            std::span<const double> q) {
  std::vector<double> v(model.num_states);
  for (std::size_t s = 0; s < model.num_states; ++s) v[s] = q[model.index(s, actions[s])];
  return v;
}

ValueTable evaluate_actions(const GameModel& model, std::span<const std::size_t> actions) {
  for (std::size_t s = 0; s < actions.size(); ++s) {
    if (actions[s] >= model.num_actions) {
      throw Error(ErrorCode::kIndexOutOfRange, "action index out of range");
    }
  }
  ValueTable table;
  table.q = apply_resolvent(model, actions, model.rewards);
  table.v = project(model, actions, table.q);
  return table;
}

ValueTable evaluate_pair(const GameModel& model, const StrategyPair& pair) {
  const auto actions = joint_actions(model, pair);
  return evaluate_actions(model, actions);
}

std::size_t greedy_action(const GameModel& model, std::span<const double> q, std::size_t s) {
  const double* qs = q.data() + model.index(s, 0);
  const bool maximize = model.owner[s] == Player::kMax;
  const double best = maximize ? *std::max_element(qs, qs + model.num_actions)
                               : *std::min_element(qs, qs + model.num_actions);
  for (std::size_t a = 0; a < model.num_actions; ++a) {
    if (std::abs(qs[a] - best) <= kTieTolerance) return a;
  }
  return 0;  // unreachable for finite q
}

StrategyPair greedy_pair(const GameModel& model, std::span<const double> q) {
  std::vector<std::size_t> actions(model.num_states);
  for (std::size_t s = 0; s < model.num_states; ++s) actions[s] = greedy_action(model, q, s);
  return split_actions(model, actions);
}

std::vector<double> shapley_operator(const GameModel& model, std::span<const double> q) {
  if (q.size() != model.num_pairs()) {
    throw Error(ErrorCode::kLengthMismatch, "Q must have |S|*|A| entries");
  }
  const auto m = state_values(model, q);
  std::vector<double> out(model.num_pairs());
  for (std::size_t s = 0; s < model.num_states; ++s) {
    for (std::size_t a = 0; a < model.num_actions; ++a) {
      const auto row = model.row(s, a);
      double next = 0.0;
      for (std::size_t t = 0; t < model.num_states; ++t) next += row[t] * m[t];
      out[model.index(s, a)] = model.reward(s, a) + model.discount * next;
    }
  }
  return out;
}

double shapley_residual(const GameModel& model, std::span<const double> q) {
  return sup_distance(shapley_operator(model, q), q);
}

double sup_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kLengthMismatch, "vectors differ in length");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

CounterstrategyResult counterstrategy(const GameModel& model, const Strategy& fixed,
                                      Player fixed_side, double tol, std::size_t max_iters) {
  require_positive_tol(tol);
  check_strategy(model, fixed, fixed_side);
  const Player responder = fixed_side == Player::kMax ? Player::kMin : Player::kMax;
  const double threshold = improvement_threshold(model);

  std::vector<std::size_t> actions(model.num_states, 0);
  for (std::size_t s = 0; s < model.num_states; ++s) {
    if (model.owner[s] == fixed_side) actions[s] = fixed[s];
  }

  CounterstrategyResult result;
  bool converged = false;
  while (result.iterations < max_iters) {
    ++result.iterations;
    result.table = evaluate_actions(model, actions);
    bool improved = false;
    for (std::size_t s = 0; s < model.num_states; ++s) {
      if (model.owner[s] != responder) continue;
      const std::size_t best = greedy_action(model, result.table.q, s);
      const double candidate = result.table.q[model.index(s, best)];
      const double incumbent = result.table.q[model.index(s, actions[s])];
      if (better_for(responder, candidate, incumbent, threshold)) {
        actions[s] = best;
        improved = true;
      }
    }
    if (!improved) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream os;
    os << "policy iteration did not settle within " << max_iters << " iterations";
    throw Error(ErrorCode::kNoConvergence, os.str());
  }

  // Canonicalize to the lowest-index greedy action; re-evaluate only if the
  // tie rule moved something.
  bool moved = false;
  for (std::size_t s = 0; s < model.num_states; ++s) {
    if (model.owner[s] != responder) continue;
    const std::size_t best = greedy_action(model, result.table.q, s);
    if (best != actions[s]) {
      actions[s] = best;
      moved = true;
    }
  }
  if (moved) result.table = evaluate_actions(model, actions);

  result.strategy.assign(model.num_states, 0);
  for (std::size_t s = 0; s < model.num_states; ++s) {
    if (model.owner[s] == responder) result.strategy[s] = actions[s];
  }
  return result;
}

NashSolution nash_value_iteration(const GameModel& model, double tol, std::size_t max_iters) {
  require_positive_tol(tol);
  NashSolution solution;
  std::vector<double> q(model.num_pairs(), 0.0);
  const double gamma = model.discount;
  if (gamma == 0.0) {
    q = model.rewards;
    solution.iterations = 1;
  } else {
    const double threshold = tol * (1.0 - gamma) / (2.0 * gamma);
    bool converged = false;
    while (solution.iterations < max_iters) {
      ++solution.iterations;
      auto next = shapley_operator(model, q);
      const double residual = sup_distance(next, q);
      q = std::move(next);
      if (residual <= threshold) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      std::ostringstream os;
      os << "value iteration did not reach residual " << threshold << " within " << max_iters
         << " sweeps";
      throw Error(ErrorCode::kNoConvergence, os.str());
    }
  }
  solution.pair = greedy_pair(model, q);
  solution.table = table_for(model, std::move(q), solution.pair);
  return solution;
}

NashSolution nash_strategy_iteration(const GameModel& model, double tol, std::size_t max_iters) {
  require_positive_tol(tol);
  const double threshold = improvement_threshold(model);
  Strategy mu(model.num_states, 0);

  NashSolution solution;
  CounterstrategyResult response;
  bool converged = false;
  while (solution.iterations < max_iters) {
    ++solution.iterations;
    response = counterstrategy(model, mu, Player::kMax, tol);
    solution.max_side_values.push_back(response.table.v);
    bool improved = false;
    for (std::size_t s = 0; s < model.num_states; ++s) {
      if (model.owner[s] != Player::kMax) continue;
      const std::size_t best = greedy_action(model, response.table.q, s);
      if (better_for(Player::kMax, response.table.q[model.index(s, best)],
                     response.table.q[model.index(s, mu[s])], threshold)) {
        mu[s] = best;
        improved = true;
      }
    }
    if (!improved) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream os;
    os << "strategy iteration did not settle within " << max_iters << " rounds";
    throw Error(ErrorCode::kNoConvergence, os.str());
  }
  solution.pair = greedy_pair(model, response.table.q);
  solution.table = table_for(model, std::move(response.table.q), solution.pair);
  return solution;
}

NashSolution solve_nash(const GameModel& model, SolverKind kind, double tol) {
  return kind == SolverKind::kValueIteration ? nash_value_iteration(model, tol)
                                             : nash_strategy_iteration(model, tol);
}

namespace {

// Odometer over |A|^k assignments to the given states.
bool advance(std::vector<std::size_t>& actions, const std::vector<std::size_t>& states,
             std::size_t num_actions) {
  for (std::size_t s : states) {
    if (++actions[s] < num_actions) return true;
    actions[s] = 0;
  }
  return false;
}

}  // namespace

NashSolution brute_force_nash(const GameModel& model) {
  const double combos =
      std::pow(static_cast<double>(model.num_actions), static_cast<double>(model.num_states));
  if (combos > kBruteForceLimit) {
    std::ostringstream os;
    os << "enumeration of " << combos << " strategy pairs exceeds " << kBruteForceLimit;
    throw Error(ErrorCode::kTooLarge, os.str());
  }
  std::vector<std::size_t> max_states, min_states;
  for (std::size_t s = 0; s < model.num_states; ++s) {
    (model.owner[s] == Player::kMax ? max_states : min_states).push_back(s);
  }

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> qstar(model.num_pairs(), -inf);
  std::vector<std::size_t> actions(model.num_states, 0);
  std::size_t evaluations = 0;
  do {
    std::vector<double> worst(model.num_pairs(), inf);
    do {
      const auto q = evaluate_actions(model, actions).q;
      ++evaluations;
      for (std::size_t i = 0; i < q.size(); ++i) worst[i] = std::min(worst[i], q[i]);
    } while (advance(actions, min_states, model.num_actions));
    for (std::size_t i = 0; i < worst.size(); ++i) qstar[i] = std::max(qstar[i], worst[i]);
  } while (advance(actions, max_states, model.num_actions));

  NashSolution solution;
  solution.iterations = evaluations;
  solution.pair = greedy_pair(model, qstar);
  solution.table = table_for(model, std::move(qstar), solution.pair);
  return solution;
}

GapReport margins_of(const GameModel& model, std::span<const double> q, bool include_max,
                     bool include_min) {
  GapReport report;
  const double inf = std::numeric_limits<double>::infinity();
  report.per_state_margins.assign(model.num_states, inf);
  if (model.num_actions < 2) return report;

  for (std::size_t s = 0; s < model.num_states; ++s) {
    const bool is_max = model.owner[s] == Player::kMax;
    if ((is_max && !include_max) || (!is_max && !include_min)) continue;
    const std::size_t best = greedy_action(model, q, s);
    const double best_value = q[model.index(s, best)];
    std::size_t runner_up = best;
    double runner_value = is_max ? -inf : inf;
    for (std::size_t a = 0; a < model.num_actions; ++a) {
      if (a == best) continue;
      const double value = q[model.index(s, a)];
      if (is_max ? value > runner_value : value < runner_value) {
        runner_value = value;
        runner_up = a;
      }
    }
    double margin = is_max ? best_value - runner_value : runner_value - best_value;
    if (margin <= kZeroGapTolerance) margin = 0.0;
    report.per_state_margins[s] = margin;
    if (margin < report.nash_gap) {
      report.nash_gap = margin;
      report.witness = GapWitness{s, best, runner_up};
    }
  }
  return report;
}

GapReport suboptimality_gap_nash(const GameModel& model, const ValueTable& qstar) {
  const double residual = shapley_residual(model, qstar.q);
  if (residual > kOptimalTableResidual) {
    std::ostringstream os;
    os << "Shapley residual " << residual << " exceeds " << kOptimalTableResidual;
    throw Error(ErrorCode::kNotOptimalTable, os.str());
  }
  return margins_of(model, qstar.q, true, true);
}

GapReport suboptimality_gap_counter(const GameModel& model, const Strategy& fixed,
                                    Player fixed_side) {
  const auto response = counterstrategy(model, fixed, fixed_side);
  const bool responder_is_max = fixed_side == Player::kMin;
  return margins_of(model, response.table.q, responder_is_max, !responder_is_max);
}

Certification certify_epsilon_nash(const GameModel& model, const StrategyPair& pair,
                                   std::span<const double> qstar, double epsilon, double tol) {
  if (!(epsilon >= 0.0) || !(tol >= 0.0)) {
    throw Error(ErrorCode::kDegenerateParams, "epsilon and tol must be nonnegative");
  }
  const double solve_tol = tol > 0.0 ? tol : kDefaultTolerance;
  const auto against_mu = counterstrategy(model, pair.mu, Player::kMax, solve_tol);
  const auto against_nu = counterstrategy(model, pair.nu, Player::kMin, solve_tol);
  Certification c;
  c.epsilon = epsilon;
  c.tol = tol;
  c.max_side_deviation = sup_distance(against_mu.table.q, qstar);
  c.min_side_deviation = sup_distance(against_nu.table.q, qstar);
  c.pass = c.max_side_deviation <= epsilon + tol && c.min_side_deviation <= epsilon + tol;
  return c;
}

Certification certify_epsilon_nash(const GameModel& model, const StrategyPair& pair,
                                   double epsilon, double tol) {
  const auto nash = nash_strategy_iteration(model, tol > 0.0 ? tol : kDefaultTolerance);
  return certify_epsilon_nash(model, pair, nash.table.q, epsilon, tol);
}

}  // namespace tbsg
