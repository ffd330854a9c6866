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

#include "tbsg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tbsg {

namespace {

void check_same_shape(const GameModel& truth, const GameModel& other) {
  if (truth.num_states != other.num_states || truth.num_actions != other.num_actions ||
      truth.owner != other.owner || truth.discount != other.discount ||
      truth.rewards != other.rewards) {
    throw Error(ErrorCode::kShapeMismatch,
                "games must share states, actions, owners, rewards and discount");
  }
}

double sup_norm(std::span<const double> x) {
  double m = 0.0;
  for (double e : x) m = std::max(m, std::abs(e));
  return m;
}

// y(s,a) = scale * (P(s,a) - P'(s,a)) v
std::vector<double> kernel_gap_times(const GameModel& p, const GameModel& p_other,
                                     std::span<const double> v, double scale) {
  std::vector<double> y(p.num_pairs());
  for (std::size_t s = 0; s < p.num_states; ++s) {
    for (std::size_t a = 0; a < p.num_actions; ++a) {
      const auto row = p.row(s, a);
      const auto other = p_other.row(s, a);
      double acc = 0.0;
      for (std::size_t t = 0; t < p.num_states; ++t) acc += (row[t] - other[t]) * v[t];
      y[p.index(s, a)] = scale * acc;
    }
  }
  return y;
}

std::vector<double> sqrt_variance(const GameModel& model, std::span<const double> v) {
  auto var = one_step_variance(model, v).values;
  for (double& x : var) x = std::sqrt(x);
  return var;
}

std::vector<double> difference(std::span<const double> a, std::span<const double> b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

}  // namespace

VarianceVector one_step_variance(const GameModel& model, std::span<const double> v) {
  if (v.size() != model.num_states) {
    throw Error(ErrorCode::kLengthMismatch, "value vector must have one entry per state");
  }
  VarianceVector out;
  out.values.resize(model.num_pairs());
  for (std::size_t s = 0; s < model.num_states; ++s) {
    for (std::size_t a = 0; a < model.num_actions; ++a) {
      const auto row = model.row(s, a);
      double mean = 0.0, second = 0.0;
      for (std::size_t t = 0; t < model.num_states; ++t) {
        mean += row[t] * v[t];
        second += row[t] * v[t] * v[t];
      }
      out.values[model.index(s, a)] = std::max(0.0, second - mean * mean);
    }
  }
  return out;
}

double binomial_std_error(double p, std::size_t trials) {
  if (trials == 0) return 0.0;
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(trials));
}

ValueDifferenceResiduals check_value_difference_identity(const GameModel& truth, const GameModel& empirical,
                                      const StrategyPair& pair) {
  check_same_shape(truth, empirical);
  const auto actions = joint_actions(truth, pair);
  const auto exact = evaluate_actions(truth, actions);
  const auto estimated = evaluate_actions(empirical, actions);
  const auto direct = difference(exact.q, estimated.q);
  const double gamma = truth.discount;

  const auto first =
      apply_resolvent(truth, actions, kernel_gap_times(truth, empirical, estimated.v, gamma));
  const auto second =
      apply_resolvent(empirical, actions, kernel_gap_times(truth, empirical, exact.v, gamma));

  ValueDifferenceResiduals out;
  out.first = sup_distance(first, direct);
  out.second = sup_distance(second, direct);
  out.difference_norm = sup_norm(direct);
  return out;
}

BoundCheck check_variance_bound(const GameModel& model, const StrategyPair& pair) {
  const auto actions = joint_actions(model, pair);
  const auto table = evaluate_actions(model, actions);
  const double one_minus = 1.0 - model.discount;
  BoundCheck out;
  out.lhs = sup_norm(apply_resolvent(model, actions, sqrt_variance(model, table.v)));
  out.rhs = std::sqrt(2.0 / (one_minus * one_minus * one_minus));
  return out;
}

BoundCheck check_empirical_variance_bound(const GameModel& truth, const GameModel& empirical,
                                          const StrategyPair& pair) {
  check_same_shape(truth, empirical);
  const auto actions = joint_actions(truth, pair);
  const auto exact = evaluate_actions(truth, actions);
  const auto estimated = evaluate_actions(empirical, actions);
  const double one_minus = 1.0 - truth.discount;
  BoundCheck out;
  out.lhs = sup_norm(apply_resolvent(truth, actions, sqrt_variance(truth, estimated.v)));
  out.rhs = std::sqrt(2.0 / (one_minus * one_minus * one_minus)) +
            sup_distance(exact.q, estimated.q) / one_minus;
  return out;
}

BoundCheck check_empirical_resolvent_bound(const GameModel& truth, const GameModel& empirical,
                                           const StrategyPair& pair) {
  check_same_shape(truth, empirical);
  const auto actions = joint_actions(truth, pair);
  const auto exact = evaluate_actions(truth, actions);
  const double one_minus = 1.0 - truth.discount;
  BoundCheck out;
  out.lhs = sup_norm(apply_resolvent(empirical, actions, sqrt_variance(truth, exact.v)));
  out.rhs = 16.0 / std::sqrt(one_minus * one_minus * one_minus);
  return out;
}

BoundCheck check_nash_value_sandwich(const GameModel& truth, const GameModel& empirical) {
  check_same_shape(truth, empirical);
  const auto nash = nash_strategy_iteration(truth);
  const auto nash_hat = nash_strategy_iteration(empirical);

  // Empirical best responses to the true equilibrium strategies.
  const auto min_reply = counterstrategy(empirical, nash.pair.mu, Player::kMax);
  const auto max_reply = counterstrategy(empirical, nash.pair.nu, Player::kMin);
  const auto upper = evaluate_pair(truth, StrategyPair{nash.pair.mu, min_reply.strategy});
  const auto lower = evaluate_pair(truth, StrategyPair{max_reply.strategy, nash.pair.nu});

  BoundCheck out;
  out.lhs = sup_distance(nash.table.q, nash_hat.table.q);
  out.rhs = std::max(sup_distance(upper.q, min_reply.table.q),
                     sup_distance(lower.q, max_reply.table.q));
  return out;
}

GapRecovery check_gap_recovery(const GameModel& truth, const GameModel& empirical) {
  check_same_shape(truth, empirical);
  const auto nash = nash_strategy_iteration(truth);
  const auto nash_hat = nash_strategy_iteration(empirical);
  GapRecovery out;
  out.gap = margins_of(truth, nash.table.q, true, true).nash_gap;
  out.value_error = sup_distance(nash.table.q, nash_hat.table.q);
  out.premise = out.gap > 0.0 && out.value_error < out.gap / 2.0;
  out.recovered = nash.pair == nash_hat.pair;
  return out;
}

PerturbedDeviationCheck check_perturbed_deviation(const GameModel& truth,
                                                  const GameModel& empirical, double xi,
                                                  std::uint64_t seed) {
  check_same_shape(truth, empirical);
  // One noise draw shared by the true and the empirical game.
  const auto [truth_p, spec] = perturb_rewards(truth, xi, seed);
  GameModel empirical_p = empirical;
  empirical_p.rewards = truth_p.rewards;

  const auto nash = nash_strategy_iteration(truth);
  const auto nash_p = nash_strategy_iteration(truth_p);
  const auto nash_hat_p = nash_strategy_iteration(empirical_p);
  const Strategy& mu_hat = nash_hat_p.pair.mu;
  const Strategy& mu_p = nash_p.pair.mu;

  PerturbedDeviationCheck out;
  out.lhs = sup_distance(counterstrategy(truth, mu_hat, Player::kMax).table.q, nash.table.q);

  // |Q_p^{mu_p*, c-hat_p(mu_p*)} - Q-hat_p^{mu_p*,*}|
  const auto hat_reply = counterstrategy(empirical_p, mu_p, Player::kMax);
  out.term_truth_response = sup_distance(
      evaluate_pair(truth_p, StrategyPair{mu_p, hat_reply.strategy}).q, hat_reply.table.q);

  // |Q-hat_p^{mu-hat_p*, c_p(mu-hat_p*)} - Q_p^{mu-hat_p*,*}|
  const auto true_reply = counterstrategy(truth_p, mu_hat, Player::kMax);
  out.term_empirical_response = sup_distance(
      evaluate_pair(empirical_p, StrategyPair{mu_hat, true_reply.strategy}).q,
      true_reply.table.q);

  const double one_minus = 1.0 - truth.discount;
  const double terms = out.term_truth_response + out.term_empirical_response;
  out.rhs = terms + 4.0 * xi / one_minus;
  out.rhs_tight = terms + 2.0 * xi / one_minus;
  return out;
}

std::vector<double> bernstein_envelope(const GameModel& truth, const EmpiricalModel& counts,
                                       std::span<const double> v, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    std::ostringstream os;
    os << "delta must lie in (0, 1), got " << delta;
    throw Error(ErrorCode::kDegenerateDelta, os.str());
  }
  if (truth.num_states != counts.estimate.num_states ||
      truth.num_actions != counts.estimate.num_actions) {
    throw Error(ErrorCode::kShapeMismatch, "counts do not match the game");
  }
  const auto var = one_step_variance(truth, v).values;
  const double log_term = std::log(4.0 / delta);
  const double n = static_cast<double>(counts.n_per_pair);
  const double one_minus = 1.0 - truth.discount;
  std::vector<double> bound(var.size());
  for (std::size_t i = 0; i < var.size(); ++i) {
    bound[i] = std::sqrt(2.0 * log_term * var[i] / n) + 2.0 * log_term / (3.0 * one_minus * n);
  }
  return bound;
}

CoverageReport bernstein_coverage(const GameModel& truth, std::span<const double> v,
                                  std::size_t n_per_pair, double delta, std::size_t num_seeds,
                                  std::uint64_t seed) {
  CoverageReport report;
  report.delta = delta;
  for (std::size_t k = 0; k < num_seeds; ++k) {
    const auto empirical = estimate_model(
        truth, n_per_pair, derive_seed(seed, StreamId{StreamDomain::kTrial, 0, 0, k}));
    const auto bound = bernstein_envelope(truth, empirical, v, delta);
    const auto deviation = kernel_gap_times(truth, empirical.estimate, v, 1.0);
    for (std::size_t i = 0; i < bound.size(); ++i) {
      ++report.cells;
      if (std::abs(deviation[i]) > bound[i]) ++report.violations;
    }
  }
  report.frequency =
      report.cells ? static_cast<double>(report.violations) / static_cast<double>(report.cells)
                   : 0.0;
  report.std_error = binomial_std_error(delta, report.cells);
  return report;
}

const char* to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::kExactRecovery: return "exact-recovery";
    case BoundKind::kApproximateNash: return "approximate-nash";
    case BoundKind::kPerturbedExactRecovery: return "perturbed-exact-recovery";
  }
  return "unknown";
}

std::uint64_t sample_size_bound(const SampleSizeQuery& query) {
  const double gamma = query.gamma;
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw Error(ErrorCode::kRangeViolation, "gamma must lie in [0, 1)");
  }
  if (query.ns == 0 || query.na == 0) {
    throw Error(ErrorCode::kRangeViolation, "state and action counts must be positive");
  }
  if (!(query.confidence_delta > 0.0 && query.confidence_delta < 1.0)) {
    throw Error(ErrorCode::kRangeViolation, "confidence delta must lie in (0, 1)");
  }
  if (!(query.constant_c > 0.0)) {
    throw Error(ErrorCode::kRangeViolation, "constant C must be positive");
  }
  const double one_minus = 1.0 - gamma;
  const double x = query.eps_or_gap;
  const double limit = query.kind == BoundKind::kExactRecovery ? 1.0 / std::sqrt(one_minus)
                                                               : 1.0 / one_minus;
  if (!(x > 0.0) || x > limit * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << to_string(query.kind) << " requires "
       << (query.kind == BoundKind::kApproximateNash ? "epsilon" : "gap") << " in (0, "
       << limit << "], got " << x;
    throw Error(ErrorCode::kRangeViolation, os.str());
  }
  const double sa = static_cast<double>(query.ns * query.na);
  const double n = query.constant_c * sa / (one_minus * one_minus * one_minus * x * x) *
                   std::log(sa / (one_minus * query.confidence_delta * x));
  if (!(n > 0.0)) return 0;
  return static_cast<std::uint64_t>(std::ceil(n * (1.0 - 1e-12)));
}

double claimed_gap_threshold(double xi, double delta, double gamma, std::size_t ns,
                             std::size_t na) {
  const double s = static_cast<double>(ns);
  return xi * delta * (1.0 - gamma) / (4.0 * s * s * static_cast<double>(na));
}

double proof_gap_threshold(double xi, double delta, double gamma, std::size_t ns,
                           std::size_t na) {
  const double a = static_cast<double>(na);
  return xi * delta * (1.0 - gamma) / (2.0 * static_cast<double>(ns) * a * a);
}

GapFrequencyReport gap_frequency_experiment(const GameModel& model, double xi, double delta,
                                            std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw Error(ErrorCode::kDegenerateParams, "need at least one trial");
  GapFrequencyReport report;
  report.xi = xi;
  report.delta = delta;
  report.claimed_threshold =
      claimed_gap_threshold(xi, delta, model.discount, model.num_states, model.num_actions);
  report.proof_threshold =
      proof_gap_threshold(xi, delta, model.discount, model.num_states, model.num_actions);
  std::size_t hits_claimed = 0, hits_proof = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto [perturbed, spec] = perturb_rewards(
        model, xi, derive_seed(seed, StreamId{StreamDomain::kTrial, 0, 0, t}));
    const auto nash = nash_strategy_iteration(perturbed);
    const double gap = margins_of(perturbed, nash.table.q, true, true).nash_gap;
    report.per_trial_gaps.push_back(gap);
    if (gap > 0.0 && gap >= report.claimed_threshold) ++hits_claimed;
    if (gap > 0.0 && gap >= report.proof_threshold) ++hits_proof;
  }
  const double n = static_cast<double>(trials);
  report.frequency_claimed = static_cast<double>(hits_claimed) / n;
  report.frequency_proof = static_cast<double>(hits_proof) / n;
  report.std_error = binomial_std_error(1.0 - delta, trials);
  return report;
}

CoverMembershipReport cover_membership_experiment(const GameModel& truth, std::size_t s,
                                                  std::size_t a, std::size_t n_per_pair,
                                                  double xi, double delta, std::size_t trials,
                                                  std::uint64_t seed) {
  CoverMembershipReport report;
  report.trials = trials;
  report.cover_size =
      cover_cardinality(truth.discount, xi, delta, truth.num_states, truth.num_actions);
  const double gamma = truth.discount;
  const double half = absorbing_range(gamma);
  for (std::size_t t = 0; t < trials; ++t) {
    const std::uint64_t trial_seed = derive_seed(seed, StreamId{StreamDomain::kTrial, 0, 0, t});
    const auto empirical = estimate_model(truth, n_per_pair, trial_seed);
    const auto [perturbed, spec] = perturb_rewards(empirical.estimate, xi, trial_seed);
    const auto mu_hat = nash_strategy_iteration(perturbed).pair.mu;
    const double u = std::clamp(u_star(perturbed, s, a), -half, half);
    const double snapped = nearest_cover_point(gamma, report.cover_size, u);
    const auto absorbing = make_absorbing(perturbed, AbsorbingSpec{s, a, snapped});
    if (nash_strategy_iteration(absorbing).pair.mu == mu_hat) ++report.matches;
  }
  report.frequency =
      trials ? static_cast<double>(report.matches) / static_cast<double>(trials) : 0.0;
  report.std_error = binomial_std_error(1.0 - delta, trials);
  return report;
}

}  // namespace tbsg
