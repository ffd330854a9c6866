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

#include "tbsg/lemma_report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "tbsg/analysis.hpp"
#include "tbsg/sampling.hpp"
#include "tbsg/solvers.hpp"
#include "tbsg/transforms.hpp"

namespace tbsg {

namespace {

constexpr double kIdentitySlack = 1e-8;
constexpr double kInequalitySlack = 1e-8;
constexpr double kPerturbedSlack = 1e-7;
constexpr double kTraceSlack = 1e-7;
constexpr double kLowInf = -std::numeric_limits<double>::infinity();

StrategyPair random_pair(const GameModel& model, RngStream& rng) {
  StrategyPair pair;
  pair.mu.assign(model.num_states, 0);
  pair.nu.assign(model.num_states, 0);
  for (std::size_t s = 0; s < model.num_states; ++s) {
    const std::size_t a = rng.below(model.num_actions);
    (model.owner[s] == Player::kMax ? pair.mu : pair.nu)[s] = a;
  }
  return pair;
}

// Frequency checks pass when the observed frequency reaches target - 3 SE.
void finish_frequency(LemmaCheck& check, double frequency, double target, double std_error) {
  check.measurements["frequency"] = frequency;
  check.thresholds["target"] = target;
  check.measurements["std_error"] = std_error;
  check.max_residual = target - frequency;
  check.pass = frequency >= target - 3.0 * std_error;
}

struct Draw {
  EmpiricalModel empirical;
  StrategyPair pair;
};

std::vector<Draw> draw_estimates(const GameModel& truth, const LemmaSuiteConfig& config) {
  std::vector<Draw> draws;
  for (std::size_t t = 0; t < config.trials; ++t) {
    const std::uint64_t seed = derive_seed(config.seed, StreamId{StreamDomain::kTrial, 0, 0, t});
    RngStream rng(seed, StreamId{StreamDomain::kExperiment, 0, 0, 0});
    auto pair = random_pair(truth, rng);
    draws.push_back({estimate_model(truth, config.n_per_pair, seed), std::move(pair)});
  }
  return draws;
}

LemmaCheck value_difference(const GameModel& truth, const std::vector<Draw>& draws) {
  LemmaCheck check;
  check.name = "value_difference_identity";
  check.statement =
      "Q^pi - Qhat^pi = gamma (I - gamma P^pi)^-1 (P - Phat) Vhat^pi "
      "= gamma (I - gamma Phat^pi)^-1 (P - Phat) V^pi";
  check.thresholds["tolerance"] = kIdentitySlack;
  check.max_residual = 0.0;
  double first = 0.0, second = 0.0;
  for (const auto& d : draws) {
    const auto r = check_value_difference_identity(truth, d.empirical.estimate, d.pair);
    first = std::max(first, r.first);
    second = std::max(second, r.second);
    ++check.trials;
  }
  check.measurements["first_factorization"] = first;
  check.measurements["second_factorization"] = second;
  check.max_residual = std::max(first, second);
  check.pass = check.max_residual <= kIdentitySlack;
  check.note =
      "both factorizations carry (P - Phat); writing the second with (Phat - P) flips its sign "
      "and does not match the direct difference";
  return check;
}

template <typename Fn>
LemmaCheck bound_over_draws(const char* name, const char* statement,
                            const std::vector<Draw>& draws, double slack, Fn&& fn) {
  LemmaCheck check;
  check.name = name;
  check.statement = statement;
  check.thresholds["slack"] = slack;
  check.max_residual = kLowInf;
  double worst_lhs = 0.0;
  for (const auto& d : draws) {
    const BoundCheck b = fn(d);
    check.max_residual = std::max(check.max_residual, b.lhs - b.rhs);
    worst_lhs = std::max(worst_lhs, b.lhs);
    ++check.trials;
  }
  check.measurements["max_lhs"] = worst_lhs;
  check.pass = check.max_residual <= slack;
  return check;
}

LemmaCheck absorbing_checks(const GameModel& truth, const LemmaSuiteConfig& config) {
  LemmaCheck check;
  check.name = "absorbing_game";
  check.statement =
      "absorbing game at u* reproduces Q*; |Q*_u - Q*_u'| <= |u - u'| / (1 - gamma)";
  const auto qstar = nash_strategy_iteration(truth).table.q;
  const double range = absorbing_range(truth.discount);
  RngStream rng(config.seed, StreamId{StreamDomain::kExperiment, 1, 0, 0});
  double recovery = 0.0;
  double lipschitz_excess = kLowInf;
  for (std::size_t s = 0; s < truth.num_states; ++s) {
    for (std::size_t a = 0; a < truth.num_actions; ++a) {
      const double u = u_star(truth, s, a);
      const auto at_star = nash_strategy_iteration(make_absorbing(truth, {s, a, u})).table.q;
      recovery = std::max(recovery, sup_distance(at_star, qstar));
      for (std::size_t k = 0; k < config.trials; ++k) {
        const double u1 = range * (2.0 * rng.uniform() - 1.0);
        const double u2 = range * (2.0 * rng.uniform() - 1.0);
        if (u1 == u2) continue;
        const auto q1 = nash_strategy_iteration(make_absorbing(truth, {s, a, u1})).table.q;
        const auto q2 = nash_strategy_iteration(make_absorbing(truth, {s, a, u2})).table.q;
        lipschitz_excess = std::max(lipschitz_excess, sup_distance(q1, q2) -
                                                          std::abs(u1 - u2) / (1.0 - truth.discount));
        ++check.trials;
      }
    }
  }
  check.measurements["recovery_residual"] = recovery;
  check.measurements["lipschitz_excess"] = lipschitz_excess;
  check.thresholds["recovery_tolerance"] = kPerturbedSlack;
  check.thresholds["lipschitz_slack"] = kPerturbedSlack;
  check.max_residual = std::max(recovery, lipschitz_excess);
  check.pass = recovery <= kPerturbedSlack && lipschitz_excess <= kPerturbedSlack;
  return check;
}

LemmaCheck gap_recovery(const GameModel& truth, const std::vector<Draw>& draws) {
  LemmaCheck check;
  check.name = "gap_recovery";
  check.statement = "|Q* - Qhat*| < gap / 2 implies pihat* = pi*";
  std::size_t premises = 0, failures = 0;
  for (const auto& d : draws) {
    const auto r = check_gap_recovery(truth, d.empirical.estimate);
    check.measurements["gap"] = r.gap;
    if (r.premise) {
      ++premises;
      if (!r.recovered) ++failures;
    }
    ++check.trials;
  }
  check.measurements["premise_count"] = static_cast<double>(premises);
  check.measurements["violations"] = static_cast<double>(failures);
  check.max_residual = static_cast<double>(failures);
  check.pass = failures == 0;
  if (premises == 0) check.note = "premise never met at this sample size; vacuous";
  return check;
}

LemmaCheck perturbed_deviation(const GameModel& truth, const std::vector<Draw>& draws,
                               const LemmaSuiteConfig& config) {
  LemmaCheck check;
  check.name = "perturbed_deviation";
  check.statement =
      "|Q^{muhat_p,*} - Q*| <= perturbed deviation terms + 4 xi / (1 - gamma)";
  check.thresholds["xi"] = config.xi;
  check.thresholds["slack"] = kPerturbedSlack;
  double excess = kLowInf, excess_tight = kLowInf;
  std::size_t t = 0;
  for (const auto& d : draws) {
    const auto r = check_perturbed_deviation(
        truth, d.empirical.estimate, config.xi,
        derive_seed(config.seed, StreamId{StreamDomain::kPerturbation, 0, 0, t++}));
    excess = std::max(excess, r.lhs - r.rhs);
    excess_tight = std::max(excess_tight, r.lhs - r.rhs_tight);
    ++check.trials;
  }
  check.measurements["excess_4xi"] = excess;
  check.measurements["excess_2xi"] = excess_tight;
  check.max_residual = excess;
  check.pass = excess <= kPerturbedSlack;
  check.note = excess_tight <= kPerturbedSlack
                   ? "also holds with 2 xi / (1 - gamma)"
                   : "fails with 2 xi / (1 - gamma)";
  return check;
}

LemmaCheck gap_frequency(const GameModel& truth, const LemmaSuiteConfig& config) {
  LemmaCheck check;
  check.name = "perturbed_gap_frequency";
  check.statement = "perturbed game gap >= xi delta (1 - gamma) / (4 |S|^2 |A|) w.p. >= 1 - delta";
  const auto r = gap_frequency_experiment(truth, config.xi, config.delta, config.gap_trials,
                                          config.seed);
  check.trials = config.gap_trials;
  check.thresholds["claimed_threshold"] = r.claimed_threshold;
  check.thresholds["proof_threshold"] = r.proof_threshold;
  check.measurements["frequency_proof_threshold"] = r.frequency_proof;
  finish_frequency(check, r.frequency_claimed, 1.0 - config.delta, r.std_error);
  const bool proof_pass = r.frequency_proof >= 1.0 - config.delta - 3.0 * r.std_error;
  check.note = std::string("threshold xi delta (1 - gamma) / (2 |S| |A|^2) variant ") +
               (proof_pass ? "passes" : "fails");
  return check;
}

LemmaCheck tau_trace(const GameModel& truth, const LemmaSuiteConfig& config) {
  LemmaCheck check;
  check.name = "tau_trace";
  check.statement =
      "Q*_tau is piecewise linear in tau; other actions' slopes <= gamma times the shifted "
      "action's slope; Q*_tau(s,a) grows at least as fast as tau";
  const double range = absorbing_range(truth.discount);
  std::vector<double> grid(std::max<std::size_t>(config.tau_points, 2));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = -range + 2.0 * range * static_cast<double>(i) / static_cast<double>(grid.size() - 1);
  }
  double linearity = 0.0, slope_excess = kLowInf, monotone_shortfall = kLowInf;
  for (std::size_t s = 0; s < truth.num_states; ++s) {
    for (std::size_t a = 0; a < truth.num_actions; ++a) {
      const auto trace = trace_nash_q_vs_tau(truth, s, a, grid);
      for (const auto& piece : trace.pieces) {
        linearity = std::max(linearity, piece.max_residual);
        if (piece.last == piece.first) continue;
        for (std::size_t b = 0; b < truth.num_actions; ++b) {
          if (b == a) continue;
          slope_excess = std::max(slope_excess,
                                  piece.slopes[b] - truth.discount * piece.slopes[a]);
        }
      }
      for (std::size_t i = 1; i < grid.size(); ++i) {
        const double rise = trace.qstar_rows[i][a] - trace.qstar_rows[i - 1][a];
        monotone_shortfall = std::max(monotone_shortfall, (grid[i] - grid[i - 1]) - rise);
      }
      ++check.trials;
    }
  }
  check.thresholds["linearity_tolerance"] = kTraceSlack;
  check.thresholds["slope_slack"] = 1e-6;
  check.thresholds["monotone_slack"] = kIdentitySlack;
  check.measurements["linearity_residual"] = linearity;
  check.measurements["slope_excess"] = slope_excess;
  check.measurements["monotone_shortfall"] = monotone_shortfall;
  check.max_residual = std::max({linearity, slope_excess, monotone_shortfall});
  check.pass = linearity <= kTraceSlack && slope_excess <= 1e-6 &&
               monotone_shortfall <= kIdentitySlack;
  return check;
}

LemmaCheck concentration(const GameModel& truth, const LemmaSuiteConfig& config) {
  LemmaCheck check;
  check.name = "concentration_envelope";
  check.statement =
      "|(P - Phat) V*| <= sqrt(2 L Var(V*) / n) + 2 L / (3 (1 - gamma) n), L = log(4 / delta)";
  const auto v = nash_strategy_iteration(truth).table.v;
  const auto r = bernstein_coverage(truth, v, config.n_per_pair, config.coverage_delta,
                                    config.trials, config.seed);
  check.trials = r.cells;
  check.thresholds["delta"] = config.coverage_delta;
  check.measurements["violation_frequency"] = r.frequency;
  check.measurements["std_error"] = r.std_error;
  check.max_residual = r.frequency - config.coverage_delta;
  check.pass = r.frequency <= config.coverage_delta + 3.0 * r.std_error;
  return check;
}

}  // namespace

bool LemmaReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const LemmaCheck& c) { return c.pass; });
}

LemmaReport run_lemma_suite(const GameModel& truth, const LemmaSuiteConfig& config) {
  if (config.trials == 0 || config.n_per_pair == 0) {
    throw Error(ErrorCode::kDegenerateParams, "lemma suite needs trials and samples");
  }
  const auto draws = draw_estimates(truth, config);
  const double one_minus = 1.0 - truth.discount;
  LemmaReport report;
  report.checks.push_back(value_difference(truth, draws));

  report.checks.push_back(bound_over_draws(
      "variance_bound", "|(I - gamma P^pi)^-1 sqrt(Var_P(V^pi))| <= sqrt(2 / (1 - gamma)^3)",
      draws, kInequalitySlack,
      [&](const Draw& d) { return check_variance_bound(truth, d.pair); }));
  report.checks.back().thresholds["rhs"] = std::sqrt(2.0 / (one_minus * one_minus * one_minus));

  report.checks.push_back(bound_over_draws(
      "empirical_variance_bound",
      "|(I - gamma P^pi)^-1 sqrt(Var_P(Vhat^pi))| <= sqrt(2 / (1 - gamma)^3) + "
      "|Q^pi - Qhat^pi| / (1 - gamma)",
      draws, kInequalitySlack,
      [&](const Draw& d) { return check_empirical_variance_bound(truth, d.empirical.estimate, d.pair); }));

  {
    // Holds with high probability only; reported as a frequency.
    LemmaCheck check;
    check.name = "empirical_resolvent_bound";
    check.statement = "|(I - gamma Phat^pi)^-1 sqrt(Var_P(V^pi))| <= 16 / sqrt((1 - gamma)^3)";
    std::size_t holds = 0;
    for (const auto& d : draws) {
      if (check_empirical_resolvent_bound(truth, d.empirical.estimate, d.pair).holds(0.0)) ++holds;
      ++check.trials;
    }
    check.thresholds["rhs"] = 16.0 / std::sqrt(one_minus * one_minus * one_minus);
    const double frequency = static_cast<double>(holds) / static_cast<double>(check.trials);
    finish_frequency(check, frequency, 1.0 - config.delta,
                     binomial_std_error(1.0 - config.delta, check.trials));
    check.note = "high-probability statement; checked as a frequency";
    report.checks.push_back(std::move(check));
  }

  report.checks.push_back(absorbing_checks(truth, config));

  report.checks.push_back(bound_over_draws(
      "nash_value_sandwich",
      "|Q* - Qhat*| <= max(|Q^{mu*,chat(mu*)} - Qhat^{mu*,*}|, |Q^{chat(nu*),nu*} - Qhat^{*,nu*}|)",
      draws, kInequalitySlack,
      [&](const Draw& d) { return check_nash_value_sandwich(truth, d.empirical.estimate); }));

  report.checks.push_back(gap_recovery(truth, draws));
  report.checks.push_back(gap_frequency(truth, config));
  report.checks.push_back(tau_trace(truth, config));
  report.checks.push_back(perturbed_deviation(truth, draws, config));
  report.checks.push_back(concentration(truth, config));
  return report;
}

std::string lemma_report_to_json(const LemmaReport& report, const LemmaSuiteConfig& config) {
  using nlohmann::json;
  auto number = [](double x) -> json {
    if (std::isfinite(x)) return x;
    return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
  };
  json j;
  j["format"] = "tbsg-lemma-report-v1";
  j["config"] = {{"trials", config.trials},
                 {"n_per_pair", config.n_per_pair},
                 {"xi", config.xi},
                 {"delta", config.delta},
                 {"coverage_delta", config.coverage_delta},
                 {"gap_trials", config.gap_trials},
                 {"tau_points", config.tau_points},
                 {"seed", config.seed}};
  j["pass"] = report.all_pass();
  j["checks"] = json::array();
  for (const auto& c : report.checks) {
    json entry;
    entry["name"] = c.name;
    entry["statement"] = c.statement;
    entry["pass"] = c.pass;
    entry["max_residual"] = number(c.max_residual);
    entry["trials"] = c.trials;
    json thresholds = json::object();
    for (const auto& [k, v] : c.thresholds) thresholds[k] = number(v);
    entry["thresholds"] = thresholds;
    json measurements = json::object();
    for (const auto& [k, v] : c.measurements) measurements[k] = number(v);
    entry["measurements"] = measurements;
    if (!c.note.empty()) entry["note"] = c.note;
    j["checks"].push_back(entry);
  }
  return j.dump(2) + "\n";
}

}  // namespace tbsg
