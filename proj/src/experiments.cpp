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

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "tbsg/sampling.hpp"

namespace tbsg {

namespace {

void spec_error(const std::string& message) {
  throw Error(ErrorCode::kDegenerateSpec, message);
}

void check_spec(const GeneratorSpec& spec) {
  if (spec.ns == 0 || spec.na == 0) spec_error("generator needs at least one state and action");
  if (!(spec.gamma >= 0.0 && spec.gamma < 1.0)) spec_error("generator gamma must lie in [0, 1)");
  if (spec.support > spec.ns) spec_error("support size exceeds the number of states");
  if (spec.owner_pattern == OwnerPattern::kRandom && !(spec.p_max >= 0.0 && spec.p_max <= 1.0)) {
    spec_error("p_max must lie in [0, 1]");
  }
  if (spec.reward_law == RewardLaw::kBernoulli &&
      !(spec.bernoulli_p >= 0.0 && spec.bernoulli_p <= 1.0)) {
    spec_error("Bernoulli reward probability must lie in [0, 1]");
  }
  if (spec.reward_law == RewardLaw::kCustom && spec.custom_rewards.size() != spec.ns * spec.na) {
    spec_error("custom rewards need one entry per state-action pair");
  }
}

}  // namespace

GameModel generate_game(const GeneratorSpec& spec) {
  check_spec(spec);
  const std::size_t ns = spec.ns;
  const std::size_t support = spec.support == 0 ? ns : spec.support;
  RngStream rng(spec.seed, StreamId{StreamDomain::kGenerator, 0, 0, 0});

  GameModel model;
  model.num_states = ns;
  model.num_actions = spec.na;
  model.discount = spec.gamma;
  model.owner.resize(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    switch (spec.owner_pattern) {
      case OwnerPattern::kAlternate: model.owner[s] = s % 2 == 0 ? Player::kMax : Player::kMin; break;
      case OwnerPattern::kRandom:
        model.owner[s] = rng.uniform() < spec.p_max ? Player::kMax : Player::kMin;
        break;
      case OwnerPattern::kAllMax: model.owner[s] = Player::kMax; break;
    }
  }

  model.transitions.assign(model.num_pairs() * ns, 0.0);
  std::vector<std::size_t> states(ns);
  std::vector<double> weights(support);
  for (std::size_t i = 0; i < model.num_pairs(); ++i) {
    std::iota(states.begin(), states.end(), std::size_t{0});
    // Partial Fisher-Yates: the first `support` entries are the successors.
    for (std::size_t k = 0; k < support; ++k) {
      std::swap(states[k], states[k + rng.below(ns - k)]);
    }
    double total = 0.0;
    for (std::size_t k = 0; k < support; ++k) {
      weights[k] = 1.0 - rng.uniform();  // in (0, 1]
      total += weights[k];
    }
    double* row = model.transitions.data() + i * ns;
    for (std::size_t k = 0; k < support; ++k) row[states[k]] = weights[k] / total;
  }

  model.rewards.resize(model.num_pairs());
  for (std::size_t i = 0; i < model.num_pairs(); ++i) {
    switch (spec.reward_law) {
      case RewardLaw::kUniform01: model.rewards[i] = rng.uniform(); break;
      case RewardLaw::kBernoulli: model.rewards[i] = rng.uniform() < spec.bernoulli_p ? 1.0 : 0.0; break;
      case RewardLaw::kCustom: model.rewards[i] = spec.custom_rewards[i]; break;
    }
  }
  try {
    return validate_game(std::move(model));
  } catch (const Error& e) {
    spec_error(std::string("generated game is invalid: ") + e.what());
  }
  return {};
}

GameModel generate_margin_game(const GeneratorSpec& spec, const std::vector<double>& margins) {
  if (margins.empty()) spec_error("margin list is empty");
  for (double m : margins) {
    if (!(m > 0.0) || !std::isfinite(m)) spec_error("margins must be positive and finite");
  }
  GameModel model = generate_game(spec);
  const auto nash = nash_strategy_iteration(model);
  const auto actions = joint_actions(model, nash.pair);
  const auto& v = nash.table.v;
  std::size_t k = 0;
  for (std::size_t s = 0; s < model.num_states; ++s) {
    const double sign = model.owner[s] == Player::kMax ? -1.0 : 1.0;
    for (std::size_t a = 0; a < model.num_actions; ++a) {
      if (a == actions[s]) continue;
      const auto row = model.row(s, a);
      double next = 0.0;
      for (std::size_t t = 0; t < model.num_states; ++t) next += row[t] * v[t];
      const double r = v[s] + sign * margins[k++ % margins.size()] - model.discount * next;
      if (!(r >= 0.0 && r <= 1.0)) {
        std::ostringstream os;
        os << "margin reward " << r << " at (s=" << s << ", a=" << a << ") leaves [0, 1]";
        spec_error(os.str());
      }
      model.rewards[model.index(s, a)] = r;
    }
  }
  return validate_game(std::move(model));
}

std::vector<double> log_uniform_margins(double lo, double hi, std::size_t count) {
  if (count == 0 || !(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) {
    spec_error("log-uniform margins need 0 < lo <= hi and a positive count");
  }
  std::vector<double> margins(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t slot = (7 * k) % count;
    margins[k] = lo * std::pow(hi / lo, (static_cast<double>(slot) + 0.5) / static_cast<double>(count));
  }
  return margins;
}

GameModel near_tie_game(GeneratorSpec spec, double lo, double hi) {
  const auto base = generate_game(spec);
  spec.reward_law = RewardLaw::kCustom;
  spec.custom_rewards.clear();
  for (double r : base.rewards) spec.custom_rewards.push_back(0.3 + 0.4 * r);
  return generate_margin_game(spec, log_uniform_margins(lo, hi, spec.ns * (spec.na - 1)));
}

GameModel lottery_game(std::size_t decision_states, std::size_t na, double gamma,
                       double margin_lo, double margin_hi, double return_prob) {
  if (decision_states == 0 || na < 2) spec_error("lottery game needs a decision state and two actions");
  if (!(gamma > 0.0 && gamma < 1.0)) spec_error("lottery game needs gamma in (0, 1)");
  if (!(return_prob >= 0.0 && return_prob <= 1.0)) {
    spec_error("lottery return probability must lie in [0, 1]");
  }
  const double scale = (1.0 - gamma * (1.0 - return_prob)) / gamma;
  if (!(margin_lo > 0.0) || !(margin_hi >= margin_lo) || margin_hi * scale > 0.5) {
    spec_error("lottery margins must satisfy 0 < lo <= hi <= gamma D / 2");
  }
  const std::size_t ns = decision_states + 2;
  const std::size_t good = decision_states;
  const std::size_t bad = decision_states + 1;
  GameModel model;
  model.num_states = ns;
  model.num_actions = na;
  model.discount = gamma;
  model.owner.resize(ns);
  model.transitions.assign(ns * na * ns, 0.0);
  model.rewards.assign(ns * na, 0.0);

  const std::size_t alternatives = decision_states * (na - 1);
  std::size_t k = 0;
  for (std::size_t s = 0; s < decision_states; ++s) {
    model.owner[s] = s % 2 == 0 ? Player::kMax : Player::kMin;
    const double sign = s % 2 == 0 ? -1.0 : 1.0;
    for (std::size_t a = 0; a < na; ++a) {
      double p = 0.5;
      if (a > 0) {
        const std::size_t slot = (7 * k++) % alternatives;
        const double m = alternatives > 1 ? margin_lo + (margin_hi - margin_lo) *
                                                            static_cast<double>(slot) /
                                                            static_cast<double>(alternatives - 1)
                                          : margin_lo;
        p += sign * m * scale;
      }
      model.row(s, a)[good] = p;
      model.row(s, a)[bad] = 1.0 - p;
    }
  }
  model.owner[good] = Player::kMax;
  model.owner[bad] = Player::kMin;
  const double back = return_prob / static_cast<double>(decision_states);
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t s = 0; s < decision_states; ++s) {
      model.row(good, a)[s] = back;
      model.row(bad, a)[s] = back;
    }
    model.row(good, a)[good] = 1.0 - return_prob;
    model.row(bad, a)[bad] = 1.0 - return_prob;
    model.rewards[model.index(good, a)] = a == 0 ? 1.0 : 0.5;
    model.rewards[model.index(bad, a)] = a == 0 ? 0.0 : 0.5;
  }
  return validate_game(std::move(model));
}

void validate_scaling_config(const ScalingConfig& config) {
  if (config.budgets.empty()) throw Error(ErrorCode::kDegenerateParams, "no budgets given");
  if (config.budgets.front() == 0) {
    throw Error(ErrorCode::kDegenerateParams, "budgets must be positive");
  }
  for (std::size_t i = 1; i < config.budgets.size(); ++i) {
    if (config.budgets[i] <= config.budgets[i - 1]) {
      throw Error(ErrorCode::kDegenerateParams, "budgets must be strictly increasing");
    }
  }
  if (config.trials == 0) throw Error(ErrorCode::kDegenerateParams, "need at least one trial");
  if (!(config.xi >= 0.0)) throw Error(ErrorCode::kNegativeXi, "xi must be nonnegative");
  if (config.workers == 0) throw Error(ErrorCode::kDegenerateParams, "need at least one worker");
}

std::uint64_t scaling_trial_seed(std::uint64_t master_seed, std::size_t trial) {
  return derive_seed(master_seed, StreamId{StreamDomain::kExperiment, 0, 0, trial});
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

void write_scaling_row(std::ostream& os, const ResultRow& row) {
  const auto old_precision = os.precision(17);
  os << row.n_per_pair << ',' << row.total_n << ',' << row.seed << ',' << row.deviation_max << ','
     << (row.exact_match ? 1 : 0) << ',' << row.gap << ',' << row.wall_ms << '\n';
  os.precision(old_precision);
}

ScalingSummary run_scaling_study(const ScalingConfig& config,
                                 const std::function<void(const ResultRow&)>& on_row) {
  validate_scaling_config(config);
  const GameModel& truth = config.truth;
  const auto nash = nash_strategy_iteration(truth, config.tol);
  const double gap = margins_of(truth, nash.table.q, true, true).nash_gap;

  ScalingSummary summary;
  summary.gap = std::isfinite(gap) ? gap : 0.0;

  auto run_trial = [&](std::size_t n, std::size_t trial) {
    const auto start = std::chrono::steady_clock::now();
    ResultRow row;
    row.n_per_pair = n;
    row.total_n = static_cast<std::uint64_t>(n) * truth.num_pairs();
    row.seed = scaling_trial_seed(config.master_seed, trial);
    const auto empirical = estimate_model(truth, n, row.seed);
    const auto plugin = plug_in_from_empirical(empirical, config.xi, row.seed, config.solver);
    const auto cert = certify_epsilon_nash(truth, plugin.strategy, nash.table.q, 0.0, config.tol);
    row.deviation_max = cert.deviation();
    row.exact_match = plugin.strategy == nash.pair;
    row.gap = summary.gap;
    if (config.record_timing) {
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                              start)
                        .count();
    }
    return row;
  };

  std::vector<ResultRow> rows(config.trials);
  for (std::size_t n : config.budgets) {
    // Trials of one budget fan out to the workers; rows are emitted in
    // trial order once the budget completes.
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      for (std::size_t t = next++; t < config.trials; t = next++) {
        try {
          rows[t] = run_trial(n, t);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    const std::size_t threads = std::min(config.workers, config.trials);
    if (threads <= 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<double> deviations;
    std::size_t matches = 0;
    for (const auto& row : rows) {
      if (on_row) on_row(row);
      deviations.push_back(row.deviation_max);
      if (row.exact_match) ++matches;
    }
    BudgetSummary b;
    b.n_per_pair = n;
    b.total_n = rows.front().total_n;
    b.median_deviation = median(deviations);
    b.exact_match_frequency = static_cast<double>(matches) / static_cast<double>(config.trials);
    summary.budgets.push_back(b);
  }

  std::vector<double> log_n, log_dev;
  for (const auto& b : summary.budgets) {
    // Medians at solver precision count as exact recovery, not as a point.
    if (b.median_deviation > config.tol) {
      log_n.push_back(std::log(static_cast<double>(b.total_n)));
      log_dev.push_back(std::log(b.median_deviation));
    }
  }
  summary.slope_points = log_n.size();
  if (log_n.size() >= 2) summary.slope = least_squares_slope(log_n, log_dev);

  if (summary.budgets.size() >= 2) {
    std::size_t decreasing = 0;
    for (std::size_t i = 1; i < summary.budgets.size(); ++i) {
      if (summary.budgets[i].median_deviation < summary.budgets[i - 1].median_deviation) {
        ++decreasing;
      }
    }
    summary.decreasing_fraction =
        static_cast<double>(decreasing) / static_cast<double>(summary.budgets.size() - 1);
  }

  if (summary.gap > kZeroGapTolerance) {
    for (const auto& b : summary.budgets) {
      if (b.exact_match_frequency >= 0.9) {
        summary.recovery_budget = b.n_per_pair;
        break;
      }
    }
  }
  for (double eps : config.epsilon_grid) {
    std::optional<std::size_t> hit;
    for (const auto& b : summary.budgets) {
      if (b.median_deviation <= eps) {
        hit = b.n_per_pair;
        break;
      }
    }
    summary.epsilon_budgets.push_back(hit);
  }
  return summary;
}

}  // namespace tbsg
