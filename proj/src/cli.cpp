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

#include "tbsg/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "tbsg/analysis.hpp"
#include "tbsg/experiments.hpp"
#include "tbsg/io.hpp"
#include "tbsg/lemma_report.hpp"
#include "tbsg/sampling.hpp"
#include "tbsg/solvers.hpp"
#include "tbsg/transforms.hpp"

namespace tbsg {

namespace {

struct GlobalOptions {
  std::uint64_t seed = 0;
  double tol = kDefaultTolerance;
  double xi = 0.0;
  std::string solver = "si";
  std::string out;
};

struct SampleOptions {
  std::string game;
  std::size_t n_per_pair = 0;
  std::size_t n_total = 0;
};

SolverKind solver_of(const std::string& name) {
  return name == "vi" ? SolverKind::kValueIteration : SolverKind::kStrategyIteration;
}

// Resolves --n / --n-total to a per-pair budget, warning on floor division.
std::size_t per_pair_budget(const SampleOptions& opts, const GameModel& model, std::ostream& err) {
  if ((opts.n_per_pair == 0) == (opts.n_total == 0)) {
    throw Error(ErrorCode::kDegenerateParams, "give exactly one of --n and --n-total");
  }
  if (opts.n_per_pair > 0) return opts.n_per_pair;
  const std::size_t pairs = model.num_pairs();
  const std::size_t n = opts.n_total / pairs;
  if (n == 0) {
    throw Error(ErrorCode::kDegenerateParams, "--n-total is smaller than the number of pairs");
  }
  err << "warning: --n-total " << opts.n_total << " is floor-divided over " << pairs
      << " state-action pairs: using " << n << " per pair";
  if (n * pairs != opts.n_total) err << ", dropping " << opts.n_total - n * pairs << " samples";
  err << '\n';
  return n;
}

template <typename T>
std::string join(const std::vector<T>& values, const char* sep = " ") {
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t i = 0; i < values.size(); ++i) os << (i ? sep : "") << values[i];
  return os.str();
}

void print_strategy(std::ostream& os, const GameModel& model, const StrategyPair& pair) {
  os << "strategy:";
  for (std::size_t s = 0; s < model.num_states; ++s) {
    const bool is_max = model.owner[s] == Player::kMax;
    os << ' ' << s << ':' << to_string(model.owner[s]) << '=' << (is_max ? pair.mu[s] : pair.nu[s]);
  }
  os << '\n';
}

void print_gap(std::ostream& os, const GapReport& gap) {
  os << "gap: " << gap.nash_gap << '\n';
  if (gap.witness) {
    os << "gap_witness: state=" << gap.witness->state << " best=" << gap.witness->best_action
       << " runner_up=" << gap.witness->runner_up << '\n';
  }
  os << "state_margins: " << join(gap.per_state_margins) << '\n';
}

class Cli {
 public:
  Cli(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(const std::vector<std::string>& args);

 private:
  void header(const std::string& command, const std::vector<std::string>& args) const;
  void emit(const std::string& text) const;

  std::string solve() const;
  std::string sample() const;
  std::string plugin() const;
  std::string perturb() const;
  std::string gap() const;
  std::string trace_tau() const;
  std::string scaling() const;
  std::string verify_lemmas() const;
  std::string bound() const;

  std::ostream& out_;
  std::ostream& err_;
  GlobalOptions g_;
  SampleOptions sample_;
  std::string game_;
  std::string counts_;
  double epsilon_ = 0.0;
  bool timing_ = false;
  std::string fixed_max_;
  std::string fixed_min_;
  std::size_t state_ = 0;
  std::size_t action_ = 0;
  double tau_min_ = NAN;
  double tau_max_ = NAN;
  std::size_t points_ = 200;
  std::vector<std::size_t> budgets_;
  unsigned min_exp_ = 10;
  unsigned max_exp_ = 16;
  std::size_t trials_ = 20;
  std::size_t workers_ = 1;
  std::vector<double> epsilon_grid_;
  LemmaSuiteConfig lemmas_;
  bool strict_ = false;
  std::string kind_ = "approx";
  std::size_t states_ = 1;
  std::size_t actions_ = 1;
  double gamma_ = 0.0;
  double eps_or_gap_ = 1.0;
  double delta_ = 0.1;
  double constant_ = kDefaultBoundConstant;
};

void Cli::header(const std::string& command, const std::vector<std::string>& args) const {
  err_ << "# " << kFormatId << " command=" << command << " seed=" << g_.seed
       << std::setprecision(17) << " tol=" << g_.tol << " xi=" << g_.xi << " solver=" << g_.solver
       << " args=\"" << join(args) << "\"\n";
}

void Cli::emit(const std::string& text) const {
  if (g_.out.empty()) {
    out_ << text;
    out_.flush();
  } else {
    write_text_file(g_.out, text);
  }
}

std::string Cli::solve() const {
  const auto model = load_game(game_);
  const auto nash = solve_nash(model, solver_of(g_.solver), g_.tol);
  std::ostringstream os;
  os << std::setprecision(17);
  os << "qstar: " << join(nash.table.q) << '\n';
  os << "vstar: " << join(nash.table.v) << '\n';
  print_strategy(os, model, nash.pair);
  os << "iterations: " << nash.iterations << '\n';
  print_gap(os, margins_of(model, nash.table.q, true, true));
  return os.str();
}

std::string Cli::sample() const {
  const auto model = load_game(game_);
  const std::size_t n = per_pair_budget(sample_, model, err_);
  return counts_to_json(estimate_model(model, n, g_.seed));
}

std::string Cli::plugin() const {
  const auto model = load_game(game_);
  EmpiricalModel empirical;
  if (!counts_.empty()) {
    empirical = parse_counts_json(model, read_text_file(counts_));
  } else {
    empirical = estimate_model(model, per_pair_budget(sample_, model, err_), g_.seed);
  }
  const auto result = plug_in_from_empirical(empirical, g_.xi, g_.seed, solver_of(g_.solver));
  const auto cert = certify_epsilon_nash(model, result.strategy, epsilon_, g_.tol);
  std::ostringstream os;
  os << std::setprecision(17);
  print_strategy(os, model, result.strategy);
  os << "empirical_qstar: " << join(result.empirical_q.q) << '\n';
  os << "n_per_pair: " << result.diagnostics.n_per_pair << '\n';
  os << "total_samples: " << result.diagnostics.total_samples << '\n';
  os << "xi: " << result.diagnostics.xi << '\n';
  os << "solver: " << to_string(result.diagnostics.solver) << '\n';
  os << "max_side_deviation: " << cert.max_side_deviation << '\n';
  os << "min_side_deviation: " << cert.min_side_deviation << '\n';
  os << "deviation: " << cert.deviation() << '\n';
  os << "epsilon: " << cert.epsilon << '\n';
  os << "certified: " << (cert.pass ? "yes" : "no") << '\n';
  if (timing_) os << "wall_ms: " << result.diagnostics.wall_ms << '\n';
  return os.str();
}

std::string Cli::perturb() const {
  const auto model = load_game(game_);
  return game_to_json(perturb_rewards(model, g_.xi, g_.seed).first);
}

std::string Cli::gap() const {
  const auto model = load_game(game_);
  std::ostringstream os;
  os << std::setprecision(17);
  auto parse_strategy = [&](const std::string& text, Player side) {
    Strategy strategy;
    std::istringstream in(text);
    std::string token;
    while (std::getline(in, token, ',')) strategy.push_back(std::stoul(token));
    check_strategy(model, strategy, side);
    return strategy;
  };
  if (!fixed_max_.empty() && !fixed_min_.empty()) {
    throw Error(ErrorCode::kDegenerateParams, "give at most one of --max-strategy and --min-strategy");
  }
  if (!fixed_max_.empty()) {
    os << "fixed: max\n";
    print_gap(os, suboptimality_gap_counter(model, parse_strategy(fixed_max_, Player::kMax),
                                            Player::kMax));
  } else if (!fixed_min_.empty()) {
    os << "fixed: min\n";
    print_gap(os, suboptimality_gap_counter(model, parse_strategy(fixed_min_, Player::kMin),
                                            Player::kMin));
  } else {
    const auto nash = solve_nash(model, solver_of(g_.solver), g_.tol);
    print_gap(os, margins_of(model, nash.table.q, true, true));
  }
  return os.str();
}

std::string Cli::trace_tau() const {
  const auto model = load_game(game_);
  const double range = absorbing_range(model.discount);
  const double lo = std::isnan(tau_min_) ? -range : tau_min_;
  const double hi = std::isnan(tau_max_) ? range : tau_max_;
  if (points_ < 2 || !(hi > lo)) {
    throw Error(ErrorCode::kDegenerateParams, "need --points >= 2 and --tau-max > --tau-min");
  }
  std::vector<double> grid(points_);
  for (std::size_t i = 0; i < points_; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points_ - 1);
  }
  std::ostringstream os;
  write_trace_csv(os, trace_nash_q_vs_tau(model, state_, action_, grid, g_.tol));
  return os.str();
}

std::string Cli::scaling() const {
  ScalingConfig config;
  config.truth = load_game(game_);
  if (!budgets_.empty()) {
    config.budgets = budgets_;
  } else {
    if (min_exp_ > max_exp_ || max_exp_ > 40) {
      throw Error(ErrorCode::kDegenerateParams, "need --min-exp <= --max-exp <= 40");
    }
    for (unsigned e = min_exp_; e <= max_exp_; ++e) config.budgets.push_back(std::size_t{1} << e);
  }
  config.trials = trials_;
  config.xi = g_.xi;
  config.master_seed = g_.seed;
  config.solver = solver_of(g_.solver);
  config.tol = g_.tol;
  config.epsilon_grid = epsilon_grid_;
  config.record_timing = timing_;
  config.workers = workers_;

  // Rows stream to the output file as each budget finishes.
  std::ofstream file;
  if (!g_.out.empty()) {
    file.open(g_.out, std::ios::binary | std::ios::trunc);
    if (!file) throw Error(ErrorCode::kParseError, "cannot write " + g_.out);
  }
  std::ostream& csv = g_.out.empty() ? out_ : file;
  csv << kScalingCsvHeader << '\n';
  const auto summary = run_scaling_study(config, [&](const ResultRow& row) {
    write_scaling_row(csv, row);
    csv.flush();
  });

  std::ostringstream os;
  os << std::setprecision(6);
  os << "# gap=" << summary.gap << '\n';
  for (const auto& b : summary.budgets) {
    os << "# n_per_pair=" << b.n_per_pair << " total_n=" << b.total_n
       << " median_deviation=" << b.median_deviation
       << " exact_match_frequency=" << b.exact_match_frequency << '\n';
  }
  os << "# slope=";
  if (summary.slope) {
    os << *summary.slope;
  } else {
    os << "none";
  }
  os << " slope_points=" << summary.slope_points
     << " decreasing_fraction=" << summary.decreasing_fraction << '\n';
  os << "# recovery_budget=";
  if (summary.recovery_budget) {
    os << *summary.recovery_budget;
  } else {
    os << "none";
  }
  os << '\n';
  for (std::size_t i = 0; i < summary.epsilon_budgets.size(); ++i) {
    os << "# epsilon=" << config.epsilon_grid[i] << " budget=";
    if (summary.epsilon_budgets[i]) {
      os << *summary.epsilon_budgets[i];
    } else {
      os << "none";
    }
    os << '\n';
  }
  err_ << os.str();
  return {};
}

std::string Cli::verify_lemmas() const {
  const auto model = load_game(game_);
  LemmaSuiteConfig config = lemmas_;
  config.seed = g_.seed;
  config.xi = g_.xi > 0.0 ? g_.xi : config.xi;
  return lemma_report_to_json(run_lemma_suite(model, config), config);
}

std::string Cli::bound() const {
  SampleSizeQuery q;
  if (kind_ == "exact") {
    q.kind = BoundKind::kExactRecovery;
  } else if (kind_ == "approx") {
    q.kind = BoundKind::kApproximateNash;
  } else {
    q.kind = BoundKind::kPerturbedExactRecovery;
  }
  q.ns = states_;
  q.na = actions_;
  q.gamma = gamma_;
  q.eps_or_gap = eps_or_gap_;
  q.confidence_delta = delta_;
  q.constant_c = constant_;
  return std::to_string(sample_size_bound(q)) + "\n";
}

int Cli::run(const std::vector<std::string>& args) {
  CLI::App app{"Turn-based stochastic game workbench", "tbsg"};
  app.require_subcommand(1);
  app.add_option("--seed", g_.seed, "Master seed")->capture_default_str();
  app.add_option("--tol", g_.tol, "Solver tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--xi", g_.xi, "Reward perturbation magnitude")->capture_default_str()->check(CLI::NonNegativeNumber);
  app.add_option("--solver", g_.solver, "Nash solver")->capture_default_str()->check(CLI::IsMember({"vi", "si"}));
  app.add_option("--out", g_.out, "Write command output to this file");

  auto add_game = [&](CLI::App* sub) {
    sub->add_option("game", game_, "Game, generator or benchmark JSON")->required();
  };
  auto add_budget = [&](CLI::App* sub) {
    sub->add_option("--n", sample_.n_per_pair, "Samples per state-action pair");
    sub->add_option("--n-total", sample_.n_total, "Total samples, split evenly over pairs");
  };

  auto* solve = app.add_subcommand("solve", "Exact Nash equilibrium, Q* and gap");
  add_game(solve);

  auto* sample = app.add_subcommand("sample", "Estimate transitions and write a counts sidecar");
  add_game(sample);
  add_budget(sample);

  auto* plugin = app.add_subcommand("plugin", "Plug-in solver with certification");
  add_game(plugin);
  add_budget(plugin);
  plugin->add_option("--counts", counts_, "Reuse a counts sidecar instead of sampling");
  plugin->add_option("--epsilon", epsilon_, "Certification level")->capture_default_str();
  plugin->add_flag("--timing", timing_, "Report wall-clock time");

  auto* perturb = app.add_subcommand("perturb", "Add U[0, xi] noise to rewards");
  add_game(perturb);

  auto* gap = app.add_subcommand("gap", "Suboptimality gap of the game or a counterstrategy");
  add_game(gap);
  gap->add_option("--max-strategy", fixed_max_, "Comma-separated MAX strategy to respond to");
  gap->add_option("--min-strategy", fixed_min_, "Comma-separated MIN strategy to respond to");

  auto* trace = app.add_subcommand("trace-tau", "Trace Q* along r + tau 1_{s,a}");
  add_game(trace);
  trace->add_option("--state", state_)->capture_default_str();
  trace->add_option("--action", action_)->capture_default_str();
  trace->add_option("--tau-min", tau_min_, "Defaults to -1/(1-gamma)");
  trace->add_option("--tau-max", tau_max_, "Defaults to 1/(1-gamma)");
  trace->add_option("--points", points_)->capture_default_str();

  auto* scaling = app.add_subcommand("scaling", "Sample-size scaling study (CSV)");
  add_game(scaling);
  scaling->add_option("--budgets", budgets_, "Explicit per-pair budgets")->delimiter(',');
  scaling->add_option("--min-exp", min_exp_, "Smallest budget 2^k")->capture_default_str();
  scaling->add_option("--max-exp", max_exp_, "Largest budget 2^k")->capture_default_str();
  scaling->add_option("--trials", trials_)->capture_default_str();
  scaling->add_option("--workers", workers_)->capture_default_str();
  scaling->add_option("--epsilon-grid", epsilon_grid_)->delimiter(',');
  scaling->add_flag("--timing", timing_, "Fill wall_ms");

  auto* verify = app.add_subcommand("verify-lemmas", "Numerical checks of the analysis (JSON)");
  add_game(verify);
  verify->add_option("--trials", lemmas_.trials)->capture_default_str();
  verify->add_option("--n", lemmas_.n_per_pair)->capture_default_str();
  verify->add_option("--delta", lemmas_.delta)->capture_default_str();
  verify->add_option("--gap-trials", lemmas_.gap_trials)->capture_default_str();
  verify->add_option("--tau-points", lemmas_.tau_points)->capture_default_str();
  verify->add_flag("--strict", strict_, "Exit 1 when a check fails");

  auto* bound = app.add_subcommand("bound", "Sample-size bound N");
  bound->add_option("--kind", kind_)->capture_default_str()->check(
      CLI::IsMember({"exact", "approx", "perturbed"}));
  bound->add_option("--states", states_)->required();
  bound->add_option("--actions", actions_)->required();
  bound->add_option("--gamma", gamma_)->required();
  bound->add_option("--eps", eps_or_gap_, "Epsilon, or the gap for exact kinds")->required();
  bound->add_option("--delta", delta_)->capture_default_str();
  bound->add_option("--constant", constant_)->capture_default_str();

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out_ << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out_ << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err_ << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  const std::map<const CLI::App*, std::string (Cli::*)() const> handlers = {
      {solve, &Cli::solve},   {sample, &Cli::sample},       {plugin, &Cli::plugin},
      {perturb, &Cli::perturb}, {gap, &Cli::gap},           {trace, &Cli::trace_tau},
      {scaling, &Cli::scaling}, {verify, &Cli::verify_lemmas}, {bound, &Cli::bound}};
  for (const auto& [sub, handler] : handlers) {
    if (!sub->parsed()) continue;
    header(sub->get_name(), args);
    try {
      const std::string text = (this->*handler)();
      if (sub != scaling) emit(text);
      if (sub == verify && strict_ && text.find("\"pass\": false") != std::string::npos) {
        return kExitValidation;
      }
      return kExitOk;
    } catch (const Error& e) {
      err_ << "error: " << e.what() << '\n';
      return e.is_solver_failure() ? kExitSolver : kExitValidation;
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << '\n';
      return kExitValidation;
    }
  }
  return kExitValidation;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Cli cli(out, err);
  return cli.run(args);
}

}  // namespace tbsg
