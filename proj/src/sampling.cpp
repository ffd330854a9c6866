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

#include "tbsg/sampling.hpp"

#include <chrono>
#include <limits>
#include <sstream>
#include <tuple>

namespace tbsg {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, const StreamId& id) {
  std::uint64_t h = mix64(master_seed);
  h = mix64(h ^ static_cast<std::uint64_t>(id.domain));
  h = mix64(h ^ id.s);
  h = mix64(h ^ id.a);
  h = mix64(h ^ id.trial);
  return h;
}

RngStream::RngStream(std::uint64_t master_seed, const StreamId& id)
    : engine_(derive_seed(master_seed, id)) {}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::below(std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

std::size_t sample_transition(const GameModel& model, std::size_t s, std::size_t a,
                              RngStream& rng) {
  if (s >= model.num_states || a >= model.num_actions) {
    std::ostringstream os;
    os << "(s=" << s << ", a=" << a << ") outside a " << model.num_states << "x"
       << model.num_actions << " game";
    throw Error(ErrorCode::kIndexOutOfRange, os.str());
  }
  const auto row = model.row(s, a);
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t t = 0; t < row.size(); ++t) {
    if (row[t] <= 0.0) continue;
    last_positive = t;
    cumulative += row[t];
    if (u < cumulative) return t;
  }
  // Row sums can fall a few ulps short of 1.
  return last_positive;
}

EmpiricalModel empirical_from_counts(const GameModel& truth, std::size_t n_per_pair,
                                     std::vector<std::uint64_t> counts) {
  if (n_per_pair == 0) throw Error(ErrorCode::kDegenerateParams, "n_per_pair must be positive");
  if (counts.size() != truth.transitions.size()) {
    throw Error(ErrorCode::kShapeMismatch, "counts table does not match the game shape");
  }
  EmpiricalModel empirical;
  empirical.n_per_pair = n_per_pair;
  empirical.estimate = truth;
  const double n = static_cast<double>(n_per_pair);
  const std::size_t ns = truth.num_states;
  for (std::size_t i = 0; i < truth.num_pairs(); ++i) {
    std::uint64_t total = 0;
    for (std::size_t t = 0; t < ns; ++t) {
      total += counts[i * ns + t];
      empirical.estimate.transitions[i * ns + t] = static_cast<double>(counts[i * ns + t]) / n;
    }
    if (total != n_per_pair) {
      std::ostringstream os;
      os << "counts of pair " << i << " sum to " << total << ", expected " << n_per_pair;
      throw Error(ErrorCode::kShapeMismatch, os.str());
    }
  }
  empirical.counts = std::move(counts);
  empirical.oracle_calls = static_cast<std::uint64_t>(n_per_pair) * truth.num_pairs();
  // Rewards are inherited, so only the transition invariants need checking.
  empirical.estimate = validate_game(std::move(empirical.estimate),
                                     RewardBounds{-std::numeric_limits<double>::max(),
                                                  std::numeric_limits<double>::max()});
  return empirical;
}

EmpiricalModel estimate_model(const GameModel& model, std::size_t n_per_pair,
                              std::uint64_t seed) {
  if (n_per_pair == 0) throw Error(ErrorCode::kDegenerateParams, "n_per_pair must be positive");
  const std::size_t ns = model.num_states;
  std::vector<std::uint64_t> counts(model.transitions.size(), 0);
  std::uint64_t calls = 0;
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t a = 0; a < model.num_actions; ++a) {
      RngStream rng(seed, StreamId{StreamDomain::kSampling, s, a, 0});
      std::uint64_t* row = counts.data() + model.index(s, a) * ns;
      for (std::size_t k = 0; k < n_per_pair; ++k) {
        ++row[sample_transition(model, s, a, rng)];
        ++calls;
      }
    }
  }
  auto empirical = empirical_from_counts(model, n_per_pair, std::move(counts));
  empirical.oracle_calls = calls;
  return empirical;
}

PluginResult plug_in_from_empirical(const EmpiricalModel& empirical, double xi,
                                    std::uint64_t seed, SolverKind solver) {
  const auto start = std::chrono::steady_clock::now();
  PluginResult result;
  std::tie(result.solved_game, result.perturbation) =
      perturb_rewards(empirical.estimate, xi, seed);
  auto solution = solve_nash(result.solved_game, solver, kPluginTolerance);
  result.strategy = std::move(solution.pair);
  result.empirical_q = std::move(solution.table);
  result.diagnostics.n_per_pair = empirical.n_per_pair;
  result.diagnostics.total_samples = empirical.oracle_calls;
  result.diagnostics.xi = xi;
  result.diagnostics.solver = solver;
  result.diagnostics.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return result;
}

PluginResult plug_in_pipeline(const GameModel& model, std::size_t n_per_pair, double xi,
                              std::uint64_t seed, SolverKind solver) {
  const auto start = std::chrono::steady_clock::now();
  const auto empirical = estimate_model(model, n_per_pair, seed);
  auto result = plug_in_from_empirical(empirical, xi, seed, solver);
  result.diagnostics.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace tbsg
