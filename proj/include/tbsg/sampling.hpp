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
#include <random>
#include <vector>

#include "tbsg/game.hpp"
#include "tbsg/solvers.hpp"
#include "tbsg/transforms.hpp"

namespace tbsg {

// Substream purposes. Different purposes under one master seed never share
// draws.
enum class StreamDomain : std::uint64_t {
  kSampling = 1,
  kPerturbation = 2,
  kGenerator = 3,
  kTrial = 4,
  kExperiment = 5,
};

struct StreamId {
  StreamDomain domain = StreamDomain::kSampling;
  std::uint64_t s = 0;
  std::uint64_t a = 0;
  std::uint64_t trial = 0;
};

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

std::uint64_t derive_seed(std::uint64_t master_seed, const StreamId& id);

// A reproducible random stream keyed by (master seed, stream id). Uniform
// variates are built from the top 53 bits of a mt19937_64 draw so that the
// sequence is identical on every conforming platform.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, const StreamId& id);

  double uniform();  // in [0, 1)
  std::uint64_t next_u64() { return engine_(); }
  // Uniform integer in [0, n) by rejection; n > 0.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

// One draw from P(.|s,a) by inverse CDF over the row in state order.
std::size_t sample_transition(const GameModel& model, std::size_t s, std::size_t a,
                              RngStream& rng);

struct EmpiricalModel {
  std::size_t n_per_pair = 0;
  std::vector<std::uint64_t> counts;  // same layout as GameModel::transitions
  GameModel estimate;                 // P-hat with the truth's rewards/owner/discount
  std::uint64_t oracle_calls = 0;

  std::uint64_t count(std::size_t s, std::size_t a, std::size_t next) const {
    return counts[estimate.index(s, a) * estimate.num_states + next];
  }
};

// Calls the generative model n_per_pair times on every (s, a) and forms
// P-hat(s'|s,a) = count(s,a,s') / n_per_pair. Each pair uses its own
// substream of `seed`.
EmpiricalModel estimate_model(const GameModel& model, std::size_t n_per_pair,
                              std::uint64_t seed);

// Rebuilds an empirical model from stored counts. Validates conservation.
EmpiricalModel empirical_from_counts(const GameModel& truth, std::size_t n_per_pair,
                                     std::vector<std::uint64_t> counts);

struct PluginDiagnostics {
  std::size_t n_per_pair = 0;
  std::uint64_t total_samples = 0;
  double xi = 0.0;
  SolverKind solver = SolverKind::kStrategyIteration;
  double wall_ms = 0.0;
};

struct PluginResult {
  StrategyPair strategy;     // pi-hat* (or pi-hat*_p when xi > 0)
  ValueTable empirical_q;    // in the (perturbed) empirical game
  GameModel solved_game;     // the game handed to the planner
  PerturbationSpec perturbation;
  PluginDiagnostics diagnostics;
};

inline constexpr double kPluginTolerance = 1e-10;

// Estimate, optionally perturb rewards by U[0, xi] noise, then plan in the
// resulting game with the chosen solver.
PluginResult plug_in_pipeline(const GameModel& model, std::size_t n_per_pair, double xi,
                              std::uint64_t seed, SolverKind solver);

// Same pipeline starting from an already estimated model.
PluginResult plug_in_from_empirical(const EmpiricalModel& empirical, double xi,
                                    std::uint64_t seed, SolverKind solver);

}  // namespace tbsg
