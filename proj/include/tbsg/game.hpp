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
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tbsg {

// Which player acts in a state. The maximizer is player 1, the minimizer
// player 2.
enum class Player : std::uint8_t { kMax, kMin };

inline const char* to_string(Player p) { return p == Player::kMax ? "max" : "min"; }

enum class ErrorCode {
  kRowNotStochastic,
  kRewardOutOfRange,
  kEmptyStateSet,
  kInvalidDiscount,
  kShapeMismatch,
  kLengthMismatch,
  kIndexOutOfRange,
  kSingularSystem,
  kNoConvergence,
  kTooLarge,
  kNotOptimalTable,
  kNegativeXi,
  kDegenerateParams,
  kDegenerateDelta,
  kRangeViolation,
  kDegenerateSpec,
  kParseError,
};

const char* to_string(ErrorCode code);

// All library failures are reported through this exception. The code lets
// callers (the CLI in particular) tell validation problems from numerical
// failures without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

  // True for failures of an iterative or direct solver as opposed to bad
  // input.
  bool is_solver_failure() const noexcept;

 private:
  ErrorCode code_;
};

// Admissible reward interval. Base games use [0, 1]; perturbed games widen
// the upper end to 1 + xi; the absorbing construction relaxes one entry.
struct RewardBounds {
  double lo = 0.0;
  double hi = 1.0;
};

// A tabular two-player turn-based stochastic game.
//
// State-action pairs are flattened as idx = s * num_actions + a. Transition
// rows are stored row-major: the probability of s' after (s, a) lives at
// transitions[idx * num_states + s'].
struct GameModel {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::vector<Player> owner;
  std::vector<double> transitions;
  std::vector<double> rewards;
  double discount = 0.0;

  std::size_t num_pairs() const { return num_states * num_actions; }
  std::size_t index(std::size_t s, std::size_t a) const { return s * num_actions + a; }

  std::span<const double> row(std::size_t s, std::size_t a) const {
    return {transitions.data() + index(s, a) * num_states, num_states};
  }
  std::span<double> row(std::size_t s, std::size_t a) {
    return {transitions.data() + index(s, a) * num_states, num_states};
  }
  double reward(std::size_t s, std::size_t a) const { return rewards[index(s, a)]; }

  // Largest reward magnitude, used to scale value bounds and tolerances.
  double reward_scale() const;

  bool operator==(const GameModel&) const = default;
};

// Returns `raw` unchanged when every structural and numerical invariant
// holds: non-empty state and action sets, one owner per state, discount in
// [0, 1), entries in [0, 1] with each row summing to 1 within 1e-12, and
// finite rewards inside `bounds`. Throws Error naming the first violation.
GameModel validate_game(GameModel raw, RewardBounds bounds = {});

// A pure strategy for one side: action[s] for every state. Only entries at
// states owned by that side carry meaning; producers in this library keep
// the other entries at 0 so that strategies compare with operator==.
using Strategy = std::vector<std::size_t>;

struct StrategyPair {
  Strategy mu;  // maximizer
  Strategy nu;  // minimizer

  bool operator==(const StrategyPair&) const = default;
};

// Per-state acting action of a full pair.
std::vector<std::size_t> joint_actions(const GameModel& model, const StrategyPair& pair);

// Splits a per-state action vector into the canonical (mu, nu) form.
StrategyPair split_actions(const GameModel& model, std::span<const std::size_t> actions);

// Zeroes the entries of `strategy` that `side` does not own.
Strategy canonical_strategy(const GameModel& model, Strategy strategy, Player side);

// Throws unless `strategy` has one in-range action per state owned by `side`.
void check_strategy(const GameModel& model, const Strategy& strategy, Player side);

struct ValueTable {
  std::vector<double> q;  // over state-action pairs
  std::vector<double> v;  // over states

  bool operator==(const ValueTable&) const = default;
};

struct GapWitness {
  std::size_t state = 0;
  std::size_t best_action = 0;
  std::size_t runner_up = 0;
};

struct GapReport {
  // +infinity when no state has two or more actions.
  double nash_gap = std::numeric_limits<double>::infinity();
  std::optional<GapWitness> witness;
  // One margin per state; +infinity for states that are not measured.
  std::vector<double> per_state_margins;
};

}  // namespace tbsg
