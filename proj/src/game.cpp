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

#include "tbsg/game.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tbsg {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kRowNotStochastic: return "RowNotStochastic";
    case ErrorCode::kRewardOutOfRange: return "RewardOutOfRange";
    case ErrorCode::kEmptyStateSet: return "EmptyStateSet";
    case ErrorCode::kInvalidDiscount: return "InvalidDiscount";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kNotOptimalTable: return "NotOptimalTable";
    case ErrorCode::kNegativeXi: return "NegativeXi";
    case ErrorCode::kDegenerateParams: return "DegenerateParams";
    case ErrorCode::kDegenerateDelta: return "DegenerateDelta";
    case ErrorCode::kRangeViolation: return "RangeViolation";
    case ErrorCode::kDegenerateSpec: return "DegenerateSpec";
    case ErrorCode::kParseError: return "ParseError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

bool Error::is_solver_failure() const noexcept {
  return code_ == ErrorCode::kSingularSystem || code_ == ErrorCode::kNoConvergence ||
         code_ == ErrorCode::kTooLarge;
}

double GameModel::reward_scale() const {
  double scale = 0.0;
  for (double r : rewards) scale = std::max(scale, std::abs(r));
  return scale;
}

namespace {

constexpr double kRowSumTolerance = 1e-12;

std::string pair_name(std::size_t s, std::size_t a) {
  std::ostringstream os;
  os << "(s=" << s << ", a=" << a << ")";
  return os.str();
}

}  // namespace

GameModel validate_game(GameModel raw, RewardBounds bounds) {
  if (raw.num_states == 0) throw Error(ErrorCode::kEmptyStateSet, "game has no states");
  if (raw.num_actions == 0) throw Error(ErrorCode::kEmptyStateSet, "game has no actions");
  if (!(raw.discount >= 0.0 && raw.discount < 1.0)) {
    std::ostringstream os;
    os << "discount must lie in [0, 1), got " << raw.discount;
    throw Error(ErrorCode::kInvalidDiscount, os.str());
  }
  if (raw.owner.size() != raw.num_states) {
    throw Error(ErrorCode::kShapeMismatch, "owner must have one entry per state");
  }
  const std::size_t pairs = raw.num_pairs();
  if (raw.rewards.size() != pairs) {
    throw Error(ErrorCode::kShapeMismatch, "rewards must have |S|*|A| entries");
  }
  if (raw.transitions.size() != pairs * raw.num_states) {
    throw Error(ErrorCode::kShapeMismatch, "transitions must be (|S|*|A|) x |S|");
  }
  for (std::size_t s = 0; s < raw.num_states; ++s) {
    for (std::size_t a = 0; a < raw.num_actions; ++a) {
      double sum = 0.0;
      for (double p : raw.row(s, a)) {
        if (!(p >= 0.0 && p <= 1.0)) {
          throw Error(ErrorCode::kRowNotStochastic,
                      "entry outside [0, 1] in row " + pair_name(s, a));
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > kRowSumTolerance) {
        std::ostringstream os;
        os << "row " << pair_name(s, a) << " sums to " << sum;
        throw Error(ErrorCode::kRowNotStochastic, os.str());
      }
      const double r = raw.reward(s, a);
      if (!std::isfinite(r) || r < bounds.lo || r > bounds.hi) {
        std::ostringstream os;
        os << "reward " << r << " at " << pair_name(s, a) << " outside [" << bounds.lo << ", "
           << bounds.hi << "]";
        throw Error(ErrorCode::kRewardOutOfRange, os.str());
      }
    }
  }
  return raw;
}

std::vector<std::size_t> joint_actions(const GameModel& model, const StrategyPair& pair) {
  check_strategy(model, pair.mu, Player::kMax);
  check_strategy(model, pair.nu, Player::kMin);
  std::vector<std::size_t> actions(model.num_states);
  for (std::size_t s = 0; s < model.num_states; ++s) {
    actions[s] = model.owner[s] == Player::kMax ? pair.mu[s] : pair.nu[s];
  }
  return actions;
}

StrategyPair split_actions(const GameModel& model, std::span<const std::size_t> actions) {
  StrategyPair pair{Strategy(model.num_states, 0), Strategy(model.num_states, 0)};
  for (std::size_t s = 0; s < model.num_states; ++s) {
    (model.owner[s] == Player::kMax ? pair.mu : pair.nu)[s] = actions[s];
  }
  return pair;
}

Strategy canonical_strategy(const GameModel& model, Strategy strategy, Player side) {
  strategy.resize(model.num_states, 0);
  for (std::size_t s = 0; s < model.num_states; ++s) {
    if (model.owner[s] != side) strategy[s] = 0;
  }
  return strategy;
}

void check_strategy(const GameModel& model, const Strategy& strategy, Player side) {
  if (strategy.size() != model.num_states) {
    throw Error(ErrorCode::kLengthMismatch,
                std::string(to_string(side)) + " strategy must have one entry per state");
  }
  for (std::size_t s = 0; s < model.num_states; ++s) {
    if (model.owner[s] == side && strategy[s] >= model.num_actions) {
      std::ostringstream os;
      os << to_string(side) << " strategy picks action " << strategy[s] << " at state " << s;
      throw Error(ErrorCode::kIndexOutOfRange, os.str());
    }
  }
}

}  // namespace tbsg
