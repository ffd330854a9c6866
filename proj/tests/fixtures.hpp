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

// Small hand-built games with values that can be checked on paper.

#pragma once

#include <vector>

#include "tbsg/game.hpp"

namespace tbsg::fixtures {

inline GameModel make(std::size_t ns, std::size_t na, std::vector<Player> owner,
                      std::vector<double> transitions, std::vector<double> rewards, double gamma) {
  GameModel m;
  m.num_states = ns;
  m.num_actions = na;
  m.owner = std::move(owner);
  m.transitions = std::move(transitions);
  m.rewards = std::move(rewards);
  m.discount = gamma;
  return validate_game(std::move(m));
}

// One MAX state, two self-loops paying 1 and 0, gamma = 0.5: Q* = (2, 1).
inline GameModel one_state_two_actions() {
  return make(1, 2, {Player::kMax}, {1.0, 1.0}, {1.0, 0.0}, 0.5);
}

// s0 (MAX, r = 1) -> s1 (MIN, r = 0) -> s0, gamma = 0.5: v = (4/3, 2/3).
inline GameModel two_state_cycle() {
  return make(2, 1, {Player::kMax, Player::kMin}, {0.0, 1.0, 1.0, 0.0}, {1.0, 0.0}, 0.5);
}

// Both states carry two identical actions.
inline GameModel duplicate_actions() {
  return make(2, 2, {Player::kMax, Player::kMin}, {0.3, 0.7, 0.3, 0.7, 0.6, 0.4, 0.6, 0.4},
              {0.5, 0.5, 0.2, 0.2}, 0.9);
}

inline GameModel zero_game() {
  return make(3, 2, {Player::kMax, Player::kMin, Player::kMax},
              {0.5, 0.5, 0.0, 0.0, 0.5, 0.5, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.2, 0.3, 0.5, 0.0, 1.0, 0.0},
              std::vector<double>(6, 0.0), 0.9);
}

// s0 MAX: stay (r = 0.5) or move to s1 (r = 0); s1 MIN: stay (r = 1) or move
// to s0 (r = 0); gamma = 0.5. Q* = (1, 0.25 | 1.25, 0.5), gap 0.75.
inline GameModel deterministic_2x2() {
  return make(2, 2, {Player::kMax, Player::kMin}, {1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0},
              {0.5, 0.0, 1.0, 0.0}, 0.5);
}

}  // namespace tbsg::fixtures
