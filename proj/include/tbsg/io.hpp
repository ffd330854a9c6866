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

#include <filesystem>
#include <string>
#include <string_view>

#include "tbsg/experiments.hpp"
#include "tbsg/game.hpp"
#include "tbsg/sampling.hpp"

namespace tbsg {

// Game JSON:
//   { "num_states": 2, "num_actions": 2, "owner": ["max", "min"],
//     "gamma": 0.5, "rewards": [...|S||A|...],
//     "transitions": [[...|S|...], ...one row per (s, a)...] }
// Rows and rewards use the index s * |A| + a. Parsing validates the game.
GameModel parse_game_json(std::string_view text);
std::string game_to_json(const GameModel& model);

// Counts JSON: { "n_per_pair": n, "counts": [[...|S|...], ...] }.
EmpiricalModel parse_counts_json(const GameModel& truth, std::string_view text);
std::string counts_to_json(const EmpiricalModel& empirical);

// Generator JSON: { "generator": { "ns", "na", "gamma", "owner_pattern":
// "alternate" | "random" | "all_max", "p_max", "support", "reward_law":
// "uniform01" | "bernoulli" | "custom", "bernoulli_p", "custom_rewards",
// "seed" } }. Missing fields take GeneratorSpec defaults.
GeneratorSpec parse_generator_json(std::string_view text);
std::string generator_to_json(const GeneratorSpec& spec);

// Reads any game source: a game JSON, a generator JSON, or a benchmark
// JSON of the form
//   { "benchmark": "near_tie", "generator": {...}, "margin_lo", "margin_hi" }
//   { "benchmark": "lottery", "decision_states", "num_actions", "gamma",
//     "margin_lo", "margin_hi", optional "return_prob" (default 0.01) }.
GameModel parse_game_source(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

GameModel load_game(const std::filesystem::path& path);

}  // namespace tbsg
