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
#include <map>
#include <string>
#include <vector>

#include "tbsg/game.hpp"

namespace tbsg {

struct LemmaSuiteConfig {
  std::size_t trials = 20;       // random (estimate, strategy pair) draws
  std::size_t n_per_pair = 50;   // sample size of each estimate
  double xi = 0.1;               // perturbation magnitude
  double delta = 0.2;            // failure probability for frequency checks
  double coverage_delta = 0.1;   // failure probability of the concentration envelope
  std::size_t gap_trials = 500;  // perturbation draws for the gap frequency
  std::size_t tau_points = 50;   // grid size of the tau trace
  std::uint64_t seed = 0;
};

// One verified statement. For identities `max_residual` is the largest
// residual; for inequalities it is the largest lhs - rhs (negative when the
// bound holds with room); for frequency checks it is the shortfall of the
// observed frequency against its target.
struct LemmaCheck {
  std::string name;
  std::string statement;
  bool pass = false;
  double max_residual = 0.0;
  std::size_t trials = 0;
  std::map<std::string, double> thresholds;
  std::map<std::string, double> measurements;
  std::string note;
};

struct LemmaReport {
  std::vector<LemmaCheck> checks;
  bool all_pass() const;
};

LemmaReport run_lemma_suite(const GameModel& truth, const LemmaSuiteConfig& config);

std::string lemma_report_to_json(const LemmaReport& report, const LemmaSuiteConfig& config);

}  // namespace tbsg
