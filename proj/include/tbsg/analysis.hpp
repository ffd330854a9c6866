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
#include <span>
#include <vector>

#include "tbsg/game.hpp"
#include "tbsg/sampling.hpp"
#include "tbsg/solvers.hpp"
#include "tbsg/transforms.hpp"

namespace tbsg {

// Var_{s,a}(V) = P(s,a) V^2 - (P(s,a) V)^2 for every pair, clamped at 0
// against round-off.
struct VarianceVector {
  std::vector<double> values;
};

VarianceVector one_step_variance(const GameModel& model, std::span<const double> v);

// Standard error of a Bernoulli frequency estimate.
double binomial_std_error(double p, std::size_t trials);

// ---------------------------------------------------------------------------
// Value-difference identities.

// Both factorizations of Q^pi - Q-hat^pi,
//   gamma (I - gamma P^pi)^{-1}     (P - P-hat) V-hat^pi
//   gamma (I - gamma P-hat^pi)^{-1} (P - P-hat) V^pi,
// compared with the directly evaluated difference.
struct ValueDifferenceResiduals {
  double first = 0.0;
  double second = 0.0;
  double difference_norm = 0.0;  // |Q^pi - Q-hat^pi|
};

ValueDifferenceResiduals check_value_difference_identity(const GameModel& truth, const GameModel& empirical,
                                      const StrategyPair& pair);

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds(double slack) const { return lhs <= rhs + slack; }
};

// |(I - gamma P^pi)^{-1} sqrt(Var_P(V^pi))| against sqrt(2 / (1 - gamma)^3).
BoundCheck check_variance_bound(const GameModel& model, const StrategyPair& pair);

// |(I - gamma P^pi)^{-1} sqrt(Var_P(V-hat^pi))| against
// sqrt(2 / (1 - gamma)^3) + |Q^pi - Q-hat^pi| / (1 - gamma).
BoundCheck check_empirical_variance_bound(const GameModel& truth, const GameModel& empirical,
                                          const StrategyPair& pair);

// |(I - gamma P-hat^pi)^{-1} sqrt(Var_P(V^pi))| against 16 / sqrt((1 - gamma)^3).
// Holds only with high probability once the sample size is large enough.
BoundCheck check_empirical_resolvent_bound(const GameModel& truth, const GameModel& empirical,
                                           const StrategyPair& pair);

// |Q* - Q-hat*| against max{|Q^{mu*,c-hat(mu*)} - Q-hat^{mu*,*}|,
//                           |Q^{c-hat(nu*),nu*} - Q-hat^{*,nu*}|}.
BoundCheck check_nash_value_sandwich(const GameModel& truth, const GameModel& empirical);

// Outcome of comparing the truth's equilibrium with the empirical one when
// the truth has a positive gap.
struct GapRecovery {
  double gap = 0.0;
  double value_error = 0.0;  // |Q* - Q-hat*|
  bool premise = false;      // value_error < gap / 2
  bool recovered = false;    // pi-hat* == pi*
};

GapRecovery check_gap_recovery(const GameModel& truth, const GameModel& empirical);

// Deviation of the perturbed plug-in maximizer in the true game against the
// two perturbed deviation terms. `rhs` uses 4 xi / (1 - gamma); `rhs_tight`
// the 2 xi / (1 - gamma) obtained by following the argument step by step.
struct PerturbedDeviationCheck {
  double lhs = 0.0;
  double term_truth_response = 0.0;
  double term_empirical_response = 0.0;
  double rhs = 0.0;
  double rhs_tight = 0.0;
};

PerturbedDeviationCheck check_perturbed_deviation(const GameModel& truth,
                                                  const GameModel& empirical, double xi,
                                                  std::uint64_t seed);

// ---------------------------------------------------------------------------
// Concentration.

// bound(s,a) = sqrt(2 log(4/delta) Var_{s,a}(v) / n) + 2 log(4/delta) / (3 (1-gamma) n)
// with the variance taken under the true kernel and n = n_per_pair.
std::vector<double> bernstein_envelope(const GameModel& truth, const EmpiricalModel& counts,
                                       std::span<const double> v, double delta);

struct CoverageReport {
  std::size_t cells = 0;
  std::size_t violations = 0;
  double frequency = 0.0;
  double std_error = 0.0;
  double delta = 0.0;
};

// Counts how often |(P - P-hat)(s,a) v| exceeds the envelope over
// `num_seeds` independent estimates.
CoverageReport bernstein_coverage(const GameModel& truth, std::span<const double> v,
                                  std::size_t n_per_pair, double delta, std::size_t num_seeds,
                                  std::uint64_t seed);

// ---------------------------------------------------------------------------
// Sample-size formulas.

enum class BoundKind { kExactRecovery, kApproximateNash, kPerturbedExactRecovery };

const char* to_string(BoundKind kind);

inline constexpr double kDefaultBoundConstant = 128.0;

struct SampleSizeQuery {
  BoundKind kind = BoundKind::kApproximateNash;
  std::size_t ns = 1;
  std::size_t na = 1;
  double gamma = 0.0;
  double eps_or_gap = 1.0;
  double confidence_delta = 0.1;
  double constant_c = kDefaultBoundConstant;
};

// N = C |S||A| / ((1-gamma)^3 x^2) log(|S||A| / ((1-gamma) delta x)),
// x = epsilon or the gap, rounded up and floored at 0.
std::uint64_t sample_size_bound(const SampleSizeQuery& query);

// ---------------------------------------------------------------------------
// Experiments on manufactured gaps.

struct GapFrequencyReport {
  double xi = 0.0;
  double delta = 0.0;
  double claimed_threshold = 0.0;  // xi delta (1-gamma) / (4 |S|^2 |A|)
  double proof_threshold = 0.0;    // xi delta (1-gamma) / (2 |S| |A|^2)
  double frequency_claimed = 0.0;
  double frequency_proof = 0.0;
  double std_error = 0.0;
  std::vector<double> per_trial_gaps;
};

double claimed_gap_threshold(double xi, double delta, double gamma, std::size_t ns,
                             std::size_t na);
double proof_gap_threshold(double xi, double delta, double gamma, std::size_t ns,
                           std::size_t na);

// Perturbs rewards `trials` times, solves each perturbed game exactly and
// records its Nash gap. A trial counts toward a frequency when its gap is
// positive and at least the threshold.
GapFrequencyReport gap_frequency_experiment(const GameModel& model, double xi, double delta,
                                            std::size_t trials, std::uint64_t seed);

struct CoverMembershipReport {
  std::size_t trials = 0;
  std::size_t matches = 0;
  double frequency = 0.0;
  double std_error = 0.0;
  std::size_t cover_size = 0;
};

// For each trial: estimate at n_per_pair, perturb, compute u* of the
// perturbed empirical game at (s, a), snap it to the nearest cover point u
// and compare the maximizer of the absorbing game at u with the perturbed
// empirical maximizer.
CoverMembershipReport cover_membership_experiment(const GameModel& truth, std::size_t s,
                                                  std::size_t a, std::size_t n_per_pair,
                                                  double xi, double delta, std::size_t trials,
                                                  std::uint64_t seed);

}  // namespace tbsg
