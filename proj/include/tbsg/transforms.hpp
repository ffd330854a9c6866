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
#include <iosfwd>
#include <utility>
#include <vector>

#include "tbsg/game.hpp"
#include "tbsg/solvers.hpp"

namespace tbsg {

// ---------------------------------------------------------------------------
// Absorbing games.

struct AbsorbingSpec {
  std::size_t s = 0;
  std::size_t a = 0;
  double u = 0.0;
};

// Redirects (s, a) to a self-loop on s with reward u; every other row and
// reward is left untouched. Only the reward at (s, a) may leave the input's
// reward interval.
GameModel make_absorbing(const GameModel& model, const AbsorbingSpec& spec);

// Half-width 1/(1 - gamma) of the interval the absorbing reward is taken from.
double absorbing_range(double gamma);
bool in_absorbing_range(double gamma, double u);

// u* = r(s,a) + gamma P(s,a) V* - gamma V*(s): the absorbing game with this
// reward has the same optimal Q as `model`. The value is returned even when
// it falls outside [-1/(1-gamma), 1/(1-gamma)]; check in_absorbing_range.
double u_star(const GameModel& model, std::size_t s, std::size_t a,
              double tol = kDefaultTolerance);

// Same construction with V^{mu,*} in place of V*.
double u_for_strategy(const GameModel& model, const Strategy& mu, std::size_t s, std::size_t a,
                      double tol = kDefaultTolerance);

// ---------------------------------------------------------------------------
// Reward perturbation.

struct PerturbationSpec {
  double xi = 0.0;
  std::vector<double> zeta;  // realized noise, one entry per state-action pair
  std::uint64_t seed = 0;
};

// r_p = r + zeta with zeta_i ~ U[0, xi] i.i.d., drawn from the perturbation
// substream of `seed`. xi = 0 returns the input unchanged.
std::pair<GameModel, PerturbationSpec> perturb_rewards(const GameModel& model, double xi,
                                                       std::uint64_t seed);

// ---------------------------------------------------------------------------
// Covers of the absorbing-reward interval.

struct CoverSet {
  double gamma = 0.0;
  std::vector<double> points;

  double spacing() const;
  // Index of the closest point; u outside the interval maps to an endpoint.
  std::size_t nearest_index(double u) const;
  double nearest(double u) const { return points[nearest_index(u)]; }
};

// Closest of `size` equally spaced points on [-1/(1-gamma), 1/(1-gamma)],
// computed without materializing the cover.
double nearest_cover_point(double gamma, std::size_t size, double u);

// ceil(16 |S|^2 |A| / ((1 - gamma)^2 xi delta)).
std::size_t cover_cardinality(double gamma, double xi, double delta, std::size_t ns,
                              std::size_t na);

// Equally spaced points on [-1/(1-gamma), 1/(1-gamma)], endpoints included.
CoverSet build_cover(double gamma, double xi, double delta, std::size_t ns, std::size_t na);
CoverSet build_cover_with_size(double gamma, std::size_t size);

// ---------------------------------------------------------------------------
// Tracing Q* along r + tau 1_{s,a}.

struct TracePiece {
  std::size_t first = 0;  // grid indices, inclusive
  std::size_t last = 0;
  // Least-squares line of Q*_tau(s, a') against tau for every action a' at
  // the traced state. NaN for single-point pieces.
  std::vector<double> slopes;
  std::vector<double> intercepts;
  // Largest deviation from the per-entry line over every (state, action)
  // entry of Q*_tau inside the piece.
  double max_residual = 0.0;
};

struct TauTrace {
  std::size_t s = 0;
  std::size_t a = 0;
  double gamma = 0.0;
  std::vector<double> grid;
  std::vector<std::vector<double>> qstar_rows;  // per tau: Q*_tau(s, .)
  std::vector<StrategyPair> strategies;
  std::vector<TracePiece> pieces;

  std::size_t piece_of(std::size_t grid_index) const;
};

// Solves the game with r_tau = r + tau 1_{s,a} at every grid point using
// exact strategy iteration. A new piece starts wherever the equilibrium
// strategy changes.
TauTrace trace_nash_q_vs_tau(const GameModel& model, std::size_t s, std::size_t a,
                             const std::vector<double>& tau_grid, double tol = kDefaultTolerance);

// CSV: tau,piece_id,action,qstar,slope_fit,intercept_fit
void write_trace_csv(std::ostream& os, const TauTrace& trace);

}  // namespace tbsg
