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

#include "tbsg/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "tbsg/sampling.hpp"

namespace tbsg {

namespace {

void check_pair_index(const GameModel& model, std::size_t s, std::size_t a) {
  if (s >= model.num_states || a >= model.num_actions) {
    std::ostringstream os;
    os << "(s=" << s << ", a=" << a << ") outside a " << model.num_states << "x"
       << model.num_actions << " game";
    throw Error(ErrorCode::kIndexOutOfRange, os.str());
  }
}

double dot(std::span<const double> p, std::span<const double> v) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += p[i] * v[i];
  return acc;
}

// Largest cover we are willing to materialize.
constexpr std::size_t kMaxCoverPoints = 50'000'000;

}  // namespace

GameModel make_absorbing(const GameModel& model, const AbsorbingSpec& spec) {
  check_pair_index(model, spec.s, spec.a);
  if (!std::isfinite(spec.u)) {
    throw Error(ErrorCode::kDegenerateParams, "absorbing reward must be finite");
  }
  GameModel out = model;
  auto row = out.row(spec.s, spec.a);
  std::fill(row.begin(), row.end(), 0.0);
  row[spec.s] = 1.0;
  out.rewards[out.index(spec.s, spec.a)] = spec.u;
  return out;
}

double absorbing_range(double gamma) { return 1.0 / (1.0 - gamma); }

bool in_absorbing_range(double gamma, double u) {
  return std::abs(u) <= absorbing_range(gamma);
}

double u_star(const GameModel& model, std::size_t s, std::size_t a, double tol) {
  check_pair_index(model, s, a);
  const auto v = nash_strategy_iteration(model, tol).table.v;
  return model.reward(s, a) + model.discount * dot(model.row(s, a), v) - model.discount * v[s];
}

double u_for_strategy(const GameModel& model, const Strategy& mu, std::size_t s, std::size_t a,
                      double tol) {
  check_pair_index(model, s, a);
  const auto v = counterstrategy(model, mu, Player::kMax, tol).table.v;
  return model.reward(s, a) + model.discount * dot(model.row(s, a), v) - model.discount * v[s];
}

std::pair<GameModel, PerturbationSpec> perturb_rewards(const GameModel& model, double xi,
                                                       std::uint64_t seed) {
  if (!(xi >= 0.0) || !std::isfinite(xi)) {
    std::ostringstream os;
    os << "perturbation magnitude must be a nonnegative finite number, got " << xi;
    throw Error(ErrorCode::kNegativeXi, os.str());
  }
  PerturbationSpec spec;
  spec.xi = xi;
  spec.seed = seed;
  spec.zeta.assign(model.num_pairs(), 0.0);
  GameModel out = model;
  if (xi == 0.0) return {std::move(out), std::move(spec)};

  RngStream rng(seed, StreamId{StreamDomain::kPerturbation, 0, 0, 0});
  for (std::size_t i = 0; i < model.num_pairs(); ++i) {
    spec.zeta[i] = xi * rng.uniform();
    out.rewards[i] += spec.zeta[i];
  }
  return {std::move(out), std::move(spec)};
}

double CoverSet::spacing() const {
  if (points.size() < 2) return 0.0;
  return 2.0 * absorbing_range(gamma) / static_cast<double>(points.size() - 1);
}

namespace {

std::size_t nearest_grid_index(double gamma, std::size_t size, double u) {
  const double half = absorbing_range(gamma);
  if (size < 2 || u <= -half) return 0;
  if (u >= half) return size - 1;
  const double step = 2.0 * half / static_cast<double>(size - 1);
  const double k = std::round((u + half) / step);
  return std::min(static_cast<std::size_t>(k), size - 1);
}

}  // namespace

std::size_t CoverSet::nearest_index(double u) const {
  return nearest_grid_index(gamma, points.size(), u);
}

double nearest_cover_point(double gamma, std::size_t size, double u) {
  if (size < 2) throw Error(ErrorCode::kDegenerateParams, "a cover needs at least two points");
  const std::size_t k = nearest_grid_index(gamma, size, u);
  const double half = absorbing_range(gamma);
  if (k == size - 1) return half;
  return -half + 2.0 * half / static_cast<double>(size - 1) * static_cast<double>(k);
}

std::size_t cover_cardinality(double gamma, double xi, double delta, std::size_t ns,
                              std::size_t na) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw Error(ErrorCode::kDegenerateParams, "gamma must lie in [0, 1)");
  }
  if (!(xi > 0.0) || !(delta > 0.0 && delta <= 1.0) || ns == 0 || na == 0) {
    throw Error(ErrorCode::kDegenerateParams,
                "cover needs xi > 0, delta in (0, 1] and a non-empty game");
  }
  const double one_minus = 1.0 - gamma;
  const double size = 16.0 * static_cast<double>(ns * ns * na) / (one_minus * one_minus * xi * delta);
  // Shave relative round-off so exact integers do not round up.
  const double rounded = std::ceil(size * (1.0 - 1e-12));
  if (rounded > static_cast<double>(std::numeric_limits<std::size_t>::max() / 2)) {
    throw Error(ErrorCode::kDegenerateParams, "cover cardinality overflows");
  }
  return std::max<std::size_t>(2, static_cast<std::size_t>(rounded));
}

CoverSet build_cover_with_size(double gamma, std::size_t size) {
  if (size < 2) throw Error(ErrorCode::kDegenerateParams, "a cover needs at least two points");
  if (size > kMaxCoverPoints) {
    std::ostringstream os;
    os << "cover of " << size << " points is too large to materialize";
    throw Error(ErrorCode::kTooLarge, os.str());
  }
  CoverSet cover;
  cover.gamma = gamma;
  cover.points.resize(size);
  const double half = absorbing_range(gamma);
  const double step = 2.0 * half / static_cast<double>(size - 1);
  for (std::size_t i = 0; i < size; ++i) cover.points[i] = -half + step * static_cast<double>(i);
  cover.points.back() = half;
  return cover;
}

CoverSet build_cover(double gamma, double xi, double delta, std::size_t ns, std::size_t na) {
  return build_cover_with_size(gamma, cover_cardinality(gamma, xi, delta, ns, na));
}

std::size_t TauTrace::piece_of(std::size_t grid_index) const {
  for (std::size_t p = 0; p < pieces.size(); ++p) {
    if (grid_index >= pieces[p].first && grid_index <= pieces[p].last) return p;
  }
  throw Error(ErrorCode::kIndexOutOfRange, "grid index outside the trace");
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    fit.max_residual =
        std::max(fit.max_residual, std::abs(y[i] - (fit.slope * x[i] + fit.intercept)));
  }
  return fit;
}

}  // namespace

TauTrace trace_nash_q_vs_tau(const GameModel& model, std::size_t s, std::size_t a,
                             const std::vector<double>& tau_grid, double tol) {
  check_pair_index(model, s, a);
  if (tau_grid.empty()) throw Error(ErrorCode::kDegenerateParams, "tau grid is empty");
  for (std::size_t i = 1; i < tau_grid.size(); ++i) {
    if (!(tau_grid[i] > tau_grid[i - 1])) {
      throw Error(ErrorCode::kDegenerateParams, "tau grid must be strictly increasing");
    }
  }

  TauTrace trace;
  trace.s = s;
  trace.a = a;
  trace.gamma = model.discount;
  trace.grid = tau_grid;
  std::vector<std::vector<double>> full_q;
  full_q.reserve(tau_grid.size());

  GameModel shifted = model;
  const std::size_t idx = model.index(s, a);
  for (double tau : tau_grid) {
    shifted.rewards[idx] = model.rewards[idx] + tau;
    auto solution = nash_strategy_iteration(shifted, tol);
    trace.qstar_rows.emplace_back(solution.table.q.begin() + static_cast<std::ptrdiff_t>(model.index(s, 0)),
                                  solution.table.q.begin() + static_cast<std::ptrdiff_t>(model.index(s, 0) + model.num_actions));
    trace.strategies.push_back(std::move(solution.pair));
    full_q.push_back(std::move(solution.table.q));
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::size_t first = 0;
  for (std::size_t i = 1; i <= tau_grid.size(); ++i) {
    if (i < tau_grid.size() && trace.strategies[i] == trace.strategies[first]) continue;
    TracePiece piece;
    piece.first = first;
    piece.last = i - 1;
    piece.slopes.assign(model.num_actions, nan);
    piece.intercepts.assign(model.num_actions, nan);
    if (piece.last > piece.first) {
      const std::span<const double> x(tau_grid.data() + first, piece.last - first + 1);
      std::vector<double> y(x.size());
      for (std::size_t entry = 0; entry < model.num_pairs(); ++entry) {
        for (std::size_t k = 0; k < x.size(); ++k) y[k] = full_q[first + k][entry];
        const auto fit = fit_line(x, y);
        piece.max_residual = std::max(piece.max_residual, fit.max_residual);
        if (entry >= model.index(s, 0) && entry < model.index(s, 0) + model.num_actions) {
          piece.slopes[entry - model.index(s, 0)] = fit.slope;
          piece.intercepts[entry - model.index(s, 0)] = fit.intercept;
        }
      }
    }
    trace.pieces.push_back(std::move(piece));
    first = i;
  }
  return trace;
}

void write_trace_csv(std::ostream& os, const TauTrace& trace) {
  const auto old_precision = os.precision(17);
  os << "tau,piece_id,action,qstar,slope_fit,intercept_fit\n";
  for (std::size_t p = 0; p < trace.pieces.size(); ++p) {
    const auto& piece = trace.pieces[p];
    for (std::size_t i = piece.first; i <= piece.last; ++i) {
      for (std::size_t act = 0; act < trace.qstar_rows[i].size(); ++act) {
        os << trace.grid[i] << ',' << p << ',' << act << ',' << trace.qstar_rows[i][act] << ','
           << piece.slopes[act] << ',' << piece.intercepts[act] << '\n';
      }
    }
  }
  os.precision(old_precision);
}

}  // namespace tbsg
