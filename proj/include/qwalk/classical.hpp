#pragma once

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "qwalk/engine.hpp"
#include "qwalk/stats.hpp"
#include "qwalk/traps.hpp"

namespace qwalk {

/// The classical counterpart of the walker carries no coin state: just a
/// probability distribution evolved by the diagonal-hop kernel.
using ClassicalState = ProbabilityGrid;

/// Point mass at the origin on a lattice sized for `steps` iterations.
inline ClassicalState classical_new(int steps) {
  if (steps < 0) throw std::invalid_argument("steps must be >= 0");
  ClassicalState state(steps + 1);
  state.support = 0;
  state.values(0, 0) = 1.0;
  return state;
}

/// One iteration: each site receives a quarter of the mass of each of its
/// four diagonal neighbors, then trap sites are emptied. Mass walking past
/// the lattice edge is dropped, mirroring the quantum shift's clipping.
inline ClassicalState classical_step(const ClassicalState& state,
                                     const TrapMask* traps = nullptr) {
  const int half = state.half_width();
  if (traps && traps->half_width() != half)
    throw std::invalid_argument("trap mask and lattice sizes differ");
  if (state.support >= half)
    throw std::runtime_error(
        "classical step would spill off the lattice; size it with "
        "half_width > walk length");

  ClassicalState next(half);
  const int radius = state.support + 1;
  auto at = [&](int m, int n) -> double {
    return state.values.in_bounds(m, n) ? state.values(m, n) : 0.0;
  };
  for (int m = -radius; m <= radius; ++m) {
    double* out_row = next.values.row(m);
    for (int n = -radius; n <= radius; ++n) {
      if (traps && traps->trapped(m, n)) continue;
      out_row[n] = 0.25 * (at(m - 1, n - 1) + at(m - 1, n + 1) +
                           at(m + 1, n - 1) + at(m + 1, n + 1));
    }
  }
  next.time = state.time + 1;
  next.support = radius;
  return next;
}

inline ClassicalState classical_step(const ClassicalState& state,
                                     const TrapMask& traps) {
  return classical_step(state, &traps);
}

/// Spread trace of the trap-free classical walk, computed by exact
/// convolution. Grows as sqrt(2t): each axis performs an independent
/// unit-step random walk.
inline SigmaSeries classical_sigma(int steps) {
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  SigmaSeries series;
  series.sigma.reserve(steps);
  series.survivors.assign(steps, 1);
  series.meta.source = "classical";
  series.meta.density = 0.0;
  series.meta.ensemble = 1;
  series.meta.seed = 0;
  series.meta.mode = SigmaMode::conditional;

  ClassicalState state = classical_new(steps);
  for (int t = 1; t <= steps; ++t) {
    state = classical_step(state);
    series.sigma.push_back(sigma_of(state, SigmaMode::conditional).value());
  }
  return series;
}

}  // namespace qwalk
