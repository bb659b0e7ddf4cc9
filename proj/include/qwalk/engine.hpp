#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qwalk/coin.hpp"
#include "qwalk/lattice.hpp"
#include "qwalk/traps.hpp"

namespace qwalk {

/// Probability distribution P(m, n) over the lattice at a fixed walk time.
///
/// `support` is the radius outside which every entry is known to be zero
/// (the light cone: a walker moves one diagonal step per iteration). Scans
/// honor it so early-time grids are cheap; a grid built by hand gets full
/// support by default.
struct ProbabilityGrid {
  Lattice<double> values;
  int time = 0;
  int support = 0;

  ProbabilityGrid() = default;
  explicit ProbabilityGrid(int half_width)
      : values(half_width), time(0), support(half_width) {}

  int half_width() const { return values.half_width(); }
  int scan_radius() const { return std::min(support, values.half_width()); }
};

/// Full state of the walker: four complex amplitude grids, one per coin
/// basis component (00, 01, 10, 11), plus the current step count.
///
/// Two buffers of identical layout are kept so a step is a branch-free
/// stencil from one into the other. Amplitudes outside `support_radius()`
/// are exactly zero in both buffers; every kernel relies on that and
/// preserves it.
class WalkerState {
 public:
  WalkerState(int half_width, const CoinState& origin_coin)
      : half_width_(half_width),
        width_(2 * half_width + 1),
        plane_(static_cast<std::size_t>(width_) * width_),
        amps_(4 * plane_),
        scratch_(4 * plane_) {
    for (int c = 0; c < 4; ++c) component(c)[origin_index()] = origin_coin[c];
  }

  int half_width() const { return half_width_; }
  int width() const { return width_; }
  int time() const { return time_; }
  int support_radius() const { return support_; }

  cplx amplitude(int j, int k, int m, int n) const {
    return component(j * 2 + k)[site_index(m, n)];
  }

  /// Test and setup hook; widens the tracked support to cover the site.
  void set_amplitude(int j, int k, int m, int n, cplx value) {
    component(j * 2 + k)[site_index(m, n)] = value;
    support_ = std::max({support_, std::abs(m), std::abs(n)});
  }

  cplx* component(int c) { return amps_.data() + c * plane_; }
  const cplx* component(int c) const { return amps_.data() + c * plane_; }

  double total_probability() const {
    const int radius = support_;
    double total = 0.0;
    for (int c = 0; c < 4; ++c) {
      const cplx* grid = component(c);
      for (int m = -radius; m <= radius; ++m) {
        const cplx* row = grid + row_offset(m);
        double row_sum = 0.0;
        for (int n = -radius; n <= radius; ++n) row_sum += std::norm(row[n]);
        total += row_sum;
      }
    }
    return total;
  }

 private:
  std::size_t origin_index() const {
    return static_cast<std::size_t>(half_width_) * width_ + half_width_;
  }
  std::size_t site_index(int m, int n) const {
    if (m < -half_width_ || m > half_width_ || n < -half_width_ ||
        n > half_width_)
      throw std::out_of_range("site outside lattice");
    return static_cast<std::size_t>(m + half_width_) * width_ +
           (n + half_width_);
  }
  /// Offset such that (component base + row_offset(m))[n] is site (m, n).
  std::ptrdiff_t row_offset(int m) const {
    return static_cast<std::ptrdiff_t>(m + half_width_) * width_ + half_width_;
  }

  int half_width_ = 0;
  int width_ = 0;
  std::size_t plane_ = 0;
  int time_ = 0;
  int support_ = 0;
  std::vector<cplx> amps_;
  std::vector<cplx> scratch_;

  friend void apply_coin(WalkerState&, const CoinMatrix&);
  friend void apply_shift(WalkerState&);
  friend void project_traps(WalkerState&, const TrapMask&);
  friend void step(WalkerState&, const CoinMatrix&, const TrapMask&);
};

/// Walker at the origin of a lattice sized so that `steps` iterations never
/// reach the boundary (half width = steps + 1).
inline WalkerState new_walker(CoinKind kind, int steps) {
  if (steps < 0) throw std::invalid_argument("steps must be >= 0");
  return WalkerState(steps + 1, initial_state(kind));
}

/// Mixes the four coin components at every site, in place.
inline void apply_coin(WalkerState& w, const CoinMatrix& coin) {
  const int radius = w.support_;
  cplx* grids[4] = {w.component(0), w.component(1), w.component(2),
                    w.component(3)};
  for (int m = -radius; m <= radius; ++m) {
    const std::ptrdiff_t off = w.row_offset(m);
    cplx* rows[4] = {grids[0] + off, grids[1] + off, grids[2] + off,
                     grids[3] + off};
    for (int n = -radius; n <= radius; ++n) {
      const cplx a0 = rows[0][n], a1 = rows[1][n], a2 = rows[2][n],
                 a3 = rows[3][n];
      for (int c = 0; c < 4; ++c)
        rows[c][n] =
            coin(c, 0) * a0 + coin(c, 1) * a1 + coin(c, 2) * a2 + coin(c, 3) * a3;
    }
  }
}

namespace detail {

inline void require_shift_headroom(int support, int half_width) {
  if (support >= half_width)
    throw std::runtime_error(
        "shift would move amplitude off the lattice; size the lattice with "
        "half_width > walk length");
}

}  // namespace detail

/// Moves component (j, k) from (m, n) to (m + (-1)^j, n + (-1)^k). A pure
/// permutation of basis states, so the norm is preserved exactly.
inline void apply_shift(WalkerState& w) {
  detail::require_shift_headroom(w.support_, w.half_width_);
  const int half = w.half_width_;
  const int radius = w.support_ + 1;
  for (int c = 0; c < 4; ++c) {
    const int dj = 1 - 2 * (c >> 1);
    const int dk = 1 - 2 * (c & 1);
    const cplx* in = w.amps_.data() + c * w.plane_;
    cplx* out = w.scratch_.data() + c * w.plane_;
    for (int m = -radius; m <= radius; ++m) {
      cplx* out_row = out + w.row_offset(m);
      const int ms = m - dj;
      if (ms < -half || ms > half) {
        for (int n = -radius; n <= radius; ++n) out_row[n] = 0.0;
        continue;
      }
      const cplx* in_row = in + w.row_offset(ms);
      for (int n = -radius; n <= radius; ++n) {
        const int ns = n - dk;
        out_row[n] = (ns >= -half && ns <= half) ? in_row[ns] : 0.0;
      }
    }
  }
  std::swap(w.amps_, w.scratch_);
  w.support_ = std::min(radius, half);
}

/// Zeroes all four coin amplitudes on every trap site.
inline void project_traps(WalkerState& w, const TrapMask& traps) {
  if (traps.half_width() != w.half_width_)
    throw std::invalid_argument("trap mask and walker lattice sizes differ");
  const int radius = w.support_;
  cplx* grids[4] = {w.component(0), w.component(1), w.component(2),
                    w.component(3)};
  for (int m = -radius; m <= radius; ++m) {
    const std::uint8_t* mask_row = traps.grid().row(m);
    const std::ptrdiff_t off = w.row_offset(m);
    for (int n = -radius; n <= radius; ++n) {
      if (mask_row[n]) {
        grids[0][off + n] = 0.0;
        grids[1][off + n] = 0.0;
        grids[2][off + n] = 0.0;
        grids[3][off + n] = 0.0;
      }
    }
  }
}

/// One walk iteration: coin, then shift, then absorption at trap sites.
///
/// Coin and shift are fused into a single gather pass over the output light
/// cone, accumulating in the same component order as apply_coin so the
/// composed route produces identical values. Complex arithmetic is spelled
/// out on the raw double pairs to keep the stencil vectorizable.
inline void step(WalkerState& w, const CoinMatrix& coin, const TrapMask& traps) {
  if (traps.half_width() != w.half_width_)
    throw std::invalid_argument("trap mask and walker lattice sizes differ");
  detail::require_shift_headroom(w.support_, w.half_width_);

  const int half = w.half_width_;
  const int width = w.width_;
  const int radius = std::min(w.support_ + 1, half);
  for (int c = 0; c < 4; ++c) {
    const int dj = 1 - 2 * (c >> 1);
    const int dk = 1 - 2 * (c & 1);
    const double c0r = coin(c, 0).real(), c0i = coin(c, 0).imag();
    const double c1r = coin(c, 1).real(), c1i = coin(c, 1).imag();
    const double c2r = coin(c, 2).real(), c2i = coin(c, 2).imag();
    const double c3r = coin(c, 3).real(), c3i = coin(c, 3).imag();
    cplx* out = w.scratch_.data() + c * w.plane_;
    // Clipped ranges only bite on the outermost ring (radius == half).
    const int nlo = std::max(-radius, -half + dk);
    const int nhi = std::min(radius, half + dk);
    for (int m = -radius; m <= radius; ++m) {
      cplx* out_row = out + w.row_offset(m);
      const int ms = m - dj;
      if (ms < -half || ms > half) {
        for (int n = -radius; n <= radius; ++n) out_row[n] = 0.0;
        continue;
      }
      // Source pointers shifted so index n reads column n - dk of row ms.
      const std::ptrdiff_t src_off =
          static_cast<std::ptrdiff_t>(ms + half) * width + (half - dk);
      const double* __restrict s0 =
          reinterpret_cast<const double*>(w.amps_.data() + 0 * w.plane_ + src_off);
      const double* __restrict s1 =
          reinterpret_cast<const double*>(w.amps_.data() + 1 * w.plane_ + src_off);
      const double* __restrict s2 =
          reinterpret_cast<const double*>(w.amps_.data() + 2 * w.plane_ + src_off);
      const double* __restrict s3 =
          reinterpret_cast<const double*>(w.amps_.data() + 3 * w.plane_ + src_off);
      double* __restrict o = reinterpret_cast<double*>(out_row);
      for (int n = -radius; n < nlo; ++n) out_row[n] = 0.0;
      for (int n = nlo; n <= nhi; ++n) {
        double ar = s0[2 * n], ai = s0[2 * n + 1];
        double rr = c0r * ar - c0i * ai;
        double ri = c0r * ai + c0i * ar;
        ar = s1[2 * n], ai = s1[2 * n + 1];
        rr += c1r * ar - c1i * ai;
        ri += c1r * ai + c1i * ar;
        ar = s2[2 * n], ai = s2[2 * n + 1];
        rr += c2r * ar - c2i * ai;
        ri += c2r * ai + c2i * ar;
        ar = s3[2 * n], ai = s3[2 * n + 1];
        rr += c3r * ar - c3i * ai;
        ri += c3r * ai + c3i * ar;
        o[2 * n] = rr;
        o[2 * n + 1] = ri;
      }
      for (int n = nhi + 1; n <= radius; ++n) out_row[n] = 0.0;
    }
  }
  std::swap(w.amps_, w.scratch_);
  w.support_ = radius;
  w.time_ += 1;
  project_traps(w, traps);
}

/// Writes P(m, n) = sum_c |A_c(m, n)|^2 into `grid` over the light cone.
///
/// Sites outside the cone are left untouched, so `grid` must either be fresh
/// (zero) or be the same grid reused across increasing times of one run.
inline void measure_into(const WalkerState& w, ProbabilityGrid& grid) {
  if (grid.half_width() != w.half_width())
    throw std::invalid_argument("grid and walker lattice sizes differ");
  const int radius = w.support_radius();
  const cplx* g0 = w.component(0);
  const cplx* g1 = w.component(1);
  const cplx* g2 = w.component(2);
  const cplx* g3 = w.component(3);
  const int width = w.width();
  const int half = w.half_width();
  for (int m = -radius; m <= radius; ++m) {
    const std::ptrdiff_t off =
        static_cast<std::ptrdiff_t>(m + half) * width + half;
    double* out_row = grid.values.row(m);
    for (int n = -radius; n <= radius; ++n)
      out_row[n] = std::norm(g0[off + n]) + std::norm(g1[off + n]) +
                   std::norm(g2[off + n]) + std::norm(g3[off + n]);
  }
  grid.time = w.time();
  grid.support = radius;
}

inline ProbabilityGrid measure(const WalkerState& w) {
  ProbabilityGrid grid(w.half_width());
  measure_into(w, grid);
  return grid;
}

/// Total unabsorbed probability. Row-blocked summation keeps the roundoff
/// well under the 1e-12 unitarity tolerance even on wide lattices.
inline double survival_probability(const ProbabilityGrid& grid) {
  const int radius = grid.scan_radius();
  double total = 0.0;
  for (int m = -radius; m <= radius; ++m) {
    const double* row = grid.values.row(m);
    double row_sum = 0.0;
    for (int n = -radius; n <= radius; ++n) row_sum += row[n];
    total += row_sum;
  }
  return total;
}

/// Full trajectory of distributions for t = 0..steps.
inline std::vector<ProbabilityGrid> run(CoinKind kind, int steps,
                                        const TrapMask& traps) {
  WalkerState w = new_walker(kind, steps);
  if (traps.half_width() != w.half_width())
    throw std::invalid_argument(
        "trap mask must be generated for half_width = steps + 1");
  const CoinMatrix coin = coin_matrix(kind);
  std::vector<ProbabilityGrid> grids;
  grids.reserve(steps + 1);
  grids.push_back(measure(w));
  for (int t = 0; t < steps; ++t) {
    step(w, coin, traps);
    grids.push_back(measure(w));
  }
  return grids;
}

}  // namespace qwalk
