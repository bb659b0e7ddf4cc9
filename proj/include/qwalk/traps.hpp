#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qwalk/lattice.hpp"

namespace qwalk {

namespace detail {

/// splitmix64 finalizer. Frozen: results files are only comparable across
/// versions if this function and the keying below never change.
inline std::uint64_t split_mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based site hash keyed by (seed, config_index, m, n). Pure, so a
/// mask regenerates identically regardless of iteration order or thread
/// schedule, and member r's disorder never depends on the ensemble size.
inline std::uint64_t site_hash(std::uint64_t seed, std::uint32_t config_index,
                               int m, int n) {
  std::uint64_t h = split_mix(seed);
  h = split_mix(h ^ config_index);
  h = split_mix(h ^ static_cast<std::uint32_t>(m));
  h = split_mix(h ^ static_cast<std::uint32_t>(n));
  return h;
}

inline double unit_uniform(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Frozen random configuration of completely absorbing sites. The origin is
/// always free so every walk has somewhere to start.
class TrapMask {
 public:
  TrapMask() = default;
  TrapMask(Lattice<std::uint8_t> grid, double density, std::uint64_t seed,
           std::uint32_t config_index)
      : grid_(std::move(grid)),
        density_(density),
        seed_(seed),
        config_index_(config_index) {}

  /// Build a mask from an explicit site list (CSV import, tests). Density is
  /// recorded as the observed trapped fraction.
  static TrapMask from_sites(int half_width,
                             const std::vector<std::pair<int, int>>& sites) {
    Lattice<std::uint8_t> grid(half_width, 0);
    for (auto [m, n] : sites) {
      if (!grid.in_bounds(m, n))
        throw std::invalid_argument("trap site outside lattice");
      if (m == 0 && n == 0)
        throw std::invalid_argument("origin cannot be a trap");
      grid(m, n) = 1;
    }
    const double fraction =
        grid.size() > 1 ? static_cast<double>(sites.size()) / (grid.size() - 1)
                        : 0.0;
    return TrapMask(std::move(grid), fraction, 0, 0);
  }

  int half_width() const { return grid_.half_width(); }
  bool trapped(int m, int n) const { return grid_(m, n) != 0; }
  const Lattice<std::uint8_t>& grid() const { return grid_; }

  double density() const { return density_; }
  std::uint64_t seed() const { return seed_; }
  std::uint32_t config_index() const { return config_index_; }

  friend bool operator==(const TrapMask& a, const TrapMask& b) {
    return a.grid_ == b.grid_;
  }

 private:
  Lattice<std::uint8_t> grid_;
  double density_ = 0.0;
  std::uint64_t seed_ = 0;
  std::uint32_t config_index_ = 0;
};

/// Draws each non-origin site as an independent Bernoulli(density) trap from
/// the deterministic stream keyed by (seed, config_index).
inline TrapMask generate_traps(int half_width, double density,
                               std::uint64_t seed, std::uint32_t config_index) {
  if (!(density >= 0.0 && density <= 1.0))
    throw std::invalid_argument("trap density must lie in [0, 1]");
  Lattice<std::uint8_t> grid(half_width, 0);
  if (density > 0.0) {
    for (int m = -half_width; m <= half_width; ++m) {
      std::uint8_t* row = grid.row(m);
      for (int n = -half_width; n <= half_width; ++n) {
        const double u =
            detail::unit_uniform(detail::site_hash(seed, config_index, m, n));
        row[n] = u < density ? 1 : 0;
      }
    }
    grid(0, 0) = 0;
  }
  return TrapMask(std::move(grid), density, seed, config_index);
}

inline int trap_count(const TrapMask& mask) {
  int count = 0;
  for (std::uint8_t cell : mask.grid().cells()) count += cell;
  return count;
}

inline std::vector<std::pair<int, int>> trap_sites(const TrapMask& mask) {
  std::vector<std::pair<int, int>> sites;
  const int half = mask.half_width();
  for (int m = -half; m <= half; ++m)
    for (int n = -half; n <= half; ++n)
      if (mask.trapped(m, n)) sites.emplace_back(m, n);
  return sites;
}

}  // namespace qwalk
