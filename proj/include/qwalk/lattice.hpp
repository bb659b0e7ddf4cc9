#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace qwalk {

/// Square grid of cells indexed by signed site coordinates (m, n) with
/// m, n in [-half_width, half_width]. Storage is row-major and contiguous.
template <typename T>
class Lattice {
 public:
  Lattice() = default;
  explicit Lattice(int half_width, T fill = T{})
      : half_width_(half_width),
        cells_(static_cast<std::size_t>(width()) * width(), fill) {
    assert(half_width >= 0);
  }

  int half_width() const { return half_width_; }
  int width() const { return 2 * half_width_ + 1; }
  std::size_t size() const { return cells_.size(); }

  bool in_bounds(int m, int n) const {
    return m >= -half_width_ && m <= half_width_ && n >= -half_width_ &&
           n <= half_width_;
  }

  std::size_t index(int m, int n) const {
    assert(in_bounds(m, n));
    return static_cast<std::size_t>(m + half_width_) * width() +
           (n + half_width_);
  }

  T& operator()(int m, int n) { return cells_[index(m, n)]; }
  const T& operator()(int m, int n) const { return cells_[index(m, n)]; }

  /// Pointer p such that p[n] addresses site (m, n) for n in [-L, L].
  T* row(int m) {
    return cells_.data() + static_cast<std::size_t>(m + half_width_) * width() +
           half_width_;
  }
  const T* row(int m) const {
    return cells_.data() + static_cast<std::size_t>(m + half_width_) * width() +
           half_width_;
  }

  std::vector<T>& cells() { return cells_; }
  const std::vector<T>& cells() const { return cells_; }

  friend bool operator==(const Lattice&, const Lattice&) = default;

 private:
  int half_width_ = 0;
  std::vector<T> cells_;
};

}  // namespace qwalk
