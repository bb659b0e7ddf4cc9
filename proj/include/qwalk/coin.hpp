#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <string_view>

namespace qwalk {

using cplx = std::complex<double>;

/// The three walk coins supported by the simulator.
enum class CoinKind { hadamard, fourier, grover };

inline constexpr std::array<CoinKind, 3> all_coin_kinds{
    CoinKind::hadamard, CoinKind::fourier, CoinKind::grover};

/// Four-dimensional coin state in the fixed basis order (00, 01, 10, 11).
using CoinState = std::array<cplx, 4>;

/// 4x4 unitary acting on the coin space. Row index is the outgoing basis
/// label, column index the incoming one, both in the order (00, 01, 10, 11).
class CoinMatrix {
 public:
  CoinMatrix() = default;
  explicit CoinMatrix(const std::array<cplx, 16>& entries) : e_(entries) {}

  const cplx& operator()(int row, int col) const { return e_[row * 4 + col]; }
  cplx& operator()(int row, int col) { return e_[row * 4 + col]; }

  friend bool operator==(const CoinMatrix&, const CoinMatrix&) = default;

 private:
  std::array<cplx, 16> e_{};
};

inline CoinMatrix coin_matrix(CoinKind kind) {
  const cplx i(0.0, 1.0);
  const double h = 0.5;
  switch (kind) {
    case CoinKind::hadamard:
      return CoinMatrix({h, h, h, h,      //
                         h, -h, h, -h,    //
                         h, h, -h, -h,    //
                         h, -h, -h, h});
    case CoinKind::fourier:
      return CoinMatrix({h, h, h, h,            //
                         h, h * i, -h, -h * i,  //
                         h, -h, h, -h,          //
                         h, -h * i, -h, h * i});
    case CoinKind::grover:
      return CoinMatrix({-h, h, h, h,    //
                         h, -h, h, h,    //
                         h, h, -h, h,    //
                         h, h, h, -h});
  }
  return CoinMatrix{};
}

/// Initial coin state paired with each coin so the walk spreads maximally
/// from the origin.
inline CoinState initial_state(CoinKind kind) {
  const cplx i(0.0, 1.0);
  switch (kind) {
    case CoinKind::hadamard:
      return {0.5, 0.5 * i, -0.5 * i, cplx(0.5)};
    case CoinKind::fourier: {
      const cplx w = (1.0 - i) / std::sqrt(2.0);
      return {0.5, 0.5 * w, cplx(0.5), -0.5 * w};
    }
    case CoinKind::grover:
      return {0.5, -0.5, -0.5, cplx(0.5)};
  }
  return {};
}

inline CoinState apply_coin_to_state(const CoinMatrix& c, const CoinState& v) {
  CoinState out{};
  for (int r = 0; r < 4; ++r) {
    cplx acc = 0.0;
    for (int col = 0; col < 4; ++col) acc += c(r, col) * v[col];
    out[r] = acc;
  }
  return out;
}

inline std::string_view coin_name(CoinKind kind) {
  switch (kind) {
    case CoinKind::hadamard:
      return "hadamard";
    case CoinKind::fourier:
      return "fourier";
    case CoinKind::grover:
      return "grover";
  }
  return "?";
}

/// Case-insensitive name lookup used by CLI flags and config files.
inline std::optional<CoinKind> parse_coin_kind(std::string_view name) {
  std::string lower;
  lower.reserve(name.size());
  for (char ch : name)
    lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  if (lower == "hadamard") return CoinKind::hadamard;
  if (lower == "fourier") return CoinKind::fourier;
  if (lower == "grover") return CoinKind::grover;
  return std::nullopt;
}

}  // namespace qwalk
