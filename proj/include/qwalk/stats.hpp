#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qwalk/engine.hpp"

namespace qwalk {

/// How the spread is normalized when probability has leaked into traps.
/// `conditional` renormalizes by the surviving mass (spread of the walker
/// given it has not been absorbed); `raw` uses the distribution as is, so
/// absorption itself drags the value down.
enum class SigmaMode { conditional, raw };

inline const char* sigma_mode_name(SigmaMode mode) {
  return mode == SigmaMode::conditional ? "conditional" : "raw";
}

inline std::optional<SigmaMode> parse_sigma_mode(std::string name) {
  for (char& ch : name) ch = static_cast<char>(std::tolower(ch));
  if (name == "conditional") return SigmaMode::conditional;
  if (name == "raw") return SigmaMode::raw;
  return std::nullopt;
}

struct SeriesMeta {
  std::string source;      // coin name, or "classical"
  double density = 0.0;
  int ensemble = 1;
  std::uint64_t seed = 0;
  SigmaMode mode = SigmaMode::conditional;
};

/// Spread trace sigma(t) for t = 1..steps (index 0 holds t = 1). An absent
/// value (no surviving probability anywhere in the ensemble) is stored as
/// NaN; `survivors[t-1]` counts the members that still contributed at t.
struct SigmaSeries {
  std::vector<double> sigma;
  std::vector<int> survivors;
  SeriesMeta meta;

  int steps() const { return static_cast<int>(sigma.size()); }
  double at_time(int t) const { return sigma.at(t - 1); }
};

struct GridMoments {
  double mass = 0.0;
  double sum_m = 0.0;   // sum of P * m
  double sum_n = 0.0;   // sum of P * n
  double sum_r2 = 0.0;  // sum of P * (m^2 + n^2)
};

/// Raw first and second position moments over the grid's support. Row sums
/// are accumulated separately before folding into the totals; that keeps
/// the roundoff of the full-lattice reduction near width * epsilon.
inline GridMoments grid_moments(const ProbabilityGrid& grid) {
  const int radius = grid.scan_radius();
  GridMoments acc;
  for (int m = -radius; m <= radius; ++m) {
    const double* row = grid.values.row(m);
    double row_mass = 0.0, row_n = 0.0, row_n2 = 0.0;
    for (int n = -radius; n <= radius; ++n) {
      const double p = row[n];
      row_mass += p;
      row_n += p * n;
      row_n2 += p * static_cast<double>(n) * n;
    }
    acc.mass += row_mass;
    acc.sum_m += row_mass * m;
    acc.sum_n += row_n;
    acc.sum_r2 += row_n2 + row_mass * static_cast<double>(m) * m;
  }
  return acc;
}

/// Position spread sqrt(<m^2 + n^2> - <m>^2 - <n>^2) from precomputed
/// moments. Absent (nullopt) in conditional mode when no probability is
/// left to condition on.
inline std::optional<double> sigma_from_moments(const GridMoments& mom,
                                                SigmaMode mode) {
  double scale = 1.0;
  if (mode == SigmaMode::conditional) {
    if (mom.mass <= 0.0) return std::nullopt;
    scale = 1.0 / mom.mass;
  }
  const double mean_m = mom.sum_m * scale;
  const double mean_n = mom.sum_n * scale;
  const double variance =
      mom.sum_r2 * scale - mean_m * mean_m - mean_n * mean_n;
  return std::sqrt(std::max(variance, 0.0));
}

inline std::optional<double> sigma_of(const ProbabilityGrid& grid,
                                      SigmaMode mode) {
  return sigma_from_moments(grid_moments(grid), mode);
}

/// Pointwise mean of member traces, skipping absent values. Members are
/// folded strictly in the order given, so the result is reproducible to the
/// bit whenever the member order is.
inline SigmaSeries ensemble_sigma(const std::vector<SigmaSeries>& members) {
  if (members.empty())
    throw std::invalid_argument("ensemble_sigma needs at least one member");
  const std::size_t steps = members[0].sigma.size();
  for (const SigmaSeries& member : members)
    if (member.sigma.size() != steps)
      throw std::invalid_argument("ensemble members differ in length");

  SigmaSeries mean;
  mean.sigma.assign(steps, std::numeric_limits<double>::quiet_NaN());
  mean.survivors.assign(steps, 0);
  mean.meta = members[0].meta;
  mean.meta.ensemble = static_cast<int>(members.size());
  for (std::size_t i = 0; i < steps; ++i) {
    double sum = 0.0;
    int count = 0;
    for (const SigmaSeries& member : members) {
      const double v = member.sigma[i];
      if (std::isfinite(v)) {
        sum += v;
        ++count;
      }
    }
    if (count > 0) mean.sigma[i] = sum / count;
    mean.survivors[i] = count;
  }
  return mean;
}

namespace detail {

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double rms_residual = 0.0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t count = x.size();
  if (count != y.size() || count < 2)
    throw std::invalid_argument("line fit needs two or more points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("line fit on degenerate x");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / count);
  return fit;
}

}  // namespace detail

/// Least-squares slope of log sigma against log t over t in [t_begin, t_end]
/// (inclusive). Ballistic spread shows up as a slope near 1, diffusive as
/// near 1/2.
inline double loglog_slope(const SigmaSeries& series, int t_begin, int t_end) {
  if (t_begin < 1 || t_end > series.steps() || t_end - t_begin + 1 < 5)
    throw std::invalid_argument("slope window needs five or more points");
  std::vector<double> xs, ys;
  xs.reserve(t_end - t_begin + 1);
  ys.reserve(t_end - t_begin + 1);
  for (int t = t_begin; t <= t_end; ++t) {
    const double s = series.at_time(t);
    if (!(std::isfinite(s) && s > 0.0))
      throw std::invalid_argument("slope window contains non-positive sigma");
    xs.push_back(std::log(static_cast<double>(t)));
    ys.push_back(std::log(s));
  }
  return detail::fit_line(xs, ys).slope;
}

/// First time the local log-log slope of sigma(t) drops to diffusive-like
/// growth and stays there.
///
/// The local slope at t is fit over a centered window of `window_width`
/// points. The crossover is the earliest center whose slope is <= 0.75 and
/// remains so for the next `window_width` centers (or through the end of
/// the trace), which rides out single-window dips. nullopt when the trace
/// never settles.
inline std::optional<int> decoherence_time(const SigmaSeries& series,
                                           int window_width = 15) {
  if (window_width < 5) throw std::invalid_argument("window too narrow");
  const int steps = series.steps();
  const int half = window_width / 2;
  const int first = 1 + half;
  const int last = steps - half;
  if (first > last)
    throw std::invalid_argument("series shorter than one slope window");
  for (int t = 1; t <= steps; ++t) {
    const double s = series.at_time(t);
    if (!(std::isfinite(s) && s > 0.0))
      throw std::invalid_argument("decoherence_time needs positive sigma");
  }

  std::vector<double> slope(last - first + 1);
  for (int c = first; c <= last; ++c)
    slope[c - first] = loglog_slope(series, c - half, c + half);

  const double threshold = 0.75;
  for (int c = first; c <= last; ++c) {
    if (slope[c - first] > threshold) continue;
    const int hold_until = std::min(c + window_width, last);
    bool holds = true;
    for (int d = c; d <= hold_until; ++d)
      if (slope[d - first] > threshold) {
        holds = false;
        break;
      }
    if (holds) return c;
  }
  return std::nullopt;
}

/// Stretched-exponential survival model S(t) = exp(-(t / tau)^beta).
struct KwwFit {
  double tau = 0.0;
  double beta = 0.0;
  double rms_residual = 0.0;  // on the linearized coordinates
};

/// Fits the model by linearizing: log(-log S) is affine in log t with slope
/// beta and intercept -beta log tau. `survival[i]` is S at t = i + 1.
///
/// Points with S outside (eps, 1 - eps) carry no information in the
/// transformed coordinates (the outer log blows up) and are excluded;
/// nullopt when fewer than five points remain or the fit degenerates.
/// Throws on malformed input: S outside (0, 1], or an increase beyond
/// rounding slack.
inline std::optional<KwwFit> kww_fit(const std::vector<double>& survival) {
  constexpr double eps = 1e-6;
  if (survival.empty())
    throw std::invalid_argument("kww_fit on empty survival trace");
  // A trap-free ensemble mean can land an ulp above one; such points are
  // saturated and drop out below, so only genuine excess is malformed.
  double prev = 1.0;
  for (const double s : survival) {
    if (!(s > 0.0 && s <= 1.0 + 1e-12))
      throw std::invalid_argument("survival values must lie in (0, 1]");
    if (s > prev + 1e-12)
      throw std::invalid_argument("survival trace must be nonincreasing");
    prev = s;
  }

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < survival.size(); ++i) {
    const double s = survival[i];
    if (s <= eps || s >= 1.0 - eps) continue;
    xs.push_back(std::log(static_cast<double>(i + 1)));
    ys.push_back(std::log(-std::log(s)));
  }
  if (xs.size() < 5) return std::nullopt;

  detail::LineFit line;
  try {
    line = detail::fit_line(xs, ys);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
  if (!(line.slope > 0.0)) return std::nullopt;
  KwwFit fit;
  fit.beta = line.slope;
  fit.tau = std::exp(-line.intercept / line.slope);
  fit.rms_residual = line.rms_residual;
  if (!std::isfinite(fit.tau) || fit.tau <= 0.0) return std::nullopt;
  return fit;
}

}  // namespace qwalk
