#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qwalk/engine.hpp"
#include "qwalk/traps.hpp"

namespace qwalk::csv {

/// Shortest decimal form that round-trips a double exactly.
inline std::string g17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace detail {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return in;
}

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  return fields;
}

inline void expect_header(std::istream& in, const std::string& expected,
                          const std::string& path) {
  std::string line;
  if (!std::getline(in, line) || line != expected)
    throw std::runtime_error(path + ": expected header '" + expected + "'");
}

}  // namespace detail

/// Sparse grid dump: header `m,n,p`, one row per nonzero cell, row-major.
inline void write_grid(const std::string& path, const ProbabilityGrid& grid) {
  auto out = detail::open_out(path);
  out << "m,n,p\n";
  const int half = grid.half_width();
  for (int m = -half; m <= half; ++m) {
    const double* row = grid.values.row(m);
    for (int n = -half; n <= half; ++n)
      if (row[n] != 0.0)
        out << m << ',' << n << ',' << g17(row[n]) << '\n';
  }
}

inline ProbabilityGrid read_grid(const std::string& path, int half_width) {
  auto in = detail::open_in(path);
  detail::expect_header(in, "m,n,p", path);
  ProbabilityGrid grid(half_width);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = detail::split_fields(line);
    if (fields.size() != 3) throw std::runtime_error(path + ": bad row");
    grid.values(std::stoi(fields[0]), std::stoi(fields[1])) =
        std::stod(fields[2]);
  }
  return grid;
}

/// Trap site list: header `m,n`, one row per trap.
inline void write_mask(const std::string& path, const TrapMask& mask) {
  auto out = detail::open_out(path);
  out << "m,n\n";
  for (const auto& [m, n] : trap_sites(mask)) out << m << ',' << n << '\n';
}

inline TrapMask read_mask(const std::string& path, int half_width) {
  auto in = detail::open_in(path);
  detail::expect_header(in, "m,n", path);
  std::vector<std::pair<int, int>> sites;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = detail::split_fields(line);
    if (fields.size() != 2) throw std::runtime_error(path + ": bad row");
    sites.emplace_back(std::stoi(fields[0]), std::stoi(fields[1]));
  }
  return TrapMask::from_sites(half_width, sites);
}

/// Sigma trace: header `t,sigma,survivors`, t starting at 1. An absent
/// value (every ensemble member already absorbed) is written as nan.
inline void write_sigma_rows(const std::string& path,
                             const std::vector<double>& sigma,
                             const std::vector<int>& survivors) {
  if (sigma.size() != survivors.size())
    throw std::invalid_argument("sigma and survivor traces differ in length");
  auto out = detail::open_out(path);
  out << "t,sigma,survivors\n";
  for (std::size_t i = 0; i < sigma.size(); ++i)
    out << (i + 1) << ',' << g17(sigma[i]) << ',' << survivors[i] << '\n';
}

struct SigmaRows {
  std::vector<double> sigma;
  std::vector<int> survivors;
};

inline SigmaRows read_sigma_rows(const std::string& path) {
  auto in = detail::open_in(path);
  detail::expect_header(in, "t,sigma,survivors", path);
  SigmaRows rows;
  std::string line;
  std::size_t expect_t = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = detail::split_fields(line);
    if (fields.size() != 3 ||
        std::stoul(fields[0]) != expect_t++)
      throw std::runtime_error(path + ": bad row");
    rows.sigma.push_back(std::stod(fields[1]));
    rows.survivors.push_back(std::stoi(fields[2]));
  }
  return rows;
}

/// Survival trace: header `t,survival`, t starting at 0.
inline void write_survival(const std::string& path,
                           const std::vector<double>& survival) {
  auto out = detail::open_out(path);
  out << "t,survival\n";
  for (std::size_t t = 0; t < survival.size(); ++t)
    out << t << ',' << g17(survival[t]) << '\n';
}

inline std::vector<double> read_survival(const std::string& path) {
  auto in = detail::open_in(path);
  detail::expect_header(in, "t,survival", path);
  std::vector<double> survival;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = detail::split_fields(line);
    if (fields.size() != 2 ||
        std::stoul(fields[0]) != survival.size())
      throw std::runtime_error(path + ": bad row");
    survival.push_back(std::stod(fields[1]));
  }
  return survival;
}

/// Dense matrix dump for plotting: one line per lattice row (m = -L first),
/// cells comma separated.
inline void write_heightmap(const std::string& path,
                            const ProbabilityGrid& grid) {
  auto out = detail::open_out(path);
  const int half = grid.half_width();
  for (int m = -half; m <= half; ++m) {
    const double* row = grid.values.row(m);
    for (int n = -half; n <= half; ++n) {
      if (n > -half) out << ',';
      out << g17(row[n]);
    }
    out << '\n';
  }
}

}  // namespace qwalk::csv
