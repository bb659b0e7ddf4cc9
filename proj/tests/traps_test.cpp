#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "qwalk/csv.hpp"
#include "qwalk/traps.hpp"

using qwalk::TrapMask;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("density limits") {
  const TrapMask none = qwalk::generate_traps(10, 0.0, 123, 0);
  CHECK(qwalk::trap_count(none) == 0);

  const TrapMask all = qwalk::generate_traps(10, 1.0, 123, 0);
  const int sites = 21 * 21;
  CHECK(qwalk::trap_count(all) == sites - 1);
  CHECK(!all.trapped(0, 0));
}

TEST_CASE("origin is never trapped") {
  for (std::uint32_t r = 0; r < 50; ++r)
    CHECK(!qwalk::generate_traps(6, 0.9, 7, r).trapped(0, 0));
}

TEST_CASE("invalid density rejected") {
  CHECK_THROWS_AS(qwalk::generate_traps(5, -0.1, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(qwalk::generate_traps(5, 1.5, 1, 0), std::invalid_argument);
}

TEST_CASE("masks regenerate identically") {
  const TrapMask a = qwalk::generate_traps(12, 0.3, 99, 4);
  const TrapMask b = qwalk::generate_traps(12, 0.3, 99, 4);
  CHECK(a == b);
}

TEST_CASE("different configuration indices give different masks") {
  const TrapMask base = qwalk::generate_traps(12, 0.3, 99, 0);
  int distinct = 0;
  for (std::uint32_t r = 1; r <= 5; ++r)
    if (!(qwalk::generate_traps(12, 0.3, 99, r) == base)) ++distinct;
  CHECK(distinct == 5);
}

TEST_CASE("trap decision depends on coordinates, not lattice size") {
  // Growing the lattice must not reshuffle the disorder already drawn.
  const TrapMask small = qwalk::generate_traps(5, 0.4, 2024, 3);
  const TrapMask large = qwalk::generate_traps(9, 0.4, 2024, 3);
  for (int m = -5; m <= 5; ++m)
    for (int n = -5; n <= 5; ++n)
      CHECK(small.trapped(m, n) == large.trapped(m, n));
}

TEST_CASE("trapped fraction tracks the requested density") {
  const int half = 40;
  const double density = 0.3;
  const TrapMask mask = qwalk::generate_traps(half, density, 31337, 0);
  const double sites = (2 * half + 1) * (2 * half + 1) - 1;
  const double expect = sites * density;
  const double spread = 4.0 * std::sqrt(sites * density * (1.0 - density));
  CHECK(std::abs(qwalk::trap_count(mask) - expect) < spread);
}

TEST_CASE("site list round trip") {
  const TrapMask mask = qwalk::generate_traps(8, 0.25, 5, 1);
  const auto sites = qwalk::trap_sites(mask);
  CHECK(static_cast<int>(sites.size()) == qwalk::trap_count(mask));
  const TrapMask rebuilt = TrapMask::from_sites(8, sites);
  CHECK(rebuilt == mask);
}

TEST_CASE("from_sites validates its input") {
  CHECK_THROWS_AS(TrapMask::from_sites(3, {{4, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(TrapMask::from_sites(3, {{0, 0}}), std::invalid_argument);
}

TEST_CASE("mask CSV round trip") {
  const TrapMask mask = qwalk::generate_traps(7, 0.35, 11, 2);
  const std::string path = temp_path("qwalk_mask_roundtrip.csv");
  qwalk::csv::write_mask(path, mask);
  const TrapMask back = qwalk::csv::read_mask(path, 7);
  CHECK(back == mask);
  std::filesystem::remove(path);
}
