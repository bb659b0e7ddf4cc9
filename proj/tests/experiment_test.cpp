#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qwalk/experiment.hpp"

using qwalk::CoinKind;
using qwalk::MemberResult;
using qwalk::SigmaMode;
using qwalk::SweepConfig;
using qwalk::SweepResult;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const char* name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

SweepConfig tiny_config(const fs::path& out) {
  SweepConfig cfg;
  cfg.coins = {CoinKind::hadamard};
  cfg.densities = {0.0, 0.2};
  cfg.steps = 12;
  cfg.ensemble = 6;
  cfg.seed = 7;
  cfg.snapshot_times = {0, 12};
  cfg.out_dir = out.string();
  return cfg;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool identical_pairs(const qwalk::PairResult& a, const qwalk::PairResult& b) {
  if (a.mean_sigma_cond.sigma != b.mean_sigma_cond.sigma) return false;
  if (a.mean_sigma_raw.sigma != b.mean_sigma_raw.sigma) return false;
  if (a.mean_sigma_cond.survivors != b.mean_sigma_cond.survivors) return false;
  if (a.mean_survival != b.mean_survival) return false;
  if (a.mean_snapshots.size() != b.mean_snapshots.size()) return false;
  for (std::size_t i = 0; i < a.mean_snapshots.size(); ++i)
    if (!(a.mean_snapshots[i].values == b.mean_snapshots[i].values))
      return false;
  return true;
}

}  // namespace

TEST_CASE("member run produces aligned traces") {
  const MemberResult res =
      qwalk::run_member(CoinKind::grover, 0.15, 10, 3, 2, {0, 5, 10});
  CHECK(res.sigma_cond.size() == 10);
  CHECK(res.sigma_raw.size() == 10);
  REQUIRE(res.survival.size() == 11);
  CHECK(res.survival[0] == 1.0);
  for (std::size_t t = 1; t < res.survival.size(); ++t)
    CHECK(res.survival[t] <= res.survival[t - 1] + 1e-15);
  REQUIRE(res.snapshots.size() == 3);
  CHECK(res.snapshots[0].time == 0);
  CHECK(res.snapshots[1].time == 5);
  CHECK(res.snapshots[2].time == 10);
  CHECK(qwalk::survival_probability(res.snapshots[2]) ==
        Catch::Approx(res.survival[10]).margin(1e-15));
}

TEST_CASE("member runs are deterministic") {
  const MemberResult a =
      qwalk::run_member(CoinKind::fourier, 0.3, 9, 11, 4, {9});
  const MemberResult b =
      qwalk::run_member(CoinKind::fourier, 0.3, 9, 11, 4, {9});
  CHECK(a.sigma_cond == b.sigma_cond);
  CHECK(a.sigma_raw == b.sigma_raw);
  CHECK(a.survival == b.survival);
  CHECK(a.snapshots[0].values == b.snapshots[0].values);
}

TEST_CASE("members differ only through their trap draw") {
  // Same member index must give the same walk even when the ensemble is
  // bigger; extra members must not disturb earlier ones.
  const MemberResult early =
      qwalk::run_member(CoinKind::hadamard, 0.25, 8, 5, 3, {});
  const MemberResult same =
      qwalk::run_member(CoinKind::hadamard, 0.25, 8, 5, 3, {});
  const MemberResult other =
      qwalk::run_member(CoinKind::hadamard, 0.25, 8, 5, 4, {});
  CHECK(early.survival == same.survival);
  CHECK(early.survival != other.survival);
}

TEST_CASE("sweep aggregates and writes the expected files") {
  const fs::path dir = fresh_dir("qwalk_sweep_files");
  const SweepConfig cfg = tiny_config(dir);
  const SweepResult result = qwalk::run_sweep(cfg, 1);
  REQUIRE(result.pairs.size() == 2);

  const qwalk::PairResult& free_pair = result.pairs[0];
  CHECK(free_pair.density == 0.0);
  for (double s : free_pair.mean_survival)
    CHECK(s == Catch::Approx(1.0).margin(1e-12));
  CHECK(!free_pair.tau_decoherence.has_value());
  CHECK(free_pair.mean_sigma_cond.survivors ==
        std::vector<int>(cfg.steps, cfg.ensemble));

  const qwalk::PairResult& trapped = result.pairs[1];
  CHECK(trapped.mean_survival.back() < 1.0);

  qwalk::write_outputs(result);
  qwalk::emit_plot_data(result, false);
  for (const char* name :
       {"sigma_hadamard_p0.csv", "sigma_raw_hadamard_p0.csv",
        "survival_hadamard_p0.csv", "snapshot_hadamard_p0_t0.csv",
        "snapshot_hadamard_p0_t12.csv", "sigma_hadamard_p0.2.csv",
        "survival_hadamard_p0.2.csv", "snapshot_hadamard_p0.2_t12.csv",
        "summary.json", "sigma_table_hadamard.csv",
        "heightmap_hadamard_p0.2_t12.csv"})
    CHECK(fs::exists(dir / name));

  // Written traces parse back to the in-memory values exactly.
  const auto rows =
      qwalk::csv::read_sigma_rows((dir / "sigma_hadamard_p0.2.csv").string());
  CHECK(rows.sigma == trapped.mean_sigma_cond.sigma);
  CHECK(rows.survivors == trapped.mean_sigma_cond.survivors);
  const auto survival =
      qwalk::csv::read_survival((dir / "survival_hadamard_p0.2.csv").string());
  CHECK(survival == trapped.mean_survival);
  const auto snap = qwalk::csv::read_grid(
      (dir / "snapshot_hadamard_p0.2_t12.csv").string(), cfg.steps + 1);
  CHECK(snap.values == trapped.mean_snapshots[1].values);

  fs::remove_all(dir);
}

TEST_CASE("summary JSON reflects the run") {
  const fs::path dir = fresh_dir("qwalk_sweep_summary");
  const SweepConfig cfg = tiny_config(dir);
  const SweepResult result = qwalk::run_sweep(cfg, 1);
  qwalk::write_outputs(result);

  const nlohmann::json j =
      nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(j.at("format_version") == 1);
  CHECK(j.at("config").at("steps") == 12);
  CHECK(j.at("config").at("sigma_mode") == "conditional");
  REQUIRE(j.at("pairs").size() == 2);
  CHECK(j.at("pairs")[0].at("coin") == "hadamard");
  CHECK(j.at("pairs")[0].at("density") == 0.0);
  CHECK(j.at("pairs")[0].at("tau_decoherence").is_null());
  CHECK(j.at("pairs")[0].at("survivors_at_end") == cfg.ensemble);

  // Every referenced file exists and parses.
  for (const auto& pair : j.at("pairs")) {
    const auto& files = pair.at("files");
    CHECK(fs::exists(dir / files.at("sigma").get<std::string>()));
    CHECK(fs::exists(dir / files.at("survival").get<std::string>()));
    for (const auto& snap : files.at("snapshots"))
      CHECK(fs::exists(dir / snap.get<std::string>()));
  }
  fs::remove_all(dir);
}

TEST_CASE("sweep results are identical across thread counts") {
  const fs::path dir1 = fresh_dir("qwalk_sweep_t1");
  const fs::path dir3 = fresh_dir("qwalk_sweep_t3");
  SweepConfig cfg = tiny_config(dir1);
  cfg.densities = {0.2, 0.5};
  cfg.ensemble = 7;

  const SweepResult serial = qwalk::run_sweep(cfg, 1);
  cfg.out_dir = dir3.string();
  const SweepResult pooled = qwalk::run_sweep(cfg, 3);

  REQUIRE(serial.pairs.size() == pooled.pairs.size());
  for (std::size_t i = 0; i < serial.pairs.size(); ++i)
    CHECK(identical_pairs(serial.pairs[i], pooled.pairs[i]));

  qwalk::write_outputs(serial);
  qwalk::write_outputs(pooled);
  for (const auto& entry : fs::directory_iterator(dir1)) {
    const std::string name = entry.path().filename().string();
    if (name == "summary.json") continue;  // carries wall-clock times
    CHECK(slurp(entry.path()) == slurp(dir3 / name));
  }
  fs::remove_all(dir1);
  fs::remove_all(dir3);
}

TEST_CASE("density-zero ensembles replicate one member") {
  // All masks are empty at p = 0, so the mean must equal the single walk.
  const fs::path dir = fresh_dir("qwalk_sweep_p0");
  SweepConfig cfg = tiny_config(dir);
  cfg.densities = {0.0};
  cfg.ensemble = 5;
  const SweepResult result = qwalk::run_sweep(cfg, 2);
  const MemberResult lone = qwalk::run_member(
      CoinKind::hadamard, 0.0, cfg.steps, cfg.seed, 0, cfg.snapshot_times);
  // Averaging five copies rounds, so equality holds to an ulp, not a bit.
  for (int t = 1; t <= cfg.steps; ++t)
    CHECK(result.pairs[0].mean_sigma_cond.at_time(t) ==
          Catch::Approx(lone.sigma_cond[t - 1]).epsilon(1e-14));
  for (std::size_t t = 0; t < lone.survival.size(); ++t)
    CHECK(result.pairs[0].mean_survival[t] ==
          Catch::Approx(lone.survival[t]).epsilon(1e-14));
  fs::remove_all(dir);
}

TEST_CASE("config JSON round trips") {
  SweepConfig cfg;
  cfg.coins = {CoinKind::grover, CoinKind::fourier};
  cfg.densities = {0.05, 0.4};
  cfg.steps = 33;
  cfg.ensemble = 9;
  cfg.seed = 0xDEADBEEFULL;
  cfg.mode = SigmaMode::raw;
  cfg.snapshot_times = {3, 33};
  cfg.out_dir = "elsewhere";

  const SweepConfig back = qwalk::config_from_json(qwalk::config_to_json(cfg));
  CHECK(back.coins == cfg.coins);
  CHECK(back.densities == cfg.densities);
  CHECK(back.steps == cfg.steps);
  CHECK(back.ensemble == cfg.ensemble);
  CHECK(back.seed == cfg.seed);
  CHECK(back.mode == cfg.mode);
  CHECK(back.snapshot_times == cfg.snapshot_times);
  CHECK(back.out_dir == cfg.out_dir);
}

TEST_CASE("config file loading applies partial overrides") {
  const fs::path dir = fresh_dir("qwalk_config_load");
  const fs::path file = dir / "config.json";
  {
    std::ofstream out(file);
    out << R"({"steps": 20, "coins": ["Grover"], "seed": 555})";
  }
  const SweepConfig cfg = qwalk::load_config(file.string());
  CHECK(cfg.steps == 20);
  CHECK(cfg.coins == std::vector<CoinKind>{CoinKind::grover});
  CHECK(cfg.seed == 555);
  CHECK(cfg.ensemble == 250);  // untouched default
  fs::remove_all(dir);
}

TEST_CASE("config rejects unknown keys and bad values") {
  CHECK_THROWS_AS(qwalk::config_from_json({{"stepz", 5}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(qwalk::config_from_json({{"coins", {"penny"}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(qwalk::config_from_json({{"sigma_mode", "weird"}}),
                  std::invalid_argument);
}

TEST_CASE("validate rejects inconsistent configs") {
  SweepConfig bad_density;
  bad_density.densities = {0.5, 1.2};
  CHECK_THROWS_AS(qwalk::validate(bad_density), std::invalid_argument);

  SweepConfig dup_coin;
  dup_coin.coins = {CoinKind::hadamard, CoinKind::hadamard};
  CHECK_THROWS_AS(qwalk::validate(dup_coin), std::invalid_argument);

  SweepConfig late_snapshot;
  late_snapshot.steps = 50;
  CHECK_THROWS_AS(qwalk::validate(late_snapshot), std::invalid_argument);

  SweepConfig no_steps;
  no_steps.steps = 0;
  CHECK_THROWS_AS(qwalk::validate(no_steps), std::invalid_argument);
}

TEST_CASE("plot data includes the classical reference column") {
  const fs::path dir = fresh_dir("qwalk_plotdata");
  SweepConfig cfg = tiny_config(dir);
  cfg.snapshot_times = {12};
  const SweepResult result = qwalk::run_sweep(cfg, 1);
  qwalk::emit_plot_data(result, true);

  std::ifstream table(dir / "sigma_table_hadamard.csv");
  REQUIRE(table.good());
  std::string header;
  std::getline(table, header);
  CHECK(header == "t,p0,p0.2,classical");
  int rows = 0;
  std::string line;
  std::vector<std::string> last;
  while (std::getline(table, line))
    if (!line.empty()) {
      ++rows;
      last.push_back(line);
    }
  CHECK(rows == cfg.steps);
  // Classical column closes at sqrt(2 * 12).
  const std::string tail = last.back().substr(last.back().rfind(',') + 1);
  CHECK(std::stod(tail) == Catch::Approx(std::sqrt(24.0)).margin(1e-12));

  CHECK(fs::exists(dir / "fig_sigma_hadamard.svg"));
  CHECK(fs::exists(dir / "fig_dist_hadamard_p0.2_t12.svg"));
  const std::string svg = slurp(dir / "fig_sigma_hadamard.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("g17 formatting round trips doubles exactly") {
  for (double v : {1.0 / 3.0, 2.0 / 7.0e10, 1e-300, 0.1, 123456789.123456789})
    CHECK(std::stod(qwalk::csv::g17(v)) == v);
  CHECK(qwalk::csv::g17(0.25) == "0.25");
  CHECK(std::isnan(std::stod(qwalk::csv::g17(
      std::numeric_limits<double>::quiet_NaN()))));
}
