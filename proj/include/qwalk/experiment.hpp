#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qwalk/classical.hpp"
#include "qwalk/coin.hpp"
#include "qwalk/csv.hpp"
#include "qwalk/engine.hpp"
#include "qwalk/stats.hpp"
#include "qwalk/svg.hpp"
#include "qwalk/traps.hpp"

namespace qwalk {

/// One sweep = every (coin, trap density) pair run over an ensemble of
/// independently drawn trap configurations, all from one base seed.
struct SweepConfig {
  std::vector<CoinKind> coins = {CoinKind::hadamard, CoinKind::fourier,
                                 CoinKind::grover};
  std::vector<double> densities = {0.0, 0.01, 0.1, 0.25, 0.5};
  int steps = 100;
  int ensemble = 250;
  std::uint64_t seed = 1;
  SigmaMode mode = SigmaMode::conditional;
  std::vector<int> snapshot_times = {100};
  std::string out_dir = "out";
};

/// Density rendered the way it appears in file names.
inline std::string density_tag(double density) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", density);
  return buf;
}

inline void validate(const SweepConfig& cfg) {
  if (cfg.coins.empty()) throw std::invalid_argument("no coins configured");
  if (cfg.densities.empty())
    throw std::invalid_argument("no densities configured");
  if (cfg.steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (cfg.ensemble < 1) throw std::invalid_argument("ensemble must be >= 1");
  if (cfg.out_dir.empty()) throw std::invalid_argument("out_dir is empty");
  for (double d : cfg.densities)
    if (!(d >= 0.0 && d <= 1.0))
      throw std::invalid_argument("density outside [0, 1]");
  for (int t : cfg.snapshot_times)
    if (t < 0 || t > cfg.steps)
      throw std::invalid_argument("snapshot time outside [0, steps]");
  for (std::size_t i = 0; i < cfg.coins.size(); ++i)
    for (std::size_t j = i + 1; j < cfg.coins.size(); ++j)
      if (cfg.coins[i] == cfg.coins[j])
        throw std::invalid_argument("duplicate coin");
  for (std::size_t i = 0; i < cfg.densities.size(); ++i)
    for (std::size_t j = i + 1; j < cfg.densities.size(); ++j)
      if (density_tag(cfg.densities[i]) == density_tag(cfg.densities[j]))
        throw std::invalid_argument("duplicate density");
}

inline nlohmann::json config_to_json(const SweepConfig& cfg) {
  nlohmann::json j;
  std::vector<std::string> coin_names;
  for (CoinKind kind : cfg.coins) coin_names.push_back(std::string(coin_name(kind)));
  j["coins"] = coin_names;
  j["densities"] = cfg.densities;
  j["steps"] = cfg.steps;
  j["ensemble"] = cfg.ensemble;
  j["seed"] = cfg.seed;
  j["sigma_mode"] = sigma_mode_name(cfg.mode);
  j["snapshot_times"] = cfg.snapshot_times;
  j["out_dir"] = cfg.out_dir;
  return j;
}

/// Builds a config from JSON; missing keys keep their defaults, unknown
/// keys are an error so typos do not silently fall back.
inline SweepConfig config_from_json(const nlohmann::json& j) {
  static const char* known[] = {"coins",      "densities", "steps",
                                "ensemble",   "seed",      "sigma_mode",
                                "snapshot_times", "out_dir"};
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* key : known) ok = ok || item.key() == key;
    if (!ok)
      throw std::invalid_argument("unknown config key: " + item.key());
  }
  SweepConfig cfg;
  if (j.contains("coins")) {
    cfg.coins.clear();
    for (const auto& name : j.at("coins")) {
      auto kind = parse_coin_kind(name.get<std::string>());
      if (!kind)
        throw std::invalid_argument("unknown coin: " +
                                    name.get<std::string>());
      cfg.coins.push_back(*kind);
    }
  }
  if (j.contains("densities"))
    cfg.densities = j.at("densities").get<std::vector<double>>();
  if (j.contains("steps")) cfg.steps = j.at("steps").get<int>();
  if (j.contains("ensemble")) cfg.ensemble = j.at("ensemble").get<int>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("sigma_mode")) {
    auto mode = parse_sigma_mode(j.at("sigma_mode").get<std::string>());
    if (!mode)
      throw std::invalid_argument("sigma_mode must be conditional or raw");
    cfg.mode = *mode;
  }
  if (j.contains("snapshot_times"))
    cfg.snapshot_times = j.at("snapshot_times").get<std::vector<int>>();
  if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
  return cfg;
}

inline SweepConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return config_from_json(nlohmann::json::parse(in));
}

/// Everything one ensemble member contributes to the aggregates.
struct MemberResult {
  std::vector<double> sigma_cond;  // t = 1..steps; NaN once fully absorbed
  std::vector<double> sigma_raw;
  std::vector<double> survival;  // t = 0..steps
  std::vector<ProbabilityGrid> snapshots;  // aligned with snapshot_times
};

/// Runs one walker over one quenched trap configuration. `member` selects
/// the configuration; the walk itself is deterministic given (coin,
/// density, seed, member).
inline MemberResult run_member(CoinKind kind, double density, int steps,
                               std::uint64_t seed, std::uint32_t member,
                               const std::vector<int>& snapshot_times) {
  const int half = steps + 1;
  const TrapMask mask = generate_traps(half, density, seed, member);
  WalkerState walker = new_walker(kind, steps);
  const CoinMatrix coin = coin_matrix(kind);

  MemberResult res;
  res.sigma_cond.reserve(steps);
  res.sigma_raw.reserve(steps);
  res.survival.reserve(steps + 1);
  res.snapshots.resize(snapshot_times.size());

  ProbabilityGrid grid(half);
  auto snapshot_if_due = [&](int t) {
    for (std::size_t i = 0; i < snapshot_times.size(); ++i)
      if (snapshot_times[i] == t) {
        if (grid.time != t) measure_into(walker, grid);
        res.snapshots[i] = grid;
      }
  };

  // The walker starts in a unit-norm state by construction.
  res.survival.push_back(1.0);
  measure_into(walker, grid);
  snapshot_if_due(0);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int t = 1; t <= steps; ++t) {
    step(walker, coin, mask);
    measure_into(walker, grid);
    const GridMoments mom = grid_moments(grid);
    res.survival.push_back(mom.mass);
    const auto cond = sigma_from_moments(mom, SigmaMode::conditional);
    res.sigma_cond.push_back(cond ? *cond : nan);
    res.sigma_raw.push_back(*sigma_from_moments(mom, SigmaMode::raw));
    snapshot_if_due(t);
  }
  return res;
}

/// Aggregates for one (coin, density) pair.
struct PairResult {
  CoinKind coin = CoinKind::hadamard;
  double density = 0.0;
  SigmaSeries mean_sigma_cond;
  SigmaSeries mean_sigma_raw;
  std::vector<double> mean_survival;  // t = 0..steps
  std::vector<ProbabilityGrid> mean_snapshots;
  std::optional<int> tau_decoherence;
  std::optional<KwwFit> kww;
  double seconds = 0.0;

  const SigmaSeries& primary(SigmaMode mode) const {
    return mode == SigmaMode::conditional ? mean_sigma_cond : mean_sigma_raw;
  }
};

struct SweepResult {
  SweepConfig config;
  std::vector<PairResult> pairs;  // coin-major, densities in config order
  double total_seconds = 0.0;
};

namespace detail {

/// Folds member results into the pair aggregates strictly in member order,
/// so the aggregates are bit-identical no matter how many threads computed
/// the members.
class PairAccumulator {
 public:
  PairAccumulator(const SweepConfig& cfg, CoinKind kind, double density)
      : cfg_(cfg), kind_(kind), density_(density) {
    const int half = cfg.steps + 1;
    survival_sum_.assign(cfg.steps + 1, 0.0);
    for (int t : cfg.snapshot_times) {
      ProbabilityGrid sum(half);
      sum.time = t;
      sum.support = std::min(t, half);
      snapshot_sums_.push_back(std::move(sum));
    }
    SeriesMeta meta;
    meta.source = coin_name(kind);
    meta.density = density;
    meta.ensemble = 1;
    meta.seed = cfg.seed;
    member_cond_.reserve(cfg.ensemble);
    member_raw_.reserve(cfg.ensemble);
    meta_cond_ = meta;
    meta_raw_ = meta;
    meta_cond_.mode = SigmaMode::conditional;
    meta_raw_.mode = SigmaMode::raw;
  }

  void consume(MemberResult&& res) {
    member_cond_.push_back(
        SigmaSeries{std::move(res.sigma_cond), {}, meta_cond_});
    member_raw_.push_back(
        SigmaSeries{std::move(res.sigma_raw), {}, meta_raw_});
    for (std::size_t t = 0; t < survival_sum_.size(); ++t)
      survival_sum_[t] += res.survival[t];
    for (std::size_t i = 0; i < snapshot_sums_.size(); ++i) {
      ProbabilityGrid& sum = snapshot_sums_[i];
      const ProbabilityGrid& grid = res.snapshots[i];
      const int radius = sum.scan_radius();
      for (int m = -radius; m <= radius; ++m) {
        double* out_row = sum.values.row(m);
        const double* in_row = grid.values.row(m);
        for (int n = -radius; n <= radius; ++n) out_row[n] += in_row[n];
      }
    }
  }

  PairResult finish() {
    PairResult pair;
    pair.coin = kind_;
    pair.density = density_;
    pair.mean_sigma_cond = ensemble_sigma(member_cond_);
    pair.mean_sigma_raw = ensemble_sigma(member_raw_);
    const double inv = 1.0 / cfg_.ensemble;
    pair.mean_survival = survival_sum_;
    for (double& s : pair.mean_survival) s *= inv;
    for (ProbabilityGrid& sum : snapshot_sums_) {
      const int radius = sum.scan_radius();
      for (int m = -radius; m <= radius; ++m) {
        double* row = sum.values.row(m);
        for (int n = -radius; n <= radius; ++n) row[n] *= inv;
      }
    }
    pair.mean_snapshots = std::move(snapshot_sums_);

    const SigmaSeries& primary = pair.primary(cfg_.mode);
    bool sigma_usable = primary.steps() >= 15;
    for (double s : primary.sigma)
      sigma_usable = sigma_usable && std::isfinite(s) && s > 0.0;
    if (sigma_usable) pair.tau_decoherence = decoherence_time(primary);

    bool survival_positive = true;
    for (std::size_t t = 1; t < pair.mean_survival.size(); ++t)
      survival_positive = survival_positive && pair.mean_survival[t] > 0.0;
    if (survival_positive && cfg_.steps >= 1)
      pair.kww = kww_fit(std::vector<double>(pair.mean_survival.begin() + 1,
                                             pair.mean_survival.end()));
    return pair;
  }

 private:
  const SweepConfig& cfg_;
  CoinKind kind_;
  double density_;
  std::vector<SigmaSeries> member_cond_;
  std::vector<SigmaSeries> member_raw_;
  SeriesMeta meta_cond_;
  SeriesMeta meta_raw_;
  std::vector<double> survival_sum_;
  std::vector<ProbabilityGrid> snapshot_sums_;
};

}  // namespace detail

/// Runs the whole sweep. Ensemble members are distributed over `threads`
/// workers (0 = all hardware threads); aggregation consumes results in
/// member order, so every output is bit-identical across thread counts.
/// At density zero every trap mask is empty and all members are the same
/// deterministic walk, so one member is computed and folded in M times.
inline SweepResult run_sweep(const SweepConfig& cfg, int threads = 0) {
  validate(cfg);
  if (threads <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    threads = hw > 0 ? static_cast<int>(hw) : 1;
  }

  SweepResult result;
  result.config = cfg;
  const auto sweep_start = std::chrono::steady_clock::now();

  for (CoinKind kind : cfg.coins) {
    for (double density : cfg.densities) {
      const auto pair_start = std::chrono::steady_clock::now();
      detail::PairAccumulator acc(cfg, kind, density);
      const std::uint32_t total = static_cast<std::uint32_t>(cfg.ensemble);

      if (density == 0.0) {
        MemberResult base = run_member(kind, density, cfg.steps, cfg.seed, 0,
                                       cfg.snapshot_times);
        for (std::uint32_t r = 0; r < total; ++r) {
          MemberResult copy = base;
          acc.consume(std::move(copy));
        }
      } else if (threads == 1 || total == 1) {
        for (std::uint32_t r = 0; r < total; ++r)
          acc.consume(run_member(kind, density, cfg.steps, cfg.seed, r,
                                 cfg.snapshot_times));
      } else {
        std::mutex mu;
        std::condition_variable ready, space;
        std::map<std::uint32_t, MemberResult> parked;
        std::uint32_t next = 0;
        std::atomic<std::uint32_t> ticket{0};
        const std::size_t cap = 2 * static_cast<std::size_t>(threads) + 2;

        auto work = [&] {
          while (true) {
            const std::uint32_t r = ticket.fetch_add(1);
            if (r >= total) return;
            MemberResult res = run_member(kind, density, cfg.steps, cfg.seed,
                                          r, cfg.snapshot_times);
            std::unique_lock<std::mutex> lk(mu);
            space.wait(lk,
                       [&] { return parked.size() < cap || r == next; });
            parked.emplace(r, std::move(res));
            ready.notify_all();
          }
        };

        std::vector<std::thread> pool;
        const int workers = std::min<int>(threads, static_cast<int>(total));
        pool.reserve(workers);
        for (int i = 0; i < workers; ++i) pool.emplace_back(work);

        while (next < total) {
          MemberResult res;
          {
            std::unique_lock<std::mutex> lk(mu);
            ready.wait(lk, [&] { return parked.count(next) > 0; });
            auto node = parked.extract(next);
            res = std::move(node.mapped());
            ++next;
            space.notify_all();
          }
          acc.consume(std::move(res));
        }
        for (std::thread& t : pool) t.join();
      }

      PairResult pair = acc.finish();
      pair.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                        pair_start)
              .count();
      result.pairs.push_back(std::move(pair));
    }
  }

  result.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    sweep_start)
          .count();
  return result;
}

inline std::string sigma_file_name(CoinKind kind, double density) {
  return std::string("sigma_") + std::string(coin_name(kind)) + "_p" +
         density_tag(density) + ".csv";
}

inline std::string sigma_raw_file_name(CoinKind kind, double density) {
  return std::string("sigma_raw_") + std::string(coin_name(kind)) + "_p" +
         density_tag(density) + ".csv";
}

inline std::string survival_file_name(CoinKind kind, double density) {
  return std::string("survival_") + std::string(coin_name(kind)) + "_p" +
         density_tag(density) + ".csv";
}

inline std::string snapshot_file_name(CoinKind kind, double density, int t) {
  return std::string("snapshot_") + std::string(coin_name(kind)) + "_p" +
         density_tag(density) + "_t" + std::to_string(t) + ".csv";
}

inline nlohmann::json summary_to_json(const SweepResult& result) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["config"] = config_to_json(result.config);
  j["total_seconds"] = result.total_seconds;
  nlohmann::json pairs = nlohmann::json::array();
  for (const PairResult& pair : result.pairs) {
    const SigmaSeries& primary = pair.primary(result.config.mode);
    nlohmann::json p;
    p["coin"] = coin_name(pair.coin);
    p["density"] = pair.density;
    p["final_sigma"] = primary.sigma.back();  // NaN serializes as null
    p["final_survival"] = pair.mean_survival.back();
    p["survivors_at_end"] = primary.survivors.back();
    if (pair.tau_decoherence)
      p["tau_decoherence"] = *pair.tau_decoherence;
    else
      p["tau_decoherence"] = nullptr;
    if (pair.kww) {
      p["kww"] = {{"tau", pair.kww->tau},
                  {"beta", pair.kww->beta},
                  {"rms_residual", pair.kww->rms_residual}};
    } else {
      p["kww"] = nullptr;
    }
    nlohmann::json files;
    files["sigma"] = sigma_file_name(pair.coin, pair.density);
    if (result.config.mode == SigmaMode::conditional)
      files["sigma_raw"] = sigma_raw_file_name(pair.coin, pair.density);
    files["survival"] = survival_file_name(pair.coin, pair.density);
    nlohmann::json snaps = nlohmann::json::array();
    for (std::size_t i = 0; i < result.config.snapshot_times.size(); ++i)
      snaps.push_back(snapshot_file_name(pair.coin, pair.density,
                                         result.config.snapshot_times[i]));
    files["snapshots"] = snaps;
    p["files"] = files;
    p["seconds"] = pair.seconds;
    pairs.push_back(std::move(p));
  }
  j["pairs"] = std::move(pairs);
  return j;
}

/// Writes every per-pair CSV plus summary.json into config.out_dir.
inline void write_outputs(const SweepResult& result) {
  const SweepConfig& cfg = result.config;
  std::filesystem::create_directories(cfg.out_dir);
  const auto in_dir = [&](const std::string& name) {
    return (std::filesystem::path(cfg.out_dir) / name).string();
  };

  for (const PairResult& pair : result.pairs) {
    const SigmaSeries& primary = pair.primary(cfg.mode);
    csv::write_sigma_rows(in_dir(sigma_file_name(pair.coin, pair.density)),
                          primary.sigma, primary.survivors);
    if (cfg.mode == SigmaMode::conditional)
      csv::write_sigma_rows(
          in_dir(sigma_raw_file_name(pair.coin, pair.density)),
          pair.mean_sigma_raw.sigma, pair.mean_sigma_raw.survivors);
    csv::write_survival(in_dir(survival_file_name(pair.coin, pair.density)),
                        pair.mean_survival);
    for (std::size_t i = 0; i < cfg.snapshot_times.size(); ++i)
      csv::write_grid(in_dir(snapshot_file_name(pair.coin, pair.density,
                                                cfg.snapshot_times[i])),
                      pair.mean_snapshots[i]);
  }

  std::ofstream out(in_dir("summary.json"));
  if (!out) throw std::runtime_error("cannot write summary.json");
  out << summary_to_json(result).dump(2) << '\n';
}

/// Writes the plotting companions: per-coin sigma tables with a classical
/// reference column, dense heightmaps of the mean snapshots, and (when
/// asked) SVG figures of both.
inline void emit_plot_data(const SweepResult& result, bool emit_svg) {
  const SweepConfig& cfg = result.config;
  std::filesystem::create_directories(cfg.out_dir);
  const auto in_dir = [&](const std::string& name) {
    return (std::filesystem::path(cfg.out_dir) / name).string();
  };
  const SigmaSeries classical = classical_sigma(cfg.steps);

  for (CoinKind kind : cfg.coins) {
    std::vector<const PairResult*> row;
    for (const PairResult& pair : result.pairs)
      if (pair.coin == kind) row.push_back(&pair);

    std::ofstream out(
        in_dir(std::string("sigma_table_") + std::string(coin_name(kind)) + ".csv"));
    if (!out) throw std::runtime_error("cannot write sigma table");
    out << "t";
    for (const PairResult* pair : row)
      out << ",p" << density_tag(pair->density);
    out << ",classical\n";
    for (int t = 1; t <= cfg.steps; ++t) {
      out << t;
      for (const PairResult* pair : row)
        out << ',' << csv::g17(pair->primary(cfg.mode).at_time(t));
      out << ',' << csv::g17(classical.at_time(t)) << '\n';
    }

    if (emit_svg) {
      std::vector<svg::Series> series;
      for (std::size_t i = 0; i < row.size(); ++i) {
        svg::Series s;
        s.label = "p=" + density_tag(row[i]->density);
        s.color = svg::series_color(i);
        for (int t = 1; t <= cfg.steps; ++t) {
          s.t.push_back(t);
          s.y.push_back(row[i]->primary(cfg.mode).at_time(t));
        }
        series.push_back(std::move(s));
      }
      svg::Series cls;
      cls.label = "classical";
      cls.color = "#888888";
      cls.dashed = true;
      for (int t = 1; t <= cfg.steps; ++t) {
        cls.t.push_back(t);
        cls.y.push_back(classical.at_time(t));
      }
      series.push_back(std::move(cls));
      svg::write_loglog_chart(
          in_dir(std::string("fig_sigma_") + std::string(coin_name(kind)) + ".svg"),
          std::string(coin_name(kind)) + " walk spread", "t", "sigma",
          series);
    }
  }

  for (const PairResult& pair : result.pairs) {
    for (std::size_t i = 0; i < cfg.snapshot_times.size(); ++i) {
      const int t = cfg.snapshot_times[i];
      const std::string stub = std::string(coin_name(pair.coin)) + "_p" +
                               density_tag(pair.density) + "_t" +
                               std::to_string(t);
      csv::write_heightmap(in_dir("heightmap_" + stub + ".csv"),
                           pair.mean_snapshots[i]);
      if (emit_svg)
        svg::write_heatmap(in_dir("fig_dist_" + stub + ".svg"),
                           "P(m, n) at t = " + std::to_string(t) + ", " +
                               std::string(coin_name(pair.coin)) + ", p = " +
                               density_tag(pair.density),
                           pair.mean_snapshots[i]);
    }
  }
}

}  // namespace qwalk
