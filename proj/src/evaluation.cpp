#include "trafusion/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <thread>

#include "trafusion/errors.hpp"
#include "trafusion/random.hpp"
#include "trafusion/trajectory.hpp"

namespace trafusion {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Indices of the units drawn into training.
std::set<std::string> draw_training_units(std::vector<std::string> units, double ratio,
                                          std::uint64_t seed) {
  std::sort(units.begin(), units.end());
  units.erase(std::unique(units.begin(), units.end()), units.end());
  std::mt19937_64 rng(seed);
  std::shuffle(units.begin(), units.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(units.size())));
  return {units.begin(), units.begin() + static_cast<std::ptrdiff_t>(std::min(n_train, units.size()))};
}

template <typename T, typename Key>
void split_source(const std::vector<T>& items, Key key, double ratio, std::uint64_t seed,
                  const char* name, std::vector<T>& train, std::vector<T>& test,
                  std::vector<std::string>& flags) {
  std::vector<std::string> units;
  units.reserve(items.size());
  for (const auto& it : items) units.push_back(key(it));
  std::set<std::string> distinct(units.begin(), units.end());
  if (distinct.size() < 2) {
    train = items;
    if (!items.empty()) flags.push_back(std::string(name) + "_all_train");
    return;
  }
  const auto chosen = draw_training_units(std::move(units), ratio, seed);
  for (const auto& it : items) {
    (chosen.count(key(it)) ? train : test).push_back(it);
  }
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return v.empty() ? kNaN : 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Runs body(k) for k in [0, n) on up to `threads` workers.
template <typename Body>
void parallel_for(std::size_t n, std::size_t threads, Body body) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t k = 0; k < n; ++k) body(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  for (std::size_t w = 0; w < threads; ++w) {
    workers.emplace_back([&] {
      for (std::size_t k = next++; k < n; k = next++) body(k);
    });
  }
}

struct RunContext {
  DataSplit split;
  std::optional<PreparedInputs> prepared;
  std::vector<TestCell> test_cells;
};

}  // namespace

DataSplit split_train_test(const SensorData& data, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw DomainError("split_train_test: ratio must lie in (0, 1)");
  }
  DataSplit split;
  split.seed = seed;
  split_source(data.loops, [](const LoopRecord& r) { return r.detector_id; }, ratio,
               derive_seed(seed, {1}), "loop", split.train.loops, split.test.loops, split.flags);
  split_source(data.fcd, [](const FcdTrace& t) { return t.trace_id; }, ratio,
               derive_seed(seed, {2}), "fcd", split.train.fcd, split.test.fcd, split.flags);
  split_source(data.bt, [](const BtSample& s) { return s.trace_id; }, ratio,
               derive_seed(seed, {3}), "bt", split.train.bt, split.test.bt, split.flags);
  return split;
}

std::vector<TestCell> speed_test_cells(const SensorData& test, const GridSpec& spec,
                                       const SpeedClamp& clamp) {
  std::vector<TestCell> cells;
  for (const SpeedField& f : {grid_loop(test.loops, spec, clamp), grid_fcd(test.fcd, spec, clamp)}) {
    for (std::size_t i = 0; i < spec.n_x(); ++i) {
      for (std::size_t j = 0; j < spec.n_t(); ++j) {
        if (f.has_data(i, j)) cells.push_back({i, j, f.speed(i, j)});
      }
    }
  }
  return cells;
}

double imae(const SpeedField& estimate, std::span<const TestCell> test_cells) {
  if (test_cells.empty()) {
    throw NoDataError("imae: empty test set");
  }
  double sum = 0.0;
  for (const auto& c : test_cells) {
    const double est = estimate.speed(c.row, c.col);
    if (!(est > 0.0) || !(c.speed > 0.0)) {
      throw DomainError("imae: nonpositive speed in estimate or test set");
    }
    sum += std::abs(1.0 / c.speed - 1.0 / est);
  }
  return sum / static_cast<double>(test_cells.size());
}

MapeResult mape(const SpeedField& estimate, std::span<const BtSample> bt_test,
                bool exclude_extrapolated, const SpeedClamp& clamp) {
  MapeResult out;
  double sum = 0.0;
  const GridSpec& spec = estimate.spec();
  for (const auto& s : bt_test) {
    if (!(s.x_end > s.x_start) || !(s.t_end > s.t_start) || !spec.contains(s.t_start, s.x_start) ||
        s.x_end > spec.x_max()) {
      continue;
    }
    const auto vt = virtual_trajectory(estimate, s.t_start, s.x_start, s.x_end, clamp);
    if (vt.extrapolated) {
      ++out.extrapolated;
      if (exclude_extrapolated) continue;
    }
    const double tt = s.travel_time();
    const double vtt = vt.t_end - s.t_start;
    sum += std::abs((vtt - tt) / tt);
    ++out.samples;
  }
  if (out.samples == 0) {
    throw NoDataError("mape: no scorable BT test samples");
  }
  out.value = sum / static_cast<double>(out.samples);
  return out;
}

std::size_t default_thread_count() {
  if (const char* env = std::getenv("TRAFUSION_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && n > 0) return static_cast<std::size_t>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentTable run_experiment(const SensorData& data, const GridSpec& spec,
                               const ExperimentConfig& config) {
  if (config.runs == 0) {
    throw DomainError("run_experiment: need at least one run");
  }
  const std::vector<SensorSet> combos =
      config.combinations.empty() ? sensor_subsets(data.available()) : config.combinations;
  const std::size_t threads = config.threads ? config.threads : default_thread_count();
  const auto& params = config.params;

  std::vector<RunContext> runs(config.runs);
  parallel_for(config.runs, threads, [&](std::size_t r) {
    auto& ctx = runs[r];
    ctx.split = split_train_test(data, config.train_ratio, derive_seed(config.seed, {r}));
    ctx.prepared = prepare_inputs(ctx.split.train, spec, params);
    ctx.test_cells = speed_test_cells(ctx.split.test, spec, params.clamp);
  });

  const std::size_t per_run = config.algorithms.size() * combos.size();
  std::vector<ExperimentResult> rows(config.runs * per_run);
  parallel_for(rows.size(), threads, [&](std::size_t k) {
    const std::size_t r = k / per_run;
    const std::size_t a = (k % per_run) / combos.size();
    const std::size_t c = k % combos.size();
    auto& row = rows[k];
    row.algorithm = config.algorithms[a];
    row.sensors = combos[c];
    row.run = r;
    row.imae = kNaN;
    row.mape = kNaN;
    const auto& ctx = runs[r];
    std::vector<std::string> flags = ctx.split.flags;
    const auto start = std::chrono::steady_clock::now();
    try {
      const SpeedField estimate = reconstruct(row.algorithm, ctx.split.train, *ctx.prepared,
                                              row.sensors, spec, params);
      if (!ctx.test_cells.empty()) {
        row.imae = imae(estimate, ctx.test_cells);
      } else {
        flags.push_back("no_speed_test_data");
      }
      if (!ctx.split.test.bt.empty()) {
        const auto m = mape(estimate, ctx.split.test.bt, config.exclude_extrapolated, params.clamp);
        row.mape = m.value;
        if (m.extrapolated > 0) flags.push_back("extrapolated=" + std::to_string(m.extrapolated));
      } else {
        flags.push_back("no_bt_test_data");
      }
    } catch (const std::exception& e) {
      row.failed = true;
      flags.push_back(std::string("failed: ") + e.what());
    }
    row.runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto& f : flags) {
      if (!row.flags.empty()) row.flags += ';';
      row.flags += f;
    }
  });

  ExperimentTable table;
  table.rows = std::move(rows);
  std::stable_sort(table.rows.begin(), table.rows.end(), [](const auto& x, const auto& y) {
    return std::tuple(static_cast<int>(x.algorithm), x.sensors.code(), x.run) <
           std::tuple(static_cast<int>(y.algorithm), y.sensors.code(), y.run);
  });

  std::map<std::pair<int, int>, std::pair<std::vector<double>, std::vector<double>>> groups;
  std::map<std::pair<int, int>, std::size_t> ok_runs;
  for (const auto& row : table.rows) {
    const auto key = std::pair(static_cast<int>(row.algorithm), row.sensors.code());
    auto& g = groups[key];
    if (row.failed) continue;
    ++ok_runs[key];
    if (std::isfinite(row.imae)) g.first.push_back(row.imae);
    if (std::isfinite(row.mape)) g.second.push_back(row.mape);
  }
  for (const auto& [key, g] : groups) {
    AggregateResult agg;
    agg.algorithm = static_cast<Algorithm>(key.first);
    agg.sensors = {(key.second & 1) != 0, (key.second & 2) != 0, (key.second & 4) != 0};
    agg.runs = ok_runs.count(key) ? ok_runs.at(key) : 0;
    agg.imae_mean = mean(g.first);
    agg.imae_std = sample_std(g.first);
    agg.mape_mean = mean(g.second);
    agg.mape_std = sample_std(g.second);
    table.aggregate.push_back(agg);
  }
  return table;
}

}  // namespace trafusion
