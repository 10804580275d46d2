#include "trafusion/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "trafusion/errors.hpp"
#include "trafusion/random.hpp"
#include "trafusion/trajectory.hpp"

namespace trafusion {

namespace {

enum Stream : std::uint64_t { kLoopStream = 11, kFcdSelect, kFcdNoise, kBtSelect, kBtNoise };

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Linear blend from `inner` at distance 0 to `outer` at distance `ramp`.
double ramped(double inner, double outer, double distance, double ramp) {
  if (distance <= 0.0) return inner;
  if (ramp <= 0.0 || distance >= ramp) return outer;
  return inner + (outer - inner) * distance / ramp;
}

double pattern_speed(const ScenarioConfig& cfg, double t, double x) {
  double v = cfg.free_speed;
  for (const auto& b : cfg.bottlenecks) {
    if (t < b.onset || t >= b.onset + b.duration || x >= b.location) continue;
    const double upstream_front = b.location - b.length;
    v = std::min(v, ramped(b.sync_speed, cfg.free_speed, upstream_front - x, cfg.ramp));
  }
  for (const auto& j : cfg.moving_jams) {
    if (t < j.origin_t || t >= j.origin_t + j.duration) continue;
    const double centre = j.origin_x + j.wave_speed * (t - j.origin_t);
    const double outside = std::abs(x - centre) - 0.5 * j.width;
    v = std::min(v, ramped(j.jam_speed, cfg.free_speed, outside, cfg.ramp));
  }
  return v;
}

struct Vehicle {
  std::size_t index;
  double entry_time;
};

std::vector<Vehicle> select_vehicles(const ScenarioConfig& cfg, std::uint64_t seed, Stream stream,
                                     double rate) {
  std::vector<Vehicle> out;
  if (rate <= 0.0 || cfg.flow <= 0.0) return out;
  const double headway = 3600.0 / cfg.flow;
  const GridSpec& g = cfg.grid;
  for (std::size_t k = 0;; ++k) {
    const double t = g.t_min() + static_cast<double>(k) * headway;
    if (t >= g.t_max()) break;
    std::mt19937_64 rng(derive_seed(seed, {stream, k}));
    if (uniform01(rng) < rate) out.push_back({k, t});
  }
  return out;
}

std::string padded(std::size_t k, int width) {
  std::string s = std::to_string(k);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

}  // namespace

void ScenarioConfig::validate() const {
  const GridSpec& g = grid;
  if (!(free_speed > 0.0)) throw DomainError("scenario: free speed must be positive");
  if (!(fcd_penetration >= 0.0 && fcd_penetration <= 1.0)) {
    throw DomainError("scenario: FCD penetration must lie in [0, 1]");
  }
  if (!(bt_detection_rate >= 0.0 && bt_detection_rate <= 1.0)) {
    throw DomainError("scenario: BT detection rate must lie in [0, 1]");
  }
  if (!(fcd_interval > 0.0) || fcd_jitter < 0.0 || fcd_jitter >= 0.5 * fcd_interval) {
    throw DomainError("scenario: need fcd_interval > 0 and 0 <= jitter < interval/2");
  }
  if (flow < 0.0) throw DomainError("scenario: flow must be nonnegative");
  for (const auto& b : bottlenecks) {
    if (b.location < g.x_min() || b.location > g.x_max() || b.onset < g.t_min() ||
        b.onset > g.t_max() || !(b.sync_speed > 0.0) || b.length < 0.0 || b.duration < 0.0) {
      throw DomainError("scenario: bottleneck outside the domain or with invalid speed/extent");
    }
  }
  for (const auto& j : moving_jams) {
    if (j.origin_x < g.x_min() || j.origin_x > g.x_max() || j.origin_t < g.t_min() ||
        j.origin_t > g.t_max() || !(j.jam_speed > 0.0) || !(j.width > 0.0) ||
        j.duration < 0.0 || j.wave_speed == 0.0) {
      throw DomainError("scenario: moving jam outside the domain or with invalid parameters");
    }
  }
  for (double p : loop_positions) {
    if (p < g.x_min() || p > g.x_max()) throw DomainError("scenario: loop outside the domain");
  }
  for (double p : bt_receivers) {
    if (p < g.x_min() || p > g.x_max()) throw DomainError("scenario: BT receiver outside the domain");
  }
}

ScenarioConfig ScenarioConfig::desk_default() {
  ScenarioConfig cfg;
  cfg.bottlenecks = {{7000.0, 2400.0, 7200.0, 40.0 * kKmh, 2500.0}};
  cfg.moving_jams = {
      {3600.0, 6800.0, -15.0 * kKmh, 400.0, 10.0 * kKmh, 1500.0},
      {6000.0, 6800.0, -15.0 * kKmh, 400.0, 10.0 * kKmh, 1500.0},
      {9600.0, 9500.0, -15.0 * kKmh, 400.0, 10.0 * kKmh, 2000.0},
  };
  for (int k = 0; k < 10; ++k) cfg.loop_positions.push_back(500.0 + 1000.0 * k);
  cfg.bt_receivers = {200.0, 3400.0, 6600.0, 9800.0};
  return cfg;
}

ScenarioConfig ScenarioConfig::large_scale() {
  ScenarioConfig cfg;
  cfg.grid = GridSpec(0.0, 27000.0, 0.0, 21600.0);
  cfg.flow = 3000.0;
  cfg.fcd_penetration = 0.0877;
  cfg.bt_detection_rate = 0.085;
  cfg.bottlenecks = {{22000.0, 3600.0, 12600.0, 40.0 * kKmh, 6000.0},
                     {12000.0, 7200.0, 5400.0, 50.0 * kKmh, 2500.0}};
  cfg.moving_jams = {
      {5400.0, 18500.0, -15.0 * kKmh, 500.0, 10.0 * kKmh, 3600.0},
      {8400.0, 18500.0, -15.0 * kKmh, 500.0, 10.0 * kKmh, 3600.0},
      {11400.0, 18500.0, -15.0 * kKmh, 500.0, 10.0 * kKmh, 3600.0},
      {14400.0, 20000.0, -15.0 * kKmh, 400.0, 10.0 * kKmh, 3600.0},
      {16800.0, 26000.0, -15.0 * kKmh, 400.0, 10.0 * kKmh, 3600.0},
  };
  for (int k = 0; k < 27; ++k) cfg.loop_positions.push_back(500.0 + 1000.0 * k);
  for (int k = 0; k < 9; ++k) cfg.bt_receivers.push_back(100.0 + 3350.0 * k);
  return cfg;
}

ScenarioConfig ScenarioConfig::noiseless() const {
  ScenarioConfig cfg = *this;
  cfg.noise = {0.0, 0.0, 0.0};
  cfg.fcd_jitter = 0.0;
  return cfg;
}

SpeedField generate_ground_truth(const ScenarioConfig& cfg) {
  cfg.validate();
  const GridSpec& g = cfg.grid;
  Matrix values(g.n_x(), g.n_t());
  for (std::size_t i = 0; i < g.n_x(); ++i) {
    for (std::size_t j = 0; j < g.n_t(); ++j) {
      values(i, j) = pattern_speed(cfg, g.t_center(j), g.x_center(i));
    }
  }
  return SpeedField(g, std::move(values), Matrix(g.n_x(), g.n_t(), 1.0));
}

std::vector<LoopRecord> sample_loops(const SpeedField& truth, const ScenarioConfig& cfg,
                                     std::uint64_t seed) {
  const GridSpec& g = truth.spec();
  const SpeedClamp clamp;
  std::vector<LoopRecord> out;
  out.reserve(cfg.loop_positions.size() * g.n_t());
  for (std::size_t d = 0; d < cfg.loop_positions.size(); ++d) {
    const double pos = cfg.loop_positions[d];
    const std::size_t row = row_of(g, pos);
    std::mt19937_64 rng(derive_seed(seed, {kLoopStream, d}));
    std::normal_distribution<double> noise(0.0, 1.0);
    const std::string id = "D" + padded(d + 1, 2);
    for (std::size_t j = 0; j < g.n_t(); ++j) {
      double v = truth.speed(row, j);
      if (cfg.noise.loop_speed_std > 0.0) v += cfg.noise.loop_speed_std * noise(rng);
      out.push_back({id, pos, g.t_lower(j), clamp.apply(v)});
    }
  }
  return out;
}

std::vector<FcdTrace> sample_fcd(const SpeedField& truth, const ScenarioConfig& cfg,
                                 std::uint64_t seed) {
  const GridSpec& g = truth.spec();
  const SpeedClamp clamp;
  std::vector<FcdTrace> out;
  for (const auto& veh : select_vehicles(cfg, seed, kFcdSelect, cfg.fcd_penetration)) {
    const PathResult path = integrate_path(truth, veh.entry_time, g.x_min(), g.x_max(), g.t_max());
    const double t_last = path.breakpoints.back().t;

    std::mt19937_64 rng(derive_seed(seed, {kFcdNoise, veh.index}));
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> times{veh.entry_time};
    for (std::size_t m = 1;; ++m) {
      double t = veh.entry_time + static_cast<double>(m) * cfg.fcd_interval;
      if (cfg.fcd_jitter > 0.0) t += cfg.fcd_jitter * (2.0 * uniform01(rng) - 1.0);
      if (t > t_last) break;
      times.push_back(t);
    }
    if (times.back() < t_last) times.push_back(t_last);
    if (times.size() < 2) continue;

    FcdTrace trace{"F" + padded(veh.index, 6), {}};
    double x_prev = position_at(path.breakpoints, times.front());
    trace.samples.push_back({times.front(), x_prev});
    for (std::size_t m = 1; m < times.size(); ++m) {
      const double step = times[m] - times[m - 1];
      double dist = position_at(path.breakpoints, times[m]) -
                    position_at(path.breakpoints, times[m - 1]);
      if (cfg.noise.fcd_speed_std > 0.0) dist += cfg.noise.fcd_speed_std * step * noise(rng);
      dist = std::clamp(dist, 0.0, clamp.v_ceil * step);
      x_prev += dist;
      // Noisy positions past the road end: the vehicle has left.
      if (x_prev > g.x_max()) break;
      trace.samples.push_back({times[m], x_prev});
    }
    if (trace.samples.size() < 2) continue;
    out.push_back(std::move(trace));
  }
  return out;
}

std::vector<BtSample> sample_bt(const SpeedField& truth, const ScenarioConfig& cfg,
                                std::uint64_t seed) {
  const GridSpec& g = truth.spec();
  const SpeedClamp clamp;
  std::vector<double> receivers = cfg.bt_receivers;
  std::sort(receivers.begin(), receivers.end());
  receivers.erase(std::unique(receivers.begin(), receivers.end()), receivers.end());
  std::vector<BtSample> out;
  if (receivers.size() < 2) return out;

  for (const auto& veh : select_vehicles(cfg, seed, kBtSelect, cfg.bt_detection_rate)) {
    const PathResult path = integrate_path(truth, veh.entry_time, g.x_min(), g.x_max(), g.t_max());
    std::mt19937_64 rng(derive_seed(seed, {kBtNoise, veh.index}));
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t r = 1; r < receivers.size(); ++r) {
      const double t_a = time_at(path.breakpoints, receivers[r - 1]);
      const double t_b = time_at(path.breakpoints, receivers[r]);
      if (!std::isfinite(t_a) || !std::isfinite(t_b)) break;
      const double dist = receivers[r] - receivers[r - 1];
      double tt = t_b - t_a;
      if (cfg.noise.bt_relative_std > 0.0) {
        tt *= std::max(0.5, 1.0 + cfg.noise.bt_relative_std * noise(rng));
      }
      tt = std::max(tt, dist / clamp.v_ceil);
      out.push_back({"B" + padded(veh.index, 6) + "_" + std::to_string(r), receivers[r - 1],
                     receivers[r], t_a, t_a + tt});
    }
  }
  return out;
}

Scenario simulate(const ScenarioConfig& cfg, std::uint64_t seed) {
  SpeedField truth = generate_ground_truth(cfg);
  SensorData sensors;
  sensors.loops = sample_loops(truth, cfg, seed);
  sensors.fcd = sample_fcd(truth, cfg, seed);
  sensors.bt = sample_bt(truth, cfg, seed);
  return {std::move(truth), std::move(sensors)};
}

double time_at(const std::vector<TimePosition>& path, double x) {
  if (path.empty() || x < path.front().x || x > path.back().x) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  if (x == path.front().x) return path.front().t;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const auto& a = path[k - 1];
    const auto& b = path[k];
    if (b.x >= x) {
      if (b.x == a.x) return a.t;
      return a.t + (b.t - a.t) * (x - a.x) / (b.x - a.x);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace trafusion
