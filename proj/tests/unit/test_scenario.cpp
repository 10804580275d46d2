#include <doctest.h>

#include <cmath>
#include <map>

#include "trafusion/errors.hpp"
#include "trafusion/scenario.hpp"
#include "trafusion/trajectory.hpp"

using namespace trafusion;

namespace {

ScenarioConfig empty_road(const GridSpec& g) {
  ScenarioConfig cfg;
  cfg.grid = g;
  cfg.bottlenecks.clear();
  cfg.moving_jams.clear();
  cfg.loop_positions.clear();
  cfg.bt_receivers.clear();
  return cfg.noiseless();
}

}  // namespace

TEST_CASE("no patterns give a constant free-flow field") {
  const ScenarioConfig cfg = empty_road(GridSpec(0.0, 3000.0, 0.0, 1800.0));
  const SpeedField truth = generate_ground_truth(cfg);
  CHECK(truth.fully_filled());
  for (double v : truth.values().data()) CHECK(v == cfg.free_speed);
}

TEST_CASE("moving jam core drifts at the wave speed") {
  ScenarioConfig cfg = empty_road(GridSpec(0.0, 8000.0, 0.0, 3600.0));
  const MovingJam jam{600.0, 7000.0, -15.0 * kKmh, 400.0, 10.0 * kKmh, 1200.0};
  cfg.moving_jams.push_back(jam);
  const SpeedField truth = generate_ground_truth(cfg);
  const GridSpec& g = truth.spec();
  for (std::size_t j = 0; j < g.n_t(); ++j) {
    const double t = g.t_center(j);
    if (t < jam.origin_t || t >= jam.origin_t + jam.duration) continue;
    double sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < g.n_x(); ++i) {
      if (truth.speed(i, j) == jam.jam_speed) {
        sum += g.x_center(i);
        ++n;
      }
    }
    REQUIRE(n > 0);
    const double centre = jam.origin_x + jam.wave_speed * (t - jam.origin_t);
    CHECK(std::abs(sum / n - centre) <= 0.5 * g.dx());
  }
}

TEST_CASE("bottleneck front is pinned at its location") {
  ScenarioConfig cfg = empty_road(GridSpec(0.0, 8000.0, 0.0, 3600.0));
  const Bottleneck b{5000.0, 600.0, 1800.0, 40.0 * kKmh, 2000.0};
  cfg.bottlenecks.push_back(b);
  const SpeedField truth = generate_ground_truth(cfg);
  const GridSpec& g = truth.spec();
  for (std::size_t j = 0; j < g.n_t(); ++j) {
    const double t = g.t_center(j);
    const bool active = t >= b.onset && t < b.onset + b.duration;
    std::size_t last_slow = 0;
    bool any = false;
    for (std::size_t i = 0; i < g.n_x(); ++i) {
      if (truth.speed(i, j) < cfg.free_speed) {
        last_slow = i;
        any = true;
      }
    }
    CHECK(any == active);
    if (active) CHECK(g.x_lower(last_slow) + g.dx() == doctest::Approx(b.location));
  }
}

TEST_CASE("loop records") {
  ScenarioConfig cfg = empty_road(GridSpec(0.0, 27000.0, 0.0, 14400.0));
  cfg.bottlenecks.push_back(Bottleneck{15000.0, 3000.0, 5000.0, 40.0 * kKmh, 3000.0});
  for (int k = 0; k < 27; ++k) cfg.loop_positions.push_back(500.0 + 1000.0 * k);
  const SpeedField truth = generate_ground_truth(cfg);
  const auto recs = sample_loops(truth, cfg, 1);
  CHECK(recs.size() == 6480);
  for (const auto& r : recs) {
    const CellIndex c = cell_index(cfg.grid, r.timestamp, r.position);
    CHECK(r.speed == truth.speed(c.row, c.col));
  }

  ScenarioConfig noisy = cfg;
  noisy.noise.loop_speed_std = 3.0 * kKmh;
  const auto a = sample_loops(truth, noisy, 9);
  const auto b = sample_loops(truth, noisy, 9);
  REQUIRE(a.size() == b.size());
  bool changed = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].speed == b[k].speed);
    changed = changed || a[k].speed != recs[k].speed;
  }
  CHECK(changed);
}

TEST_CASE("FCD samples are evenly spaced on a constant field") {
  ScenarioConfig cfg = empty_road(GridSpec(0.0, 5000.0, 0.0, 600.0));
  cfg.flow = 1.0;  // one vehicle, entering at t_min
  cfg.fcd_penetration = 1.0;
  const SpeedField truth = SpeedField::constant(cfg.grid, 25.0);
  const auto traces = sample_fcd(truth, cfg, 1);
  REQUIRE(traces.size() == 1);
  const auto& s = traces[0].samples;
  REQUIRE(s.size() > 10);
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    CHECK(s[k].x - s[k - 1].x == doctest::Approx(25.0 * cfg.fcd_interval));
    CHECK(s[k].t - s[k - 1].t == doctest::Approx(cfg.fcd_interval));
  }

  cfg.fcd_penetration = 0.0;
  CHECK(sample_fcd(truth, cfg, 1).empty());
}

TEST_CASE("FCD spacing shrinks in proportion to speed") {
  ScenarioConfig cfg = empty_road(GridSpec(0.0, 4000.0, 0.0, 900.0));
  cfg.flow = 1.0;
  cfg.fcd_penetration = 1.0;
  Matrix v(cfg.grid.n_x(), cfg.grid.n_t());
  for (std::size_t i = 0; i < cfg.grid.n_x(); ++i) {
    for (std::size_t j = 0; j < cfg.grid.n_t(); ++j) v(i, j) = i < 20 ? 30.0 : 10.0;
  }
  const SpeedField truth(cfg.grid, v, Matrix(cfg.grid.n_x(), cfg.grid.n_t(), 1.0));
  const auto traces = sample_fcd(truth, cfg, 1);
  REQUIRE(traces.size() == 1);
  const auto path = integrate_path(truth, 0.0, 0.0, cfg.grid.x_max(), cfg.grid.t_max());
  const auto& s = traces[0].samples;
  int fast = 0, slow = 0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    CHECK(s[k].x == doctest::Approx(position_at(path.breakpoints, s[k].t)));
    if (k == 0) continue;
    const double gap = s[k].x - s[k - 1].x;
    const double dt = s[k].t - s[k - 1].t;
    if (s[k].x <= 2000.0) {
      CHECK(gap == doctest::Approx(30.0 * dt));
      ++fast;
    } else if (s[k - 1].x >= 2000.0) {
      CHECK(gap == doctest::Approx(10.0 * dt));
      ++slow;
    }
  }
  CHECK(fast > 3);
  CHECK(slow > 3);
}

TEST_CASE("BT samples") {
  ScenarioConfig cfg = empty_road(GridSpec(0.0, 6000.0, 0.0, 1800.0));
  cfg.bt_detection_rate = 1.0;
  cfg.bt_receivers = {0.0, 2000.0, 4000.0};
  const SpeedField truth = SpeedField::constant(cfg.grid, 20.0);
  const auto bt = sample_bt(truth, cfg, 2);
  REQUIRE(!bt.empty());
  for (const auto& s : bt) {
    CHECK(s.distance() == 2000.0);
    CHECK(s.travel_time() == doctest::Approx(100.0));
  }

  cfg.bt_receivers.clear();
  CHECK(sample_bt(truth, cfg, 2).empty());
}

TEST_CASE("BT mean speed through a jam lies between jam and free speed") {
  ScenarioConfig cfg = empty_road(GridSpec(0.0, 6000.0, 0.0, 3600.0));
  cfg.bt_detection_rate = 1.0;
  cfg.bt_receivers = {0.0, 6000.0};
  cfg.bottlenecks.push_back(Bottleneck{4000.0, 0.0, 3600.0, 10.0 * kKmh, 1000.0});
  const SpeedField truth = generate_ground_truth(cfg);
  const auto bt = sample_bt(truth, cfg, 4);
  REQUIRE(!bt.empty());
  for (const auto& s : bt) {
    const double v = s.distance() / s.travel_time();
    CHECK(v > 10.0 * kKmh);
    CHECK(v < cfg.free_speed);
  }
}

TEST_CASE("noiseless sample speeds stay within the truth extremes") {
  const ScenarioConfig cfg = ScenarioConfig::desk_default().noiseless();
  const Scenario sc = simulate(cfg, 5);
  double lo = 1e9, hi = 0.0;
  for (double v : sc.truth.values().data()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (const auto& r : sc.sensors.loops) {
    CHECK(r.speed >= lo);
    CHECK(r.speed <= hi);
  }
  for (const auto& tr : sc.sensors.fcd) {
    for (std::size_t k = 1; k < tr.samples.size(); ++k) {
      const double v = (tr.samples[k].x - tr.samples[k - 1].x) / (tr.samples[k].t - tr.samples[k - 1].t);
      CHECK(v >= lo * (1 - 1e-9));
      CHECK(v <= hi * (1 + 1e-9));
    }
  }
  for (const auto& s : sc.sensors.bt) {
    const double v = s.distance() / s.travel_time();
    CHECK(v >= lo * (1 - 1e-9));
    CHECK(v <= hi * (1 + 1e-9));
  }
}

TEST_CASE("simulation is deterministic per seed") {
  const ScenarioConfig cfg = ScenarioConfig::desk_default();
  const Scenario a = simulate(cfg, 12);
  const Scenario b = simulate(cfg, 12);
  REQUIRE(a.sensors.fcd.size() == b.sensors.fcd.size());
  REQUIRE(a.sensors.bt.size() == b.sensors.bt.size());
  for (std::size_t k = 0; k < a.sensors.bt.size(); ++k) {
    CHECK(a.sensors.bt[k].t_end == b.sensors.bt[k].t_end);
  }
  for (std::size_t k = 0; k < a.sensors.fcd.size(); ++k) {
    CHECK(a.sensors.fcd[k].samples.size() == b.sensors.fcd[k].samples.size());
  }
}

TEST_CASE("desk default layout") {
  const ScenarioConfig cfg = ScenarioConfig::desk_default();
  CHECK(cfg.grid.n_x() == 100);
  CHECK(cfg.grid.n_t() == 240);
  CHECK(cfg.bottlenecks.size() == 1);
  CHECK(cfg.moving_jams.size() == 3);
  CHECK(cfg.loop_positions.size() == 10);
  CHECK(cfg.fcd_penetration == 0.05);
  CHECK(cfg.bt_receivers.size() == 4);
  CHECK(cfg.noise.loop_speed_std == doctest::Approx(3.0 * kKmh));
  CHECK(cfg.noise.fcd_speed_std == doctest::Approx(2.0 * kKmh));
  CHECK(cfg.noise.bt_relative_std == 0.02);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("large preset volumes") {
  const ScenarioConfig cfg = ScenarioConfig::large_scale();
  CHECK(cfg.loop_positions.size() == 27);
  const Scenario sc = simulate(cfg, 1);
  CHECK(std::abs(static_cast<double>(sc.sensors.fcd.size()) - 1578.0) / 1578.0 < 0.1);
  CHECK(std::abs(static_cast<double>(sc.sensors.bt.size()) - 11722.0) / 11722.0 < 0.1);
}

TEST_CASE("invalid scenarios are rejected") {
  ScenarioConfig cfg = ScenarioConfig::desk_default();
  cfg.fcd_penetration = 1.5;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = ScenarioConfig::desk_default();
  cfg.bottlenecks[0].location = 20000.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = ScenarioConfig::desk_default();
  cfg.loop_positions.push_back(-5.0);
  CHECK_THROWS_AS(cfg.validate(), DomainError);
}
