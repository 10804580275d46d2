#pragma once

// Synthetic ground truth with bottleneck and moving-jam congestion, plus
// simulated loop, probe-vehicle and Bluetooth observations of it.

#include <cstdint>
#include <vector>

#include "trafusion/grid.hpp"
#include "trafusion/reconstruction.hpp"
#include "trafusion/sensors.hpp"

namespace trafusion {

/// Synchronized-flow region whose downstream front is pinned at `location`.
struct Bottleneck {
  double location = 0.0;  // m, downstream front
  double onset = 0.0;     // s
  double duration = 0.0;  // s
  double sync_speed = 40.0 * kKmh;
  double length = 2000.0;  // m, extent upstream of the front
};

/// Low-speed band travelling at a constant wave speed.
struct MovingJam {
  double origin_t = 0.0;  // s, band centre at (origin_t, origin_x)
  double origin_x = 0.0;  // m
  double wave_speed = -15.0 * kKmh;
  double width = 400.0;  // m
  double jam_speed = 10.0 * kKmh;
  double duration = 0.0;  // s
};

struct SensorNoise {
  double loop_speed_std = 3.0 * kKmh;
  double fcd_speed_std = 2.0 * kKmh;
  double bt_relative_std = 0.02;
};

struct ScenarioConfig {
  GridSpec grid{0.0, 10000.0, 0.0, 14400.0};
  double free_speed = 120.0 * kKmh;
  double ramp = 200.0;  // m, linear transition around every pattern
  std::vector<Bottleneck> bottlenecks;
  std::vector<MovingJam> moving_jams;

  double flow = 2000.0;  // vehicles per hour entering at x_min
  std::vector<double> loop_positions;
  double fcd_penetration = 0.05;
  double fcd_interval = 10.0;  // s
  double fcd_jitter = 0.0;     // s, uniform +- around each sampling instant
  std::vector<double> bt_receivers;
  double bt_detection_rate = 0.075;
  SensorNoise noise;

  /// Throws DomainError on patterns outside the domain or invalid rates.
  void validate() const;

  /// 10 km x 4 h, one bottleneck, three moving jams, 10 loops, 5 % FCD,
  /// 4 BT receivers.
  static ScenarioConfig desk_default();
  /// 27 km x 6 h with 27 loops, ~1,578 FCD
  /// traces, ~11,700 BT samples).
  static ScenarioConfig large_scale();
  /// Same layout without any sensor noise.
  ScenarioConfig noiseless() const;
};

/// Cell-centre speeds of the configured patterns; overlapping patterns take
/// the minimum speed.
SpeedField generate_ground_truth(const ScenarioConfig& cfg);

/// One record per detector and minute: truth cell speed plus Gaussian noise,
/// clamped to the admissible range.
std::vector<LoopRecord> sample_loops(const SpeedField& truth, const ScenarioConfig& cfg,
                                     std::uint64_t seed);

/// Probe vehicles driven through the truth field, sampled every
/// `fcd_interval` seconds.
std::vector<FcdTrace> sample_fcd(const SpeedField& truth, const ScenarioConfig& cfg,
                                 std::uint64_t seed);

/// One sample per detected vehicle and adjacent receiver pair it completes.
std::vector<BtSample> sample_bt(const SpeedField& truth, const ScenarioConfig& cfg,
                                std::uint64_t seed);

struct Scenario {
  SpeedField truth;
  SensorData sensors;
};

Scenario simulate(const ScenarioConfig& cfg, std::uint64_t seed);

/// Time a breakpoint path first reaches position x (NaN if never).
double time_at(const std::vector<TimePosition>& path, double x);

}  // namespace trafusion
