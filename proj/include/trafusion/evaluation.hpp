#pragma once

// Train/test splitting, speed and travel-time error metrics, and the repeated
// split-reconstruct-score experiment driver.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "trafusion/grid.hpp"
#include "trafusion/params.hpp"
#include "trafusion/reconstruction.hpp"
#include "trafusion/sensors.hpp"

namespace trafusion {

struct DataSplit {
  SensorData train;
  SensorData test;
  std::uint64_t seed = 0;
  /// Sources with fewer than two units, kept entirely in training.
  std::vector<std::string> flags;
};

/// Random split per source: loops by detector, FCD and BT by trace id.
/// round(ratio * units) units go to training. Deterministic in `seed`.
DataSplit split_train_test(const SensorData& data, double ratio, std::uint64_t seed);

struct TestCell {
  std::size_t row = 0;
  std::size_t col = 0;
  double speed = 0.0;
};

/// Cell-wise speeds of the loop and FCD test data (one tuple per source and
/// cell, so a cell observed by both contributes twice).
std::vector<TestCell> speed_test_cells(const SensorData& test, const GridSpec& spec,
                                       const SpeedClamp& clamp = {});

/// Mean |1/v - 1/v_E| over test cells, in s/m. Throws NoDataError when empty.
double imae(const SpeedField& estimate, std::span<const TestCell> test_cells);

/// s/m to min/km.
inline double imae_to_min_per_km(double s_per_m) { return s_per_m * 1000.0 / 60.0; }

struct MapeResult {
  double value = 0.0;
  std::size_t samples = 0;
  std::size_t extrapolated = 0;
};

/// Mean |VTT - TT| / TT over BT samples, VTT from virtual trajectories.
/// Throws NoDataError when no sample is scored.
MapeResult mape(const SpeedField& estimate, std::span<const BtSample> bt_test,
                bool exclude_extrapolated = false, const SpeedClamp& clamp = {});

struct ExperimentConfig {
  std::vector<Algorithm> algorithms{std::begin(kAllAlgorithms), std::end(kAllAlgorithms)};
  std::vector<SensorSet> combinations;  // empty: every subset of the available sensors
  std::size_t runs = 50;
  std::uint64_t seed = 1;
  double train_ratio = 0.5;
  std::size_t threads = 0;  // 0: TRAFUSION_THREADS or hardware concurrency
  bool exclude_extrapolated = false;
  ReconstructionParams params;
};

struct ExperimentResult {
  Algorithm algorithm = Algorithm::psm;
  SensorSet sensors;
  std::size_t run = 0;
  double imae = 0.0;  // s/m; NaN when not scored
  double mape = 0.0;  // NaN when not scored
  double runtime_s = 0.0;
  bool failed = false;
  std::string flags;
};

struct AggregateResult {
  Algorithm algorithm = Algorithm::psm;
  SensorSet sensors;
  std::size_t runs = 0;  // successful runs
  double imae_mean = 0.0;
  double imae_std = 0.0;
  double mape_mean = 0.0;
  double mape_std = 0.0;
};

struct ExperimentTable {
  std::vector<ExperimentResult> rows;      // sorted by algorithm, sensors, run
  std::vector<AggregateResult> aggregate;  // sorted by algorithm, sensors
};

/// Repeats split / reconstruct / score `config.runs` times with a fresh split
/// per run. Jobs may run concurrently; the table depends only on
/// (data, spec, config) apart from runtime_s.
ExperimentTable run_experiment(const SensorData& data, const GridSpec& spec,
                               const ExperimentConfig& config);

/// Worker count from TRAFUSION_THREADS, else hardware concurrency (>= 1).
std::size_t default_thread_count();

}  // namespace trafusion
