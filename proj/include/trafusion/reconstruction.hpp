#pragma once

// Algorithm selection and sensor-subset plumbing shared by the CLI, the
// experiment driver and the Python bindings.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trafusion/grid.hpp"
#include "trafusion/params.hpp"
#include "trafusion/sensors.hpp"

namespace trafusion {

enum class Algorithm { section_average, adaptive_smoothing, psm, psm_w };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::section_average,
                                               Algorithm::adaptive_smoothing, Algorithm::psm,
                                               Algorithm::psm_w};

/// Report name: SEC-AVG, ASM, PSM, PSM-W.
std::string_view algorithm_name(Algorithm a);
/// CLI token: secavg, asm, psm, psmw.
std::string_view algorithm_token(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view token);

/// Nonempty subset of {LOOP, FCD, BT}.
struct SensorSet {
  bool loop = false;
  bool fcd = false;
  bool bt = false;

  bool empty() const { return !loop && !fcd && !bt; }
  /// LOOP, FCD, BT joined by '+', in that order.
  std::string name() const;
  /// Dense code 1..7 (loop=1, fcd=2, bt=4); ordering key in reports.
  int code() const { return (loop ? 1 : 0) | (fcd ? 2 : 0) | (bt ? 4 : 0); }
  bool contains(const SensorSet& other) const;

  friend bool operator==(const SensorSet&, const SensorSet&) = default;
};

/// Accepts e.g. "LOOP+FCD", "bt", "fcd+loop".
std::optional<SensorSet> parse_sensor_set(std::string_view text);

/// All nonempty subsets of `available`, ordered by code().
std::vector<SensorSet> sensor_subsets(const SensorSet& available);

struct SensorData {
  std::vector<LoopRecord> loops;
  std::vector<FcdTrace> fcd;
  std::vector<BtSample> bt;

  SensorSet available() const { return {!loops.empty(), !fcd.empty(), !bt.empty()}; }
};

/// Gridded training inputs, computed once per data set and reused by every
/// algorithm and sensor subset.
struct PreparedInputs {
  SpeedField loop;
  SpeedField fcd;
  SpeedField bt;
  WeightField bt_weights;
  std::vector<double> loop_positions;
  std::vector<double> bt_receivers;
};

PreparedInputs prepare_inputs(const SensorData& data, const GridSpec& spec,
                              const ReconstructionParams& params);

/// Runs one algorithm on the subset `sensors` of `data`.
///
/// PSM-W without BT reduces to PSM. Section averaging of FCD reuses the loop
/// detector sections even when loops are not part of `sensors`; with no loop
/// detectors at all it falls back to 1 km sections. Throws NoDataError when
/// the subset holds no usable data.
SpeedField reconstruct(Algorithm algorithm, const SensorData& data, const PreparedInputs& prepared,
                       const SensorSet& sensors, const GridSpec& spec,
                       const ReconstructionParams& params);

SpeedField reconstruct(Algorithm algorithm, const SensorData& data, const SensorSet& sensors,
                       const GridSpec& spec, const ReconstructionParams& params);

/// Smallest dx/dt-aligned grid covering every record of `data`.
GridSpec infer_grid(const SensorData& data, double dx = 100.0, double dt = 60.0);

}  // namespace trafusion
