#pragma once

// Section-average baseline: the road is cut into sections around the
// detector positions and every cell takes its section's value.

#include <span>
#include <vector>

#include "trafusion/grid.hpp"
#include "trafusion/params.hpp"
#include "trafusion/sensors.hpp"

namespace trafusion {

/// Sorted section borders; the first is x_min, the last x_max.
struct SectionPartition {
  std::vector<double> boundaries;

  std::size_t section_count() const { return boundaries.size() - 1; }
  /// Section holding position x (lower border inclusive, last section closed).
  std::size_t section_of(double x) const;
};

struct SectionWarnings {
  bool no_detectors = false;                 // partition fell back to one section
  std::vector<std::string> silent_detectors;  // no records; filled from a neighbour
  std::vector<std::size_t> empty_sections;    // never crossed; default fill speed
};

/// Borders at midpoints between consecutive distinct detector positions.
SectionPartition define_sections(std::span<const double> detector_positions,
                                 const GridSpec& spec, SectionWarnings* warnings = nullptr);

/// Every cell takes the measurement of the detector owning its section at the
/// same minute, or that detector's temporally nearest one (earlier wins ties).
/// Sections whose detector never reported copy the nearest reporting detector.
SpeedField section_average_loop(std::span<const LoopRecord> records,
                                const SectionPartition& partition, const GridSpec& spec,
                                const SectionAverageParams& params = {},
                                const SpeedClamp& clamp = {}, SectionWarnings* warnings = nullptr);

/// Per (section, time step): total distance over total time of all trajectory
/// pieces inside it. Gaps are filled by linear interpolation in time, held
/// constant beyond the first/last value; never-crossed sections get the
/// default fill speed.
SpeedField section_average_traces(std::span<const FcdTrace> traces,
                                  const SectionPartition& partition, const GridSpec& spec,
                                  const SectionAverageParams& params = {},
                                  const SpeedClamp& clamp = {},
                                  SectionWarnings* warnings = nullptr);

/// BT samples as straight two-point trajectories.
SpeedField section_average_traces(std::span<const BtSample> samples,
                                  const SectionPartition& partition, const GridSpec& spec,
                                  const SectionAverageParams& params = {},
                                  const SpeedClamp& clamp = {},
                                  SectionWarnings* warnings = nullptr);

/// Cell-wise arithmetic mean of the given source estimates.
SpeedField reconstruct_section_average(std::span<const SpeedField> sources,
                                       const SpeedClamp& clamp = {});

}  // namespace trafusion
