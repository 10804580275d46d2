#pragma once

// Raw sensor records and their rasterization onto the space-time grid.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "trafusion/grid.hpp"

namespace trafusion {

/// One-minute speed measurement of a stationary detector.
struct LoopRecord {
  std::string detector_id;
  double position = 0.0;   // m
  double timestamp = 0.0;  // s, start of the aggregation interval
  double speed = 0.0;      // m/s
};

struct TimePosition {
  double t = 0.0;
  double x = 0.0;
};

/// Probe-vehicle trajectory, map-matched onto the stretch.
struct FcdTrace {
  std::string trace_id;
  std::vector<TimePosition> samples;  // strictly increasing t, non-decreasing x
};

/// Travel time of one vehicle between two receivers.
struct BtSample {
  std::string trace_id;
  double x_start = 0.0;
  double x_end = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;

  double travel_time() const { return t_end - t_start; }
  double distance() const { return x_end - x_start; }
  double mean_speed() const { return distance() / travel_time(); }
};

/// Throws DomainError when the record violates its invariants.
void validate(const LoopRecord& r, const SpeedClamp& clamp = {});
void validate(const FcdTrace& trace, const SpeedClamp& clamp = {});
void validate(const BtSample& s, const SpeedClamp& clamp = {});

/// Piece of a straight space-time segment lying inside one cell.
struct CellPiece {
  CellIndex cell;
  double dt = 0.0;     // time spent inside the cell, s
  double dx = 0.0;     // distance covered inside the cell, m
  double share = 0.0;  // fraction of the full segment's normalized length
};

/// Splits the straight segment (t0,x0)->(t1,x1) at every cell boundary and
/// reports the pieces lying inside the domain, in order of traversal.
///
/// The length used for `share` is measured in normalized coordinates
/// (t/dt, x/dx), so for a straight segment it equals the parameter fraction.
/// Parts of the segment outside the domain are dropped.
std::vector<CellPiece> trace_segment(const GridSpec& spec, TimePosition from, TimePosition to);

/// Cells crossed by the virtual straight trajectory of a BT sample.
std::vector<CellPiece> bt_path(const GridSpec& spec, const BtSample& s);

struct GriddingStats {
  std::size_t skipped = 0;    // degenerate or out-of-domain inputs
  std::size_t discarded = 0;  // contributions falling outside the domain
};

/// Cell speeds dx/dt of every probe trajectory; multiple traces in one cell
/// merge by harmonic mean. Weight 1 where data exists.
SpeedField grid_fcd(std::span<const FcdTrace> traces, const GridSpec& spec,
                    const SpeedClamp& clamp = {}, GriddingStats* stats = nullptr);

/// Each record lands in the cell holding (timestamp + dt/2, position).
SpeedField grid_loop(std::span<const LoopRecord> records, const GridSpec& spec,
                     const SpeedClamp& clamp = {}, GriddingStats* stats = nullptr);

/// Each sample becomes a straight trajectory at its mean speed; crossed cells
/// receive that speed weighted by the in-cell path share.
SpeedField grid_bt(std::span<const BtSample> samples, const GridSpec& spec,
                   const SpeedClamp& clamp = {}, GriddingStats* stats = nullptr);

/// Cell-wise weighted harmonic fusion of several sources.
///
/// `source_weights[k]` scales every cell of `fields[k]` (multiplied with that
/// field's own cell weight). Output weight is the maximum effective source
/// weight, capped at 1.
SpeedField combine_cellwise(std::span<const SpeedField> fields,
                            std::span<const WeightField> source_weights,
                            const SpeedClamp& clamp = {});

/// Unit source weights.
SpeedField combine_cellwise(std::span<const SpeedField> fields, const SpeedClamp& clamp = {});

}  // namespace trafusion
