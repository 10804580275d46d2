#pragma once

// Exact integration of a vehicle through a piecewise-constant speed field.
//
// The vehicle keeps the speed of its current cell until it reaches the next
// spatial or temporal cell boundary, then switches. Beyond t_max the last time
// column is held constant and the result is flagged as extrapolated.

#include <limits>
#include <vector>

#include "trafusion/grid.hpp"
#include "trafusion/sensors.hpp"

namespace trafusion {

struct PathResult {
  std::vector<TimePosition> breakpoints;  // includes start and end points
  bool reached = false;                   // arrived at x_end before t_stop
  bool extrapolated = false;              // used time past t_max
};

/// Drives from (t_start, x_start) towards x_end, stopping early at t_stop.
/// Requires x_start inside the domain and x_start <= x_end <= x_max.
PathResult integrate_path(const SpeedField& field, double t_start, double x_start, double x_end,
                          double t_stop = std::numeric_limits<double>::infinity(),
                          const SpeedClamp& clamp = {});

/// Position on a breakpoint path at time t (linear between breakpoints,
/// clamped to the path's ends).
double position_at(const std::vector<TimePosition>& path, double t);

struct TrajectoryResult {
  double t_end = 0.0;
  bool extrapolated = false;
};

/// Arrival time at x_end of a vehicle entering at (t_start, x_start).
/// Throws DomainError unless x_start < x_end both lie in the domain and
/// t_start is inside [t_min, t_max].
TrajectoryResult virtual_trajectory(const SpeedField& estimate, double t_start, double x_start,
                                    double x_end, const SpeedClamp& clamp = {});

}  // namespace trafusion
