#include "trafusion/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "trafusion/errors.hpp"

namespace trafusion {

PathResult integrate_path(const SpeedField& field, double t_start, double x_start, double x_end,
                          double t_stop, const SpeedClamp& clamp) {
  const GridSpec& spec = field.spec();
  if (!spec.contains(std::clamp(t_start, spec.t_min(), spec.t_max()), x_start) ||
      x_end < x_start || x_end > spec.x_max()) {
    throw DomainError("integrate_path: start/end outside the domain");
  }
  if (t_start < spec.t_min()) {
    throw DomainError("integrate_path: start time before t_min");
  }

  PathResult out;
  out.breakpoints.push_back({t_start, x_start});
  double t = t_start;
  double x = x_start;
  std::size_t i = row_of(spec, x);
  // Column index may run past the grid; speeds then come from the last column.
  std::size_t j = t >= spec.t_max() ? spec.n_t() - 1 : col_of(spec, t);
  if (t > spec.t_max()) out.extrapolated = true;

  while (x < x_end) {
    if (t >= t_stop) {
      return out;
    }
    const std::size_t col = std::min(j, spec.n_t() - 1);
    const double v = clamp.apply(field.speed(i, col));
    const double x_next = std::min(spec.x_lower(i + 1), x_end);
    const double t_cell_end = j + 1 < spec.n_t() ? spec.t_lower(j + 1)
                                                 : std::numeric_limits<double>::infinity();
    const double t_event = std::min(t_cell_end, t_stop);
    const double t_arrive = t + (x_next - x) / v;

    if (t_arrive <= t_event) {
      t = t_arrive;
      x = x_next;
      if (x < x_end) ++i;
    } else {
      x += v * (t_event - t);
      t = t_event;
      if (t_event == t_cell_end) ++j;
    }
    if (t > spec.t_max()) out.extrapolated = true;
    out.breakpoints.push_back({t, x});
  }
  out.reached = true;
  return out;
}

double position_at(const std::vector<TimePosition>& path, double t) {
  if (path.empty()) return 0.0;
  if (t <= path.front().t) return path.front().x;
  if (t >= path.back().t) return path.back().x;
  const auto it = std::upper_bound(path.begin(), path.end(), t,
                                   [](double v, const TimePosition& p) { return v < p.t; });
  const auto& b = *it;
  const auto& a = *(it - 1);
  if (b.t == a.t) return b.x;
  return a.x + (b.x - a.x) * (t - a.t) / (b.t - a.t);
}

TrajectoryResult virtual_trajectory(const SpeedField& estimate, double t_start, double x_start,
                                    double x_end, const SpeedClamp& clamp) {
  const GridSpec& spec = estimate.spec();
  if (!(x_end > x_start) || !spec.contains(t_start, x_start) || x_end > spec.x_max()) {
    throw DomainError("virtual_trajectory: need x_start < x_end inside the domain");
  }
  const PathResult path = integrate_path(estimate, t_start, x_start, x_end,
                                         std::numeric_limits<double>::infinity(), clamp);
  return {path.breakpoints.back().t, path.extrapolated};
}

}  // namespace trafusion
