#include "trafusion/sensors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "trafusion/errors.hpp"

namespace trafusion {

namespace {

constexpr double kMinCellTime = 1e-6;  // s
constexpr double kMinPiece = 1e-12;    // parameter units

// Parameters s in (0,1) where coordinate a0 + s*(a1-a0) crosses a grid line.
void add_crossings(std::vector<double>& out, double a0, double a1, double lo, double step,
                   std::size_t n) {
  if (a1 == a0) return;
  const double lo_idx = (std::min(a0, a1) - lo) / step;
  const double hi_idx = (std::max(a0, a1) - lo) / step;
  const auto first = static_cast<long long>(std::max(0.0, std::ceil(lo_idx)));
  const auto last = static_cast<long long>(std::min(static_cast<double>(n), std::floor(hi_idx)));
  for (long long k = first; k <= last; ++k) {
    const double s = (lo + static_cast<double>(k) * step - a0) / (a1 - a0);
    if (s > 0.0 && s < 1.0) out.push_back(s);
  }
}

}  // namespace

void validate(const LoopRecord& r, const SpeedClamp& clamp) {
  if (!std::isfinite(r.position) || !std::isfinite(r.timestamp) || !std::isfinite(r.speed)) {
    throw DomainError("loop record '" + r.detector_id + "' has a non-finite field");
  }
  if (r.speed < 0.0 || r.speed > clamp.v_ceil) {
    throw DomainError("loop record '" + r.detector_id + "' speed outside [0, v_ceil]");
  }
}

void validate(const FcdTrace& trace, const SpeedClamp& clamp) {
  if (trace.samples.size() < 2) {
    throw DomainError("FCD trace '" + trace.trace_id + "' has fewer than 2 samples");
  }
  for (std::size_t k = 1; k < trace.samples.size(); ++k) {
    const auto& a = trace.samples[k - 1];
    const auto& b = trace.samples[k];
    if (!(b.t > a.t)) {
      throw DomainError("FCD trace '" + trace.trace_id + "' timestamps not strictly increasing");
    }
    if (b.x < a.x) {
      throw DomainError("FCD trace '" + trace.trace_id + "' moves backwards");
    }
    if ((b.x - a.x) / (b.t - a.t) > clamp.v_ceil * (1.0 + 1e-12)) {
      throw DomainError("FCD trace '" + trace.trace_id + "' exceeds v_ceil");
    }
  }
}

void validate(const BtSample& s, const SpeedClamp& clamp) {
  if (!(s.x_end > s.x_start) || !(s.t_end > s.t_start)) {
    throw DomainError("BT sample '" + s.trace_id + "' must have x_end > x_start and t_end > t_start");
  }
  if (s.mean_speed() > clamp.v_ceil * (1.0 + 1e-12)) {
    throw DomainError("BT sample '" + s.trace_id + "' mean speed exceeds v_ceil");
  }
}

std::vector<CellPiece> trace_segment(const GridSpec& spec, TimePosition from, TimePosition to) {
  std::vector<double> cuts{0.0, 1.0};
  add_crossings(cuts, from.t, to.t, spec.t_min(), spec.dt(), spec.n_t());
  add_crossings(cuts, from.x, to.x, spec.x_min(), spec.dx(), spec.n_x());
  // Domain edges that are not on a grid line (last cell is partial).
  for (const auto& [a0, a1, edge] : {std::tuple{from.t, to.t, spec.t_max()},
                                     std::tuple{from.x, to.x, spec.x_max()}}) {
    if (a1 != a0) {
      const double s = (edge - a0) / (a1 - a0);
      if (s > 0.0 && s < 1.0) cuts.push_back(s);
    }
  }
  std::sort(cuts.begin(), cuts.end());

  std::vector<CellPiece> pieces;
  const double seg_dt = to.t - from.t;
  const double seg_dx = to.x - from.x;
  for (std::size_t k = 1; k < cuts.size(); ++k) {
    const double s0 = cuts[k - 1];
    const double s1 = cuts[k];
    if (s1 - s0 < kMinPiece) continue;
    const double sm = 0.5 * (s0 + s1);
    const double tm = from.t + sm * seg_dt;
    const double xm = from.x + sm * seg_dx;
    if (!spec.contains(tm, xm)) continue;
    const CellIndex cell{row_of(spec, xm), col_of(spec, tm)};
    const double frac = s1 - s0;
    if (!pieces.empty() && pieces.back().cell == cell) {
      pieces.back().dt += frac * seg_dt;
      pieces.back().dx += frac * seg_dx;
      pieces.back().share += frac;
    } else {
      pieces.push_back({cell, frac * seg_dt, frac * seg_dx, frac});
    }
  }
  return pieces;
}

std::vector<CellPiece> bt_path(const GridSpec& spec, const BtSample& s) {
  return trace_segment(spec, {s.t_start, s.x_start}, {s.t_end, s.x_end});
}

SpeedField grid_fcd(std::span<const FcdTrace> traces, const GridSpec& spec,
                    const SpeedClamp& clamp, GriddingStats* stats) {
  HarmonicAccumulator acc(spec);
  GriddingStats local;
  std::map<CellIndex, std::pair<double, double>> per_cell;  // (dt, dx)
  for (const auto& trace : traces) {
    if (trace.samples.size() < 2) {
      ++local.skipped;
      continue;
    }
    per_cell.clear();
    for (std::size_t k = 1; k < trace.samples.size(); ++k) {
      const auto& a = trace.samples[k - 1];
      const auto& b = trace.samples[k];
      if (!(b.t > a.t)) continue;
      for (const auto& p : trace_segment(spec, a, b)) {
        auto& [dt, dx] = per_cell[p.cell];
        dt += p.dt;
        dx += p.dx;
      }
    }
    if (per_cell.empty()) ++local.discarded;
    for (const auto& [cell, acc_dt_dx] : per_cell) {
      const auto [dt, dx] = acc_dt_dx;
      if (dt < kMinCellTime) continue;
      acc.add(cell.row, cell.col, std::max(0.0, dx) / dt, 1.0, clamp);
    }
  }
  if (stats) *stats = local;
  return acc.finish(HarmonicAccumulator::WeightRule::unit, clamp);
}

SpeedField grid_loop(std::span<const LoopRecord> records, const GridSpec& spec,
                     const SpeedClamp& clamp, GriddingStats* stats) {
  HarmonicAccumulator acc(spec);
  GriddingStats local;
  for (const auto& r : records) {
    const double t = r.timestamp + 0.5 * spec.dt();
    if (!spec.contains(t, r.position) || !std::isfinite(r.speed)) {
      ++local.discarded;
      continue;
    }
    const auto cell = cell_index(spec, t, r.position);
    acc.add(cell.row, cell.col, r.speed, 1.0, clamp);
  }
  if (stats) *stats = local;
  return acc.finish(HarmonicAccumulator::WeightRule::unit, clamp);
}

SpeedField grid_bt(std::span<const BtSample> samples, const GridSpec& spec,
                   const SpeedClamp& clamp, GriddingStats* stats) {
  HarmonicAccumulator acc(spec);
  GriddingStats local;
  for (const auto& s : samples) {
    if (!(s.x_end > s.x_start) || !(s.t_end > s.t_start)) {
      ++local.skipped;
      continue;
    }
    const auto path = bt_path(spec, s);
    if (path.empty()) {
      ++local.discarded;
      continue;
    }
    const double v = s.mean_speed();
    for (const auto& p : path) {
      acc.add(p.cell.row, p.cell.col, v, p.share, clamp);
    }
  }
  if (stats) *stats = local;
  return acc.finish(HarmonicAccumulator::WeightRule::unit, clamp);
}

SpeedField combine_cellwise(std::span<const SpeedField> fields,
                            std::span<const WeightField> source_weights,
                            const SpeedClamp& clamp) {
  if (fields.empty()) {
    throw NoDataError("combine_cellwise: no source fields");
  }
  if (source_weights.size() != fields.size()) {
    throw ShapeError("combine_cellwise: one weight field per source required");
  }
  const GridSpec& spec = fields.front().spec();
  for (std::size_t k = 0; k < fields.size(); ++k) {
    require_same_grid(spec, fields[k].spec(), "combine_cellwise");
    require_same_grid(spec, source_weights[k].spec(), "combine_cellwise");
  }
  HarmonicAccumulator acc(spec);
  for (std::size_t k = 0; k < fields.size(); ++k) {
    const auto& f = fields[k];
    const auto& sw = source_weights[k];
    for (std::size_t i = 0; i < spec.n_x(); ++i) {
      for (std::size_t j = 0; j < spec.n_t(); ++j) {
        const double w = f.weight(i, j) * sw(i, j);
        if (w > 0.0) acc.add(i, j, f.speed(i, j), w, clamp);
      }
    }
  }
  return acc.finish(HarmonicAccumulator::WeightRule::max_source, clamp);
}

SpeedField combine_cellwise(std::span<const SpeedField> fields, const SpeedClamp& clamp) {
  if (fields.empty()) {
    throw NoDataError("combine_cellwise: no source fields");
  }
  std::vector<WeightField> unit;
  unit.reserve(fields.size());
  for (const auto& f : fields) unit.emplace_back(f.spec(), 1.0);
  return combine_cellwise(fields, unit, clamp);
}

}  // namespace trafusion
