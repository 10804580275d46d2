#include "trafusion/section_average.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>

#include "trafusion/errors.hpp"

namespace trafusion {

namespace {

constexpr double kMinTime = 1e-6;

struct Station {
  double position = 0.0;
  std::vector<std::optional<double>> by_col;
  bool reported = false;
};

// Fills every empty slot with the temporally nearest value; earlier wins ties.
std::vector<double> fill_nearest(const std::vector<std::optional<double>>& slots) {
  const std::size_t n = slots.size();
  std::vector<long long> prev(n, -1);
  std::vector<long long> next(n, -1);
  long long last = -1;
  for (std::size_t j = 0; j < n; ++j) {
    if (slots[j]) last = static_cast<long long>(j);
    prev[j] = last;
  }
  last = -1;
  for (std::size_t j = n; j-- > 0;) {
    if (slots[j]) last = static_cast<long long>(j);
    next[j] = last;
  }
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto jj = static_cast<long long>(j);
    long long pick = prev[j];
    if (pick < 0 || (next[j] >= 0 && next[j] - jj < jj - pick)) pick = next[j];
    out[j] = *slots[static_cast<std::size_t>(pick)];
  }
  return out;
}

// Linear interpolation across gaps, constant beyond the first/last value.
std::vector<double> fill_linear(const std::vector<std::optional<double>>& slots) {
  const std::size_t n = slots.size();
  std::vector<double> out(n);
  long long prev = -1;
  for (std::size_t j = 0; j < n; ++j) {
    if (!slots[j]) continue;
    const auto jj = static_cast<long long>(j);
    if (prev < 0) {
      for (std::size_t k = 0; k < j; ++k) out[k] = *slots[j];
    } else {
      const double a = *slots[static_cast<std::size_t>(prev)];
      const double b = *slots[j];
      for (long long k = prev + 1; k < jj; ++k) {
        const double f = static_cast<double>(k - prev) / static_cast<double>(jj - prev);
        out[static_cast<std::size_t>(k)] = a + f * (b - a);
      }
    }
    out[j] = *slots[j];
    prev = jj;
  }
  for (auto k = static_cast<std::size_t>(prev + 1); k < n; ++k) {
    out[k] = *slots[static_cast<std::size_t>(prev)];
  }
  return out;
}

// Adds the distance/time of segment a->b to the (section, step) bins.
void bin_segment(const GridSpec& spec, const SectionPartition& partition, TimePosition a,
                 TimePosition b, Matrix& dist, Matrix& time) {
  std::vector<double> cuts{0.0, 1.0};
  const auto add = [&cuts](double a0, double a1, double v) {
    if (a1 == a0) return;
    const double s = (v - a0) / (a1 - a0);
    if (s > 0.0 && s < 1.0) cuts.push_back(s);
  };
  for (double xb : partition.boundaries) add(a.x, b.x, xb);
  const double lo = std::max(spec.t_min(), std::min(a.t, b.t));
  const double hi = std::min(spec.t_max(), std::max(a.t, b.t));
  for (auto j = static_cast<long long>(std::ceil((lo - spec.t_min()) / spec.dt()));
       spec.t_min() + static_cast<double>(j) * spec.dt() <= hi; ++j) {
    add(a.t, b.t, spec.t_min() + static_cast<double>(j) * spec.dt());
  }
  add(a.t, b.t, spec.t_max());
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t k = 1; k < cuts.size(); ++k) {
    const double s0 = cuts[k - 1];
    const double s1 = cuts[k];
    if (s1 - s0 < 1e-12) continue;
    const double sm = 0.5 * (s0 + s1);
    const double tm = a.t + sm * (b.t - a.t);
    const double xm = a.x + sm * (b.x - a.x);
    if (!spec.contains(tm, xm)) continue;
    const std::size_t sec = partition.section_of(xm);
    const std::size_t col = col_of(spec, tm);
    dist(sec, col) += (s1 - s0) * (b.x - a.x);
    time(sec, col) += (s1 - s0) * (b.t - a.t);
  }
}

SpeedField expand_sections(const GridSpec& spec, const SectionPartition& partition,
                           const std::vector<std::vector<double>>& per_section,
                           const SpeedClamp& clamp) {
  Matrix values(spec.n_x(), spec.n_t());
  for (std::size_t i = 0; i < spec.n_x(); ++i) {
    const std::size_t sec = partition.section_of(std::min(spec.x_center(i), spec.x_max()));
    for (std::size_t j = 0; j < spec.n_t(); ++j) {
      values(i, j) = clamp.apply(per_section[sec][j]);
    }
  }
  return SpeedField(spec, std::move(values), Matrix(spec.n_x(), spec.n_t(), 1.0));
}

SpeedField average_traces(const std::vector<std::vector<TimePosition>>& paths,
                          const SectionPartition& partition, const GridSpec& spec,
                          const SectionAverageParams& params, const SpeedClamp& clamp,
                          SectionWarnings* warnings) {
  const std::size_t n_sec = partition.section_count();
  Matrix dist(n_sec, spec.n_t());
  Matrix time(n_sec, spec.n_t());
  for (const auto& path : paths) {
    for (std::size_t k = 1; k < path.size(); ++k) {
      if (!(path[k].t > path[k - 1].t)) continue;
      bin_segment(spec, partition, path[k - 1], path[k], dist, time);
    }
  }
  std::vector<std::vector<double>> per_section(n_sec);
  for (std::size_t s = 0; s < n_sec; ++s) {
    std::vector<std::optional<double>> slots(spec.n_t());
    bool any = false;
    for (std::size_t j = 0; j < spec.n_t(); ++j) {
      if (time(s, j) >= kMinTime) {
        slots[j] = std::max(0.0, dist(s, j)) / time(s, j);
        any = true;
      }
    }
    if (any) {
      per_section[s] = fill_linear(slots);
    } else {
      per_section[s].assign(spec.n_t(), params.default_fill_speed);
      if (warnings) warnings->empty_sections.push_back(s);
    }
  }
  return expand_sections(spec, partition, per_section, clamp);
}

}  // namespace

std::size_t SectionPartition::section_of(double x) const {
  const auto it = std::upper_bound(boundaries.begin() + 1, boundaries.end() - 1, x);
  return static_cast<std::size_t>(it - boundaries.begin()) - 1;
}

SectionPartition define_sections(std::span<const double> detector_positions,
                                 const GridSpec& spec, SectionWarnings* warnings) {
  std::vector<double> inside;
  for (double p : detector_positions) {
    if (p >= spec.x_min() && p <= spec.x_max()) inside.push_back(p);
  }
  std::sort(inside.begin(), inside.end());
  inside.erase(std::unique(inside.begin(), inside.end()), inside.end());

  SectionPartition partition;
  partition.boundaries.push_back(spec.x_min());
  if (inside.empty()) {
    if (warnings) warnings->no_detectors = true;
  }
  for (std::size_t k = 1; k < inside.size(); ++k) {
    partition.boundaries.push_back(0.5 * (inside[k - 1] + inside[k]));
  }
  partition.boundaries.push_back(spec.x_max());
  return partition;
}

SpeedField section_average_loop(std::span<const LoopRecord> records,
                                const SectionPartition& partition, const GridSpec& spec,
                                const SectionAverageParams&, const SpeedClamp& clamp,
                                SectionWarnings* warnings) {
  // Stations keyed by position; several ids at one position merge.
  std::map<double, Station> stations;
  std::map<std::pair<double, std::size_t>, std::pair<double, double>> sums;  // (w, w/v)
  for (const auto& r : records) {
    const double t = r.timestamp + 0.5 * spec.dt();
    if (!spec.contains(t, r.position)) continue;
    const std::size_t col = col_of(spec, t);
    auto& [w, wv] = sums[{r.position, col}];
    w += 1.0;
    wv += 1.0 / clamp.apply(r.speed);
  }
  for (const auto& [key, s] : sums) {
    auto& st = stations[key.first];
    if (st.by_col.empty()) {
      st.position = key.first;
      st.by_col.assign(spec.n_t(), std::nullopt);
    }
    st.by_col[key.second] = s.first / s.second;
    st.reported = true;
  }
  if (stations.empty()) {
    throw NoDataError("section_average_loop: no loop records inside the domain");
  }

  std::map<double, std::vector<double>> filled;
  for (const auto& [pos, st] : stations) filled[pos] = fill_nearest(st.by_col);

  const std::size_t n_sec = partition.section_count();
  std::vector<std::vector<double>> per_section(n_sec);
  for (std::size_t s = 0; s < n_sec; ++s) {
    const double lo = partition.boundaries[s];
    const double hi = partition.boundaries[s + 1];
    const double mid = 0.5 * (lo + hi);
    const std::vector<double>* own = nullptr;
    double own_dist = std::numeric_limits<double>::infinity();
    const std::vector<double>* nearest = nullptr;
    double nearest_dist = std::numeric_limits<double>::infinity();
    for (const auto& [pos, values] : filled) {
      const double d = std::abs(pos - mid);
      const bool inside = pos >= lo && (pos < hi || (s + 1 == n_sec && pos <= hi));
      if (inside && d < own_dist) {
        own = &values;
        own_dist = d;
      }
      if (d < nearest_dist) {
        nearest = &values;
        nearest_dist = d;
      }
    }
    if (!own) {
      own = nearest;
      if (warnings) warnings->silent_detectors.push_back("section " + std::to_string(s));
    }
    per_section[s] = *own;
  }
  return expand_sections(spec, partition, per_section, clamp);
}

SpeedField section_average_traces(std::span<const FcdTrace> traces,
                                  const SectionPartition& partition, const GridSpec& spec,
                                  const SectionAverageParams& params, const SpeedClamp& clamp,
                                  SectionWarnings* warnings) {
  std::vector<std::vector<TimePosition>> paths;
  paths.reserve(traces.size());
  for (const auto& t : traces) paths.push_back(t.samples);
  return average_traces(paths, partition, spec, params, clamp, warnings);
}

SpeedField section_average_traces(std::span<const BtSample> samples,
                                  const SectionPartition& partition, const GridSpec& spec,
                                  const SectionAverageParams& params, const SpeedClamp& clamp,
                                  SectionWarnings* warnings) {
  std::vector<std::vector<TimePosition>> paths;
  paths.reserve(samples.size());
  for (const auto& s : samples) {
    paths.push_back({{s.t_start, s.x_start}, {s.t_end, s.x_end}});
  }
  return average_traces(paths, partition, spec, params, clamp, warnings);
}

SpeedField reconstruct_section_average(std::span<const SpeedField> sources,
                                       const SpeedClamp& clamp) {
  if (sources.empty()) {
    throw NoDataError("reconstruct_section_average: no sources");
  }
  const GridSpec& spec = sources.front().spec();
  for (const auto& s : sources) require_same_grid(spec, s.spec(), "reconstruct_section_average");
  Matrix values(spec.n_x(), spec.n_t());
  Matrix weights(spec.n_x(), spec.n_t());
  for (std::size_t i = 0; i < spec.n_x(); ++i) {
    for (std::size_t j = 0; j < spec.n_t(); ++j) {
      double sum = 0.0;
      int count = 0;
      for (const auto& s : sources) {
        if (!s.has_data(i, j)) continue;
        sum += s.speed(i, j);
        ++count;
      }
      if (count > 0) {
        values(i, j) = clamp.apply(sum / count);
        weights(i, j) = 1.0;
      }
    }
  }
  return SpeedField(spec, std::move(values), std::move(weights));
}

}  // namespace trafusion
