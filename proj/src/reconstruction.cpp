#include "trafusion/reconstruction.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "trafusion/asm.hpp"
#include "trafusion/bt_weight.hpp"
#include "trafusion/errors.hpp"
#include "trafusion/psm.hpp"
#include "trafusion/section_average.hpp"

namespace trafusion {

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

SectionPartition kilometre_sections(const GridSpec& spec) {
  SectionPartition p;
  p.boundaries.push_back(spec.x_min());
  for (double b = spec.x_min() + 1000.0; b < spec.x_max(); b += 1000.0) p.boundaries.push_back(b);
  p.boundaries.push_back(spec.x_max());
  return p;
}

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

SpeedField section_average_subset(const SensorData& data, const PreparedInputs& prepared,
                                  const SensorSet& sensors, const GridSpec& spec,
                                  const ReconstructionParams& params) {
  const SectionPartition loop_sections = prepared.loop_positions.empty()
                                             ? kilometre_sections(spec)
                                             : define_sections(prepared.loop_positions, spec);
  std::vector<SpeedField> sources;
  if (sensors.loop && !prepared.loop.empty()) {
    sources.push_back(
        section_average_loop(data.loops, loop_sections, spec, params.section, params.clamp));
  }
  if (sensors.fcd && !prepared.fcd.empty()) {
    sources.push_back(
        section_average_traces(data.fcd, loop_sections, spec, params.section, params.clamp));
  }
  if (sensors.bt && !prepared.bt.empty()) {
    const SectionPartition bt_sections = define_sections(prepared.bt_receivers, spec);
    sources.push_back(
        section_average_traces(data.bt, bt_sections, spec, params.section, params.clamp));
  }
  if (sources.empty()) {
    throw NoDataError("section average: no data for sensors " + sensors.name());
  }
  return reconstruct_section_average(sources, params.clamp);
}

}  // namespace

std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::section_average:
      return "SEC-AVG";
    case Algorithm::adaptive_smoothing:
      return "ASM";
    case Algorithm::psm:
      return "PSM";
    case Algorithm::psm_w:
      return "PSM-W";
  }
  return "?";
}

std::string_view algorithm_token(Algorithm a) {
  switch (a) {
    case Algorithm::section_average:
      return "secavg";
    case Algorithm::adaptive_smoothing:
      return "asm";
    case Algorithm::psm:
      return "psm";
    case Algorithm::psm_w:
      return "psmw";
  }
  return "?";
}

std::optional<Algorithm> parse_algorithm(std::string_view token) {
  const std::string t = upper(token);
  for (Algorithm a : kAllAlgorithms) {
    if (t == upper(algorithm_token(a)) || t == algorithm_name(a)) return a;
  }
  return std::nullopt;
}

std::string SensorSet::name() const {
  std::string out;
  const auto add = [&out](const char* part) {
    if (!out.empty()) out += '+';
    out += part;
  };
  if (loop) add("LOOP");
  if (fcd) add("FCD");
  if (bt) add("BT");
  return out;
}

bool SensorSet::contains(const SensorSet& other) const {
  return (code() & other.code()) == other.code();
}

std::optional<SensorSet> parse_sensor_set(std::string_view text) {
  SensorSet s;
  const std::string t = upper(text);
  std::size_t start = 0;
  while (start <= t.size()) {
    std::size_t end = t.find('+', start);
    if (end == std::string::npos) end = t.size();
    const std::string part = t.substr(start, end - start);
    if (part == "LOOP") {
      s.loop = true;
    } else if (part == "FCD") {
      s.fcd = true;
    } else if (part == "BT") {
      s.bt = true;
    } else {
      return std::nullopt;
    }
    start = end + 1;
  }
  if (s.empty()) return std::nullopt;
  return s;
}

std::vector<SensorSet> sensor_subsets(const SensorSet& available) {
  std::vector<SensorSet> out;
  for (int code = 1; code <= 7; ++code) {
    const SensorSet s{(code & 1) != 0, (code & 2) != 0, (code & 4) != 0};
    if (available.contains(s)) out.push_back(s);
  }
  return out;
}

PreparedInputs prepare_inputs(const SensorData& data, const GridSpec& spec,
                              const ReconstructionParams& params) {
  std::vector<double> loop_positions;
  for (const auto& r : data.loops) loop_positions.push_back(r.position);
  std::vector<double> receivers;
  for (const auto& s : data.bt) {
    receivers.push_back(s.x_start);
    receivers.push_back(s.x_end);
  }
  return {grid_loop(data.loops, spec, params.clamp),
          grid_fcd(data.fcd, spec, params.clamp),
          grid_bt(data.bt, spec, params.clamp),
          bt_weight_field(data.bt, spec, params.bt),
          sorted_unique(std::move(loop_positions)),
          sorted_unique(std::move(receivers))};
}

SpeedField reconstruct(Algorithm algorithm, const SensorData& data, const PreparedInputs& prepared,
                       const SensorSet& sensors, const GridSpec& spec,
                       const ReconstructionParams& params) {
  if (sensors.empty()) {
    throw NoDataError("reconstruct: empty sensor set");
  }
  if (algorithm == Algorithm::section_average) {
    return section_average_subset(data, prepared, sensors, spec, params);
  }

  const SpeedField none(spec);
  const SpeedField& loop = sensors.loop ? prepared.loop : none;
  const SpeedField& fcd = sensors.fcd ? prepared.fcd : none;
  const SpeedField& bt = sensors.bt ? prepared.bt : none;

  if (algorithm == Algorithm::psm_w && !bt.empty()) {
    return reconstruct_psm_w(loop, fcd, bt, prepared.bt_weights, params);
  }
  std::vector<SpeedField> sources;
  if (sensors.loop) sources.push_back(loop);
  if (sensors.fcd) sources.push_back(fcd);
  if (sensors.bt) sources.push_back(bt);
  const SpeedField raw = combine_cellwise(sources, params.clamp);
  if (raw.empty()) {
    throw NoDataError("reconstruct: no data for sensors " + sensors.name());
  }
  if (algorithm == Algorithm::adaptive_smoothing) {
    return reconstruct_asm(raw, params);
  }
  return reconstruct_psm(raw, params);
}

SpeedField reconstruct(Algorithm algorithm, const SensorData& data, const SensorSet& sensors,
                       const GridSpec& spec, const ReconstructionParams& params) {
  return reconstruct(algorithm, data, prepare_inputs(data, spec, params), sensors, spec, params);
}

GridSpec infer_grid(const SensorData& data, double dx, double dt) {
  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  double t_lo = x_lo;
  double t_hi = -x_lo;
  const auto see = [&](double t, double x) {
    x_lo = std::min(x_lo, x);
    x_hi = std::max(x_hi, x);
    t_lo = std::min(t_lo, t);
    t_hi = std::max(t_hi, t);
  };
  for (const auto& r : data.loops) {
    see(r.timestamp, r.position);
    see(r.timestamp + dt, r.position);
  }
  for (const auto& tr : data.fcd) {
    for (const auto& s : tr.samples) see(s.t, s.x);
  }
  for (const auto& s : data.bt) {
    see(s.t_start, s.x_start);
    see(s.t_end, s.x_end);
  }
  if (!std::isfinite(x_lo)) {
    throw NoDataError("infer_grid: no records");
  }
  const double x_min = std::floor(x_lo / dx) * dx;
  const double t_min = std::floor(t_lo / dt) * dt;
  const double x_max = std::max(x_min + dx, std::ceil(x_hi / dx) * dx);
  const double t_max = std::max(t_min + dt, std::ceil(t_hi / dt) * dt);
  return GridSpec(x_min, x_max, t_min, t_max, dx, dt);
}

}  // namespace trafusion
