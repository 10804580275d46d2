#pragma once

// CSV ingestion of the three sensor formats and the field dump format.
//
//   loops.csv  detector_id,position_m,timestamp_s,speed_mps
//   fcd.csv    trace_id,timestamp_s,position_m
//   bt.csv     trace_id,x_start_m,x_end_m,t_start_s,t_end_s
//
// A header row is required. Field dumps start with four `#` metadata lines
// (extent, resolution, units, layout) followed by one CSV row per space cell.

#include <iosfwd>
#include <string>
#include <vector>

#include "trafusion/grid.hpp"
#include "trafusion/sensors.hpp"

namespace trafusion {

std::vector<LoopRecord> read_loops(std::istream& in, const std::string& source = "<loops>");
std::vector<FcdTrace> read_fcd(std::istream& in, const std::string& source = "<fcd>");
std::vector<BtSample> read_bt(std::istream& in, const std::string& source = "<bt>");

std::vector<LoopRecord> read_loops_file(const std::string& path);
std::vector<FcdTrace> read_fcd_file(const std::string& path);
std::vector<BtSample> read_bt_file(const std::string& path);

void write_loops(std::ostream& out, const std::vector<LoopRecord>& records);
void write_fcd(std::ostream& out, const std::vector<FcdTrace>& traces);
void write_bt(std::ostream& out, const std::vector<BtSample>& samples);

/// Dumps a matrix on `spec`; `units` names the cell quantity (e.g. "m/s").
void write_field_dump(std::ostream& out, const GridSpec& spec, const Matrix& values,
                      const std::string& units);

struct FieldDump {
  GridSpec spec;
  Matrix values;
  std::string units;
};

FieldDump read_field_dump(std::istream& in, const std::string& source = "<field>");

/// Speeds plus optional weights. Without weights every positive cell gets
/// weight 1.
SpeedField field_from_dumps(const FieldDump& speeds, const FieldDump* weights = nullptr);

}  // namespace trafusion
