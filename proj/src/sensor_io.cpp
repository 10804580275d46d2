#include "trafusion/sensor_io.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "trafusion/errors.hpp"
#include "trafusion/text.hpp"

namespace trafusion {

namespace {

std::vector<std::string_view> split_row(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                         : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Reads a headed CSV and hands each data row, reordered to `columns`, to `row`.
template <std::size_t N, typename RowFn>
void read_table(std::istream& in, const std::string& source,
                const std::array<const char*, N>& columns, RowFn row) {
  std::string line;
  std::size_t line_no = 0;
  std::array<std::size_t, N> index{};
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    const auto cells = split_row(line);
    if (!have_header) {
      for (std::size_t c = 0; c < N; ++c) {
        const auto it = std::find(cells.begin(), cells.end(), std::string_view(columns[c]));
        if (it == cells.end()) {
          throw ParseError(source, line_no, std::string("header lacks column '") + columns[c] + "'");
        }
        index[c] = static_cast<std::size_t>(it - cells.begin());
      }
      have_header = true;
      continue;
    }
    std::array<std::string_view, N> ordered;
    for (std::size_t c = 0; c < N; ++c) {
      if (index[c] >= cells.size()) throw ParseError(source, line_no, "too few columns");
      ordered[c] = cells[index[c]];
    }
    row(ordered, line_no);
  }
}

double number_cell(std::string_view cell, const std::string& source, std::size_t line,
                   const char* column) {
  const auto v = parse_number(cell);
  if (!v || !std::isfinite(*v)) {
    throw ParseError(source, line, std::string("column '") + column + "': not a number '" +
                                       std::string(cell) + "'");
  }
  return *v;
}

std::string id_cell(std::string_view cell, const std::string& source, std::size_t line) {
  if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') cell = cell.substr(1, cell.size() - 2);
  if (cell.empty()) throw ParseError(source, line, "empty id");
  return std::string(cell);
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open file");
  return in;
}

// "# key=value,key=value" metadata line.
std::map<std::string, std::string> parse_meta(const std::string& line, const std::string& source,
                                              std::size_t line_no) {
  if (line.empty() || line.front() != '#') throw ParseError(source, line_no, "expected '#' metadata line");
  std::map<std::string, std::string> out;
  for (auto item : split_row(std::string_view(line).substr(1))) {
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, line_no, "expected key=value");
    out[std::string(trim(item.substr(0, eq)))] = std::string(trim(item.substr(eq + 1)));
  }
  return out;
}

}  // namespace

std::vector<LoopRecord> read_loops(std::istream& in, const std::string& source) {
  static constexpr std::array<const char*, 4> cols{"detector_id", "position_m", "timestamp_s",
                                                   "speed_mps"};
  std::vector<LoopRecord> out;
  read_table(in, source, cols, [&](const auto& c, std::size_t line) {
    out.push_back({id_cell(c[0], source, line), number_cell(c[1], source, line, cols[1]),
                   number_cell(c[2], source, line, cols[2]), number_cell(c[3], source, line, cols[3])});
  });
  return out;
}

std::vector<FcdTrace> read_fcd(std::istream& in, const std::string& source) {
  static constexpr std::array<const char*, 3> cols{"trace_id", "timestamp_s", "position_m"};
  std::vector<FcdTrace> out;
  std::map<std::string, std::size_t> slot;
  read_table(in, source, cols, [&](const auto& c, std::size_t line) {
    std::string id = id_cell(c[0], source, line);
    const TimePosition p{number_cell(c[1], source, line, cols[1]),
                         number_cell(c[2], source, line, cols[2])};
    const auto [it, fresh] = slot.try_emplace(id, out.size());
    if (fresh) out.push_back({std::move(id), {}});
    out[it->second].samples.push_back(p);
  });
  for (auto& tr : out) {
    std::stable_sort(tr.samples.begin(), tr.samples.end(),
                     [](const TimePosition& a, const TimePosition& b) { return a.t < b.t; });
  }
  return out;
}

std::vector<BtSample> read_bt(std::istream& in, const std::string& source) {
  static constexpr std::array<const char*, 5> cols{"trace_id", "x_start_m", "x_end_m", "t_start_s",
                                                   "t_end_s"};
  std::vector<BtSample> out;
  read_table(in, source, cols, [&](const auto& c, std::size_t line) {
    out.push_back({id_cell(c[0], source, line), number_cell(c[1], source, line, cols[1]),
                   number_cell(c[2], source, line, cols[2]), number_cell(c[3], source, line, cols[3]),
                   number_cell(c[4], source, line, cols[4])});
  });
  return out;
}

std::vector<LoopRecord> read_loops_file(const std::string& path) {
  auto in = open_input(path);
  return read_loops(in, path);
}

std::vector<FcdTrace> read_fcd_file(const std::string& path) {
  auto in = open_input(path);
  return read_fcd(in, path);
}

std::vector<BtSample> read_bt_file(const std::string& path) {
  auto in = open_input(path);
  return read_bt(in, path);
}

void write_loops(std::ostream& out, const std::vector<LoopRecord>& records) {
  out << "detector_id,position_m,timestamp_s,speed_mps\n";
  for (const auto& r : records) {
    out << r.detector_id << ',' << format_number(r.position) << ',' << format_number(r.timestamp)
        << ',' << format_number(r.speed) << '\n';
  }
}

void write_fcd(std::ostream& out, const std::vector<FcdTrace>& traces) {
  out << "trace_id,timestamp_s,position_m\n";
  for (const auto& tr : traces) {
    for (const auto& s : tr.samples) {
      out << tr.trace_id << ',' << format_number(s.t) << ',' << format_number(s.x) << '\n';
    }
  }
}

void write_bt(std::ostream& out, const std::vector<BtSample>& samples) {
  out << "trace_id,x_start_m,x_end_m,t_start_s,t_end_s\n";
  for (const auto& s : samples) {
    out << s.trace_id << ',' << format_number(s.x_start) << ',' << format_number(s.x_end) << ','
        << format_number(s.t_start) << ',' << format_number(s.t_end) << '\n';
  }
}

void write_field_dump(std::ostream& out, const GridSpec& spec, const Matrix& values,
                      const std::string& units) {
  if (values.rows() != spec.n_x() || values.cols() != spec.n_t()) {
    throw ShapeError("write_field_dump: matrix does not match the grid");
  }
  out << "# x_min_m=" << format_number(spec.x_min()) << ",x_max_m=" << format_number(spec.x_max())
      << ",t_min_s=" << format_number(spec.t_min()) << ",t_max_s=" << format_number(spec.t_max())
      << '\n'
      << "# dx_m=" << format_number(spec.dx()) << ",dt_s=" << format_number(spec.dt()) << '\n'
      << "# units=" << units << '\n'
      << "# rows=space,n_x=" << spec.n_x() << ",cols=time,n_t=" << spec.n_t() << '\n';
  for (std::size_t i = 0; i < values.rows(); ++i) {
    for (std::size_t j = 0; j < values.cols(); ++j) {
      if (j) out << ',';
      out << format_number(values(i, j));
    }
    out << '\n';
  }
}

FieldDump read_field_dump(std::istream& in, const std::string& source) {
  std::array<std::string, 4> header;
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (!std::getline(in, header[k])) throw ParseError(source, k + 1, "truncated metadata header");
  }
  auto extent = parse_meta(header[0], source, 1);
  auto res = parse_meta(header[1], source, 2);
  auto units = parse_meta(header[2], source, 3);
  const auto get = [&](std::map<std::string, std::string>& m, const char* key, std::size_t line) {
    const auto it = m.find(key);
    const auto v = it == m.end() ? std::nullopt : parse_number(it->second);
    if (!v) throw ParseError(source, line, std::string("missing or invalid '") + key + "'");
    return *v;
  };
  GridSpec spec(get(extent, "x_min_m", 1), get(extent, "x_max_m", 1), get(extent, "t_min_s", 1),
                get(extent, "t_max_s", 1), get(res, "dx_m", 2), get(res, "dt_s", 2));
  Matrix values(spec.n_x(), spec.n_t());
  std::string line;
  std::size_t row = 0;
  std::size_t line_no = header.size();
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (row >= spec.n_x()) throw ParseError(source, line_no, "more rows than n_x");
    const auto cells = split_row(line);
    if (cells.size() != spec.n_t()) throw ParseError(source, line_no, "row length differs from n_t");
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const auto v = parse_number(cells[j]);
      if (!v) throw ParseError(source, line_no, "not a number '" + std::string(cells[j]) + "'");
      values(row, j) = *v;
    }
    ++row;
  }
  if (row != spec.n_x()) throw ParseError(source, line_no, "fewer rows than n_x");
  return {spec, std::move(values), units["units"]};
}

SpeedField field_from_dumps(const FieldDump& speeds, const FieldDump* weights) {
  if (weights) {
    require_same_grid(speeds.spec, weights->spec, "field_from_dumps");
    return SpeedField(speeds.spec, speeds.values, weights->values);
  }
  Matrix w(speeds.values.rows(), speeds.values.cols());
  for (std::size_t i = 0; i < w.rows(); ++i) {
    for (std::size_t j = 0; j < w.cols(); ++j) w(i, j) = speeds.values(i, j) > 0.0 ? 1.0 : 0.0;
  }
  return SpeedField(speeds.spec, speeds.values, std::move(w));
}

}  // namespace trafusion
