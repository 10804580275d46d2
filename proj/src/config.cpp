#include "trafusion/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "trafusion/errors.hpp"
#include "trafusion/text.hpp"

namespace trafusion {

namespace {

bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

// Drops a trailing comment that is not inside a quoted string.
std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    if (line[k] == '"') quoted = !quoted;
    if (line[k] == '#' && !quoted) return line.substr(0, k);
  }
  return line;
}

ConfigDocument::Value parse_value(std::string_view text, const std::string& source,
                                  std::size_t line) {
  text = trim(text);
  if (text.empty()) throw ParseError(source, line, "missing value");
  if (text == "true") return true;
  if (text == "false") return false;
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"') throw ParseError(source, line, "unterminated string");
    return std::string(text.substr(1, text.size() - 2));
  }
  if (text.front() == '[') {
    if (text.back() != ']') throw ParseError(source, line, "unterminated array");
    std::vector<double> out;
    std::string_view body = trim(text.substr(1, text.size() - 2));
    while (!body.empty()) {
      const auto comma = body.find(',');
      const auto item = trim(body.substr(0, comma));
      if (!item.empty() || comma != std::string_view::npos) {
        const auto v = parse_number(item);
        if (!v) throw ParseError(source, line, "array items must be numbers: '" + std::string(item) + "'");
        out.push_back(*v);
      }
      if (comma == std::string_view::npos) break;
      body = trim(body.substr(comma + 1));
    }
    return out;
  }
  const auto v = parse_number(text);
  if (!v) throw ParseError(source, line, "cannot parse value '" + std::string(text) + "'");
  return *v;
}

std::string kmh(double v) { return format_converted(v / kKmh); }

std::string number_list(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ", ";
    out += format_number(v[k]);
  }
  return out + "]";
}

}  // namespace

ConfigDocument ConfigDocument::parse(std::string_view text, std::string source) {
  ConfigDocument doc;
  doc.source_ = std::move(source);
  std::string prefix;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = trim(strip_comment(raw));
    if (line.empty()) continue;

    if (line.front() == '[') {
      const bool array = line.size() > 4 && line.substr(0, 2) == "[[";
      const std::size_t open = array ? 2 : 1;
      if (line.size() < 2 * open + 1 || line.substr(line.size() - open) != (array ? "]]" : "]")) {
        throw ParseError(doc.source_, line_no, "malformed table header");
      }
      const std::string name(trim(line.substr(open, line.size() - 2 * open)));
      if (!valid_name(name)) throw ParseError(doc.source_, line_no, "invalid table name '" + name + "'");
      if (array) {
        const std::size_t index = doc.arrays_[name]++;
        prefix = name + "." + std::to_string(index) + ".";
      } else {
        if (!doc.tables_.insert(name).second) {
          throw ParseError(doc.source_, line_no, "duplicate table [" + name + "]");
        }
        prefix = name + ".";
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(doc.source_, line_no, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    if (!valid_name(key)) throw ParseError(doc.source_, line_no, "invalid key '" + key + "'");
    const std::string full = prefix + key;
    if (doc.entries_.count(full)) throw ParseError(doc.source_, line_no, "duplicate key '" + full + "'");
    doc.entries_[full] = {parse_value(line.substr(eq + 1), doc.source_, line_no), line_no};
  }
  return doc;
}

ConfigDocument ConfigDocument::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

bool ConfigDocument::has_table(const std::string& table) const { return tables_.count(table) != 0; }

std::size_t ConfigDocument::array_size(const std::string& name) const {
  const auto it = arrays_.find(name);
  return it == arrays_.end() ? 0 : it->second;
}

const ConfigDocument::Entry* ConfigDocument::find(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return nullptr;
  used_.insert(key);
  return &it->second;
}

std::string ConfigDocument::where(const std::string& key) const {
  const auto it = entries_.find(key);
  return source_ + (it == entries_.end() ? "" : ":" + std::to_string(it->second.line));
}

double ConfigDocument::number(const std::string& key) const {
  const Entry* e = find(key);
  if (!e) throw ConfigError(key, "missing in " + source_);
  if (const auto* v = std::get_if<double>(&e->value)) return *v;
  throw ConfigError(key, "expected a number (" + where(key) + ")");
}

double ConfigDocument::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

bool ConfigDocument::flag_or(const std::string& key, bool fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  if (const auto* v = std::get_if<bool>(&e->value)) return *v;
  throw ConfigError(key, "expected true or false (" + where(key) + ")");
}

std::vector<double> ConfigDocument::numbers(const std::string& key) const {
  const Entry* e = find(key);
  if (!e) throw ConfigError(key, "missing in " + source_);
  if (const auto* v = std::get_if<std::vector<double>>(&e->value)) return *v;
  throw ConfigError(key, "expected a number array (" + where(key) + ")");
}

std::vector<double> ConfigDocument::numbers_or(const std::string& key,
                                               std::vector<double> fallback) const {
  return has(key) ? numbers(key) : std::move(fallback);
}

void ConfigDocument::reject_unused() const {
  for (const auto& [key, entry] : entries_) {
    if (!used_.count(key)) throw ConfigError(key, "unknown key (" + where(key) + ")");
  }
}

GridSpec grid_from_config(const ConfigDocument& doc) {
  try {
    return GridSpec(doc.number("grid.x_min_m"), doc.number("grid.x_max_m"),
                    doc.number("grid.t_min_s"), doc.number("grid.t_max_s"),
                    doc.number_or("grid.dx_m", 100.0), doc.number_or("grid.dt_s", 60.0));
  } catch (const DomainError& e) {
    throw ConfigError("grid", e.what());
  }
}

std::optional<GridSpec> optional_grid_from_config(const ConfigDocument& doc) {
  if (!doc.has_table("grid")) return std::nullopt;
  return grid_from_config(doc);
}

ScenarioConfig scenario_from_config(const ConfigDocument& doc) {
  ScenarioConfig cfg;
  cfg.grid = grid_from_config(doc);
  cfg.free_speed = doc.number_or("traffic.free_speed_kmh", cfg.free_speed / kKmh) * kKmh;
  cfg.ramp = doc.number_or("traffic.ramp_m", cfg.ramp);
  cfg.flow = doc.number_or("traffic.flow_veh_per_h", cfg.flow);

  cfg.loop_positions = doc.numbers_or("sensors.loop_positions_m", cfg.loop_positions);
  cfg.fcd_penetration = doc.number_or("sensors.fcd_penetration", cfg.fcd_penetration);
  cfg.fcd_interval = doc.number_or("sensors.fcd_interval_s", cfg.fcd_interval);
  cfg.fcd_jitter = doc.number_or("sensors.fcd_jitter_s", cfg.fcd_jitter);
  cfg.bt_receivers = doc.numbers_or("sensors.bt_receivers_m", cfg.bt_receivers);
  cfg.bt_detection_rate = doc.number_or("sensors.bt_detection_rate", cfg.bt_detection_rate);

  cfg.noise.loop_speed_std =
      doc.number_or("noise.loop_speed_std_kmh", cfg.noise.loop_speed_std / kKmh) * kKmh;
  cfg.noise.fcd_speed_std =
      doc.number_or("noise.fcd_speed_std_kmh", cfg.noise.fcd_speed_std / kKmh) * kKmh;
  cfg.noise.bt_relative_std = doc.number_or("noise.bt_relative_std", cfg.noise.bt_relative_std);

  for (std::size_t k = 0; k < doc.array_size("bottleneck"); ++k) {
    const std::string p = "bottleneck." + std::to_string(k) + ".";
    Bottleneck b;
    b.location = doc.number(p + "location_m");
    b.onset = doc.number(p + "onset_s");
    b.duration = doc.number(p + "duration_s");
    b.sync_speed = doc.number(p + "sync_speed_kmh") * kKmh;
    b.length = doc.number(p + "length_m");
    cfg.bottlenecks.push_back(b);
  }
  for (std::size_t k = 0; k < doc.array_size("moving_jam"); ++k) {
    const std::string p = "moving_jam." + std::to_string(k) + ".";
    MovingJam j;
    j.origin_t = doc.number(p + "origin_t_s");
    j.origin_x = doc.number(p + "origin_x_m");
    j.wave_speed = doc.number_or(p + "wave_speed_kmh", j.wave_speed / kKmh) * kKmh;
    j.width = doc.number(p + "width_m");
    j.jam_speed = doc.number(p + "jam_speed_kmh") * kKmh;
    j.duration = doc.number(p + "duration_s");
    cfg.moving_jams.push_back(j);
  }
  doc.reject_unused();
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw ConfigError("scenario", e.what());
  }
  return cfg;
}

std::string scenario_to_text(const ScenarioConfig& cfg) {
  std::ostringstream o;
  const GridSpec& g = cfg.grid;
  o << "# Synthetic scenario. Speeds in km/h, positions in m, times in s.\n\n"
    << "[grid]\n"
    << "x_min_m = " << format_number(g.x_min()) << "\n"
    << "x_max_m = " << format_number(g.x_max()) << "\n"
    << "t_min_s = " << format_number(g.t_min()) << "\n"
    << "t_max_s = " << format_number(g.t_max()) << "\n"
    << "dx_m = " << format_number(g.dx()) << "\n"
    << "dt_s = " << format_number(g.dt()) << "\n\n"
    << "[traffic]\n"
    << "free_speed_kmh = " << kmh(cfg.free_speed) << "\n"
    << "ramp_m = " << format_number(cfg.ramp) << "\n"
    << "flow_veh_per_h = " << format_number(cfg.flow) << "\n\n"
    << "[sensors]\n"
    << "loop_positions_m = " << number_list(cfg.loop_positions) << "\n"
    << "fcd_penetration = " << format_number(cfg.fcd_penetration) << "\n"
    << "fcd_interval_s = " << format_number(cfg.fcd_interval) << "\n"
    << "fcd_jitter_s = " << format_number(cfg.fcd_jitter) << "\n"
    << "bt_receivers_m = " << number_list(cfg.bt_receivers) << "\n"
    << "bt_detection_rate = " << format_number(cfg.bt_detection_rate) << "\n\n"
    << "[noise]\n"
    << "loop_speed_std_kmh = " << kmh(cfg.noise.loop_speed_std) << "\n"
    << "fcd_speed_std_kmh = " << kmh(cfg.noise.fcd_speed_std) << "\n"
    << "bt_relative_std = " << format_number(cfg.noise.bt_relative_std) << "\n";
  for (const auto& b : cfg.bottlenecks) {
    o << "\n[[bottleneck]]\n"
      << "location_m = " << format_number(b.location) << "\n"
      << "onset_s = " << format_number(b.onset) << "\n"
      << "duration_s = " << format_number(b.duration) << "\n"
      << "sync_speed_kmh = " << kmh(b.sync_speed) << "\n"
      << "length_m = " << format_number(b.length) << "\n";
  }
  for (const auto& j : cfg.moving_jams) {
    o << "\n[[moving_jam]]\n"
      << "origin_t_s = " << format_number(j.origin_t) << "\n"
      << "origin_x_m = " << format_number(j.origin_x) << "\n"
      << "wave_speed_kmh = " << kmh(j.wave_speed) << "\n"
      << "width_m = " << format_number(j.width) << "\n"
      << "jam_speed_kmh = " << kmh(j.jam_speed) << "\n"
      << "duration_s = " << format_number(j.duration) << "\n";
  }
  return o.str();
}

ReconstructionParams params_from_config(const ConfigDocument& doc) {
  ReconstructionParams p;
  const auto speed = [&doc](const std::string& key, double fallback) {
    return doc.number_or(key, fallback / kKmh) * kKmh;
  };
  p.clamp.v_floor = speed("clamp.v_floor_kmh", p.clamp.v_floor);
  p.clamp.v_ceil = speed("clamp.v_ceil_kmh", p.clamp.v_ceil);

  auto& a = p.adaptive;
  a.sigma = doc.number_or("kernel.sigma_m", a.sigma);
  a.tau = doc.number_or("kernel.tau_s", a.tau);
  a.c_cong = speed("asm.c_cong_kmh", a.c_cong);
  a.c_free = speed("asm.c_free_kmh", a.c_free);
  a.v_thr = speed("asm.v_thr_kmh", a.v_thr);
  a.delta_v = speed("asm.delta_v_kmh", a.delta_v);
  a.combine_inverse = doc.flag_or("asm.combine_inverse", a.combine_inverse);

  auto& s = p.psm;
  s.free_sync_center = speed("psm.free_sync_center_kmh", s.free_sync_center);
  s.sync_wmj_center = speed("psm.sync_wmj_center_kmh", s.sync_wmj_center);
  s.steepness = speed("psm.steepness_kmh", s.steepness);
  s.sigma_sync = doc.number_or("psm.sigma_sync_m", s.sigma_sync);
  s.sync_stationary_kernel = doc.flag_or("psm.sync_stationary_kernel", s.sync_stationary_kernel);

  p.bt.gamma = doc.number_or("bt_weight.gamma_m_s", p.bt.gamma);
  p.bt.v_min = speed("bt_weight.v_min_kmh", p.bt.v_min);
  p.bt.v_max = speed("bt_weight.v_max_kmh", p.bt.v_max);

  p.section.default_fill_speed =
      speed("section_average.default_fill_speed_kmh", p.section.default_fill_speed);

  // [grid] belongs to the same file but is read separately.
  for (const char* k : {"x_min_m", "x_max_m", "t_min_s", "t_max_s", "dx_m", "dt_s"}) {
    if (doc.has(std::string("grid.") + k)) doc.number(std::string("grid.") + k);
  }
  doc.reject_unused();

  const auto fail = [](const char* key, const std::string& what) { throw ConfigError(key, what); };
  if (!(p.clamp.v_floor > 0.0 && p.clamp.v_ceil > p.clamp.v_floor)) {
    fail("clamp", "need 0 < v_floor_kmh < v_ceil_kmh");
  }
  try {
    a.congested_kernel().validate();
    a.free_kernel().validate();
  } catch (const DomainError& e) {
    fail("kernel", e.what());
  }
  if (!(a.delta_v > 0.0)) fail("asm.delta_v_kmh", "must be positive");
  if (!(s.steepness > 0.0)) fail("psm.steepness_kmh", "must be positive");
  if (!(s.sigma_sync > 0.0)) fail("psm.sigma_sync_m", "must be positive");
  if (!(s.free_sync_center > s.sync_wmj_center)) {
    fail("psm", "free_sync_center_kmh must exceed sync_wmj_center_kmh");
  }
  try {
    p.bt.validate();
  } catch (const DomainError& e) {
    fail("bt_weight", e.what());
  }
  if (!(p.section.default_fill_speed > 0.0)) {
    fail("section_average.default_fill_speed_kmh", "must be positive");
  }
  return p;
}

std::string params_to_text(const ReconstructionParams& p) {
  std::ostringstream o;
  const auto& a = p.adaptive;
  const auto& s = p.psm;
  o << "# Reconstruction parameters. Speeds in km/h, lengths in m, times in s.\n\n"
    << "[clamp]\n"
    << "v_floor_kmh = " << kmh(p.clamp.v_floor) << "\n"
    << "v_ceil_kmh = " << kmh(p.clamp.v_ceil) << "\n\n"
    << "# Smoothing widths of both characteristic kernels.\n"
    << "[kernel]\n"
    << "sigma_m = " << format_number(a.sigma) << "\n"
    << "tau_s = " << format_number(a.tau) << "\n\n"
    << "[asm]\n"
    << "c_cong_kmh = " << kmh(a.c_cong) << "\n"
    << "c_free_kmh = " << kmh(a.c_free) << "\n"
    << "v_thr_kmh = " << kmh(a.v_thr) << "\n"
    << "delta_v_kmh = " << kmh(a.delta_v) << "\n"
    << "combine_inverse = " << (a.combine_inverse ? "true" : "false") << "\n\n"
    << "# Logistic phase memberships and the stationary sync pilot.\n"
    << "[psm]\n"
    << "free_sync_center_kmh = " << kmh(s.free_sync_center) << "\n"
    << "sync_wmj_center_kmh = " << kmh(s.sync_wmj_center) << "\n"
    << "steepness_kmh = " << kmh(s.steepness) << "\n"
    << "sigma_sync_m = " << format_number(s.sigma_sync) << "\n"
    << "sync_stationary_kernel = " << (s.sync_stationary_kernel ? "true" : "false") << "\n\n"
    << "# BT trust w = exp(-A / gamma) from the feasible-trajectory area A.\n"
    << "[bt_weight]\n"
    << "gamma_m_s = " << format_number(p.bt.gamma) << "\n"
    << "v_min_kmh = " << kmh(p.bt.v_min) << "\n"
    << "v_max_kmh = " << kmh(p.bt.v_max) << "\n\n"
    << "[section_average]\n"
    << "default_fill_speed_kmh = " << kmh(p.section.default_fill_speed) << "\n";
  return o.str();
}

}  // namespace trafusion
