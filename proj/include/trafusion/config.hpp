#pragma once

// Plain-text configuration in a small TOML subset: [table] and [[array]]
// headers, `key = value` with numbers, booleans, quoted strings and flat
// number arrays, and `#` comments. Keys carry their unit as a suffix
// (`_m`, `_s`, `_kmh`); speeds are given in km/h.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "trafusion/grid.hpp"
#include "trafusion/params.hpp"
#include "trafusion/scenario.hpp"

namespace trafusion {

class ConfigDocument {
 public:
  using Value = std::variant<double, bool, std::string, std::vector<double>>;

  struct Entry {
    Value value;
    std::size_t line = 0;
  };

  /// Throws ParseError with the offending line.
  static ConfigDocument parse(std::string_view text, std::string source = "<config>");
  static ConfigDocument load(const std::string& path);

  const std::string& source() const { return source_; }
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  bool has_table(const std::string& table) const;
  /// Number of [[name]] entries; their keys are `name.<k>.field`.
  std::size_t array_size(const std::string& name) const;

  // Typed getters mark the key as used. Missing or mistyped keys throw
  // ConfigError naming the key.
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  bool flag_or(const std::string& key, bool fallback) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<double> numbers_or(const std::string& key, std::vector<double> fallback) const;

  /// Throws ConfigError for the first key never read.
  void reject_unused() const;

 private:
  const Entry* find(const std::string& key) const;
  std::string where(const std::string& key) const;

  std::string source_;
  std::map<std::string, Entry> entries_;
  std::set<std::string> tables_;
  std::map<std::string, std::size_t> arrays_;
  mutable std::set<std::string> used_;
};

/// [grid] with x_min_m, x_max_m, t_min_s, t_max_s and optional dx_m, dt_s.
GridSpec grid_from_config(const ConfigDocument& doc);
std::optional<GridSpec> optional_grid_from_config(const ConfigDocument& doc);

/// Scenario file: [grid], [traffic], [sensors], [noise], [[bottleneck]],
/// [[moving_jam]]. Everything except [grid] falls back to the defaults of
/// ScenarioConfig. Rejects unknown keys.
ScenarioConfig scenario_from_config(const ConfigDocument& doc);
std::string scenario_to_text(const ScenarioConfig& cfg);

/// Parameter file: [clamp], [kernel], [asm], [psm], [bt_weight],
/// [section_average] and an optional [grid]. Missing keys keep defaults.
ReconstructionParams params_from_config(const ConfigDocument& doc);
std::string params_to_text(const ReconstructionParams& params);

}  // namespace trafusion
