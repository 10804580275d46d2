#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "trafusion/config.hpp"
#include "trafusion/errors.hpp"
#include "trafusion/scenario.hpp"
#include "trafusion/sensor_io.hpp"
#include "trafusion/text.hpp"

namespace trafusion::cli {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

ReconstructionParams load_params(const std::optional<std::string>& path,
                                 std::optional<GridSpec>* grid = nullptr) {
  if (!path) return {};
  const auto doc = ConfigDocument::load(*path);
  if (grid) *grid = optional_grid_from_config(doc);
  return params_from_config(doc);
}

std::string metric(double v) { return std::isfinite(v) ? format_number(v) : "nan"; }

double imae_out(double s_per_m) { return std::isfinite(s_per_m) ? imae_to_min_per_km(s_per_m) : s_per_m; }

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

// Lowest finite value of `key` among `items`; the first wins ties.
template <typename It, typename Key>
It best_of(It first, It last, Key key) {
  It best = last;
  for (It it = first; it != last; ++it) {
    const double v = key(*it);
    if (std::isfinite(v) && (best == last || v < key(*best))) best = it;
  }
  return best;
}

std::vector<Algorithm> parse_algorithms(const std::vector<std::string>& tokens) {
  std::vector<Algorithm> out;
  for (const auto& t : tokens) {
    if (t == "all") return {std::begin(kAllAlgorithms), std::end(kAllAlgorithms)};
    const auto a = parse_algorithm(t);
    if (!a) throw CLI::ValidationError("--algorithm", "unknown algorithm '" + t + "'");
    if (std::find(out.begin(), out.end(), *a) == out.end()) out.push_back(*a);
  }
  return out;
}

std::vector<SensorSet> parse_combinations(const std::vector<std::string>& tokens) {
  std::vector<SensorSet> out;
  for (const auto& t : tokens) {
    const auto s = parse_sensor_set(t);
    if (!s) throw CLI::ValidationError("--combinations", "unknown sensor combination '" + t + "'");
    out.push_back(*s);
  }
  return out;
}

}  // namespace

SensorData load_inputs(const InputPaths& paths) {
  SensorData data;
  if (paths.loops) data.loops = read_loops_file(*paths.loops);
  if (paths.fcd) data.fcd = read_fcd_file(*paths.fcd);
  if (paths.bt) data.bt = read_bt_file(*paths.bt);
  return data;
}

std::vector<std::string> cmd_synth(const SynthOptions& opts) {
  ScenarioConfig cfg;
  if (opts.config_path) {
    cfg = scenario_from_config(ConfigDocument::load(*opts.config_path));
  } else if (opts.preset == "desk") {
    cfg = ScenarioConfig::desk_default();
  } else if (opts.preset == "large") {
    cfg = ScenarioConfig::large_scale();
  } else {
    throw CLI::ValidationError("--preset", "expected desk or large, got '" + opts.preset + "'");
  }
  if (opts.noiseless) cfg = cfg.noiseless();

  const Scenario sc = simulate(cfg, opts.seed);
  std::ostringstream loops, fcd, bt, truth;
  write_loops(loops, sc.sensors.loops);
  write_fcd(fcd, sc.sensors.fcd);
  write_bt(bt, sc.sensors.bt);
  write_field_dump(truth, sc.truth.spec(), sc.truth.values(), "m/s");

  const fs::path dir = prepare_dir(opts.out_dir);
  const std::vector<std::pair<std::string, std::string>> files{
      {"loops.csv", loops.str()},
      {"fcd.csv", fcd.str()},
      {"bt.csv", bt.str()},
      {"truth.csv", truth.str()},
      {"scenario.toml", scenario_to_text(cfg)},
  };
  std::vector<std::string> written;
  for (const auto& [name, text] : files) {
    write_text(dir / name, text);
    written.push_back((dir / name).string());
  }
  return written;
}

Algorithm cmd_reconstruct(const ReconstructOptions& opts, std::ostream& log) {
  if (!opts.inputs.any()) throw CLI::ValidationError("inputs", "need at least one --input-* file");
  std::optional<GridSpec> grid;
  const ReconstructionParams params = load_params(opts.params_path, &grid);
  const SensorData data = load_inputs(opts.inputs);
  const SensorSet available = data.available();
  if (available.empty()) throw NoDataError("reconstruct: input files contain no records");

  SensorSet sensors = opts.sensors.value_or(available);
  if (!available.contains(sensors)) {
    throw NoDataError("reconstruct: sensors " + sensors.name() + " requested but only " +
                      available.name() + " supplied");
  }
  Algorithm algorithm = opts.algorithm;
  if (algorithm == Algorithm::psm_w && !sensors.bt) {
    log << "warning: psmw needs BT input; falling back to psm\n";
    algorithm = Algorithm::psm;
  }
  const GridSpec spec = grid.value_or(infer_grid(data));
  const SpeedField estimate = reconstruct(algorithm, data, sensors, spec, params);

  const fs::path dir = prepare_dir(opts.out_dir);
  if (opts.format == OutputFormat::json) {
    nlohmann::ordered_json j;
    j["algorithm"] = algorithm_name(algorithm);
    j["sensors"] = sensors.name();
    j["grid"] = {{"x_min_m", spec.x_min()}, {"x_max_m", spec.x_max()}, {"t_min_s", spec.t_min()},
                 {"t_max_s", spec.t_max()}, {"dx_m", spec.dx()},       {"dt_s", spec.dt()}};
    auto rows = [&](const Matrix& m) {
      auto arr = nlohmann::json::array();
      for (std::size_t i = 0; i < m.rows(); ++i) {
        std::vector<double> r(m.cols());
        for (std::size_t c = 0; c < m.cols(); ++c) r[c] = m(i, c);
        arr.push_back(r);
      }
      return arr;
    };
    j["speed_mps"] = rows(estimate.values());
    j["weight"] = rows(estimate.weights());
    write_text(dir / "estimate.json", j.dump() + "\n");
  } else {
    std::ostringstream speed, weight;
    write_field_dump(speed, spec, estimate.values(), "m/s");
    write_field_dump(weight, spec, estimate.weights(), "1");
    write_text(dir / "estimate.csv", speed.str());
    write_text(dir / "weights.csv", weight.str());
  }
  return algorithm;
}

ExperimentTable cmd_evaluate(const EvaluateOptions& opts, std::ostream& log) {
  if (!opts.inputs.any()) throw CLI::ValidationError("inputs", "need at least one --input-* file");
  std::optional<GridSpec> grid;
  ExperimentConfig config;
  config.params = load_params(opts.params_path, &grid);
  const SensorData data = load_inputs(opts.inputs);
  const SensorSet available = data.available();
  if (available.empty()) throw NoDataError("evaluate: input files contain no records");

  if (!opts.algorithms.empty()) config.algorithms = opts.algorithms;
  config.combinations = opts.combinations;
  for (const auto& c : config.combinations) {
    if (!available.contains(c)) {
      throw NoDataError("evaluate: combination " + c.name() + " needs inputs that were not supplied");
    }
  }
  config.runs = opts.runs;
  config.seed = opts.seed;
  config.train_ratio = opts.train_ratio;
  config.threads = opts.threads;
  config.exclude_extrapolated = opts.exclude_extrapolated;

  const GridSpec spec = grid.value_or(infer_grid(data));
  const auto start = std::chrono::steady_clock::now();
  ExperimentTable table = run_experiment(data, spec, config);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::size_t failed = 0;
  for (const auto& r : table.rows) failed += r.failed ? 1 : 0;
  if (failed == table.rows.size()) throw NoDataError("evaluate: every job failed");
  if (failed) log << "warning: " << failed << " of " << table.rows.size() << " jobs failed\n";
  log << "evaluated " << table.rows.size() << " jobs in " << format_converted(elapsed) << " s\n";

  const fs::path dir = prepare_dir(opts.out_dir);
  if (opts.format == OutputFormat::json) {
    write_text(dir / "results.json", experiment_json(table, opts.record_runtime));
  } else {
    write_text(dir / "results.csv", results_csv(table, opts.record_runtime));
    write_text(dir / "aggregate.csv", aggregate_csv(table));
    write_text(dir / "best_per_combination.csv", best_per_combination_csv(table));
    write_text(dir / "best_per_algorithm.csv", best_per_algorithm_csv(table));
  }
  write_text(dir / "timing.csv", timing_csv(table));
  return table;
}

std::string results_csv(const ExperimentTable& table, bool record_runtime) {
  std::ostringstream o;
  o << "algorithm,sensors,run,imae_min_per_km,mape,runtime_s,flags\n";
  for (const auto& r : table.rows) {
    o << algorithm_name(r.algorithm) << ',' << r.sensors.name() << ',' << r.run << ','
      << metric(imae_out(r.imae)) << ',' << metric(r.mape) << ','
      << (record_runtime ? format_number(r.runtime_s) : "0") << ',' << quoted(r.flags) << '\n';
  }
  return o.str();
}

std::string aggregate_csv(const ExperimentTable& table) {
  std::ostringstream o;
  o << "algorithm,sensors,runs,imae_mean_min_per_km,imae_std_min_per_km,mape_mean,mape_std\n";
  for (const auto& a : table.aggregate) {
    o << algorithm_name(a.algorithm) << ',' << a.sensors.name() << ',' << a.runs << ','
      << metric(imae_out(a.imae_mean)) << ',' << metric(imae_out(a.imae_std)) << ','
      << metric(a.mape_mean) << ',' << metric(a.mape_std) << '\n';
  }
  return o.str();
}

std::string best_per_combination_csv(const ExperimentTable& table) {
  std::map<int, std::vector<AggregateResult>> by_combo;
  for (const auto& a : table.aggregate) by_combo[a.sensors.code()].push_back(a);
  std::ostringstream o;
  o << "sensors,best_imae_algorithm,imae_mean_min_per_km,best_mape_algorithm,mape_mean\n";
  for (const auto& [code, aggs] : by_combo) {
    const auto bi = best_of(aggs.begin(), aggs.end(), [](const auto& a) { return a.imae_mean; });
    const auto bm = best_of(aggs.begin(), aggs.end(), [](const auto& a) { return a.mape_mean; });
    o << aggs.front().sensors.name() << ','
      << (bi == aggs.end() ? "" : std::string(algorithm_name(bi->algorithm))) << ','
      << metric(bi == aggs.end() ? NAN : imae_out(bi->imae_mean)) << ','
      << (bm == aggs.end() ? "" : std::string(algorithm_name(bm->algorithm))) << ','
      << metric(bm == aggs.end() ? NAN : bm->mape_mean) << '\n';
  }
  return o.str();
}

std::string best_per_algorithm_csv(const ExperimentTable& table) {
  std::map<int, std::vector<AggregateResult>> by_alg;
  std::map<int, std::vector<AggregateResult>> by_combo;
  for (const auto& a : table.aggregate) {
    by_alg[static_cast<int>(a.algorithm)].push_back(a);
    by_combo[a.sensors.code()].push_back(a);
  }
  std::map<int, std::pair<int, int>> wins;
  for (const auto& [code, aggs] : by_combo) {
    const auto bi = best_of(aggs.begin(), aggs.end(), [](const auto& a) { return a.imae_mean; });
    const auto bm = best_of(aggs.begin(), aggs.end(), [](const auto& a) { return a.mape_mean; });
    if (bi != aggs.end()) ++wins[static_cast<int>(bi->algorithm)].first;
    if (bm != aggs.end()) ++wins[static_cast<int>(bm->algorithm)].second;
  }
  std::ostringstream o;
  o << "algorithm,best_imae_sensors,imae_mean_min_per_km,best_mape_sensors,mape_mean,imae_wins,"
       "mape_wins\n";
  for (const auto& [alg, aggs] : by_alg) {
    const auto bi = best_of(aggs.begin(), aggs.end(), [](const auto& a) { return a.imae_mean; });
    const auto bm = best_of(aggs.begin(), aggs.end(), [](const auto& a) { return a.mape_mean; });
    o << algorithm_name(static_cast<Algorithm>(alg)) << ','
      << (bi == aggs.end() ? "" : bi->sensors.name()) << ','
      << metric(bi == aggs.end() ? NAN : imae_out(bi->imae_mean)) << ','
      << (bm == aggs.end() ? "" : bm->sensors.name()) << ','
      << metric(bm == aggs.end() ? NAN : bm->mape_mean) << ',' << wins[alg].first << ','
      << wins[alg].second << '\n';
  }
  return o.str();
}

std::string timing_csv(const ExperimentTable& table) {
  std::ostringstream o;
  o << "algorithm,sensors,run,runtime_s\n";
  for (const auto& r : table.rows) {
    o << algorithm_name(r.algorithm) << ',' << r.sensors.name() << ',' << r.run << ','
      << format_number(r.runtime_s) << '\n';
  }
  return o.str();
}

std::string experiment_json(const ExperimentTable& table, bool record_runtime) {
  const auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
  nlohmann::ordered_json j;
  j["results"] = nlohmann::json::array();
  for (const auto& r : table.rows) {
    j["results"].push_back(nlohmann::ordered_json{
        {"algorithm", algorithm_name(r.algorithm)},
        {"sensors", r.sensors.name()},
        {"run", r.run},
        {"imae_min_per_km", num(imae_out(r.imae))},
        {"mape", num(r.mape)},
        {"runtime_s", record_runtime ? r.runtime_s : 0.0},
        {"failed", r.failed},
        {"flags", r.flags},
    });
  }
  j["aggregate"] = nlohmann::json::array();
  for (const auto& a : table.aggregate) {
    j["aggregate"].push_back(nlohmann::ordered_json{
        {"algorithm", algorithm_name(a.algorithm)},
        {"sensors", a.sensors.name()},
        {"runs", a.runs},
        {"imae_mean_min_per_km", num(imae_out(a.imae_mean))},
        {"imae_std_min_per_km", num(imae_out(a.imae_std))},
        {"mape_mean", num(a.mape_mean)},
        {"mape_std", num(a.mape_std)},
    });
  }
  return j.dump(2) + "\n";
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Traffic speed-field reconstruction from loop, FCD and Bluetooth data"};
  app.require_subcommand(1);

  const auto add_inputs = [](CLI::App* cmd, InputPaths& in) {
    cmd->add_option("--input-loops", in.loops, "Loop detector CSV")->check(CLI::ExistingFile);
    cmd->add_option("--input-fcd", in.fcd, "FCD trace CSV")->check(CLI::ExistingFile);
    cmd->add_option("--input-bt", in.bt, "Bluetooth travel-time CSV")->check(CLI::ExistingFile);
  };
  const std::map<std::string, OutputFormat> formats{{"csv", OutputFormat::csv},
                                                    {"json", OutputFormat::json}};

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Simulate a scenario and its sensor data");
  synth_cmd->add_option("--config", synth.config_path, "Scenario config file")->check(CLI::ExistingFile);
  synth_cmd->add_option("--preset", synth.preset, "Built-in scenario: desk or large")
      ->check(CLI::IsMember({"desk", "large"}));
  synth_cmd->add_flag("--noiseless", synth.noiseless, "Disable all sensor noise");
  synth_cmd->add_option("--out-dir", synth.out_dir, "Output directory");
  synth_cmd->add_option("--seed", synth.seed, "Random seed");

  ReconstructOptions rec;
  std::string rec_alg = "psmw";
  std::string rec_sensors;
  auto* rec_cmd = app.add_subcommand("reconstruct", "Reconstruct a speed field");
  add_inputs(rec_cmd, rec.inputs);
  rec_cmd->add_option("--algorithm", rec_alg, "secavg | asm | psm | psmw");
  rec_cmd->add_option("--sensors", rec_sensors, "Sensor subset, e.g. LOOP+FCD (default: all inputs)");
  rec_cmd->add_option("--params", rec.params_path, "Parameter file")->check(CLI::ExistingFile);
  rec_cmd->add_option("--out-dir", rec.out_dir, "Output directory");
  rec_cmd->add_option("--format", rec.format, "csv | json")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));

  EvaluateOptions ev;
  std::vector<std::string> ev_algs;
  std::vector<std::string> ev_combos;
  auto* ev_cmd = app.add_subcommand("evaluate", "Repeated split/reconstruct/score experiment");
  add_inputs(ev_cmd, ev.inputs);
  ev_cmd->add_option("--algorithm", ev_algs, "Algorithms (default: all)")->delimiter(',');
  ev_cmd->add_option("--combinations", ev_combos, "Sensor combinations (default: all subsets)")
      ->delimiter(',');
  ev_cmd->add_option("--runs", ev.runs, "Repetitions")->check(CLI::PositiveNumber);
  ev_cmd->add_option("--seed", ev.seed, "Random seed");
  ev_cmd->add_option("--train-ratio", ev.train_ratio, "Training share")->check(CLI::Range(0.0, 1.0));
  ev_cmd->add_option("--threads", ev.threads, "Workers (default: TRAFUSION_THREADS or all cores)");
  ev_cmd->add_flag("--exclude-extrapolated", ev.exclude_extrapolated,
                   "Skip BT samples whose virtual trajectory leaves the time domain");
  ev_cmd->add_flag("--record-runtime", ev.record_runtime,
                   "Write measured runtimes into results (breaks byte-identical output)");
  ev_cmd->add_option("--params", ev.params_path, "Parameter file")->check(CLI::ExistingFile);
  ev_cmd->add_option("--out-dir", ev.out_dir, "Output directory");
  ev_cmd->add_option("--format", ev.format, "csv | json")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));

  auto* params_cmd = app.add_subcommand("params", "Print the default parameter file");

  try {
    app.parse(argc, argv);
    if (*synth_cmd) {
      for (const auto& f : cmd_synth(synth)) out << f << '\n';
    } else if (*rec_cmd) {
      rec.algorithm = parse_algorithms({rec_alg}).at(0);
      if (!rec_sensors.empty()) rec.sensors = parse_combinations({rec_sensors}).at(0);
      const Algorithm used = cmd_reconstruct(rec, err);
      out << algorithm_name(used) << " estimate written to " << rec.out_dir << '\n';
    } else if (*ev_cmd) {
      ev.algorithms = parse_algorithms(ev_algs);
      ev.combinations = parse_combinations(ev_combos);
      cmd_evaluate(ev, err);
      out << "results written to " << ev.out_dir << '\n';
    } else if (*params_cmd) {
      out << params_to_text({});
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kSuccess;
}

}  // namespace trafusion::cli
