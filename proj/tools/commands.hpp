#pragma once

// Subcommands of the trafusion tool, callable without going through argv.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "trafusion/evaluation.hpp"
#include "trafusion/reconstruction.hpp"

namespace trafusion::cli {

enum ExitCode : int { kSuccess = 0, kUsageError = 1, kDataError = 2 };

enum class OutputFormat { csv, json };

struct InputPaths {
  std::optional<std::string> loops;
  std::optional<std::string> fcd;
  std::optional<std::string> bt;

  bool any() const { return loops || fcd || bt; }
};

SensorData load_inputs(const InputPaths& paths);

struct SynthOptions {
  std::optional<std::string> config_path;  // overrides the preset
  std::string preset = "desk";             // desk | large
  bool noiseless = false;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
};

/// Writes loops.csv, fcd.csv, bt.csv, truth.csv and scenario.toml.
std::vector<std::string> cmd_synth(const SynthOptions& opts);

struct ReconstructOptions {
  InputPaths inputs;
  Algorithm algorithm = Algorithm::psm_w;
  std::optional<SensorSet> sensors;  // default: every supplied source
  std::optional<std::string> params_path;
  std::string out_dir = ".";
  OutputFormat format = OutputFormat::csv;
};

/// Writes estimate.csv and weights.csv (or estimate.json). Returns the
/// algorithm actually run.
Algorithm cmd_reconstruct(const ReconstructOptions& opts, std::ostream& log);

struct EvaluateOptions {
  InputPaths inputs;
  std::vector<Algorithm> algorithms;   // empty: all four
  std::vector<SensorSet> combinations; // empty: every subset of the inputs
  std::size_t runs = 50;
  std::uint64_t seed = 1;
  double train_ratio = 0.5;
  std::size_t threads = 0;
  bool exclude_extrapolated = false;
  bool record_runtime = false;
  std::optional<std::string> params_path;
  std::string out_dir = ".";
  OutputFormat format = OutputFormat::csv;
};

/// Runs the experiment and writes the per-run, aggregate and best-of
/// tables.
ExperimentTable cmd_evaluate(const EvaluateOptions& opts, std::ostream& log);

// Table renderers, shared with the tests.
std::string results_csv(const ExperimentTable& table, bool record_runtime);
std::string aggregate_csv(const ExperimentTable& table);
std::string best_per_combination_csv(const ExperimentTable& table);
std::string best_per_algorithm_csv(const ExperimentTable& table);
std::string timing_csv(const ExperimentTable& table);
std::string experiment_json(const ExperimentTable& table, bool record_runtime);

/// Full argv entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace trafusion::cli
