#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "markovopt/algorithms.hpp"
#include "markovopt/markov_chain.hpp"
#include "markovopt/run_record.hpp"

namespace markovopt {

/// Parsed experiment document.
///
/// Layout:
///   {"name": str, "problem": {...}, "kernel": {...}, "oracle": {...},
///    "algorithm": {"name": "rasgd" | "rasgd_restarts" | "randomized_gd"
///                  | "reg", "params": "auto" | {...}},
///    "iterations": N, "seeds": [..], "metrics": [..],
///    "record_every": 1, "initial_point": [..] | {"kind": "zeros"},
///    "stop": {"metric": .., "threshold": ..}, "output": "dir",
///    "threads": 0}
/// Missing params entries are filled by the parameter constructors.
struct ExperimentConfig {
  nlohmann::json document;
  std::string name;
  nlohmann::json problem;
  nlohmann::json kernel;
  nlohmann::json oracle;
  std::string algorithm;
  nlohmann::json params;
  std::uint64_t iterations = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<Metric> metrics;
  std::uint64_t record_every = 1;
  nlohmann::json initial_point;
  std::optional<StopRule> stop;
  std::string output;
  unsigned threads = 0;
};

/// Throws ConfigError on malformed or unresolvable documents.
ExperimentConfig parse_experiment_config(const nlohmann::json& document);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// {"kind": "two_state", "epsilon"} | {"kind": "perturbed", "epsilon", "phi"}
/// | {"kind": "regression", "Q", "epsilon"} | {"kind": "matrix", "states",
/// "rows"} | {"kind": "kronecker", "first", "second"}.
FiniteMarkovKernel kernel_from_spec(const nlohmann::json& spec);

/// Problem, kernel and the constants the parameter constructors need.
struct ExperimentSetup {
  std::shared_ptr<const SmoothProblem> smooth;
  std::shared_ptr<const VIProblem> vi;
  std::shared_ptr<const FiniteMarkovKernel> kernel;
  int tau = 1;
  GrowthParams growth;
  Vector x0;
  /// Fully resolved algorithm parameters.
  nlohmann::json resolved;

  /// Fresh oracle with its own call meter.
  std::shared_ptr<NoisyOracle> make_oracle() const;

  nlohmann::json oracle_spec;
};

ExperimentSetup prepare_experiment(const ExperimentConfig& config);

/// Chain and level generator seeds derived from a run seed.
std::uint64_t chain_seed(std::uint64_t seed);
std::uint64_t level_seed(std::uint64_t seed);

/// One run, no files written.
RunRecord run_single(const ExperimentConfig& config, const ExperimentSetup& setup,
                     std::uint64_t seed);

/// Every seed, run concurrently; records are returned in seed order.
std::vector<RunRecord> run_seeds(const ExperimentConfig& config);

struct ExperimentResult {
  std::vector<RunRecord> records;
  std::filesystem::path directory;
  std::filesystem::path manifest;
  std::vector<std::filesystem::path> csv_files;
};

/// Runs every seed and writes seed_<seed>.csv plus manifest.json under
/// output_root / config.output.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::filesystem::path& output_root);

/// $MARKOVOPT_OUTPUT_ROOT, or "runs" when unset.
std::filesystem::path default_output_root();

/// Config stored in a manifest, for re-running it.
ExperimentConfig config_from_manifest(const std::filesystem::path& manifest);
/// CSVs listed in a manifest, in seed order.
std::vector<RunRecord> load_manifest_records(const std::filesystem::path& manifest);

std::string library_version();

}  // namespace markovopt
