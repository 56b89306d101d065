#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tinyrl/env.hpp"
#include "tinyrl/policy.hpp"
#include "tinyrl/trainer.hpp"
#include "tinyrl/types.hpp"

namespace tinyrl {

struct ExperimentConfig {
  TaskSpec task;
  PolicySpec policy;  // vocab_size is derived from the task vocab
  AlgoConfig algo;
  TrainConfig train;
  std::filesystem::path output_dir;
  std::string run_name = "run";
};

// Flat INI: [task] / [policy] / [algo] / [train] / [run] sections with
// key=value lines. Unknown sections or keys are per-field errors.
ExperimentConfig parse_experiment_config(const std::string& text,
                                         std::vector<std::string>& errors);
ExperimentConfig load_experiment_config(const std::filesystem::path& path,
                                        std::vector<std::string>& errors);

// Full validation across modules; messages name the offending field.
std::vector<std::string> validate_experiment(const ExperimentConfig& cfg);

// Round-trippable echo of the config in the same INI format.
std::string render_experiment_config(const ExperimentConfig& cfg);

enum class Verbosity { kQuiet, kInfo };

// Executes total_iters iterations, writing manifest.json, metrics.jsonl and
// checkpoints under output_dir. Returns the process exit status.
int run_experiment(const ExperimentConfig& cfg, Verbosity verbosity);

struct RunSummary {
  std::string path;
  std::vector<double> smoothed;
  double final_value = 0.0;
  double area_under_curve = 0.0;  // mean of the smoothed series
};

// Per-run smoothed series for one metrics field, deterministic path order.
std::vector<RunSummary> compare_runs(const std::vector<std::string>& metrics_paths,
                                     const std::string& field, int window);
std::string render_comparison(const std::vector<RunSummary>& summaries,
                              const std::string& field, bool include_series);

// JSONL -> CSV with columns in schema order. Returns data row count.
std::size_t export_csv(const std::filesystem::path& metrics_path,
                       const std::filesystem::path& out_path);

// Gradient cross-checks plus the sampling bias suite on the configured task.
// Returns 0 when every check passes.
int oracle_check(const ExperimentConfig& cfg, Verbosity verbosity);

extern const char* const kMetricsFields[];
extern const std::size_t kMetricsFieldCount;

}  // namespace tinyrl
