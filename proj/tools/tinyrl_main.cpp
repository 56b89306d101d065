#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tinyrl/experiment.hpp"

namespace {

tinyrl::Verbosity verbosity_from_env() {
  const char* v = std::getenv("TINYRL_VERBOSITY");
  if (v != nullptr && std::string(v) == "quiet") return tinyrl::Verbosity::kQuiet;
  return tinyrl::Verbosity::kInfo;
}

tinyrl::ExperimentConfig load_or_die(const std::string& path) {
  std::vector<std::string> errors;
  auto cfg = tinyrl::load_experiment_config(path, errors);
  if (errors.empty()) {
    auto more = tinyrl::validate_experiment(cfg);
    errors.insert(errors.end(), more.begin(), more.end());
  }
  if (!errors.empty()) {
    for (const auto& e : errors) std::cerr << "config error: " << e << "\n";
    std::exit(1);
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tinyrl: desk-scale lab for reward-based policy optimization"};
  app.require_subcommand(1);
  const tinyrl::Verbosity verbosity = verbosity_from_env();

  std::string config_path;
  auto* run = app.add_subcommand("run", "execute a seeded training run");
  run->add_option("config", config_path, "experiment config (INI)")->required();

  std::vector<std::string> compare_paths;
  std::string field = "train_acc";
  int window = 20;
  bool series = false;
  auto* compare = app.add_subcommand("compare", "summarize metrics across runs");
  compare->add_option("paths", compare_paths, "metrics.jsonl files")->required();
  compare->add_option("--field", field, "metric field name");
  compare->add_option("--window", window, "moving-average window");
  compare->add_flag("--series", series, "print the smoothed series");

  std::string metrics_in, csv_out;
  auto* exp = app.add_subcommand("export", "convert metrics JSONL to CSV");
  exp->add_option("metrics", metrics_in, "metrics.jsonl file")->required();
  exp->add_option("csv", csv_out, "output CSV path")->required();

  std::string oracle_config;
  auto* oracle = app.add_subcommand("oracle-check", "run gradient and bias suites");
  oracle->add_option("config", oracle_config, "experiment config (INI)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return tinyrl::run_experiment(load_or_die(config_path), verbosity);
    }
    if (compare->parsed()) {
      auto summaries = tinyrl::compare_runs(compare_paths, field, window);
      std::cout << tinyrl::render_comparison(summaries, field, series);
      return 0;
    }
    if (exp->parsed()) {
      std::size_t rows = tinyrl::export_csv(metrics_in, csv_out);
      if (verbosity == tinyrl::Verbosity::kInfo)
        std::cout << "wrote " << rows << " rows to " << csv_out << "\n";
      return 0;
    }
    if (oracle->parsed()) {
      return tinyrl::oracle_check(load_or_die(oracle_config), verbosity);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
