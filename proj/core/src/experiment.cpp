#include "tinyrl/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

#include "tinyrl/oracle.hpp"

namespace tinyrl {

using nlohmann::ordered_json;

const char* const kMetricsFields[] = {
    "iter",         "train_acc",     "entropy", "kl",      "clip_frac",
    "prompts_kept", "examples_kept", "loss",    "eval_acc"};
const std::size_t kMetricsFieldCount = std::size(kMetricsFields);

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

struct KvSink {
  std::vector<std::string>* errors;
  std::string section;
  std::string key;
  std::string value;

  bool to_bool(bool& out) const {
    if (value == "true" || value == "1") { out = true; return true; }
    if (value == "false" || value == "0") { out = false; return true; }
    errors->push_back(section + "." + key + ": expected bool, got '" + value + "'");
    return false;
  }
  bool to_int(int& out) const {
    try { out = std::stoi(value); return true; } catch (...) {
      errors->push_back(section + "." + key + ": expected int, got '" + value + "'");
      return false;
    }
  }
  bool to_u64(std::uint64_t& out) const {
    try { out = std::stoull(value); return true; } catch (...) {
      errors->push_back(section + "." + key + ": expected integer, got '" + value + "'");
      return false;
    }
  }
  bool to_double(double& out) const {
    try { out = std::stod(value); return true; } catch (...) {
      errors->push_back(section + "." + key + ": expected number, got '" + value + "'");
      return false;
    }
  }
};

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string now_utc() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::vector<std::string> vocab_table(const TaskSpec& task) {
  const Vocab vb = task_vocab(task);
  std::vector<std::string> names(vb.size);
  names[vb.bos] = "BOS";
  names[vb.eos] = "EOS";
  names[vb.delim] = "DELIM";
  for (int i = 0; i < vb.value_count; ++i)
    names[vb.first_value + i] = "v" + std::to_string(i);
  if (vb.plus) names[*vb.plus] = "PLUS";
  return names;
}

ordered_json record_to_json(const MetricsRecord& rec) {
  ordered_json j;
  j["iter"] = rec.iteration;
  j["train_acc"] = rec.train_accuracy;
  j["entropy"] = rec.mean_entropy;
  j["kl"] = rec.kl_from_initial;
  j["clip_frac"] = rec.clip_fraction;
  j["prompts_kept"] = rec.prompts_kept;
  j["examples_kept"] = rec.examples_kept;
  j["loss"] = rec.surrogate_loss;
  if (rec.eval_accuracy) j["eval_acc"] = *rec.eval_accuracy;
  return j;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text,
                                         std::vector<std::string>& errors) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = line.substr(1, line.size() - 2);
      if (section != "task" && section != "policy" && section != "algo" &&
          section != "train" && section != "run")
        errors.push_back("line " + std::to_string(lineno) + ": unknown section [" + section + "]");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected key=value");
      continue;
    }
    KvSink kv{&errors, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1))};

    if (section == "task") {
      if (kv.key == "kind") {
        if (auto k = task_kind_from_string(kv.value)) cfg.task.kind = *k;
        else errors.push_back("task.kind: unknown task '" + kv.value + "'");
      } else if (kv.key == "operand_range") kv.to_int(cfg.task.operand_range);
      else if (kv.key == "prompt_len_min") kv.to_int(cfg.task.prompt_len_min);
      else if (kv.key == "prompt_len_max") kv.to_int(cfg.task.prompt_len_max);
      else if (kv.key == "unsolvable_fraction") kv.to_double(cfg.task.unsolvable_fraction);
      else errors.push_back("task." + kv.key + ": unknown key");
    } else if (section == "policy") {
      if (kv.key == "arch") {
        if (kv.value == "tabular_kgram") cfg.policy.arch = PolicyArch::kTabularKGram;
        else if (kv.value == "mlp") cfg.policy.arch = PolicyArch::kMlp;
        else errors.push_back("policy.arch: unknown arch '" + kv.value + "'");
      } else if (kv.key == "context_len") kv.to_int(cfg.policy.context_len);
      else if (kv.key == "embed_dim") kv.to_int(cfg.policy.embed_dim);
      else if (kv.key == "hidden_sizes") {
        cfg.policy.hidden_sizes.clear();
        std::stringstream ss(kv.value);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
          tok = trim(tok);
          if (tok.empty()) continue;
          try { cfg.policy.hidden_sizes.push_back(std::stoi(tok)); } catch (...) {
            errors.push_back("policy.hidden_sizes: expected comma-separated ints");
          }
        }
      } else errors.push_back("policy." + kv.key + ": unknown key");
    } else if (section == "algo") {
      if (kv.key == "kind") {
        if (auto k = algo_kind_from_string(kv.value)) cfg.algo.kind = *k;
        else errors.push_back("algo.kind: unknown algorithm '" + kv.value + "'");
      } else if (kv.key == "eps_lo") kv.to_double(cfg.algo.eps_lo);
      else if (kv.key == "eps_hi") kv.to_double(cfg.algo.eps_hi);
      else if (kv.key == "mean_center") kv.to_bool(cfg.algo.mean_center);
      else if (kv.key == "std_normalize") kv.to_bool(cfg.algo.std_normalize);
      else if (kv.key == "std_guard") kv.to_double(cfg.algo.std_guard);
      else if (kv.key == "filter") {
        if (auto f = filter_kind_from_string(kv.value)) cfg.algo.filter = *f;
        else errors.push_back("algo.filter: unknown filter '" + kv.value + "'");
      } else if (kv.key == "dpo_beta") kv.to_double(cfg.algo.dpo_beta);
      else if (kv.key == "ratio_clamp") kv.to_double(cfg.algo.ratio_clamp);
      else if (kv.key == "raft_strict_argmax") kv.to_bool(cfg.algo.raft_strict_argmax);
      else if (kv.key == "sample_std") kv.to_bool(cfg.algo.sample_std);
      else if (kv.key == "sum_loss") kv.to_bool(cfg.algo.sum_loss);
      else errors.push_back("algo." + kv.key + ": unknown key");
    } else if (section == "train") {
      if (kv.key == "prompts_per_iter") kv.to_int(cfg.train.prompts_per_iter);
      else if (kv.key == "group_size") kv.to_int(cfg.train.group_size);
      else if (kv.key == "minibatch_size") kv.to_int(cfg.train.minibatch_size);
      else if (kv.key == "epochs_per_iter") kv.to_int(cfg.train.epochs_per_iter);
      else if (kv.key == "max_gen_len") kv.to_int(cfg.train.max_gen_len);
      else if (kv.key == "temperature") kv.to_double(cfg.train.temperature);
      else if (kv.key == "lr") kv.to_double(cfg.train.lr);
      else if (kv.key == "beta1") kv.to_double(cfg.train.beta1);
      else if (kv.key == "beta2") kv.to_double(cfg.train.beta2);
      else if (kv.key == "adam_eps") kv.to_double(cfg.train.adam_eps);
      else if (kv.key == "weight_decay") kv.to_double(cfg.train.weight_decay);
      else if (kv.key == "total_iters") kv.to_int(cfg.train.total_iters);
      else if (kv.key == "eval_every") kv.to_int(cfg.train.eval_every);
      else if (kv.key == "eval_k") kv.to_int(cfg.train.eval_k);
      else if (kv.key == "eval_prompts") kv.to_int(cfg.train.eval_prompts);
      else if (kv.key == "kl_samples") kv.to_int(cfg.train.kl_samples);
      else if (kv.key == "workers") kv.to_int(cfg.train.workers);
      else if (kv.key == "seed") kv.to_u64(cfg.train.seed);
      else errors.push_back("train." + kv.key + ": unknown key");
    } else if (section == "run") {
      if (kv.key == "output_dir") cfg.output_dir = kv.value;
      else if (kv.key == "run_name") cfg.run_name = kv.value;
      else errors.push_back("run." + kv.key + ": unknown key");
    } else {
      errors.push_back("line " + std::to_string(lineno) + ": key outside any section");
    }
  }
  cfg.policy.vocab_size = task_vocab(cfg.task).size;
  cfg.algo.group_size = cfg.train.group_size;
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path,
                                        std::vector<std::string>& errors) {
  std::ifstream in(path);
  if (!in) {
    errors.push_back("cannot open config file: " + path.string());
    return {};
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str(), errors);
}

std::vector<std::string> validate_experiment(const ExperimentConfig& cfg) {
  std::vector<std::string> errors;
  for (auto& e : validate_task(cfg.task)) errors.push_back("task." + e);
  auto algo_rep = validate_config(cfg.algo);
  for (auto& e : algo_rep.violations) errors.push_back("algo: " + e);
  for (auto& e : validate_train(cfg.train)) errors.push_back("train." + e);
  if (cfg.policy.context_len < 1) errors.push_back("policy.context_len must be >= 1");
  if (cfg.policy.arch == PolicyArch::kMlp && cfg.policy.embed_dim < 1)
    errors.push_back("policy.embed_dim must be >= 1 for mlp");
  if (cfg.output_dir.empty()) errors.push_back("run.output_dir is required");
  return errors;
}

std::string render_experiment_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "[task]\n";
  os << "kind=" << to_string(cfg.task.kind) << "\n";
  os << "operand_range=" << cfg.task.operand_range << "\n";
  os << "prompt_len_min=" << cfg.task.prompt_len_min << "\n";
  os << "prompt_len_max=" << cfg.task.prompt_len_max << "\n";
  os << "unsolvable_fraction=" << format_double(cfg.task.unsolvable_fraction) << "\n";
  os << "[policy]\n";
  os << "arch=" << to_string(cfg.policy.arch) << "\n";
  os << "context_len=" << cfg.policy.context_len << "\n";
  os << "embed_dim=" << cfg.policy.embed_dim << "\n";
  os << "hidden_sizes=";
  for (std::size_t i = 0; i < cfg.policy.hidden_sizes.size(); ++i)
    os << (i ? "," : "") << cfg.policy.hidden_sizes[i];
  os << "\n";
  os << "[algo]\n";
  os << "kind=" << to_string(cfg.algo.kind) << "\n";
  os << "eps_lo=" << format_double(cfg.algo.eps_lo) << "\n";
  os << "eps_hi=" << format_double(cfg.algo.eps_hi) << "\n";
  os << "mean_center=" << (cfg.algo.mean_center ? "true" : "false") << "\n";
  os << "std_normalize=" << (cfg.algo.std_normalize ? "true" : "false") << "\n";
  os << "std_guard=" << format_double(cfg.algo.std_guard) << "\n";
  os << "filter=" << to_string(cfg.algo.filter) << "\n";
  os << "dpo_beta=" << format_double(cfg.algo.dpo_beta) << "\n";
  os << "ratio_clamp=" << format_double(cfg.algo.ratio_clamp) << "\n";
  os << "raft_strict_argmax=" << (cfg.algo.raft_strict_argmax ? "true" : "false") << "\n";
  os << "sample_std=" << (cfg.algo.sample_std ? "true" : "false") << "\n";
  os << "sum_loss=" << (cfg.algo.sum_loss ? "true" : "false") << "\n";
  os << "[train]\n";
  os << "prompts_per_iter=" << cfg.train.prompts_per_iter << "\n";
  os << "group_size=" << cfg.train.group_size << "\n";
  os << "minibatch_size=" << cfg.train.minibatch_size << "\n";
  os << "epochs_per_iter=" << cfg.train.epochs_per_iter << "\n";
  os << "max_gen_len=" << cfg.train.max_gen_len << "\n";
  os << "temperature=" << format_double(cfg.train.temperature) << "\n";
  os << "lr=" << format_double(cfg.train.lr) << "\n";
  os << "beta1=" << format_double(cfg.train.beta1) << "\n";
  os << "beta2=" << format_double(cfg.train.beta2) << "\n";
  os << "adam_eps=" << format_double(cfg.train.adam_eps) << "\n";
  os << "weight_decay=" << format_double(cfg.train.weight_decay) << "\n";
  os << "total_iters=" << cfg.train.total_iters << "\n";
  os << "eval_every=" << cfg.train.eval_every << "\n";
  os << "eval_k=" << cfg.train.eval_k << "\n";
  os << "eval_prompts=" << cfg.train.eval_prompts << "\n";
  os << "kl_samples=" << cfg.train.kl_samples << "\n";
  os << "workers=" << cfg.train.workers << "\n";
  os << "seed=" << cfg.train.seed << "\n";
  os << "[run]\n";
  os << "output_dir=" << cfg.output_dir.string() << "\n";
  os << "run_name=" << cfg.run_name << "\n";
  return os.str();
}

int run_experiment(const ExperimentConfig& cfg, Verbosity verbosity) {
  auto errors = validate_experiment(cfg);
  if (!errors.empty()) {
    for (const auto& e : errors) std::cerr << "config error: " << e << "\n";
    return 1;
  }

  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  const fs::path manifest_path = cfg.output_dir / "manifest.json";
  const fs::path metrics_path = cfg.output_dir / "metrics.jsonl";
  const fs::path final_ckpt = cfg.output_dir / "final.bin";

  ordered_json manifest;
  manifest["run_name"] = cfg.run_name;
  manifest["version"] = "tinyrl 0.1.0";
  manifest["seed"] = cfg.train.seed;
  manifest["config"] = render_experiment_config(cfg);
  manifest["vocab"] = vocab_table(cfg.task);
  manifest["start_time"] = now_utc();
  manifest["end_time"] = nullptr;
  manifest["final_checkpoint"] = nullptr;
  {
    std::ofstream mf(manifest_path);
    mf << manifest.dump(2) << "\n";
  }

  std::ofstream metrics(metrics_path, std::ios::binary);
  if (!metrics) {
    std::cerr << "cannot open " << metrics_path << " for writing\n";
    return 1;
  }

  TrainState state = init_train_state(cfg.policy, cfg.train.seed);
  try {
    for (int iter = 0; iter < cfg.train.total_iters; ++iter) {
      MetricsRecord rec = run_iteration(state, cfg.task, cfg.algo, cfg.train);
      const bool eval_now = (iter + 1) % cfg.train.eval_every == 0;
      if (eval_now) {
        auto eval_rng = make_rng(cfg.train.seed, derive_stream_id(kStreamEval, iter, 0));
        rec.eval_accuracy = evaluate_avg_at_k(state.params, cfg.task,
                                              cfg.train.eval_prompts, cfg.train.eval_k,
                                              cfg.train.temperature,
                                              cfg.train.max_gen_len, eval_rng);
        state.metrics_log.back().eval_accuracy = rec.eval_accuracy;
        char name[32];
        std::snprintf(name, sizeof(name), "ckpt_%06d.bin", iter + 1);
        save_checkpoint(state.params, cfg.output_dir / name);
      }
      metrics << record_to_json(rec).dump() << "\n";
      metrics.flush();
      if (verbosity == Verbosity::kInfo && eval_now) {
        std::cout << cfg.run_name << " iter " << iter + 1 << "/" << cfg.train.total_iters
                  << " train_acc=" << rec.train_accuracy
                  << " eval_acc=" << *rec.eval_accuracy
                  << " entropy=" << rec.mean_entropy << "\n";
      }
    }
  } catch (const std::exception& e) {
    metrics.flush();
    std::cerr << "run failed at iteration " << state.iteration << ": " << e.what() << "\n";
    return 2;
  }

  save_checkpoint(state.params, final_ckpt);
  manifest["end_time"] = now_utc();
  manifest["final_checkpoint"] = final_ckpt.string();
  {
    std::ofstream mf(manifest_path);
    mf << manifest.dump(2) << "\n";
  }
  return 0;
}

namespace {

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics file: " + path.string());
  std::vector<nlohmann::json> records;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      records.push_back(nlohmann::json::parse(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ": line " + std::to_string(lineno) +
                               ": malformed JSONL (" + e.what() + ")");
    }
  }
  return records;
}

}  // namespace

std::vector<RunSummary> compare_runs(const std::vector<std::string>& metrics_paths,
                                     const std::string& field, int window) {
  if (metrics_paths.empty())
    throw std::invalid_argument("compare_runs: need at least one metrics path");
  if (window < 1) throw std::invalid_argument("compare_runs: window must be >= 1");
  bool known = false;
  for (std::size_t i = 0; i < kMetricsFieldCount; ++i)
    if (field == kMetricsFields[i]) known = true;
  if (!known) {
    std::string available;
    for (std::size_t i = 0; i < kMetricsFieldCount; ++i)
      available += std::string(i ? ", " : "") + kMetricsFields[i];
    throw std::invalid_argument("unknown field '" + field + "'; available: " + available);
  }

  std::vector<std::string> paths = metrics_paths;
  std::sort(paths.begin(), paths.end());
  std::vector<RunSummary> out;
  for (const auto& p : paths) {
    RunSummary s;
    s.path = p;
    std::vector<double> series;
    for (const auto& rec : read_jsonl(p))
      if (rec.contains(field)) series.push_back(rec[field].get<double>());
    s.smoothed = moving_average(series, window);
    if (!s.smoothed.empty()) {
      s.final_value = s.smoothed.back();
      double sum = 0.0;
      for (double v : s.smoothed) sum += v;
      s.area_under_curve = sum / static_cast<double>(s.smoothed.size());
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string render_comparison(const std::vector<RunSummary>& summaries,
                              const std::string& field, bool include_series) {
  std::ostringstream os;
  os << "field=" << field << "\n";
  for (const auto& s : summaries) {
    os << s.path << " points=" << s.smoothed.size()
       << " final=" << format_double(s.final_value)
       << " auc=" << format_double(s.area_under_curve) << "\n";
    if (include_series) {
      for (std::size_t i = 0; i < s.smoothed.size(); ++i)
        os << (i ? " " : "  ") << format_double(s.smoothed[i]);
      os << "\n";
    }
  }
  return os.str();
}

std::size_t export_csv(const std::filesystem::path& metrics_path,
                       const std::filesystem::path& out_path) {
  auto records = read_jsonl(metrics_path);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + out_path.string() + " for writing");
  for (std::size_t i = 0; i < kMetricsFieldCount; ++i)
    out << (i ? "," : "") << kMetricsFields[i];
  out << "\n";
  for (const auto& rec : records) {
    for (std::size_t i = 0; i < kMetricsFieldCount; ++i) {
      if (i) out << ",";
      const char* f = kMetricsFields[i];
      if (!rec.contains(f)) continue;  // eval_acc absent on non-eval iterations
      const auto& v = rec[f];
      if (v.is_number_integer()) out << v.get<long>();
      else out << format_double(v.get<double>());
    }
    out << "\n";
  }
  return records.size();
}

int oracle_check(const ExperimentConfig& cfg, Verbosity verbosity) {
  // Shrink to an enumerable instance of the configured task.
  EnumerationDomain domain{cfg.task, std::min(cfg.train.max_gen_len, 3), 1'000'000};
  auto rng = make_rng(cfg.train.seed, derive_stream_id(kStreamInit, 0, 1));
  PolicySpec spec = cfg.policy;
  spec.vocab_size = task_vocab(cfg.task).size;
  PolicyParams params = init_params(spec, rng);
  for (auto& t : params.theta) t += 0.3 * (2.0 * rng.next_double() - 1.0);

  PromptInstance prompt = sample_prompt(cfg.task, rng);
  bool ok = true;

  auto exact = exact_gradient(params, domain, prompt);
  auto fd = finite_diff_gradient(
      [&](const PolicyParams& p) { return exact_objective(p, domain, prompt); },
      params, 1e-5);
  double max_err = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i)
    max_err = std::max(max_err, std::abs(exact[i] - fd[i]));
  if (verbosity == Verbosity::kInfo)
    std::cout << "exact vs finite-difference gradient: max abs err = " << max_err << "\n";
  if (max_err > 1e-6) ok = false;

  auto bias_rng = make_rng(cfg.train.seed, derive_stream_id(kStreamInit, 0, 2));
  // Family-wise threshold over all parameter coordinates: the Gaussian tail
  // bound P(|z| > t) <= exp(-t^2 / 2) keeps the chance of any false alarm
  // below 1% even for large tabular policies.
  const double z_threshold =
      std::sqrt(2.0 * std::log(static_cast<double>(spec.param_count()) / 0.01));
  BiasReport raw = estimator_bias_check(params, domain, prompt, 20'000, false, 1,
                                        bias_rng, z_threshold);
  BiasReport centered = estimator_bias_check(params, domain, prompt, 20'000, true, 2,
                                             bias_rng, z_threshold);
  if (verbosity == Verbosity::kInfo) {
    std::cout << "raw reinforce estimator:\n" << raw.to_text();
    std::cout << "mean-centered estimator (n=2):\n" << centered.to_text();
  }
  if (!raw.pass || !centered.pass) ok = false;

  std::cout << (ok ? "oracle-check: PASS\n" : "oracle-check: FAIL\n");
  return ok ? 0 : 1;
}

}  // namespace tinyrl
