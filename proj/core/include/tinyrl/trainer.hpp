#pragma once

#include <cstdint>
#include <vector>

#include "tinyrl/algo.hpp"
#include "tinyrl/env.hpp"
#include "tinyrl/loss.hpp"
#include "tinyrl/policy.hpp"
#include "tinyrl/rng.hpp"
#include "tinyrl/types.hpp"

namespace tinyrl {

// Stream purposes; combined with (iteration, index) via derive_stream_id.
enum StreamPurpose : std::uint64_t {
  kStreamInit = 1,
  kStreamRollout = 2,
  kStreamShuffle = 3,
  kStreamKl = 4,
  kStreamEval = 5,
};

struct TrainConfig {
  int prompts_per_iter = 64;   // M
  int group_size = 4;          // n, kept in sync with AlgoConfig
  int minibatch_size = 64;
  int epochs_per_iter = 2;
  int max_gen_len = 16;
  double temperature = 1.0;
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.0;
  int total_iters = 100;
  int eval_every = 10;
  int eval_k = 16;
  int eval_prompts = 32;
  int kl_samples = 32;
  int workers = 1;
  std::uint64_t seed = 0;
};

std::vector<std::string> validate_train(const TrainConfig& cfg);

struct TrainState {
  PolicyParams params;
  PolicyParams initial_params;  // frozen reference, never mutated
  OptState opt;
  int iteration = 0;
  std::vector<MetricsRecord> metrics_log;
};

TrainState init_train_state(const PolicySpec& spec, std::uint64_t seed);

// One full iteration: sample M prompts, roll out n responses each from the
// current snapshot, score, weight/filter, then epochs_per_iter passes of
// mini-batch ascent against the recorded behavior log-probs. Metrics use
// the pre-filter rewards (accuracy) and the post-update params (entropy, KL).
MetricsRecord run_iteration(TrainState& state, const TaskSpec& task,
                            const AlgoConfig& algo_cfg, const TrainConfig& train_cfg);

// Monte-Carlo E_{x, a ~ pi}[log pi(a|x) - log pi_0(a|x)] on fresh rollouts.
double kl_from_initial(const PolicyParams& params, const PolicyParams& initial,
                       const TaskSpec& task, int n_samples, int max_len,
                       RngStream& rng);

// Mean of (1+r)/2 over k samples for each of n_prompts fresh prompts.
double evaluate_avg_at_k(const PolicyParams& params, const TaskSpec& task,
                         int n_prompts, int k, double temperature, int max_len,
                         RngStream& rng);

double train_accuracy(const std::vector<int>& rewards);

// Trailing mean with prefix warm-up: element i averages the last
// min(i+1, window) values.
std::vector<double> moving_average(const std::vector<double>& series, int window);

}  // namespace tinyrl
