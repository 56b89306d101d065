#include "tinyrl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace tinyrl {

std::vector<std::string> validate_train(const TrainConfig& cfg) {
  std::vector<std::string> v;
  auto positive = [&](long x, const char* name) {
    if (x <= 0) v.push_back(std::string(name) + " must be positive");
  };
  positive(cfg.prompts_per_iter, "prompts_per_iter");
  positive(cfg.group_size, "group_size");
  positive(cfg.minibatch_size, "minibatch_size");
  positive(cfg.epochs_per_iter, "epochs_per_iter");
  positive(cfg.max_gen_len, "max_gen_len");
  positive(cfg.total_iters, "total_iters");
  positive(cfg.eval_every, "eval_every");
  positive(cfg.eval_k, "eval_k");
  positive(cfg.eval_prompts, "eval_prompts");
  positive(cfg.kl_samples, "kl_samples");
  positive(cfg.workers, "workers");
  if (cfg.temperature <= 0.0) v.push_back("temperature must be positive");
  if (cfg.lr <= 0.0) v.push_back("lr must be positive");
  if (cfg.minibatch_size > cfg.prompts_per_iter * cfg.group_size)
    v.push_back("minibatch_size must be <= prompts_per_iter * group_size");
  return v;
}

TrainState init_train_state(const PolicySpec& spec, std::uint64_t seed) {
  auto rng = make_rng(seed, derive_stream_id(kStreamInit, 0, 0));
  TrainState s{init_params(spec, rng), PolicyParams{}, init_opt_state(spec.param_count()), 0, {}};
  s.initial_params = s.params;
  return s;
}

namespace {

// Deterministic parallel map over [0, count): each index writes only its own
// slot, so the result is independent of the worker count.
template <typename Fn>
void parallel_for(int count, int workers, Fn&& fn) {
  if (workers <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  const int nw = std::min(workers, count);
  std::vector<std::thread> threads;
  threads.reserve(nw);
  for (int w = 0; w < nw; ++w) {
    threads.emplace_back([&, w] {
      for (int i = w; i < count; i += nw) fn(i);
    });
  }
  for (auto& t : threads) t.join();
}

}  // namespace

MetricsRecord run_iteration(TrainState& state, const TaskSpec& task,
                            const AlgoConfig& algo_cfg, const TrainConfig& train_cfg) {
  const int iter = state.iteration;
  const int m = train_cfg.prompts_per_iter;
  const int n = train_cfg.group_size;
  const Vocab vb = task_vocab(task);

  // Rollout phase: one stream per prompt, gathered in prompt order.
  std::vector<PromptGroup> groups(m);
  parallel_for(m, train_cfg.workers, [&](int i) {
    auto rng = make_rng(train_cfg.seed, derive_stream_id(kStreamRollout, iter, i));
    PromptInstance prompt = sample_prompt(task, rng);
    std::vector<Rollout> rollouts;
    rollouts.reserve(n);
    for (int j = 0; j < n; ++j)
      rollouts.push_back(sample_response(state.params, prompt, vb.eos,
                                         train_cfg.temperature,
                                         train_cfg.max_gen_len, rng));
    groups[i] = score_group(task, prompt, rollouts);
  });

  std::vector<int> raw_rewards;
  raw_rewards.reserve(static_cast<std::size_t>(m) * n);
  for (const auto& g : groups)
    for (const auto& r : g.responses) raw_rewards.push_back(r.reward);

  // Buffer construction.
  const bool is_dpo = algo_cfg.kind == AlgoKind::kDpoIter;
  std::vector<TrainExample> buffer;
  int prompts_kept = 0;
  for (const auto& g : groups) {
    GroupDecision d = response_weights(g, algo_cfg);
    if (!d.keep_prompt) continue;
    prompts_kept += 1;
    if (is_dpo) {
      // Chosen then rejected, adjacency preserved through pair shuffling.
      auto pair = dpo_pair(g);
      for (int idx : {pair->first, pair->second}) {
        const auto& resp = g.responses[idx];
        TrainExample ex;
        ex.prompt = g.prompt;
        ex.response = resp.tokens;
        ex.weight = d.weights[idx];
        ex.old_logprobs =
            log_prob(state.initial_params, g.prompt, resp.tokens).per_token;
        buffer.push_back(std::move(ex));
      }
    } else {
      for (std::size_t i = 0; i < g.responses.size(); ++i) {
        if (!d.selected[i]) continue;
        const auto& resp = g.responses[i];
        buffer.push_back(TrainExample{g.prompt, resp.tokens, d.weights[i],
                                      resp.old_logprobs});
      }
    }
  }

  MetricsRecord rec;
  rec.iteration = iter + 1;  // 1-based in logs
  rec.train_accuracy = train_accuracy(raw_rewards);
  rec.prompts_kept = prompts_kept;
  rec.examples_kept = static_cast<int>(buffer.size());

  // Update phase: single-threaded parameter mutation.
  long clipped = 0, total_tokens = 0, steps = 0;
  double loss_sum = 0.0;
  if (!buffer.empty()) {
    AdamWConfig adam{train_cfg.lr, train_cfg.beta1, train_cfg.beta2,
                     train_cfg.adam_eps, train_cfg.weight_decay};
    auto shuffle_rng =
        make_rng(train_cfg.seed, derive_stream_id(kStreamShuffle, iter, 0));
    for (int epoch = 0; epoch < train_cfg.epochs_per_iter; ++epoch) {
      if (is_dpo) {
        std::vector<std::size_t> pair_order(buffer.size() / 2);
        std::iota(pair_order.begin(), pair_order.end(), 0);
        shuffle(pair_order, shuffle_rng);
        std::vector<TrainExample> shuffled;
        shuffled.reserve(buffer.size());
        for (std::size_t p : pair_order) {
          shuffled.push_back(buffer[2 * p]);
          shuffled.push_back(buffer[2 * p + 1]);
        }
        buffer = std::move(shuffled);
      } else {
        shuffle(buffer, shuffle_rng);
      }
      std::size_t mb = static_cast<std::size_t>(train_cfg.minibatch_size);
      if (is_dpo && mb % 2 == 1) mb += 1;
      for (std::size_t start = 0; start < buffer.size(); start += mb) {
        std::size_t end = std::min(start + mb, buffer.size());
        std::vector<TrainExample> minibatch(buffer.begin() + start,
                                            buffer.begin() + end);
        bool all_zero = std::all_of(minibatch.begin(), minibatch.end(),
                                    [](const TrainExample& e) { return e.weight == 0.0; });
        if (all_zero) continue;  // keep AdamW moments unpolluted
        LossGrad lg = loss_grad(state.params, minibatch, algo_cfg);
        if (lg.status == GradStatus::kSkipEmpty) continue;
        adamw_step(state.params, lg.grad, state.opt, adam);
        loss_sum += lg.loss;
        clipped += lg.tokens_clipped;
        total_tokens += lg.tokens_total;
        steps += 1;
      }
    }
  }
  rec.surrogate_loss = steps > 0 ? loss_sum / static_cast<double>(steps) : 0.0;
  rec.clip_fraction = total_tokens > 0
      ? static_cast<double>(clipped) / static_cast<double>(total_tokens)
      : 0.0;

  // Post-update diagnostics on the rollout set.
  double entropy_sum = 0.0;
  long responses = 0;
  for (const auto& g : groups) {
    for (const auto& r : g.responses) {
      entropy_sum += token_entropy(state.params, g.prompt, r.tokens);
      responses += 1;
    }
  }
  rec.mean_entropy = responses > 0 ? entropy_sum / responses : 0.0;

  auto kl_rng = make_rng(train_cfg.seed, derive_stream_id(kStreamKl, iter, 0));
  rec.kl_from_initial =
      kl_from_initial(state.params, state.initial_params, task,
                      train_cfg.kl_samples, train_cfg.max_gen_len, kl_rng);

  state.iteration += 1;
  state.metrics_log.push_back(rec);
  return rec;
}

double kl_from_initial(const PolicyParams& params, const PolicyParams& initial,
                       const TaskSpec& task, int n_samples, int max_len,
                       RngStream& rng) {
  const Vocab vb = task_vocab(task);
  double sum = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    PromptInstance prompt = sample_prompt(task, rng);
    Rollout r = sample_response(params, prompt, vb.eos, 1.0, max_len, rng);
    double lp_new = 0.0;
    for (double v : r.logprobs) lp_new += v;
    double lp_init = log_prob(initial, prompt, r.tokens).total;
    sum += lp_new - lp_init;
  }
  return sum / n_samples;
}

double evaluate_avg_at_k(const PolicyParams& params, const TaskSpec& task,
                         int n_prompts, int k, double temperature, int max_len,
                         RngStream& rng) {
  const Vocab vb = task_vocab(task);
  double acc = 0.0;
  for (int i = 0; i < n_prompts; ++i) {
    PromptInstance prompt = sample_prompt(task, rng);
    for (int j = 0; j < k; ++j) {
      Rollout r = sample_response(params, prompt, vb.eos, temperature, max_len, rng);
      int reward = verify(task, prompt, r.tokens).reward;
      acc += (1.0 + reward) / 2.0;
    }
  }
  return acc / (static_cast<double>(n_prompts) * k);
}

double train_accuracy(const std::vector<int>& rewards) {
  if (rewards.empty()) return 0.0;
  double sum = 0.0;
  for (int r : rewards) sum += (1.0 + r) / 2.0;
  return sum / static_cast<double>(rewards.size());
}

std::vector<double> moving_average(const std::vector<double>& series, int window) {
  std::vector<double> out(series.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    acc += series[i];
    if (i >= static_cast<std::size_t>(window)) acc -= series[i - window];
    out[i] = acc / static_cast<double>(std::min<std::size_t>(i + 1, window));
  }
  return out;
}

}  // namespace tinyrl
