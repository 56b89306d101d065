#include <benchmark/benchmark.h>

#include "tinyrl/env.hpp"
#include "tinyrl/loss.hpp"
#include "tinyrl/policy.hpp"
#include "tinyrl/trainer.hpp"

namespace {

using namespace tinyrl;

TaskSpec easy_task() {
  TaskSpec t;
  t.kind = TaskKind::kAddMod;
  t.operand_range = 5;
  return t;
}

PolicySpec tabular_spec(const TaskSpec& t) {
  PolicySpec s;
  s.arch = PolicyArch::kTabularKGram;
  s.vocab_size = task_vocab(t).size;
  s.context_len = 3;
  return s;
}

void BM_SampleResponse(benchmark::State& state) {
  TaskSpec task = easy_task();
  auto rng = make_rng(1, 1);
  PolicyParams params = init_params(tabular_spec(task), rng);
  PromptInstance prompt = sample_prompt(task, rng);
  const Vocab vb = task_vocab(task);
  for (auto _ : state) {
    auto r = sample_response(params, prompt, vb.eos, 1.0, 8, rng);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_SampleResponse);

void BM_LossGradTokenLevel(benchmark::State& state) {
  TaskSpec task = easy_task();
  auto rng = make_rng(2, 1);
  PolicyParams params = init_params(tabular_spec(task), rng);
  PromptInstance prompt = sample_prompt(task, rng);
  const Vocab vb = task_vocab(task);
  std::vector<TrainExample> batch;
  for (int i = 0; i < 64; ++i) {
    auto r = sample_response(params, prompt, vb.eos, 1.0, 8, rng);
    batch.push_back(TrainExample{prompt, r.tokens, i % 2 ? 1.0 : -1.0, r.logprobs});
  }
  AlgoConfig cfg;
  cfg.kind = AlgoKind::kReinforceToken;
  for (auto _ : state) {
    auto lg = loss_grad(params, batch, cfg);
    benchmark::DoNotOptimize(lg);
  }
}
BENCHMARK(BM_LossGradTokenLevel);

void BM_RunIteration(benchmark::State& state) {
  TaskSpec task = easy_task();
  AlgoConfig algo;
  algo.kind = AlgoKind::kGrpo;
  algo.mean_center = true;
  algo.std_normalize = true;
  TrainConfig train;
  train.prompts_per_iter = 16;
  train.minibatch_size = 32;
  train.max_gen_len = 8;
  train.kl_samples = 8;
  TrainState st = init_train_state(tabular_spec(task), 1);
  for (auto _ : state) {
    auto rec = run_iteration(st, task, algo, train);
    benchmark::DoNotOptimize(rec);
  }
}
BENCHMARK(BM_RunIteration);

}  // namespace

BENCHMARK_MAIN();
