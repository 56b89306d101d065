#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tinyrl {

using Token = std::int32_t;
using TokenSeq = std::vector<Token>;

// Token id 0 is reserved as BOS everywhere: it pads short contexts and is
// never a correct answer token.
inline constexpr Token kBosToken = 0;

enum class Difficulty { kEasy, kHard, kUnsolvable };

struct PromptInstance {
  std::string task_id;
  TokenSeq tokens;
  // Canonical answer as value-token ids. Empty iff the prompt is unsolvable.
  TokenSeq ground_truth;
  bool solvable = true;
  Difficulty difficulty = Difficulty::kEasy;
};

struct ScoredResponse {
  TokenSeq tokens;
  int reward = 0;  // exactly -1 or +1 once scored
  std::vector<double> old_logprobs;
  bool terminated = false;
};

struct PromptGroup {
  PromptInstance prompt;
  std::vector<ScoredResponse> responses;
};

struct TrainExample {
  PromptInstance prompt;
  TokenSeq response;
  double weight = 0.0;
  std::vector<double> old_logprobs;
};

enum class AlgoKind {
  kRaft,
  kRaftPp,
  kReinforceSentence,
  kReinforceToken,
  kGrpo,
  kReinforceRej,
  kDpoIter,
};

enum class FilterKind { kNone, kDropAllCorrect, kDropAllWrong, kDropBoth };

struct AlgoConfig {
  AlgoKind kind = AlgoKind::kReinforceToken;
  double eps_lo = 0.2;
  double eps_hi = 0.2;
  bool mean_center = false;
  bool std_normalize = false;
  double std_guard = 1e-6;
  FilterKind filter = FilterKind::kNone;
  int group_size = 4;
  double dpo_beta = 0.1;
  // Log-space clamp applied to importance ratios before exponentiation.
  double ratio_clamp = 20.0;
  // Strict argmax reading of data ranking: keep the top-reward responses
  // even when every reward is -1.
  bool raft_strict_argmax = false;
  // Divide by sample (n-1) std instead of population (n) std.
  bool sample_std = false;
  // Sum token log-likelihoods per example instead of averaging them.
  bool sum_loss = false;
};

struct ConfigReport {
  std::vector<std::string> violations;
  std::vector<std::string> warnings;
  bool ok() const { return violations.empty(); }
};

ConfigReport validate_config(const AlgoConfig& cfg);

const char* to_string(AlgoKind kind);
const char* to_string(FilterKind kind);
std::optional<AlgoKind> algo_kind_from_string(const std::string& s);
std::optional<FilterKind> filter_kind_from_string(const std::string& s);

struct MetricsRecord {
  int iteration = 0;
  double train_accuracy = 0.0;    // (1 + mean raw reward) / 2
  double mean_entropy = 0.0;      // nats per token
  double kl_from_initial = 0.0;
  double clip_fraction = 0.0;
  int prompts_kept = 0;
  int examples_kept = 0;
  double surrogate_loss = 0.0;
  std::optional<double> eval_accuracy;
};

}  // namespace tinyrl
