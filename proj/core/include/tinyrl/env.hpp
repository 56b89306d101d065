#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tinyrl/policy.hpp"
#include "tinyrl/rng.hpp"
#include "tinyrl/types.hpp"

namespace tinyrl {

enum class TaskKind { kAddMod, kCopySeq, kReverseSeq, kParity };

// Fixed vocab layout: 0=BOS, 1=EOS, 2=DELIM, then value tokens, then any
// task-specific operator tokens.
struct Vocab {
  int size = 0;
  Token bos = 0;
  Token eos = 1;
  Token delim = 2;
  Token first_value = 3;
  int value_count = 0;
  std::optional<Token> plus;  // add_mod only

  bool is_value(Token t) const {
    return t >= first_value && t < first_value + value_count;
  }
  Token value_token(int v) const { return first_value + v; }
  int value_of(Token t) const { return t - first_value; }
};

struct TaskSpec {
  TaskKind kind = TaskKind::kAddMod;
  // Modulus for add_mod, symbol count for copy/reverse, ignored for parity.
  int operand_range = 5;
  int prompt_len_min = 3;  // copy/reverse/parity sequence length bounds
  int prompt_len_max = 3;
  double unsolvable_fraction = 0.0;
};

Vocab task_vocab(const TaskSpec& task);
const char* to_string(TaskKind kind);
std::optional<TaskKind> task_kind_from_string(const std::string& s);
std::vector<std::string> validate_task(const TaskSpec& task);

PromptInstance sample_prompt(const TaskSpec& task, RngStream& rng);

enum class FailureReason { kNone, kWrongAnswer, kNoDelimiter, kTruncated, kMalformed };

struct VerifierReport {
  int reward = -1;
  std::optional<TokenSeq> parsed_answer;
  FailureReason failure = FailureReason::kNone;
};

// Deterministic exact checking: the span after the LAST delimiter token and
// before EOS, canonicalized as value tokens, must equal ground_truth.
// Every failure path yields reward -1.
VerifierReport verify(const TaskSpec& task, const PromptInstance& prompt,
                      const TokenSeq& response);

PromptGroup score_group(const TaskSpec& task, const PromptInstance& prompt,
                        const std::vector<Rollout>& rollouts);

// Canonical gold response: DELIM, answer tokens, EOS.
TokenSeq gold_response(const TaskSpec& task, const PromptInstance& prompt);

}  // namespace tinyrl
