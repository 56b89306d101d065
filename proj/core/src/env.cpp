#include "tinyrl/env.hpp"

#include <algorithm>
#include <stdexcept>

namespace tinyrl {

Vocab task_vocab(const TaskSpec& task) {
  Vocab v;
  v.value_count = task.kind == TaskKind::kParity ? 2 : task.operand_range;
  v.size = 3 + v.value_count;
  if (task.kind == TaskKind::kAddMod) {
    v.plus = v.size;
    v.size += 1;
  }
  return v;
}

const char* to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::kAddMod: return "add_mod";
    case TaskKind::kCopySeq: return "copy_seq";
    case TaskKind::kReverseSeq: return "reverse_seq";
    case TaskKind::kParity: return "parity";
  }
  return "unknown";
}

std::optional<TaskKind> task_kind_from_string(const std::string& s) {
  if (s == "add_mod") return TaskKind::kAddMod;
  if (s == "copy_seq") return TaskKind::kCopySeq;
  if (s == "reverse_seq") return TaskKind::kReverseSeq;
  if (s == "parity") return TaskKind::kParity;
  return std::nullopt;
}

std::vector<std::string> validate_task(const TaskSpec& task) {
  std::vector<std::string> v;
  if (task.operand_range < 2) v.push_back("operand_range must be >= 2");
  if (task.prompt_len_min < 1) v.push_back("prompt_len_min must be >= 1");
  if (task.prompt_len_max < task.prompt_len_min)
    v.push_back("prompt_len_max must be >= prompt_len_min");
  if (task.unsolvable_fraction < 0.0 || task.unsolvable_fraction > 1.0)
    v.push_back("unsolvable_fraction must be in [0,1]");
  return v;
}

PromptInstance sample_prompt(const TaskSpec& task, RngStream& rng) {
  const Vocab vb = task_vocab(task);
  PromptInstance p;
  p.task_id = to_string(task.kind);
  switch (task.kind) {
    case TaskKind::kAddMod: {
      const int m = task.operand_range;
      int a = static_cast<int>(rng.next_below(m));
      int b = static_cast<int>(rng.next_below(m));
      p.tokens = {vb.value_token(a), *vb.plus, vb.value_token(b)};
      p.ground_truth = {vb.value_token((a + b) % m)};
      p.difficulty = (a + b >= m) ? Difficulty::kHard : Difficulty::kEasy;
      break;
    }
    case TaskKind::kCopySeq:
    case TaskKind::kReverseSeq: {
      int len = task.prompt_len_min +
                static_cast<int>(rng.next_below(task.prompt_len_max - task.prompt_len_min + 1));
      for (int i = 0; i < len; ++i)
        p.tokens.push_back(vb.value_token(static_cast<int>(rng.next_below(vb.value_count))));
      p.ground_truth = p.tokens;
      if (task.kind == TaskKind::kReverseSeq)
        std::reverse(p.ground_truth.begin(), p.ground_truth.end());
      p.difficulty = len > task.prompt_len_min ? Difficulty::kHard : Difficulty::kEasy;
      break;
    }
    case TaskKind::kParity: {
      int len = task.prompt_len_min +
                static_cast<int>(rng.next_below(task.prompt_len_max - task.prompt_len_min + 1));
      int ones = 0;
      for (int i = 0; i < len; ++i) {
        int bit = static_cast<int>(rng.next_below(2));
        ones += bit;
        p.tokens.push_back(vb.value_token(bit));
      }
      p.ground_truth = {vb.value_token(ones % 2)};
      p.difficulty = len > task.prompt_len_min ? Difficulty::kHard : Difficulty::kEasy;
      break;
    }
  }
  // Unsolvable prompts keep their surface form but their answer cannot be
  // encoded, so every response is rejected.
  if (task.unsolvable_fraction > 0.0 &&
      rng.next_double() < task.unsolvable_fraction) {
    p.solvable = false;
    p.ground_truth.clear();
    p.difficulty = Difficulty::kUnsolvable;
  }
  return p;
}

VerifierReport verify(const TaskSpec& task, const PromptInstance& prompt,
                      const TokenSeq& response) {
  const Vocab vb = task_vocab(task);
  VerifierReport rep;
  auto eos_it = std::find(response.begin(), response.end(), vb.eos);
  if (eos_it == response.end()) {
    rep.failure = FailureReason::kTruncated;
    return rep;
  }
  // Last delimiter before EOS.
  auto delim_it = response.begin();
  bool found = false;
  for (auto it = response.begin(); it != eos_it; ++it) {
    if (*it == vb.delim) {
      delim_it = it;
      found = true;
    }
  }
  if (!found) {
    rep.failure = FailureReason::kNoDelimiter;
    return rep;
  }
  TokenSeq answer(delim_it + 1, eos_it);
  if (answer.empty() ||
      !std::all_of(answer.begin(), answer.end(),
                   [&](Token t) { return vb.is_value(t); })) {
    rep.failure = FailureReason::kMalformed;
    return rep;
  }
  rep.parsed_answer = answer;
  if (prompt.solvable && answer == prompt.ground_truth) {
    rep.reward = 1;
  } else {
    rep.failure = FailureReason::kWrongAnswer;
  }
  return rep;
}

PromptGroup score_group(const TaskSpec& task, const PromptInstance& prompt,
                        const std::vector<Rollout>& rollouts) {
  if (rollouts.empty())
    throw std::invalid_argument("score_group: responses must be non-empty");
  PromptGroup g;
  g.prompt = prompt;
  g.responses.reserve(rollouts.size());
  for (const auto& r : rollouts) {
    ScoredResponse sr;
    sr.tokens = r.tokens;
    sr.old_logprobs = r.logprobs;
    sr.terminated = r.terminated;
    sr.reward = verify(task, prompt, r.tokens).reward;
    g.responses.push_back(std::move(sr));
  }
  return g;
}

TokenSeq gold_response(const TaskSpec& task, const PromptInstance& prompt) {
  const Vocab vb = task_vocab(task);
  TokenSeq r = {vb.delim};
  r.insert(r.end(), prompt.ground_truth.begin(), prompt.ground_truth.end());
  r.push_back(vb.eos);
  return r;
}

}  // namespace tinyrl
