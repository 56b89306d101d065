#include "tinyrl/types.hpp"

#include <string>

namespace tinyrl {

ConfigReport validate_config(const AlgoConfig& cfg) {
  ConfigReport report;
  auto bad = [&](std::string msg) { report.violations.push_back(std::move(msg)); };

  if (cfg.eps_lo < 0.0) bad("eps_lo must be >= 0");
  if (cfg.eps_hi < 0.0) bad("eps_hi must be >= 0");
  if (cfg.eps_hi < cfg.eps_lo) bad("eps_hi must be >= eps_lo");
  if (cfg.std_guard <= 0.0) bad("std_guard must be > 0");
  if (cfg.group_size < 1) bad("group_size must be >= 1");
  if (cfg.dpo_beta <= 0.0) bad("dpo_beta must be > 0");
  if (cfg.ratio_clamp <= 0.0) bad("ratio_clamp must be > 0");

  if (cfg.kind == AlgoKind::kGrpo) {
    if (cfg.group_size < 2) bad("grpo requires n>1");
    if (!cfg.mean_center) bad("grpo requires mean_center=true");
    if (!cfg.std_normalize) bad("grpo requires std_normalize=true");
  }
  if (cfg.kind == AlgoKind::kReinforceRej) {
    if (cfg.filter != FilterKind::kDropBoth)
      bad("reinforce_rej requires filter=drop_both");
    if (cfg.mean_center) bad("reinforce_rej requires mean_center=false");
    if (cfg.std_normalize) bad("reinforce_rej requires std_normalize=false");
  }
  if (cfg.kind == AlgoKind::kDpoIter && cfg.group_size < 2)
    bad("dpo_iter requires n>1 to form pairs");

  if (cfg.std_normalize && !cfg.mean_center && cfg.kind != AlgoKind::kGrpo)
    report.warnings.push_back(
        "std_normalize without mean_center divides raw rewards by guarded std; "
        "no studied variant uses this combination");

  return report;
}

const char* to_string(AlgoKind kind) {
  switch (kind) {
    case AlgoKind::kRaft: return "raft";
    case AlgoKind::kRaftPp: return "raft_pp";
    case AlgoKind::kReinforceSentence: return "reinforce_sentence";
    case AlgoKind::kReinforceToken: return "reinforce_token";
    case AlgoKind::kGrpo: return "grpo";
    case AlgoKind::kReinforceRej: return "reinforce_rej";
    case AlgoKind::kDpoIter: return "dpo_iter";
  }
  return "unknown";
}

const char* to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::kNone: return "none";
    case FilterKind::kDropAllCorrect: return "drop_all_correct";
    case FilterKind::kDropAllWrong: return "drop_all_wrong";
    case FilterKind::kDropBoth: return "drop_both";
  }
  return "unknown";
}

std::optional<AlgoKind> algo_kind_from_string(const std::string& s) {
  if (s == "raft") return AlgoKind::kRaft;
  if (s == "raft_pp") return AlgoKind::kRaftPp;
  if (s == "reinforce_sentence") return AlgoKind::kReinforceSentence;
  if (s == "reinforce_token") return AlgoKind::kReinforceToken;
  if (s == "grpo") return AlgoKind::kGrpo;
  if (s == "reinforce_rej") return AlgoKind::kReinforceRej;
  if (s == "dpo_iter") return AlgoKind::kDpoIter;
  return std::nullopt;
}

std::optional<FilterKind> filter_kind_from_string(const std::string& s) {
  if (s == "none") return FilterKind::kNone;
  if (s == "drop_all_correct") return FilterKind::kDropAllCorrect;
  if (s == "drop_all_wrong") return FilterKind::kDropAllWrong;
  if (s == "drop_both") return FilterKind::kDropBoth;
  return std::nullopt;
}

}  // namespace tinyrl
