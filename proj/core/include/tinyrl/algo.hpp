#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "tinyrl/types.hpp"

namespace tinyrl {

struct GroupDecision {
  bool keep_prompt = true;
  std::vector<double> weights;   // per response
  std::vector<bool> selected;    // response enters the buffer
};

// Keep exactly the reward +1 responses with weight 1; drops the prompt when
// none is positive (strict_argmax keeps the top-reward responses even then).
GroupDecision raft_select(const PromptGroup& group, bool strict_argmax = false);

// (r_i - mean) / (population std + guard), constant across a response's
// tokens. sample_std switches the divisor to the n-1 convention.
std::vector<double> grpo_advantages(const std::vector<double>& rewards,
                                    double std_guard, bool sample_std = false);

std::vector<double> mean_center(const std::vector<double>& rewards);

bool prompt_filter(const PromptGroup& group, FilterKind filter);

// Composition of filtering and weight assignment for cfg.kind.
GroupDecision response_weights(const PromptGroup& group, const AlgoConfig& cfg);

// min(s*w, clip(s, 1-eps_lo, 1+eps_hi)*w)
double clipped_surrogate(double s, double w, double eps_lo, double eps_hi);

// exp of the log-ratio, clamped in log space to avoid overflow.
double sequence_ratio(double logp_new, double logp_old, double clamp);

// First (+1, -1) pair in sampling order, if both signs are present.
std::optional<std::pair<int, int>> dpo_pair(const PromptGroup& group);

// -log sigmoid(beta * (logratio_plus - logratio_minus))
double dpo_loss(double logratio_plus, double logratio_minus, double beta);

}  // namespace tinyrl
