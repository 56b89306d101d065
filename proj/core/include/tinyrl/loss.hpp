#pragma once

#include <vector>

#include "tinyrl/policy.hpp"
#include "tinyrl/types.hpp"

namespace tinyrl {

enum class GradStatus { kOk, kSkipEmpty };

struct LossGrad {
  GradStatus status = GradStatus::kOk;
  double loss = 0.0;  // surrogate value; gradient ASCENT increases it
  std::vector<double> grad;
  double clip_fraction = 0.0;
  long tokens_total = 0;
  long tokens_clipped = 0;
};

// Mean over examples of the per-example surrogate dictated by cfg.kind:
//   raft               mean token log-likelihood of weight-1 examples
//   raft_pp            token-level clipped ratios gated by the weight-1 indicator
//   reinforce_sentence whole-sequence clipped importance-weighted reward
//   reinforce_token    per-token clipped ratios, weight constant per response
//   grpo               as reinforce_token with group advantages as weights
//   reinforce_rej      as reinforce_token (filtering happened upstream)
//   dpo_iter           mean of -dpo_loss over consecutive (chosen, rejected)
//                      pairs; old_logprobs hold the reference policy's values
LossGrad loss_grad(const PolicyParams& params,
                   const std::vector<TrainExample>& minibatch,
                   const AlgoConfig& cfg);

}  // namespace tinyrl
