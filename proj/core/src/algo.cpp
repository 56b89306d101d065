#include "tinyrl/algo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tinyrl {

GroupDecision raft_select(const PromptGroup& group, bool strict_argmax) {
  const std::size_t n = group.responses.size();
  GroupDecision d;
  d.weights.assign(n, 0.0);
  d.selected.assign(n, false);
  int best = -1;
  for (const auto& r : group.responses) best = std::max(best, r.reward);
  const int cutoff = strict_argmax ? best : 1;
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (group.responses[i].reward >= cutoff) {
      d.selected[i] = true;
      d.weights[i] = 1.0;
      any = true;
    }
  }
  d.keep_prompt = any;
  return d;
}

std::vector<double> grpo_advantages(const std::vector<double>& rewards,
                                    double std_guard, bool sample_std) {
  const std::size_t n = rewards.size();
  if (n < 2) throw std::invalid_argument("grpo_advantages requires n >= 2");
  // Exact zeros for a constant group; the guarded division below would
  // otherwise amplify rounding in (r - mean) by 1/std_guard.
  if (std::all_of(rewards.begin(), rewards.end(),
                  [&](double r) { return r == rewards.front(); }))
    return std::vector<double>(n, 0.0);
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= static_cast<double>(sample_std ? n - 1 : n);
  const double denom = std::sqrt(var) + std_guard;
  std::vector<double> adv(n);
  for (std::size_t i = 0; i < n; ++i) adv[i] = (rewards[i] - mean) / denom;
  return adv;
}

std::vector<double> mean_center(const std::vector<double>& rewards) {
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= static_cast<double>(rewards.size());
  std::vector<double> out(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = rewards[i] - mean;
  return out;
}

bool prompt_filter(const PromptGroup& group, FilterKind filter) {
  bool all_correct = true, all_wrong = true;
  for (const auto& r : group.responses) {
    if (r.reward == 1) all_wrong = false;
    else all_correct = false;
  }
  switch (filter) {
    case FilterKind::kNone: return true;
    case FilterKind::kDropAllCorrect: return !all_correct;
    case FilterKind::kDropAllWrong: return !all_wrong;
    case FilterKind::kDropBoth: return !all_correct && !all_wrong;
  }
  return true;
}

GroupDecision response_weights(const PromptGroup& group, const AlgoConfig& cfg) {
  const std::size_t n = group.responses.size();
  GroupDecision d;
  d.weights.assign(n, 0.0);
  d.selected.assign(n, false);

  if (!prompt_filter(group, cfg.filter)) {
    d.keep_prompt = false;
    return d;
  }

  switch (cfg.kind) {
    case AlgoKind::kRaft:
    case AlgoKind::kRaftPp:
      return raft_select(group, cfg.raft_strict_argmax);

    case AlgoKind::kDpoIter: {
      auto pair = dpo_pair(group);
      if (!pair) {
        d.keep_prompt = false;
        return d;
      }
      d.selected[pair->first] = true;
      d.weights[pair->first] = 1.0;
      d.selected[pair->second] = true;
      d.weights[pair->second] = -1.0;
      return d;
    }

    case AlgoKind::kGrpo: {
      std::vector<double> rewards(n);
      for (std::size_t i = 0; i < n; ++i) rewards[i] = group.responses[i].reward;
      auto adv = grpo_advantages(rewards, cfg.std_guard, cfg.sample_std);
      for (std::size_t i = 0; i < n; ++i) {
        d.weights[i] = adv[i];
        d.selected[i] = true;
      }
      return d;
    }

    case AlgoKind::kReinforceSentence:
    case AlgoKind::kReinforceToken:
    case AlgoKind::kReinforceRej: {
      std::vector<double> w(n);
      for (std::size_t i = 0; i < n; ++i) w[i] = group.responses[i].reward;
      if (cfg.mean_center) w = mean_center(w);
      if (cfg.std_normalize) {
        std::vector<double> rewards(n);
        for (std::size_t i = 0; i < n; ++i) rewards[i] = group.responses[i].reward;
        double mean = 0.0;
        for (double r : rewards) mean += r;
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (double r : rewards) var += (r - mean) * (r - mean);
        var /= static_cast<double>(cfg.sample_std && n > 1 ? n - 1 : n);
        const double denom = std::sqrt(var) + cfg.std_guard;
        for (double& x : w) x /= denom;
      }
      for (std::size_t i = 0; i < n; ++i) {
        d.weights[i] = w[i];
        d.selected[i] = true;
      }
      return d;
    }
  }
  return d;
}

double clipped_surrogate(double s, double w, double eps_lo, double eps_hi) {
  if (!(s > 0.0) || !std::isfinite(s))
    throw std::invalid_argument("clipped_surrogate: ratio must be finite and > 0");
  const double clipped = std::clamp(s, 1.0 - eps_lo, 1.0 + eps_hi);
  return std::min(s * w, clipped * w);
}

double sequence_ratio(double logp_new, double logp_old, double clamp) {
  if (clamp <= 0.0) throw std::invalid_argument("sequence_ratio: clamp must be > 0");
  if (!std::isfinite(logp_new) || !std::isfinite(logp_old))
    throw std::invalid_argument("sequence_ratio: non-finite log-probs");
  return std::exp(std::clamp(logp_new - logp_old, -clamp, clamp));
}

std::optional<std::pair<int, int>> dpo_pair(const PromptGroup& group) {
  int plus = -1, minus = -1;
  for (std::size_t i = 0; i < group.responses.size(); ++i) {
    if (group.responses[i].reward == 1 && plus < 0) plus = static_cast<int>(i);
    if (group.responses[i].reward == -1 && minus < 0) minus = static_cast<int>(i);
  }
  if (plus < 0 || minus < 0) return std::nullopt;
  return std::make_pair(plus, minus);
}

double dpo_loss(double logratio_plus, double logratio_minus, double beta) {
  if (beta <= 0.0) throw std::invalid_argument("dpo_loss: beta must be > 0");
  const double z = beta * (logratio_plus - logratio_minus);
  // -log sigmoid(z) = softplus(-z), computed stably.
  if (z > 0.0) return std::log1p(std::exp(-z));
  return -z + std::log1p(std::exp(z));
}

}  // namespace tinyrl
