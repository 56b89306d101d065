#include "tinyrl/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tinyrl/algo.hpp"

namespace tinyrl {

namespace {

struct TokenGrad {
  std::vector<Token> ctx;
  Token tok;
  double coeff;
};

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::runtime_error(std::string("loss_grad: non-finite ") + what);
}

}  // namespace

LossGrad loss_grad(const PolicyParams& params,
                   const std::vector<TrainExample>& minibatch,
                   const AlgoConfig& cfg) {
  LossGrad out;
  out.grad.assign(params.theta.size(), 0.0);
  if (minibatch.empty()) {
    out.status = GradStatus::kSkipEmpty;
    return out;
  }

  const double n_examples = static_cast<double>(minibatch.size());
  // Deferred gradient contributions keep the reduction order fixed.
  std::vector<TokenGrad> contribs;

  auto example_logprob = [&](const TrainExample& ex) {
    return log_prob(params, ex.prompt, ex.response);
  };

  switch (cfg.kind) {
    case AlgoKind::kRaft: {
      for (const auto& ex : minibatch) {
        if (ex.weight != 0.0 && ex.weight != 1.0)
          throw std::invalid_argument("loss_grad: raft weights must be in {0,1}");
        if (ex.weight == 0.0) continue;
        auto lp = example_logprob(ex);
        const double len = static_cast<double>(ex.response.size());
        const double scale = cfg.sum_loss ? 1.0 : 1.0 / len;
        out.loss += scale * lp.total / n_examples;
        const double coeff = scale / n_examples;
        for (std::size_t t = 0; t < ex.response.size(); ++t) {
          auto ctx = context_window(params.spec, ex.prompt.tokens, ex.response, t);
          contribs.push_back({std::move(ctx), ex.response[t], coeff});
        }
        out.tokens_total += static_cast<long>(ex.response.size());
      }
      break;
    }

    case AlgoKind::kReinforceSentence: {
      for (const auto& ex : minibatch) {
        auto lp = example_logprob(ex);
        double old_total = 0.0;
        for (double v : ex.old_logprobs) old_total += v;
        const double d = lp.total - old_total;
        const double dc = std::clamp(d, -cfg.ratio_clamp, cfg.ratio_clamp);
        const double s = std::exp(dc);
        const double w = ex.weight;
        const double unclipped = s * w;
        const double value = clipped_surrogate(s, w, cfg.eps_lo, cfg.eps_hi);
        check_finite(value, "sentence surrogate");
        out.loss += value / n_examples;
        out.tokens_total += 1;  // sentence-level: one ratio per example
        if (value < unclipped) out.tokens_clipped += 1;
        const bool grad_flows =
            (d == dc) && (unclipped <= std::clamp(s, 1.0 - cfg.eps_lo, 1.0 + cfg.eps_hi) * w ||
                          (s > 1.0 - cfg.eps_lo && s < 1.0 + cfg.eps_hi));
        if (grad_flows) {
          const double coeff = s * w / n_examples;
          for (std::size_t t = 0; t < ex.response.size(); ++t) {
            auto ctx = context_window(params.spec, ex.prompt.tokens, ex.response, t);
            contribs.push_back({std::move(ctx), ex.response[t], coeff});
          }
        }
      }
      break;
    }

    case AlgoKind::kRaftPp:
    case AlgoKind::kReinforceToken:
    case AlgoKind::kGrpo:
    case AlgoKind::kReinforceRej: {
      for (const auto& ex : minibatch) {
        if (ex.old_logprobs.size() != ex.response.size())
          throw std::invalid_argument("loss_grad: old_logprobs length mismatch");
        if (!std::isfinite(ex.weight))
          throw std::invalid_argument("loss_grad: non-finite weight");
        auto lp = example_logprob(ex);
        const double len = static_cast<double>(ex.response.size());
        const double w = ex.weight;
        for (std::size_t t = 0; t < ex.response.size(); ++t) {
          const double d = lp.per_token[t] - ex.old_logprobs[t];
          const double dc = std::clamp(d, -cfg.ratio_clamp, cfg.ratio_clamp);
          const double s = std::exp(dc);
          const double unclipped = s * w;
          const double value = clipped_surrogate(s, w, cfg.eps_lo, cfg.eps_hi);
          check_finite(value, "token surrogate");
          out.loss += value / (len * n_examples);
          out.tokens_total += 1;
          if (value < unclipped) out.tokens_clipped += 1;
          const bool inside = s > 1.0 - cfg.eps_lo && s < 1.0 + cfg.eps_hi;
          const bool grad_flows = (d == dc) && (value == unclipped || inside);
          if (grad_flows && w != 0.0) {
            auto ctx = context_window(params.spec, ex.prompt.tokens, ex.response, t);
            contribs.push_back({std::move(ctx), ex.response[t], s * w / (len * n_examples)});
          }
        }
      }
      break;
    }

    case AlgoKind::kDpoIter: {
      if (minibatch.size() % 2 != 0)
        throw std::invalid_argument("loss_grad: dpo minibatch must hold (chosen, rejected) pairs");
      const double n_pairs = static_cast<double>(minibatch.size() / 2);
      for (std::size_t p = 0; p < minibatch.size(); p += 2) {
        const auto& chosen = minibatch[p];
        const auto& rejected = minibatch[p + 1];
        if (chosen.weight != 1.0 || rejected.weight != -1.0)
          throw std::invalid_argument("loss_grad: dpo pair weights must be (+1, -1)");
        auto lp_plus = example_logprob(chosen);
        auto lp_minus = example_logprob(rejected);
        double ref_plus = 0.0, ref_minus = 0.0;
        for (double v : chosen.old_logprobs) ref_plus += v;
        for (double v : rejected.old_logprobs) ref_minus += v;
        const double z = cfg.dpo_beta *
            ((lp_plus.total - ref_plus) - (lp_minus.total - ref_minus));
        const double pair_loss = dpo_loss(lp_plus.total - ref_plus,
                                          lp_minus.total - ref_minus, cfg.dpo_beta);
        check_finite(pair_loss, "dpo loss");
        out.loss += -pair_loss / n_pairs;  // surrogate = -loss, ascent-oriented
        // d(log sigmoid(z))/dz = sigmoid(-z)
        const double sig_neg = 1.0 / (1.0 + std::exp(z));
        const double coeff = cfg.dpo_beta * sig_neg / n_pairs;
        for (std::size_t t = 0; t < chosen.response.size(); ++t) {
          auto ctx = context_window(params.spec, chosen.prompt.tokens, chosen.response, t);
          contribs.push_back({std::move(ctx), chosen.response[t], coeff});
        }
        for (std::size_t t = 0; t < rejected.response.size(); ++t) {
          auto ctx = context_window(params.spec, rejected.prompt.tokens, rejected.response, t);
          contribs.push_back({std::move(ctx), rejected.response[t], -coeff});
        }
        out.tokens_total +=
            static_cast<long>(chosen.response.size() + rejected.response.size());
      }
      break;
    }
  }

  check_finite(out.loss, "loss");
  for (const auto& c : contribs)
    add_logp_gradient(params, c.ctx, c.tok, c.coeff, out.grad);
  out.clip_fraction = out.tokens_total > 0
      ? static_cast<double>(out.tokens_clipped) / static_cast<double>(out.tokens_total)
      : 0.0;
  return out;
}

}  // namespace tinyrl
