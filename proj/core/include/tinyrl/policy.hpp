#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tinyrl/rng.hpp"
#include "tinyrl/types.hpp"

namespace tinyrl {

enum class PolicyArch { kTabularKGram, kMlp };

struct PolicySpec {
  PolicyArch arch = PolicyArch::kTabularKGram;
  int vocab_size = 0;
  int context_len = 1;  // k: tokens of left context, BOS-padded
  std::vector<int> hidden_sizes;  // mlp only
  int embed_dim = 0;              // mlp only

  std::size_t param_count() const;
  bool operator==(const PolicySpec&) const = default;
};

struct PolicyParams {
  PolicySpec spec;
  std::vector<double> theta;
};

// Zero init for tabular (uniform policy); small random init for the MLP,
// which would be gradient-dead at exactly zero.
PolicyParams init_params(const PolicySpec& spec, RngStream& rng);

// The last k tokens of prompt+response[0..t), left-padded with BOS.
std::vector<Token> context_window(const PolicySpec& spec, const TokenSeq& prompt,
                                  const TokenSeq& response, std::size_t t);

// Raw next-token logits for a k-token context window.
std::vector<double> policy_logits(const PolicyParams& params,
                                  std::span<const Token> context);

struct LogProb {
  double total = 0.0;
  std::vector<double> per_token;
};

LogProb log_prob(const PolicyParams& params, const PromptInstance& prompt,
                 const TokenSeq& response);

struct Rollout {
  TokenSeq tokens;
  std::vector<double> logprobs;  // temperature-1 log-probs
  bool terminated = false;
};

Rollout sample_response(const PolicyParams& params, const PromptInstance& prompt,
                        Token eos_id, double temperature, int max_len,
                        RngStream& rng);

// Mean Shannon entropy (nats) of the next-token distribution over the
// response's positions.
double token_entropy(const PolicyParams& params, const PromptInstance& prompt,
                     const TokenSeq& response);

// Accumulates coeff * d(log pi(token | context))/d(theta) into grad.
void add_logp_gradient(const PolicyParams& params, std::span<const Token> context,
                       Token token, double coeff, std::span<double> grad);

struct OptState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
};

OptState init_opt_state(std::size_t param_count);

struct AdamWConfig {
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

// Decoupled-weight-decay Adam, ascent orientation:
//   theta += lr * m_hat / (sqrt(v_hat) + eps) - lr * weight_decay * theta
void adamw_step(PolicyParams& params, std::span<const double> grad,
                OptState& opt, const AdamWConfig& cfg);

// Checkpoint: text header (key=value lines) + raw little-endian doubles.
// Round-trips bit-exactly.
void save_checkpoint(const PolicyParams& params, const std::filesystem::path& path);
PolicyParams load_checkpoint(const std::filesystem::path& path);

const char* to_string(PolicyArch arch);

}  // namespace tinyrl
