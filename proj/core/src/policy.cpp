#include "tinyrl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tinyrl {

namespace {

void check_tokens(const PolicySpec& spec, const TokenSeq& seq) {
  for (Token t : seq) {
    if (t < 0 || t >= spec.vocab_size)
      throw std::invalid_argument("token id out of range for vocab_size");
  }
}

std::size_t tabular_context_index(const PolicySpec& spec,
                                  std::span<const Token> ctx) {
  std::size_t idx = 0;
  for (Token t : ctx) idx = idx * static_cast<std::size_t>(spec.vocab_size) + t;
  return idx;
}

std::vector<double> log_softmax(std::span<const double> logits) {
  double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - mx);
  double lz = mx + std::log(sum);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lz;
  return out;
}

// MLP parameter layout: embedding table (V x E), then per layer a row-major
// weight matrix (out x in) followed by a bias vector. Input is the k
// context embeddings concatenated; hidden activations are tanh.
struct MlpLayout {
  std::size_t embed_offset = 0;
  std::vector<int> dims;                // [k*E, h1, ..., V]
  std::vector<std::size_t> w_offset;    // per layer
  std::vector<std::size_t> b_offset;
  std::size_t total = 0;
};

MlpLayout mlp_layout(const PolicySpec& spec) {
  MlpLayout l;
  l.embed_offset = 0;
  std::size_t off =
      static_cast<std::size_t>(spec.vocab_size) * spec.embed_dim;
  l.dims.push_back(spec.context_len * spec.embed_dim);
  for (int h : spec.hidden_sizes) l.dims.push_back(h);
  l.dims.push_back(spec.vocab_size);
  for (std::size_t i = 0; i + 1 < l.dims.size(); ++i) {
    l.w_offset.push_back(off);
    off += static_cast<std::size_t>(l.dims[i + 1]) * l.dims[i];
    l.b_offset.push_back(off);
    off += l.dims[i + 1];
  }
  l.total = off;
  return l;
}

struct MlpForward {
  std::vector<std::vector<double>> pre;   // pre-activation per layer
  std::vector<std::vector<double>> act;   // input + post-activation per layer
};

MlpForward mlp_forward(const PolicyParams& params, std::span<const Token> ctx,
                       const MlpLayout& l) {
  const auto& th = params.theta;
  const int e = params.spec.embed_dim;
  MlpForward f;
  std::vector<double> x(l.dims[0]);
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    const double* row = th.data() + l.embed_offset + static_cast<std::size_t>(ctx[i]) * e;
    std::copy(row, row + e, x.begin() + i * e);
  }
  f.act.push_back(x);
  const std::size_t layers = l.w_offset.size();
  for (std::size_t li = 0; li < layers; ++li) {
    const int in = l.dims[li], out = l.dims[li + 1];
    const double* w = th.data() + l.w_offset[li];
    const double* b = th.data() + l.b_offset[li];
    std::vector<double> z(out);
    const auto& a = f.act.back();
    for (int o = 0; o < out; ++o) {
      double s = b[o];
      const double* wrow = w + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) s += wrow[i] * a[i];
      z[o] = s;
    }
    f.pre.push_back(z);
    if (li + 1 < layers) {
      for (double& v : z) v = std::tanh(v);
      f.act.push_back(std::move(z));
    }
  }
  return f;
}

}  // namespace

std::size_t PolicySpec::param_count() const {
  if (arch == PolicyArch::kTabularKGram) {
    std::size_t contexts = 1;
    for (int i = 0; i < context_len; ++i) contexts *= vocab_size;
    return contexts * vocab_size;
  }
  return mlp_layout(*this).total;
}

PolicyParams init_params(const PolicySpec& spec, RngStream& rng) {
  PolicyParams p{spec, std::vector<double>(spec.param_count(), 0.0)};
  if (spec.arch == PolicyArch::kMlp) {
    // Keep biases and the output layer at zero so the initial policy is
    // close to uniform while hidden units are desymmetrized.
    auto l = mlp_layout(spec);
    const double scale = 0.1;
    std::size_t embed_end = l.embed_offset +
        static_cast<std::size_t>(spec.vocab_size) * spec.embed_dim;
    for (std::size_t i = l.embed_offset; i < embed_end; ++i)
      p.theta[i] = scale * (2.0 * rng.next_double() - 1.0);
    for (std::size_t li = 0; li + 1 < l.w_offset.size() + 1; ++li) {
      if (li + 1 == l.w_offset.size()) break;  // leave output layer zero
      std::size_t beg = l.w_offset[li];
      std::size_t end = beg + static_cast<std::size_t>(l.dims[li + 1]) * l.dims[li];
      for (std::size_t i = beg; i < end; ++i)
        p.theta[i] = scale * (2.0 * rng.next_double() - 1.0);
    }
  }
  return p;
}

std::vector<Token> context_window(const PolicySpec& spec, const TokenSeq& prompt,
                                  const TokenSeq& response, std::size_t t) {
  const int k = spec.context_len;
  std::vector<Token> ctx(k, kBosToken);
  // Sequence so far: prompt followed by response[0..t).
  std::size_t total = prompt.size() + t;
  for (int i = 0; i < k; ++i) {
    // Position (total - k + i) of the combined sequence, if it exists.
    long pos = static_cast<long>(total) - k + i;
    if (pos < 0) continue;
    ctx[i] = pos < static_cast<long>(prompt.size())
                 ? prompt[pos]
                 : response[pos - prompt.size()];
  }
  return ctx;
}

std::vector<double> policy_logits(const PolicyParams& params,
                                  std::span<const Token> context) {
  const PolicySpec& spec = params.spec;
  if (static_cast<int>(context.size()) != spec.context_len)
    throw std::invalid_argument("context size != context_len");
  for (Token t : context)
    if (t < 0 || t >= spec.vocab_size)
      throw std::invalid_argument("context token out of range");
  if (spec.arch == PolicyArch::kTabularKGram) {
    std::size_t row = tabular_context_index(spec, context) * spec.vocab_size;
    return {params.theta.begin() + row,
            params.theta.begin() + row + spec.vocab_size};
  }
  auto l = mlp_layout(spec);
  auto f = mlp_forward(params, context, l);
  return f.pre.back();
}

LogProb log_prob(const PolicyParams& params, const PromptInstance& prompt,
                 const TokenSeq& response) {
  if (response.empty())
    throw std::invalid_argument("log_prob: response must be non-empty");
  check_tokens(params.spec, prompt.tokens);
  check_tokens(params.spec, response);
  LogProb out;
  out.per_token.reserve(response.size());
  for (std::size_t t = 0; t < response.size(); ++t) {
    auto ctx = context_window(params.spec, prompt.tokens, response, t);
    auto ls = log_softmax(policy_logits(params, ctx));
    out.per_token.push_back(ls[response[t]]);
    out.total += ls[response[t]];
  }
  return out;
}

Rollout sample_response(const PolicyParams& params, const PromptInstance& prompt,
                        Token eos_id, double temperature, int max_len,
                        RngStream& rng) {
  if (max_len < 1) throw std::invalid_argument("max_len must be >= 1");
  if (temperature <= 0.0) throw std::invalid_argument("temperature must be > 0");
  Rollout r;
  const int v = params.spec.vocab_size;
  for (int step = 0; step < max_len; ++step) {
    auto ctx = context_window(params.spec, prompt.tokens, r.tokens, r.tokens.size());
    auto logits = policy_logits(params, ctx);
    auto ls = log_softmax(logits);
    std::vector<double> probs(v);
    if (temperature == 1.0) {
      for (int i = 0; i < v; ++i) probs[i] = std::exp(ls[i]);
    } else {
      std::vector<double> scaled(v);
      for (int i = 0; i < v; ++i) scaled[i] = logits[i] / temperature;
      auto lst = log_softmax(scaled);
      for (int i = 0; i < v; ++i) probs[i] = std::exp(lst[i]);
    }
    Token tok = rng.next_categorical(probs);
    r.tokens.push_back(tok);
    r.logprobs.push_back(ls[tok]);  // temperature-1 log-prob
    if (tok == eos_id) {
      r.terminated = true;
      break;
    }
  }
  return r;
}

double token_entropy(const PolicyParams& params, const PromptInstance& prompt,
                     const TokenSeq& response) {
  if (response.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t t = 0; t < response.size(); ++t) {
    auto ctx = context_window(params.spec, prompt.tokens, response, t);
    auto ls = log_softmax(policy_logits(params, ctx));
    double h = 0.0;
    for (double lp : ls) h -= std::exp(lp) * lp;
    total += h;
  }
  return total / static_cast<double>(response.size());
}

void add_logp_gradient(const PolicyParams& params, std::span<const Token> context,
                       Token token, double coeff, std::span<double> grad) {
  const PolicySpec& spec = params.spec;
  if (spec.arch == PolicyArch::kTabularKGram) {
    std::size_t row = tabular_context_index(spec, context) * spec.vocab_size;
    auto ls = log_softmax(
        std::span<const double>(params.theta.data() + row, spec.vocab_size));
    grad[row + token] += coeff;
    for (int j = 0; j < spec.vocab_size; ++j)
      grad[row + j] -= coeff * std::exp(ls[j]);
    return;
  }

  auto l = mlp_layout(spec);
  auto f = mlp_forward(params, context, l);
  auto ls = log_softmax(f.pre.back());
  const int v = spec.vocab_size;
  // d logp / d logits = onehot - softmax
  std::vector<double> dz(v);
  for (int j = 0; j < v; ++j) dz[j] = -coeff * std::exp(ls[j]);
  dz[token] += coeff;

  const std::size_t layers = l.w_offset.size();
  const auto& th = params.theta;
  for (std::size_t li = layers; li-- > 0;) {
    const int in = l.dims[li], out = l.dims[li + 1];
    const double* w = th.data() + l.w_offset[li];
    const auto& a = f.act[li];
    double* gw = grad.data() + l.w_offset[li];
    double* gb = grad.data() + l.b_offset[li];
    std::vector<double> da(in, 0.0);
    for (int o = 0; o < out; ++o) {
      gb[o] += dz[o];
      const double* wrow = w + static_cast<std::size_t>(o) * in;
      double* gwrow = gw + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) {
        gwrow[i] += dz[o] * a[i];
        da[i] += dz[o] * wrow[i];
      }
    }
    if (li > 0) {
      // Through the tanh of the previous layer.
      for (int i = 0; i < in; ++i) {
        double t = f.act[li][i];
        da[i] *= (1.0 - t * t);
      }
      dz = std::move(da);
    } else {
      // Into the embedding rows.
      const int e = spec.embed_dim;
      for (std::size_t ci = 0; ci < context.size(); ++ci) {
        double* ge = grad.data() + l.embed_offset +
                     static_cast<std::size_t>(context[ci]) * e;
        for (int j = 0; j < e; ++j) ge[j] += da[ci * e + j];
      }
    }
  }
}

OptState init_opt_state(std::size_t param_count) {
  return OptState{std::vector<double>(param_count, 0.0),
                  std::vector<double>(param_count, 0.0), 0};
}

void adamw_step(PolicyParams& params, std::span<const double> grad,
                OptState& opt, const AdamWConfig& cfg) {
  if (grad.size() != params.theta.size() || opt.m.size() != grad.size())
    throw std::invalid_argument("adamw_step: shape mismatch");
  for (double g : grad)
    if (!std::isfinite(g)) throw std::runtime_error("adamw_step: non-finite gradient");
  opt.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(opt.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(opt.step));
  for (std::size_t i = 0; i < grad.size(); ++i) {
    opt.m[i] = cfg.beta1 * opt.m[i] + (1.0 - cfg.beta1) * grad[i];
    opt.v[i] = cfg.beta2 * opt.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    double mhat = opt.m[i] / bc1;
    double vhat = opt.v[i] / bc2;
    params.theta[i] += cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps) -
                       cfg.lr * cfg.weight_decay * params.theta[i];
  }
}

const char* to_string(PolicyArch arch) {
  return arch == PolicyArch::kTabularKGram ? "tabular_kgram" : "mlp";
}

void save_checkpoint(const PolicyParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  out << "tinyrl-checkpoint\n";
  out << "format_version=1\n";
  out << "arch=" << to_string(params.spec.arch) << "\n";
  out << "vocab_size=" << params.spec.vocab_size << "\n";
  out << "context_len=" << params.spec.context_len << "\n";
  out << "embed_dim=" << params.spec.embed_dim << "\n";
  out << "hidden_sizes=";
  for (std::size_t i = 0; i < params.spec.hidden_sizes.size(); ++i) {
    if (i) out << ",";
    out << params.spec.hidden_sizes[i];
  }
  out << "\n";
  out << "param_count=" << params.theta.size() << "\n";
  out << "theta\n";
  static_assert(sizeof(double) == 8);
  out.write(reinterpret_cast<const char*>(params.theta.data()),
            static_cast<std::streamsize>(params.theta.size() * sizeof(double)));
  if (!out) throw std::runtime_error("checkpoint write failed: " + path.string());
}

PolicyParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "tinyrl-checkpoint")
    throw std::runtime_error("bad checkpoint magic in " + path.string());
  PolicySpec spec;
  std::size_t count = 0;
  while (std::getline(in, line) && line != "theta") {
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("malformed checkpoint header line: " + line);
    std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    if (key == "format_version") {
      if (val != "1") throw std::runtime_error("unsupported checkpoint version " + val);
    } else if (key == "arch") {
      if (val == "tabular_kgram") spec.arch = PolicyArch::kTabularKGram;
      else if (val == "mlp") spec.arch = PolicyArch::kMlp;
      else throw std::runtime_error("unknown arch: " + val);
    } else if (key == "vocab_size") spec.vocab_size = std::stoi(val);
    else if (key == "context_len") spec.context_len = std::stoi(val);
    else if (key == "embed_dim") spec.embed_dim = std::stoi(val);
    else if (key == "hidden_sizes") {
      std::stringstream ss(val);
      std::string tok;
      while (std::getline(ss, tok, ',')) if (!tok.empty()) spec.hidden_sizes.push_back(std::stoi(tok));
    } else if (key == "param_count") count = std::stoul(val);
    else throw std::runtime_error("unknown checkpoint header key: " + key);
  }
  if (count != spec.param_count())
    throw std::runtime_error("checkpoint param_count does not match spec");
  PolicyParams p{spec, std::vector<double>(count)};
  in.read(reinterpret_cast<char*>(p.theta.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(double))
    throw std::runtime_error("checkpoint truncated: " + path.string());
  return p;
}

}  // namespace tinyrl
