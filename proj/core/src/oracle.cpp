#include "tinyrl/oracle.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace tinyrl {

namespace {

void enumerate_rec(const Vocab& vb, int max_len, std::size_t budget,
                   TokenSeq& prefix, std::vector<TokenSeq>& out) {
  for (Token t = 0; t < vb.size; ++t) {
    prefix.push_back(t);
    if (t == vb.eos || static_cast<int>(prefix.size()) == max_len) {
      out.push_back(prefix);
      if (out.size() > budget)
        throw std::runtime_error("enumerate_responses: budget exceeded");
    } else {
      enumerate_rec(vb, max_len, budget, prefix, out);
    }
    prefix.pop_back();
  }
}

}  // namespace

std::vector<TokenSeq> enumerate_responses(const EnumerationDomain& domain) {
  const Vocab vb = task_vocab(domain.task);
  std::vector<TokenSeq> out;
  TokenSeq prefix;
  enumerate_rec(vb, domain.max_len, domain.budget, prefix, out);
  return out;
}

double response_probability(const PolicyParams& params, const PromptInstance& prompt,
                            const TokenSeq& response) {
  return std::exp(log_prob(params, prompt, response).total);
}

double exact_objective(const PolicyParams& params, const EnumerationDomain& domain,
                       const PromptInstance& prompt) {
  double j = 0.0;
  for (const auto& seq : enumerate_responses(domain)) {
    const double p = response_probability(params, prompt, seq);
    const int r = verify(domain.task, prompt, seq).reward;
    j += p * r;
  }
  return j;
}

std::vector<double> exact_gradient(const PolicyParams& params,
                                   const EnumerationDomain& domain,
                                   const PromptInstance& prompt) {
  std::vector<double> grad(params.theta.size(), 0.0);
  for (const auto& seq : enumerate_responses(domain)) {
    const double p = response_probability(params, prompt, seq);
    const int r = verify(domain.task, prompt, seq).reward;
    const double coeff = p * r;
    if (coeff == 0.0) continue;
    for (std::size_t t = 0; t < seq.size(); ++t) {
      auto ctx = context_window(params.spec, prompt.tokens, seq, t);
      add_logp_gradient(params, ctx, seq[t], coeff, grad);
    }
  }
  return grad;
}

std::vector<double> finite_diff_gradient(
    const std::function<double(const PolicyParams&)>& f, const PolicyParams& params,
    double h) {
  if (h <= 0.0) throw std::invalid_argument("finite_diff_gradient: h must be > 0");
  std::vector<double> grad(params.theta.size());
  PolicyParams p = params;
  for (std::size_t i = 0; i < p.theta.size(); ++i) {
    const double orig = p.theta[i];
    p.theta[i] = orig + h;
    const double fp = f(p);
    p.theta[i] = orig - h;
    const double fm = f(p);
    p.theta[i] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::runtime_error("finite_diff_gradient: non-finite objective");
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

BiasReport estimator_bias_check(const PolicyParams& params,
                                const EnumerationDomain& domain,
                                const PromptInstance& prompt, long n_samples,
                                bool mean_center, int group_size, RngStream& rng,
                                double z_threshold) {
  if (n_samples < 1000)
    throw std::invalid_argument("estimator_bias_check: n_samples must be >= 1000");
  if (group_size < 1 || (mean_center && group_size < 2))
    throw std::invalid_argument("estimator_bias_check: bad group_size");

  const Vocab vb = task_vocab(domain.task);
  auto exact = exact_gradient(params, domain, prompt);
  // The within-group mean baseline shrinks the estimator's expectation by
  // (n-1)/n: the leave-one-in term E[grad logp(a_i) r_i]/n survives the
  // independence argument that kills the j != i cross terms.
  const double target_scale =
      mean_center ? (group_size - 1.0) / group_size : 1.0;

  const std::size_t dim = params.theta.size();
  std::vector<double> sum(dim, 0.0), sum_sq(dim, 0.0);
  std::vector<double> estimate(dim);
  std::vector<std::vector<double>> lps(group_size);
  std::vector<Rollout> rollouts(group_size);

  for (long s = 0; s < n_samples; ++s) {
    std::vector<double> rewards(group_size);
    for (int g = 0; g < group_size; ++g) {
      rollouts[g] = sample_response(params, prompt, vb.eos, 1.0, domain.max_len, rng);
      rewards[g] = verify(domain.task, prompt, rollouts[g].tokens).reward;
    }
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= group_size;
    std::fill(estimate.begin(), estimate.end(), 0.0);
    for (int g = 0; g < group_size; ++g) {
      const double w = (mean_center ? rewards[g] - mean : rewards[g]) / group_size;
      if (w == 0.0) continue;
      for (std::size_t t = 0; t < rollouts[g].tokens.size(); ++t) {
        auto ctx = context_window(params.spec, prompt.tokens, rollouts[g].tokens, t);
        add_logp_gradient(params, ctx, rollouts[g].tokens[t], w, estimate);
      }
    }
    for (std::size_t i = 0; i < dim; ++i) {
      sum[i] += estimate[i];
      sum_sq[i] += estimate[i] * estimate[i];
    }
  }

  BiasReport report;
  report.n_samples = n_samples;
  report.coords.resize(dim);
  report.pass = true;
  for (std::size_t i = 0; i < dim; ++i) {
    auto& c = report.coords[i];
    c.estimate_mean = sum[i] / n_samples;
    c.variance = sum_sq[i] / n_samples - c.estimate_mean * c.estimate_mean;
    c.std_error = std::sqrt(std::max(c.variance, 0.0) / n_samples);
    c.exact = target_scale * exact[i];
    const double diff = c.estimate_mean - c.exact;
    if (c.std_error > 0.0) {
      c.z = diff / c.std_error;
    } else {
      // Zero sample variance means the estimate is a constant here; a real
      // bias would be macroscopic, while an exact gradient below numerical
      // resolution is rounding residue from the enumeration sum.
      c.z = std::abs(diff) <= 1e-9 ? 0.0 : 1e18;
    }
    report.max_abs_z = std::max(report.max_abs_z, std::abs(c.z));
    if (std::abs(c.z) > z_threshold) report.pass = false;
  }
  return report;
}

std::string BiasReport::to_text() const {
  std::ostringstream os;
  os << "coord  estimate      exact         stderr        z\n";
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const auto& c = coords[i];
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-6zu %-13.6g %-13.6g %-13.6g %.3f\n", i,
                  c.estimate_mean, c.exact, c.std_error, c.z);
    os << buf;
  }
  os << "samples=" << n_samples << " max|z|=" << max_abs_z
     << " verdict=" << (pass ? "pass" : "fail") << "\n";
  return os.str();
}

std::string BiasReport::to_json() const {
  nlohmann::json j;
  j["n_samples"] = n_samples;
  j["pass"] = pass;
  j["max_abs_z"] = max_abs_z;
  auto& arr = j["coords"] = nlohmann::json::array();
  for (const auto& c : coords) {
    arr.push_back({{"estimate_mean", c.estimate_mean},
                   {"std_error", c.std_error},
                   {"exact", c.exact},
                   {"z", c.z},
                   {"variance", c.variance}});
  }
  return j.dump();
}

}  // namespace tinyrl
