#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tinyrl/env.hpp"
#include "tinyrl/policy.hpp"
#include "tinyrl/rng.hpp"
#include "tinyrl/types.hpp"

namespace tinyrl {

struct EnumerationDomain {
  TaskSpec task;
  int max_len = 3;
  std::size_t budget = 1'000'000;
};

// Every terminal outcome of the sampler: sequences ending in EOS with
// length <= max_len, plus EOS-free sequences of exactly max_len (the
// truncation outcomes, rewarded -1 by the verifier).
std::vector<TokenSeq> enumerate_responses(const EnumerationDomain& domain);

double response_probability(const PolicyParams& params, const PromptInstance& prompt,
                            const TokenSeq& response);

// J(theta) = sum_a pi(a|x) r(x, a) over the full outcome space.
double exact_objective(const PolicyParams& params, const EnumerationDomain& domain,
                       const PromptInstance& prompt);

// sum_a pi(a|x) grad log pi(a|x) r(x, a)
std::vector<double> exact_gradient(const PolicyParams& params,
                                   const EnumerationDomain& domain,
                                   const PromptInstance& prompt);

// Central differences per coordinate.
std::vector<double> finite_diff_gradient(
    const std::function<double(const PolicyParams&)>& f, const PolicyParams& params,
    double h);

struct BiasCoordinate {
  double estimate_mean = 0.0;
  double std_error = 0.0;
  double exact = 0.0;
  double z = 0.0;
  double variance = 0.0;
};

struct BiasReport {
  std::vector<BiasCoordinate> coords;
  long n_samples = 0;
  bool pass = false;  // every |z| <= z_threshold
  double max_abs_z = 0.0;

  std::string to_text() const;
  std::string to_json() const;
};

// Monte-Carlo check that the mean of single-rollout unclipped gradient
// estimates matches the exact gradient of the correspondingly weighted
// objective. mean_center=true draws groups of group_size and subtracts the
// within-group mean reward as a baseline (still unbiased). z_threshold is the
// per-coordinate |z| bound for the pass verdict; callers testing many
// coordinates at once should widen it to keep the family-wise false-alarm
// rate controlled.
BiasReport estimator_bias_check(const PolicyParams& params,
                                const EnumerationDomain& domain,
                                const PromptInstance& prompt, long n_samples,
                                bool mean_center, int group_size, RngStream& rng,
                                double z_threshold = 3.0);

}  // namespace tinyrl
