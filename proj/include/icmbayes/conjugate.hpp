#pragma once

#include <cstdint>
#include <span>

#include "icmbayes/model.hpp"

namespace icmbayes {

// Scalar Gaussian belief, used for the psi marginal and the psi-given-theta
// conditional.
struct Gaussian1 {
  Gaussian1(double mean, double var);

  double mean;
  double var;
};

// Closed-form posterior from a fully labeled dataset: precisions of prior and
// per-sample observation add, data enters through the sample means. n == 0
// returns the prior unchanged (bit-exact).
Gaussian2 supervised_update(const Gaussian2& prior, const SufficientStats& stats,
                            const LikelihoodSpec& lik);

Gaussian2 supervised_update(const Gaussian2& prior, std::span<const CauseNoisePair> pairs,
                            const LikelihoodSpec& lik);

// Cause-only update: the per-sample information matrix diag(1/var_x, 0) adds
// mass to the theta block only, so the data vector's second component is never
// read. m == 0 returns the prior unchanged (bit-exact).
Gaussian2 semi_supervised_update(const Gaussian2& prior, std::int64_t m,
                                 double mean_x_unlabeled, const LikelihoodSpec& lik);

// Cause-only update followed by the fully supervised update, with the
// intermediate belief acting as the new prior.
Gaussian2 chain_update(const Gaussian2& prior, std::int64_t m, double mean_x_unlabeled,
                       const SufficientStats& stats, const LikelihoodSpec& lik);

Gaussian1 marginal_psi(const Gaussian2& g);

Gaussian1 condition_psi_on_theta(const Gaussian2& g, double theta);

double log_density_1d(const Gaussian1& g, double value);

}  // namespace icmbayes
