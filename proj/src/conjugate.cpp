#include "icmbayes/conjugate.hpp"

#include <cmath>
#include <stdexcept>

namespace icmbayes {

namespace {

// Shared core: posterior precision = prior precision + data information;
// posterior mean solves the combined natural parameters.
Gaussian2 precision_update(const Gaussian2& prior, const SymMat2& data_info,
                           Vec2 data_vector) {
  const SymMat2 prior_prec = prior.cov().inverse();
  const SymMat2 post_prec = prior_prec + data_info;
  const SymMat2 post_cov = post_prec.inverse();
  const Vec2 h = {data_info.xx * data_vector.x + data_info.xy * data_vector.y +
                      prior_prec.xx * prior.mean().x + prior_prec.xy * prior.mean().y,
                  data_info.xy * data_vector.x + data_info.yy * data_vector.y +
                      prior_prec.xy * prior.mean().x + prior_prec.yy * prior.mean().y};
  return Gaussian2(post_cov * h, post_cov);
}

}  // namespace

Gaussian1::Gaussian1(double mean_, double var_) : mean(mean_), var(var_) {
  if (!(var > 0.0) || !std::isfinite(var) || !std::isfinite(mean)) {
    throw std::invalid_argument("Gaussian1.var must be > 0 and finite");
  }
}

Gaussian2 supervised_update(const Gaussian2& prior, const SufficientStats& stats,
                            const LikelihoodSpec& lik) {
  if (stats.n == 0) {
    return prior;
  }
  const double n = static_cast<double>(stats.n);
  const SymMat2 data_info = {n / lik.var_x, 0.0, n / lik.var_eta};
  return precision_update(prior, data_info, {stats.mean_x, stats.mean_eta});
}

Gaussian2 supervised_update(const Gaussian2& prior, std::span<const CauseNoisePair> pairs,
                            const LikelihoodSpec& lik) {
  return supervised_update(prior, sufficient_stats(pairs), lik);
}

Gaussian2 semi_supervised_update(const Gaussian2& prior, std::int64_t m,
                                 double mean_x_unlabeled, const LikelihoodSpec& lik) {
  if (m == 0) {
    return prior;
  }
  const double md = static_cast<double>(m);
  const SymMat2 data_info = {md / lik.var_x, 0.0, 0.0};
  // Second data component fixed to 0: the zero psi row of the information
  // matrix masks it, which keeps the masking auditable.
  return precision_update(prior, data_info, {mean_x_unlabeled, 0.0});
}

Gaussian2 chain_update(const Gaussian2& prior, std::int64_t m, double mean_x_unlabeled,
                       const SufficientStats& stats, const LikelihoodSpec& lik) {
  return supervised_update(semi_supervised_update(prior, m, mean_x_unlabeled, lik), stats,
                           lik);
}

Gaussian1 marginal_psi(const Gaussian2& g) {
  return Gaussian1(g.mean().y, g.cov().yy);
}

Gaussian1 condition_psi_on_theta(const Gaussian2& g, double theta) {
  const double slope = g.cov().xy / g.cov().xx;
  const double mean = g.mean().y + slope * (theta - g.mean().x);
  const double var = g.cov().yy - g.cov().xy * slope;
  return Gaussian1(mean, var);
}

double log_density_1d(const Gaussian1& g, double value) {
  return log_normal_density(value, g.mean, g.var);
}

}  // namespace icmbayes
