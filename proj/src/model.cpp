#include "icmbayes/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace icmbayes {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void require_finite(double v, const char* field) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(std::string(field) + " must be finite");
  }
}

}  // namespace

SymMat2 SymMat2::inverse() const {
  const double d = det();
  if (!(d > 1e-15 * frobenius_sq())) {
    throw SingularCovarianceError("SymMat2.inverse: matrix is numerically singular (det=" +
                                  std::to_string(d) + ")");
  }
  return {yy / d, -xy / d, xx / d};
}

Gaussian2::Gaussian2(Vec2 mean, SymMat2 cov) : mean_(mean), cov_(cov) {
  require_finite(mean.x, "Gaussian2.mean[0]");
  require_finite(mean.y, "Gaussian2.mean[1]");
  require_finite(cov.xx, "Gaussian2.cov[0][0]");
  require_finite(cov.xy, "Gaussian2.cov[0][1]");
  require_finite(cov.yy, "Gaussian2.cov[1][1]");
  if (!cov.positive_definite()) {
    throw std::invalid_argument("Gaussian2.cov must be positive definite");
  }
}

PriorSpec::PriorSpec(double mean_theta_, double mean_psi_, double var_theta_,
                     double var_psi_, double rho_)
    : mean_theta(mean_theta_),
      mean_psi(mean_psi_),
      var_theta(var_theta_),
      var_psi(var_psi_),
      rho(rho_) {
  require_finite(mean_theta, "PriorSpec.mean_theta");
  require_finite(mean_psi, "PriorSpec.mean_psi");
  if (!(var_theta > 0.0) || !std::isfinite(var_theta)) {
    throw std::invalid_argument("PriorSpec.var_theta must be > 0");
  }
  if (!(var_psi > 0.0) || !std::isfinite(var_psi)) {
    throw std::invalid_argument("PriorSpec.var_psi must be > 0");
  }
  if (!(std::abs(rho) < 1.0)) {
    throw std::invalid_argument("PriorSpec.rho must satisfy |rho| < 1");
  }
}

Gaussian2 PriorSpec::materialize() const {
  const double off = rho * std::sqrt(var_theta * var_psi);
  return Gaussian2({mean_theta, mean_psi}, {var_theta, off, var_psi});
}

PriorSpec with_rho(const PriorSpec& base, double rho) {
  return PriorSpec(base.mean_theta, base.mean_psi, base.var_theta, base.var_psi, rho);
}

LikelihoodSpec::LikelihoodSpec(double var_x_, double var_eta_)
    : var_x(var_x_), var_eta(var_eta_) {
  if (!(var_x > 0.0) || !std::isfinite(var_x)) {
    throw std::invalid_argument("LikelihoodSpec.var_x must be > 0");
  }
  if (!(var_eta > 0.0) || !std::isfinite(var_eta)) {
    throw std::invalid_argument("LikelihoodSpec.var_eta must be > 0");
  }
}

std::vector<CauseNoisePair> transform_labeled(std::span<const LabeledSample> labeled) {
  std::vector<CauseNoisePair> out;
  out.reserve(labeled.size());
  for (const auto& s : labeled) {
    out.push_back({s.x, s.y - s.x});
  }
  return out;
}

SufficientStats sufficient_stats(std::span<const CauseNoisePair> pairs) {
  SufficientStats stats;
  stats.n = static_cast<std::int64_t>(pairs.size());
  if (stats.n == 0) {
    return stats;
  }
  double sum_x = 0.0;
  double sum_eta = 0.0;
  for (const auto& p : pairs) {
    sum_x += p.x;
    sum_eta += p.eta;
  }
  stats.mean_x = sum_x / static_cast<double>(stats.n);
  stats.mean_eta = sum_eta / static_cast<double>(stats.n);
  return stats;
}

double log_likelihood(std::span<const CauseNoisePair> pairs, double theta, double psi,
                      const LikelihoodSpec& lik) {
  double total = 0.0;
  for (const auto& p : pairs) {
    total += log_normal_density(p.x, theta, lik.var_x);
    total += log_normal_density(p.eta, psi, lik.var_eta);
  }
  return total;
}

double unlabeled_log_likelihood(std::span<const double> causes, double theta,
                                const LikelihoodSpec& lik) {
  double total = 0.0;
  for (double x : causes) {
    total += log_normal_density(x, theta, lik.var_x);
  }
  return total;
}

double log_normal_density(double value, double mean, double var) {
  const double d = value - mean;
  return -0.5 * (kLog2Pi + std::log(var) + d * d / var);
}

double log_density(const Gaussian2& g, double theta, double psi) {
  const SymMat2 prec = g.cov().inverse();
  const double dx = theta - g.mean().x;
  const double dy = psi - g.mean().y;
  const double quad = prec.xx * dx * dx + 2.0 * prec.xy * dx * dy + prec.yy * dy * dy;
  return -kLog2Pi - 0.5 * std::log(g.cov().det()) - 0.5 * quad;
}

}  // namespace icmbayes
