#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace icmbayes {

// Covariance too close to singular for a trustworthy inverse.
class SingularCovarianceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Component pair in parameter space: x holds the theta component, y the psi
// component. Also reused for data vectors (sample mean of x, sample mean of
// eta).
struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Symmetric 2x2 matrix stored as three entries, so symmetry holds by
// construction and never needs re-enforcing after arithmetic.
struct SymMat2 {
  double xx = 1.0;
  double xy = 0.0;
  double yy = 1.0;

  double det() const { return xx * yy - xy * xy; }
  double frobenius_sq() const { return xx * xx + 2.0 * xy * xy + yy * yy; }

  // Closed-form adjugate/determinant inverse. Throws SingularCovarianceError
  // when det falls under 1e-15 * ||A||_F^2.
  SymMat2 inverse() const;

  Vec2 operator*(Vec2 v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
  SymMat2 operator+(SymMat2 o) const { return {xx + o.xx, xy + o.xy, yy + o.yy}; }

  bool positive_definite() const { return xx > 0.0 && det() > 0.0; }
};

// Bivariate Gaussian belief over (theta, psi). Positive definiteness is
// checked at construction; instances are immutable afterwards.
class Gaussian2 {
 public:
  Gaussian2(Vec2 mean, SymMat2 cov);

  const Vec2& mean() const { return mean_; }
  const SymMat2& cov() const { return cov_; }

 private:
  Vec2 mean_;
  SymMat2 cov_;
};

// Prior over (theta, psi) in correlation form. |rho| < 1 strictly so the
// materialized covariance is invertible.
struct PriorSpec {
  PriorSpec(double mean_theta, double mean_psi, double var_theta, double var_psi,
            double rho);

  double mean_theta;
  double mean_psi;
  double var_theta;
  double var_psi;
  double rho;

  Gaussian2 materialize() const;
};

PriorSpec with_rho(const PriorSpec& base, double rho);

// Per-sample observation covariance of (x, eta) given (theta, psi). Diagonal
// only: cause and noise are drawn independently.
struct LikelihoodSpec {
  LikelihoodSpec(double var_x, double var_eta);

  double var_x;
  double var_eta;
};

struct LabeledSample {
  double x = 0.0;  // cause realization
  double y = 0.0;  // effect realization
};

// Labeled sample after the additive-model transform eta = y - x.
struct CauseNoisePair {
  double x = 0.0;
  double eta = 0.0;
};

struct ObservationSet {
  std::vector<LabeledSample> labeled;
  std::vector<double> unlabeled_causes;
};

// n == 0 uses the zero convention for both means; consumers must branch on n.
struct SufficientStats {
  std::int64_t n = 0;
  double mean_x = 0.0;
  double mean_eta = 0.0;
};

std::vector<CauseNoisePair> transform_labeled(std::span<const LabeledSample> labeled);

SufficientStats sufficient_stats(std::span<const CauseNoisePair> pairs);

double log_likelihood(std::span<const CauseNoisePair> pairs, double theta, double psi,
                      const LikelihoodSpec& lik);

// Depends on theta only; the mechanism parameter does not appear by
// construction of the cause-only likelihood.
double unlabeled_log_likelihood(std::span<const double> causes, double theta,
                                const LikelihoodSpec& lik);

double log_normal_density(double value, double mean, double var);

double log_density(const Gaussian2& g, double theta, double psi);

}  // namespace icmbayes
