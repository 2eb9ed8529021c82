#include "icmbayes/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "icmbayes/util.hpp"

namespace icmbayes {

namespace {

constexpr double kMaxEdgeMass = 1e-3;
constexpr double kRowMassFloor = 1e-8;

void require_normalized(const GridDensity& g, const char* op) {
  if (!g.normalized()) {
    throw std::invalid_argument(std::string(op) + ": grid density must be normalized");
  }
}

}  // namespace

BoundaryMassError::BoundaryMassError(double edge_mass)
    : std::runtime_error("grid boundary cells hold " + std::to_string(edge_mass) +
                         " of the posterior mass; the grid is too small"),
      edge_mass_(edge_mass) {}

GridSpec::GridSpec(double theta_min_, double theta_max_, double psi_min_, double psi_max_,
                   int n_theta_, int n_psi_)
    : theta_min(theta_min_),
      theta_max(theta_max_),
      psi_min(psi_min_),
      psi_max(psi_max_),
      n_theta(n_theta_),
      n_psi(n_psi_) {
  if (!(theta_max > theta_min) || !(psi_max > psi_min)) {
    throw std::invalid_argument("GridSpec: max must exceed min on each axis");
  }
  if (n_theta < 2 || n_psi < 2) {
    throw std::invalid_argument("GridSpec: need at least 2 cells per axis");
  }
  if (!std::isfinite(theta_min) || !std::isfinite(theta_max) || !std::isfinite(psi_min) ||
      !std::isfinite(psi_max)) {
    throw std::invalid_argument("GridSpec: bounds must be finite");
  }
}

GridDensity::GridDensity(GridSpec spec, std::vector<double> normalized_log_values)
    : spec_(spec), log_values_(std::move(normalized_log_values)), normalized_(true) {
  if (log_values_.size() != static_cast<std::size_t>(spec_.n_theta) *
                                static_cast<std::size_t>(spec_.n_psi)) {
    throw std::invalid_argument("GridDensity: value count does not match grid");
  }
}

std::vector<double> GridDensity::marginal_theta() const {
  std::vector<double> out(spec_.n_theta, 0.0);
  const double dpsi = spec_.dpsi();
  for (int i = 0; i < spec_.n_theta; ++i) {
    double acc = 0.0;
    for (int j = 0; j < spec_.n_psi; ++j) {
      acc += density(i, j);
    }
    out[i] = acc * dpsi;
  }
  return out;
}

std::vector<double> GridDensity::marginal_psi() const {
  std::vector<double> out(spec_.n_psi, 0.0);
  const double dtheta = spec_.dtheta();
  for (int j = 0; j < spec_.n_psi; ++j) {
    double acc = 0.0;
    for (int i = 0; i < spec_.n_theta; ++i) {
      acc += density(i, j);
    }
    out[j] = acc * dtheta;
  }
  return out;
}

double GridDensity::total_mass() const {
  double acc = 0.0;
  for (int i = 0; i < spec_.n_theta; ++i) {
    for (int j = 0; j < spec_.n_psi; ++j) {
      acc += density(i, j);
    }
  }
  return acc * spec_.cell_area();
}

GridDensity grid_from_log_density(const GridSpec& spec, const LogDensityFn& log_unnorm) {
  const std::size_t total = static_cast<std::size_t>(spec.n_theta) *
                            static_cast<std::size_t>(spec.n_psi);
  std::vector<double> values(total);
  for (int i = 0; i < spec.n_theta; ++i) {
    const double theta = spec.theta_center(i);
    double* row = values.data() + static_cast<std::size_t>(i) * spec.n_psi;
    for (int j = 0; j < spec.n_psi; ++j) {
      row[j] = log_unnorm(theta, spec.psi_center(j));
    }
  }

  // Max-shifted log-sum-exp normalizer; reduction order is fixed.
  const double max_v = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(max_v)) {
    throw std::invalid_argument("grid_from_log_density: log density not finite anywhere");
  }
  double sum = 0.0;
  for (double v : values) {
    sum += std::exp(v - max_v);
  }
  const double log_norm = max_v + std::log(sum) + std::log(spec.cell_area());
  for (double& v : values) {
    v = std::max(v - log_norm, GridDensity::kLogFloor);
  }

  GridDensity g(spec, std::move(values));

  double edge_mass = 0.0;
  for (int i = 0; i < spec.n_theta; ++i) {
    for (int j = 0; j < spec.n_psi; ++j) {
      if (i == 0 || j == 0 || i == spec.n_theta - 1 || j == spec.n_psi - 1) {
        edge_mass += g.density(i, j);
      }
    }
  }
  edge_mass *= spec.cell_area();
  if (edge_mass > kMaxEdgeMass) {
    throw BoundaryMassError(edge_mass);
  }
  return g;
}

GridDensity grid_posterior(const LogDensityFn& log_prior, const ObservationSet& obs,
                           const LikelihoodSpec& lik, const GridSpec& spec) {
  const std::vector<CauseNoisePair> pairs = transform_labeled(obs.labeled);
  return grid_from_log_density(spec, [&](double theta, double psi) {
    return log_prior(theta, psi) + log_likelihood(pairs, theta, psi, lik) +
           unlabeled_log_likelihood(obs.unlabeled_causes, theta, lik);
  });
}

GridDensity grid_posterior(const Gaussian2& prior, const ObservationSet& obs,
                           const LikelihoodSpec& lik, const GridSpec& spec) {
  // Precompute the prior's precision once; the closure is evaluated per cell.
  const SymMat2 prec = prior.cov().inverse();
  const double log_norm_const =
      -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(prior.cov().det());
  const Vec2 mu = prior.mean();
  const LogDensityFn log_prior = [prec, log_norm_const, mu](double theta, double psi) {
    const double dx = theta - mu.x;
    const double dy = psi - mu.y;
    return log_norm_const -
           0.5 * (prec.xx * dx * dx + 2.0 * prec.xy * dx * dy + prec.yy * dy * dy);
  };
  return grid_posterior(log_prior, obs, lik, spec);
}

GridSpec default_grid(const Gaussian2& prior, int cells_per_axis) {
  const double s_theta = std::sqrt(prior.cov().xx);
  const double s_psi = std::sqrt(prior.cov().yy);
  return GridSpec(prior.mean().x - 6.0 * s_theta, prior.mean().x + 6.0 * s_theta,
                  prior.mean().y - 6.0 * s_psi, prior.mean().y + 6.0 * s_psi,
                  cells_per_axis, cells_per_axis);
}

GridDensity grid_posterior_auto(const Gaussian2& prior, const ObservationSet& obs,
                                const LikelihoodSpec& lik, int cells_per_axis) {
  GridSpec spec = default_grid(prior, cells_per_axis);
  constexpr int kMaxWidenings = 8;
  for (int attempt = 0;; ++attempt) {
    try {
      return grid_posterior(prior, obs, lik, spec);
    } catch (const BoundaryMassError&) {
      if (attempt == kMaxWidenings) {
        throw;
      }
      const double ct = 0.5 * (spec.theta_min + spec.theta_max);
      const double cp = 0.5 * (spec.psi_min + spec.psi_max);
      const double ht = 0.75 * (spec.theta_max - spec.theta_min);
      const double hp = 0.75 * (spec.psi_max - spec.psi_min);
      spec = GridSpec(ct - ht, ct + ht, cp - hp, cp + hp, spec.n_theta, spec.n_psi);
    }
  }
}

double factorization_gap(const GridDensity& g) {
  require_normalized(g, "factorization_gap");
  const auto p_theta = g.marginal_theta();
  const auto p_psi = g.marginal_psi();
  const GridSpec& spec = g.spec();
  double acc = 0.0;
  for (int i = 0; i < spec.n_theta; ++i) {
    for (int j = 0; j < spec.n_psi; ++j) {
      acc += std::abs(g.density(i, j) - p_theta[i] * p_psi[j]);
    }
  }
  return 0.5 * acc * spec.cell_area();
}

double conditional_slice_gap(const GridDensity& with_dx, const GridDensity& without_dx) {
  if (!(with_dx.spec() == without_dx.spec())) {
    throw GridMismatchError("conditional_slice_gap: grids must share one GridSpec");
  }
  require_normalized(with_dx, "conditional_slice_gap");
  require_normalized(without_dx, "conditional_slice_gap");
  const GridSpec& spec = with_dx.spec();
  const double dpsi = spec.dpsi();
  const double dtheta = spec.dtheta();
  double worst = 0.0;
  for (int i = 0; i < spec.n_theta; ++i) {
    double row_a = 0.0;
    double row_b = 0.0;
    for (int j = 0; j < spec.n_psi; ++j) {
      row_a += with_dx.density(i, j);
      row_b += without_dx.density(i, j);
    }
    row_a *= dpsi;
    row_b *= dpsi;
    // Row probability mass, not density: rows carrying ~0/0 conditionals are
    // skipped.
    if (row_a * dtheta <= kRowMassFloor || row_b * dtheta <= kRowMassFloor) {
      continue;
    }
    double tv = 0.0;
    for (int j = 0; j < spec.n_psi; ++j) {
      tv += std::abs(with_dx.density(i, j) / row_a - without_dx.density(i, j) / row_b);
    }
    worst = std::max(worst, 0.5 * tv * dpsi);
  }
  return worst;
}

double grid_mutual_information(const GridDensity& g) {
  require_normalized(g, "grid_mutual_information");
  const auto p_theta = g.marginal_theta();
  const auto p_psi = g.marginal_psi();
  const GridSpec& spec = g.spec();
  double acc = 0.0;
  for (int i = 0; i < spec.n_theta; ++i) {
    for (int j = 0; j < spec.n_psi; ++j) {
      const double p = g.density(i, j);
      if (p <= 0.0) {
        continue;  // floored cells contribute nothing
      }
      acc += p * (g.log_value(i, j) - std::log(p_theta[i]) - std::log(p_psi[j]));
    }
  }
  const double mi = acc * spec.cell_area();
  return (mi < 0.0 && mi > -1e-9) ? 0.0 : mi;
}

namespace {

Moments1 moments_from_marginal(const std::vector<double>& marginal, double step,
                               double origin) {
  double mass = 0.0;
  double first = 0.0;
  double second = 0.0;
  for (std::size_t k = 0; k < marginal.size(); ++k) {
    const double c = origin + (static_cast<double>(k) + 0.5) * step;
    const double w = marginal[k] * step;
    mass += w;
    first += c * w;
    second += c * c * w;
  }
  const double mean = first / mass;
  return {mean, second / mass - mean * mean};
}

}  // namespace

Moments1 marginal_moments_theta(const GridDensity& g) {
  return moments_from_marginal(g.marginal_theta(), g.spec().dtheta(), g.spec().theta_min);
}

Moments1 marginal_moments_psi(const GridDensity& g) {
  return moments_from_marginal(g.marginal_psi(), g.spec().dpsi(), g.spec().psi_min);
}

LogDensityFn mixture_log_density(std::vector<WeightedGaussian2> components) {
  if (components.empty()) {
    throw std::invalid_argument("mixture_log_density: need at least one component");
  }
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0)) {
      throw std::invalid_argument("mixture_log_density: weights must be > 0");
    }
    total += c.weight;
  }
  std::vector<double> log_w;
  log_w.reserve(components.size());
  for (const auto& c : components) {
    log_w.push_back(std::log(c.weight / total));
  }
  return [components = std::move(components), log_w = std::move(log_w)](double theta,
                                                                        double psi) {
    // Streaming log-add-exp keeps the closure allocation-free per cell.
    double acc = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < components.size(); ++k) {
      const double term = log_w[k] + log_density(components[k].component, theta, psi);
      if (term == -std::numeric_limits<double>::infinity()) {
        continue;
      }
      if (acc == -std::numeric_limits<double>::infinity()) {
        acc = term;
      } else if (term > acc) {
        acc = term + std::log1p(std::exp(acc - term));
      } else {
        acc = acc + std::log1p(std::exp(term - acc));
      }
    }
    return acc;
  };
}

void write_grid_csv(const GridDensity& g, std::ostream& out) {
  out << "theta,psi,density\n";
  const GridSpec& spec = g.spec();
  for (int i = 0; i < spec.n_theta; ++i) {
    for (int j = 0; j < spec.n_psi; ++j) {
      out << format_double(spec.theta_center(i)) << ',' << format_double(spec.psi_center(j))
          << ',' << format_double(g.density(i, j)) << '\n';
    }
  }
}

}  // namespace icmbayes
