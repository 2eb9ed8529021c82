#pragma once

#include <cmath>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "icmbayes/model.hpp"

namespace icmbayes {

// More than the allowed share of posterior mass sits in edge cells, so the
// normalization cannot be trusted: the grid is too small.
class BoundaryMassError : public std::runtime_error {
 public:
  explicit BoundaryMassError(double edge_mass);
  double edge_mass() const { return edge_mass_; }

 private:
  double edge_mass_;
};

class GridMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Uniform rectangular grid over (theta, psi); densities live at cell centers.
struct GridSpec {
  GridSpec(double theta_min, double theta_max, double psi_min, double psi_max,
           int n_theta, int n_psi);

  double theta_min;
  double theta_max;
  double psi_min;
  double psi_max;
  int n_theta;
  int n_psi;

  double dtheta() const { return (theta_max - theta_min) / n_theta; }
  double dpsi() const { return (psi_max - psi_min) / n_psi; }
  double cell_area() const { return dtheta() * dpsi(); }
  double theta_center(int i) const { return theta_min + (i + 0.5) * dtheta(); }
  double psi_center(int j) const { return psi_min + (j + 0.5) * dpsi(); }

  bool operator==(const GridSpec&) const = default;
};

// Discretized joint density over (theta, psi), stored in log space with a
// finite floor. Cells at the floor count as zero mass.
class GridDensity {
 public:
  static constexpr double kLogFloor = -745.0;

  GridDensity(GridSpec spec, std::vector<double> normalized_log_values);

  const GridSpec& spec() const { return spec_; }
  bool normalized() const { return normalized_; }

  double log_value(int i, int j) const { return log_values_[index(i, j)]; }

  double density(int i, int j) const {
    const double lv = log_values_[index(i, j)];
    return lv <= kLogFloor ? 0.0 : std::exp(lv);
  }

  // Marginal density values at axis cell centers (midpoint-rule sums over the
  // other axis).
  std::vector<double> marginal_theta() const;
  std::vector<double> marginal_psi() const;

  double total_mass() const;

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(spec_.n_psi) +
           static_cast<std::size_t>(j);
  }

  GridSpec spec_;
  std::vector<double> log_values_;
  bool normalized_;
};

struct Moments1 {
  double mean = 0.0;
  double var = 0.0;
};

using LogDensityFn = std::function<double(double theta, double psi)>;

// Normalizes an arbitrary unnormalized log density on the grid (max-shifted
// log-sum-exp, midpoint rule) and runs the boundary-mass check.
GridDensity grid_from_log_density(const GridSpec& spec, const LogDensityFn& log_unnorm);

GridDensity grid_posterior(const LogDensityFn& log_prior, const ObservationSet& obs,
                           const LikelihoodSpec& lik, const GridSpec& spec);

GridDensity grid_posterior(const Gaussian2& prior, const ObservationSet& obs,
                           const LikelihoodSpec& lik, const GridSpec& spec);

// Prior mean +/- 6 sigma box per axis.
GridSpec default_grid(const Gaussian2& prior, int cells_per_axis = 401);

// Retries with a widened box whenever the boundary-mass check fires.
GridDensity grid_posterior_auto(const Gaussian2& prior, const ObservationSet& obs,
                                const LikelihoodSpec& lik, int cells_per_axis = 401);

// Total-variation distance between the joint and the product of its marginals.
double factorization_gap(const GridDensity& g);

// Max over theta rows of the total-variation distance between the two
// row-conditional psi densities. Rows with negligible mass (< 1e-8 in either
// grid) are skipped. Both grids must share one GridSpec.
double conditional_slice_gap(const GridDensity& with_dx, const GridDensity& without_dx);

// Statistical mutual information of the gridded joint, in nats. Small negative
// quadrature noise (> -1e-9) is clamped to zero.
double grid_mutual_information(const GridDensity& g);

Moments1 marginal_moments_theta(const GridDensity& g);
Moments1 marginal_moments_psi(const GridDensity& g);

struct WeightedGaussian2 {
  double weight;
  Gaussian2 component;
};

// Log density of a Gaussian mixture; weights are normalized to sum to one.
LogDensityFn mixture_log_density(std::vector<WeightedGaussian2> components);

void write_grid_csv(const GridDensity& g, std::ostream& out);

}  // namespace icmbayes
