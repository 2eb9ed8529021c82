#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "icmbayes/model.hpp"
#include "icmbayes/rng.hpp"

namespace icmbayes {

enum class ExperimentMode {
  kUnsupervised,
  kSupervised,
  kSemiSupervised,
  kTrajectory,
};

const char* mode_name(ExperimentMode mode);

struct ExperimentConfig {
  PriorSpec prior{0.0, 0.0, 1.0, 1.0, 0.0};  // rho swept from rho_list
  LikelihoodSpec lik{3.0, 1.0};
  std::vector<double> rho_list{0.0, 0.3, 0.6, 0.9};
  std::vector<std::int64_t> n_list{0, 1, 2, 5, 10, 20, 50, 100};
  std::vector<double> m_ratio_list{0.0};  // M = round(ratio * N)
  int trials = 10000;
  std::uint64_t master_seed = 0;
  ExperimentMode mode = ExperimentMode::kSupervised;
  double theta_star = 1.0;  // fixed true parameters (unsupervised + trajectory)
  double psi_star = -3.0;
  int curve_points = 401;  // tabulation resolution for the unsupervised curves
  int threads = 0;         // 0 = hardware concurrency

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct TrueParams {
  double theta_star = 0.0;
  double psi_star = 0.0;
};

struct ExperimentReport {
  ExperimentMode mode;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::uint64_t master_seed = 0;
  std::string version;
  ExperimentConfig config;
};

// Stream keying, public so reported means can be re-derived from the seed
// alone (cell indices refer to positions in rho_list / n_list).
RngStream cell_param_stream(std::uint64_t master_seed, std::size_t rho_idx,
                            std::size_t n_idx, int trial);
RngStream cell_obs_stream(std::uint64_t master_seed, std::size_t rho_idx,
                          std::size_t n_idx, int trial);
RngStream trajectory_stream(std::uint64_t master_seed, std::size_t rho_idx, int trial);

// True parameters drawn from the product of the marginal priors: theta and psi
// are sampled independently, the prior correlation is deliberately unused.
TrueParams draw_true_params(RngStream& rng, const PriorSpec& prior);

// n labeled (x, y) pairs plus m cause-only realizations. The cause-only draws
// consume full (x, eta) pairs and discard eta, mirroring how that data is
// later masked in the update. Labeled draws precede cause-only draws in the
// stream, so the labeled set is invariant to m.
ObservationSet draw_observations(RngStream& rng, const TrueParams& tp,
                                 const LikelihoodSpec& lik, std::int64_t n,
                                 std::int64_t m);

// Analytic infinite-cause-data limit: tabulates the prior psi marginal next to
// the psi belief conditioned on theta = theta_star.
ExperimentReport run_unsupervised(const ExperimentConfig& cfg);

// Mean log density of the true mechanism parameter under the psi-marginal
// posterior, per (rho, N) cell, fully labeled data only.
ExperimentReport run_supervised(const ExperimentConfig& cfg);

// Posterior-mean polylines over growing N at fixed true parameters, averaged
// across trials.
ExperimentReport run_trajectory(const ExperimentConfig& cfg);

// As run_supervised but with M = round(ratio * N) cause-only realizations
// folded in first. Within a trial, all M values share the same true
// parameters, labeled data, and cause-only prefix (paired design).
ExperimentReport run_semi_supervised(const ExperimentConfig& cfg);

ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Sum of Euclidean steps between consecutive averaged posterior means of one
// rho polyline in a trajectory report.
double trajectory_path_length(const ExperimentReport& report, double rho);

}  // namespace icmbayes
