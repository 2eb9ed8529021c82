#include "icmbayes/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "icmbayes/conjugate.hpp"
#include "icmbayes/util.hpp"

namespace icmbayes {

namespace {

std::vector<std::int64_t> m_counts(const std::vector<double>& ratios, std::int64_t n) {
  std::vector<std::int64_t> out;
  out.reserve(ratios.size());
  for (double r : ratios) {
    out.push_back(std::max<std::int64_t>(0, std::llround(r * static_cast<double>(n))));
  }
  return out;
}

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

// Plain arithmetic mean in trial order, so reported values can be recomputed
// exactly from the per-trial values.
MeanStderr reduce_trials(const std::vector<double>& values) {
  MeanStderr out;
  const std::size_t n = values.size();
  double sum = 0.0;
  for (double v : values) {
    sum += v;
  }
  out.mean = sum / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double v : values) {
      const double d = v - out.mean;
      ss += d * d;
    }
    out.stderr_ = std::sqrt(ss / static_cast<double>(n - 1)) /
                  std::sqrt(static_cast<double>(n));
  }
  return out;
}

ExperimentReport make_report(const ExperimentConfig& cfg, std::vector<std::string> columns) {
  ExperimentReport report;
  report.mode = cfg.mode;
  report.columns = std::move(columns);
  report.master_seed = cfg.master_seed;
  report.version = kVersion;
  report.config = cfg;
  return report;
}

// Shared core of the supervised and semi-supervised sweeps. Within a trial,
// every M value reuses the same true parameters, the same labeled data, and a
// common prefix of the cause-only draws.
ExperimentReport run_cells(const ExperimentConfig& cfg, const std::vector<double>& ratios) {
  ExperimentReport report =
      make_report(cfg, {"rho", "n", "m", "mean_loglik", "stderr", "trials"});
  const int trials = cfg.trials;
  for (std::size_t rho_idx = 0; rho_idx < cfg.rho_list.size(); ++rho_idx) {
    const double rho = cfg.rho_list[rho_idx];
    const Gaussian2 prior = with_rho(cfg.prior, rho).materialize();
    for (std::size_t n_idx = 0; n_idx < cfg.n_list.size(); ++n_idx) {
      const std::int64_t n = cfg.n_list[n_idx];
      const std::vector<std::int64_t> ms = m_counts(ratios, n);
      const std::int64_t m_max = *std::max_element(ms.begin(), ms.end());

      std::vector<std::vector<double>> values(ratios.size(),
                                              std::vector<double>(trials, 0.0));
      parallel_for(trials, cfg.threads, [&](int t) {
        RngStream params = cell_param_stream(cfg.master_seed, rho_idx, n_idx, t);
        const TrueParams tp = draw_true_params(params, cfg.prior);
        RngStream obs_rng = cell_obs_stream(cfg.master_seed, rho_idx, n_idx, t);
        const ObservationSet obs = draw_observations(obs_rng, tp, cfg.lik, n, m_max);
        const SufficientStats stats = sufficient_stats(transform_labeled(obs.labeled));
        for (std::size_t j = 0; j < ms.size(); ++j) {
          const std::int64_t m = ms[j];
          double mean_x = 0.0;
          if (m > 0) {
            double s = 0.0;
            for (std::int64_t k = 0; k < m; ++k) {
              s += obs.unlabeled_causes[static_cast<std::size_t>(k)];
            }
            mean_x = s / static_cast<double>(m);
          }
          const Gaussian2 post = chain_update(prior, m, mean_x, stats, cfg.lik);
          values[j][t] = log_density_1d(marginal_psi(post), tp.psi_star);
        }
      });

      for (std::size_t j = 0; j < ms.size(); ++j) {
        const MeanStderr ms_j = reduce_trials(values[j]);
        report.rows.push_back({rho, static_cast<double>(n), static_cast<double>(ms[j]),
                               ms_j.mean, ms_j.stderr_, static_cast<double>(trials)});
      }
    }
  }
  return report;
}

}  // namespace

const char* mode_name(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::kUnsupervised:
      return "unsupervised";
    case ExperimentMode::kSupervised:
      return "supervised";
    case ExperimentMode::kSemiSupervised:
      return "semi_supervised";
    case ExperimentMode::kTrajectory:
      return "trajectory";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  if (trials < 1) {
    throw std::invalid_argument("trials must be >= 1");
  }
  if (rho_list.empty()) {
    throw std::invalid_argument("rho_list must be non-empty");
  }
  for (double rho : rho_list) {
    if (!(std::abs(rho) < 1.0)) {
      throw std::invalid_argument("rho_list: |rho| must be < 1 (got " +
                                  format_double(rho) + ")");
    }
  }
  if (n_list.empty()) {
    throw std::invalid_argument("n_list must be non-empty");
  }
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 0) {
      throw std::invalid_argument("n_list entries must be >= 0");
    }
    if (i > 0 && n_list[i] < n_list[i - 1]) {
      throw std::invalid_argument("n_list must be sorted ascending");
    }
  }
  if (m_ratio_list.empty()) {
    throw std::invalid_argument("m_ratio_list must be non-empty");
  }
  for (double r : m_ratio_list) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw std::invalid_argument("m_ratio_list entries must be >= 0");
    }
  }
  if (!std::isfinite(theta_star) || !std::isfinite(psi_star)) {
    throw std::invalid_argument("theta_star and psi_star must be finite");
  }
  if (curve_points < 2) {
    throw std::invalid_argument("curve_points must be >= 2");
  }
  if (threads < 0) {
    throw std::invalid_argument("threads must be >= 0");
  }
}

RngStream cell_param_stream(std::uint64_t master_seed, std::size_t rho_idx,
                            std::size_t n_idx, int trial) {
  return RngStream(master_seed,
                   {static_cast<std::uint64_t>(StreamPurpose::kTrueParams), rho_idx, n_idx,
                    static_cast<std::uint64_t>(trial)});
}

RngStream cell_obs_stream(std::uint64_t master_seed, std::size_t rho_idx,
                          std::size_t n_idx, int trial) {
  return RngStream(master_seed,
                   {static_cast<std::uint64_t>(StreamPurpose::kObservations), rho_idx,
                    n_idx, static_cast<std::uint64_t>(trial)});
}

RngStream trajectory_stream(std::uint64_t master_seed, std::size_t rho_idx, int trial) {
  return RngStream(master_seed,
                   {static_cast<std::uint64_t>(StreamPurpose::kTrajectory), rho_idx,
                    static_cast<std::uint64_t>(trial)});
}

TrueParams draw_true_params(RngStream& rng, const PriorSpec& prior) {
  TrueParams tp;
  tp.theta_star = rng.normal(prior.mean_theta, std::sqrt(prior.var_theta));
  tp.psi_star = rng.normal(prior.mean_psi, std::sqrt(prior.var_psi));
  return tp;
}

ObservationSet draw_observations(RngStream& rng, const TrueParams& tp,
                                 const LikelihoodSpec& lik, std::int64_t n,
                                 std::int64_t m) {
  ObservationSet obs;
  obs.labeled.reserve(static_cast<std::size_t>(n));
  obs.unlabeled_causes.reserve(static_cast<std::size_t>(m));
  const double sd_x = std::sqrt(lik.var_x);
  const double sd_eta = std::sqrt(lik.var_eta);
  for (std::int64_t i = 0; i < n; ++i) {
    const double x = rng.normal(tp.theta_star, sd_x);
    const double eta = rng.normal(tp.psi_star, sd_eta);
    obs.labeled.push_back({x, x + eta});
  }
  for (std::int64_t i = 0; i < m; ++i) {
    const double x = rng.normal(tp.theta_star, sd_x);
    (void)rng.normal(tp.psi_star, sd_eta);  // drawn and discarded
    obs.unlabeled_causes.push_back(x);
  }
  return obs;
}

ExperimentReport run_unsupervised(const ExperimentConfig& cfg) {
  if (cfg.mode != ExperimentMode::kUnsupervised) {
    throw std::invalid_argument("run_unsupervised: config mode mismatch");
  }
  cfg.validate();
  ExperimentReport report =
      make_report(cfg, {"rho", "psi", "prior_density", "posterior_density"});
  for (double rho : cfg.rho_list) {
    const Gaussian2 prior = with_rho(cfg.prior, rho).materialize();
    const Gaussian1 prior_marg = marginal_psi(prior);
    const Gaussian1 post = condition_psi_on_theta(prior, cfg.theta_star);
    const double lo = std::min(prior_marg.mean - 4.0 * std::sqrt(prior_marg.var),
                               post.mean - 4.0 * std::sqrt(post.var));
    const double hi = std::max(prior_marg.mean + 4.0 * std::sqrt(prior_marg.var),
                               post.mean + 4.0 * std::sqrt(post.var));
    const double step = (hi - lo) / (cfg.curve_points - 1);
    for (int k = 0; k < cfg.curve_points; ++k) {
      const double psi = lo + k * step;
      report.rows.push_back({rho, psi, std::exp(log_density_1d(prior_marg, psi)),
                             std::exp(log_density_1d(post, psi))});
    }
  }
  return report;
}

ExperimentReport run_supervised(const ExperimentConfig& cfg) {
  if (cfg.mode != ExperimentMode::kSupervised) {
    throw std::invalid_argument("run_supervised: config mode mismatch");
  }
  cfg.validate();
  return run_cells(cfg, {0.0});
}

ExperimentReport run_semi_supervised(const ExperimentConfig& cfg) {
  if (cfg.mode != ExperimentMode::kSemiSupervised) {
    throw std::invalid_argument("run_semi_supervised: config mode mismatch");
  }
  cfg.validate();
  return run_cells(cfg, cfg.m_ratio_list);
}

ExperimentReport run_trajectory(const ExperimentConfig& cfg) {
  if (cfg.mode != ExperimentMode::kTrajectory) {
    throw std::invalid_argument("run_trajectory: config mode mismatch");
  }
  cfg.validate();
  ExperimentReport report =
      make_report(cfg, {"rho", "n", "mean_theta", "mean_psi", "trials"});
  const int trials = cfg.trials;
  const TrueParams tp{cfg.theta_star, cfg.psi_star};
  const double sd_x = std::sqrt(cfg.lik.var_x);
  const double sd_eta = std::sqrt(cfg.lik.var_eta);
  for (std::size_t rho_idx = 0; rho_idx < cfg.rho_list.size(); ++rho_idx) {
    const double rho = cfg.rho_list[rho_idx];
    const Gaussian2 prior = with_rho(cfg.prior, rho).materialize();
    std::vector<std::vector<Vec2>> means(
        trials, std::vector<Vec2>(cfg.n_list.size(), Vec2{}));
    parallel_for(trials, cfg.threads, [&](int t) {
      RngStream rng = trajectory_stream(cfg.master_seed, rho_idx, t);
      double sum_x = 0.0;
      double sum_eta = 0.0;
      std::int64_t drawn = 0;
      for (std::size_t k = 0; k < cfg.n_list.size(); ++k) {
        const std::int64_t n = cfg.n_list[k];
        while (drawn < n) {
          sum_x += rng.normal(tp.theta_star, sd_x);
          sum_eta += rng.normal(tp.psi_star, sd_eta);
          ++drawn;
        }
        SufficientStats stats;
        stats.n = drawn;
        if (drawn > 0) {
          stats.mean_x = sum_x / static_cast<double>(drawn);
          stats.mean_eta = sum_eta / static_cast<double>(drawn);
        }
        means[t][k] = supervised_update(prior, stats, cfg.lik).mean();
      }
    });
    for (std::size_t k = 0; k < cfg.n_list.size(); ++k) {
      double sx = 0.0;
      double sy = 0.0;
      for (int t = 0; t < trials; ++t) {
        sx += means[t][k].x;
        sy += means[t][k].y;
      }
      report.rows.push_back({rho, static_cast<double>(cfg.n_list[k]),
                             sx / static_cast<double>(trials),
                             sy / static_cast<double>(trials),
                             static_cast<double>(trials)});
    }
  }
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.mode) {
    case ExperimentMode::kUnsupervised:
      return run_unsupervised(cfg);
    case ExperimentMode::kSupervised:
      return run_supervised(cfg);
    case ExperimentMode::kSemiSupervised:
      return run_semi_supervised(cfg);
    case ExperimentMode::kTrajectory:
      return run_trajectory(cfg);
  }
  throw std::invalid_argument("run_experiment: unknown mode");
}

double trajectory_path_length(const ExperimentReport& report, double rho) {
  if (report.mode != ExperimentMode::kTrajectory) {
    throw std::invalid_argument("trajectory_path_length: not a trajectory report");
  }
  double length = 0.0;
  bool have_prev = false;
  Vec2 prev{};
  for (const auto& row : report.rows) {
    if (row[0] != rho) {
      continue;
    }
    const Vec2 cur{row[2], row[3]};
    if (have_prev) {
      length += std::hypot(cur.x - prev.x, cur.y - prev.y);
    }
    prev = cur;
    have_prev = true;
  }
  if (!have_prev) {
    throw std::invalid_argument("trajectory_path_length: rho not present in report");
  }
  return length;
}

}  // namespace icmbayes
