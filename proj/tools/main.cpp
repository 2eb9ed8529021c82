#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "icmbayes/report_io.hpp"
#include "icmbayes/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerifyFailed = 2;
constexpr int kExitIo = 3;

struct FigArgs {
  std::string config_path;
  std::string seed_text;
  std::string out_dir = "out";
  std::vector<std::string> overrides;
  int threads = 0;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw icmbayes::IoError("cannot read config file '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void add_fig_options(CLI::App* sub, FigArgs& args) {
  sub->add_option("--config", args.config_path, "flat JSON config file");
  sub->add_option("--seed", args.seed_text, "master seed (decimal or 0x-hex)");
  sub->add_option("--out", args.out_dir, "output directory")->capture_default_str();
  sub->add_option("--set", args.overrides, "config override key=value (repeatable)");
  sub->add_option("--threads", args.threads, "worker threads, 0 = hardware");
}

int run_fig(icmbayes::ExperimentMode mode, const FigArgs& args) {
  std::optional<std::string> file_json;
  if (!args.config_path.empty()) {
    file_json = read_file(args.config_path);
  }
  icmbayes::ExperimentConfig cfg = icmbayes::parse_config(mode, file_json, args.overrides);
  if (!args.seed_text.empty()) {
    cfg.master_seed = icmbayes::parse_seed(args.seed_text);
  }
  cfg.threads = args.threads;
  const icmbayes::ExperimentReport report = icmbayes::run_experiment(cfg);
  const auto paths = icmbayes::emit_report(report, args.out_dir);
  for (const auto& p : paths) {
    std::cout << "wrote " << p << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian cause/mechanism learning: experiment runner and verifier"};
  app.require_subcommand(1);

  FigArgs fig1_args, fig2_args, traj_args, fig3_args;
  CLI::App* fig1 = app.add_subcommand(
      "fig1", "unsupervised limit: prior vs conditioned mechanism-parameter curves");
  add_fig_options(fig1, fig1_args);
  CLI::App* fig2 =
      app.add_subcommand("fig2", "supervised sweep: mean log-likelihood over (rho, N)");
  add_fig_options(fig2, fig2_args);
  CLI::App* traj =
      app.add_subcommand("fig2-traj", "posterior-mean trajectories over growing N");
  add_fig_options(traj, traj_args);
  CLI::App* fig3 = app.add_subcommand(
      "fig3", "semi-supervised sweep: mean log-likelihood over (rho, N, M)");
  add_fig_options(fig3, fig3_args);

  icmbayes::VerifyOptions vopts;
  std::string verify_seed_text;
  std::string verify_out;
  bool export_grids = false;
  CLI::App* verify = app.add_subcommand("verify", "run the structural-identity battery");
  verify->add_option("--seed", verify_seed_text, "master seed (decimal or 0x-hex)");
  verify->add_option("--cells", vopts.grid_cells, "grid cells per axis")
      ->capture_default_str();
  verify->add_option("--out", verify_out, "directory for exported grid CSVs");
  verify->add_flag("--export-grids", export_grids, "write grid CSVs to --out");
  verify->add_flag("--inject-violation", vopts.inject_violation,
                   "feed cause-only data through the leaky likelihood (must fail)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (fig1->parsed()) {
      return run_fig(icmbayes::ExperimentMode::kUnsupervised, fig1_args);
    }
    if (fig2->parsed()) {
      return run_fig(icmbayes::ExperimentMode::kSupervised, fig2_args);
    }
    if (traj->parsed()) {
      return run_fig(icmbayes::ExperimentMode::kTrajectory, traj_args);
    }
    if (fig3->parsed()) {
      return run_fig(icmbayes::ExperimentMode::kSemiSupervised, fig3_args);
    }
    if (verify->parsed()) {
      if (!verify_seed_text.empty()) {
        vopts.seed = icmbayes::parse_seed(verify_seed_text);
      }
      if (export_grids) {
        if (verify_out.empty()) {
          throw icmbayes::UsageError("--export-grids requires --out");
        }
        vopts.export_dir = verify_out;
      }
      const auto checks = icmbayes::run_verification(vopts);
      icmbayes::print_checks(checks, std::cout);
      return icmbayes::all_passed(checks) ? kExitOk : kExitVerifyFailed;
    }
  } catch (const icmbayes::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const icmbayes::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
