#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "icmbayes/grid.hpp"
#include "icmbayes/model.hpp"

namespace icmbayes {

struct VerifyOptions {
  std::uint64_t seed = 0;
  int grid_cells = 401;
  // Routes the cause-only data through the leaky likelihood in the main
  // slice-invariance check, which must then fail. For demonstrating that the
  // detector actually detects.
  bool inject_violation = false;
  std::string export_dir;  // non-empty: write grid CSVs here
};

struct VerifyCheck {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool require_below = true;  // false: pass iff measured > threshold
  bool pass = false;
};

// Numerical battery for the two structural identities and the grid-vs-closed
// form cross-check: oracle moment agreement, factorization / mutual
// information of factorized-prior posteriors, slice invariance of the psi
// conditionals under cause-only data, and a refinement-rate check.
std::vector<VerifyCheck> run_verification(const VerifyOptions& opts);

bool all_passed(const std::vector<VerifyCheck>& checks);

void print_checks(const std::vector<VerifyCheck>& checks, std::ostream& out);

// Negative-control fixture: the cause-only likelihood unlawfully depends on
// psi (mean shifted by leak * psi), so cause realizations leak directly into
// the mechanism belief. Slice-invariance detectors must flag posteriors built
// this way.
GridDensity grid_posterior_with_psi_leak(const Gaussian2& prior, const ObservationSet& obs,
                                         const LikelihoodSpec& lik, const GridSpec& spec,
                                         double leak);

}  // namespace icmbayes
