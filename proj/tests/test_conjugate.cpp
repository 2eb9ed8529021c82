#include <doctest.h>

#include <cmath>
#include <numbers>

#include "icmbayes/conjugate.hpp"
#include "icmbayes/rng.hpp"
#include "test_util.hpp"

using namespace icmbayes;

namespace {

const PriorSpec kRefPrior(0.0, 0.0, 1.0, 1.0, 0.75);
const LikelihoodSpec kRefLik(3.0, 1.0);

Gaussian2 unit_prior() { return Gaussian2({0.0, 0.0}, {1.0, 0.0, 1.0}); }

bool same_gaussian2(const Gaussian2& a, const Gaussian2& b) {
  return a.mean().x == b.mean().x && a.mean().y == b.mean().y && a.cov().xx == b.cov().xx &&
         a.cov().xy == b.cov().xy && a.cov().yy == b.cov().yy;
}

}  // namespace

TEST_CASE("supervised_update: no data returns the prior bit-exactly") {
  const Gaussian2 prior = kRefPrior.materialize();
  const Gaussian2 post = supervised_update(prior, SufficientStats{}, kRefLik);
  CHECK(same_gaussian2(post, prior));
}

TEST_CASE("supervised_update: hand-computed single observation") {
  const SufficientStats stats{1, 1.0, -3.0};
  const Gaussian2 post = supervised_update(unit_prior(), stats, kRefLik);
  CHECK(post.cov().xx == doctest::Approx(0.75).epsilon(1e-13));
  CHECK(post.cov().yy == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(std::abs(post.cov().xy) < 1e-15);
  CHECK(post.mean().x == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(post.mean().y == doctest::Approx(-1.5).epsilon(1e-13));
}

TEST_CASE("supervised_update: posterior consistency at n = 1e6") {
  const Gaussian2 prior = kRefPrior.materialize();
  const SufficientStats stats{1000000, 0.8, -2.2};
  const Gaussian2 post = supervised_update(prior, stats, kRefLik);
  CHECK(post.cov().xx < 1e-3);
  CHECK(post.cov().yy < 1e-3);
  CHECK(std::abs(post.mean().x - 0.8) < 1e-3);
  CHECK(std::abs(post.mean().y + 2.2) < 1e-3);
}

TEST_CASE("semi_supervised_update: no data returns the prior bit-exactly") {
  const Gaussian2 prior = kRefPrior.materialize();
  CHECK(same_gaussian2(semi_supervised_update(prior, 0, 123.0, kRefLik), prior));
}

TEST_CASE("semi_supervised_update: hand-computed cause-only update") {
  const Gaussian2 post = semi_supervised_update(unit_prior(), 3, 1.0, kRefLik);
  CHECK(post.cov().xx == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(post.cov().yy == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(std::abs(post.cov().xy) < 1e-15);
  CHECK(post.mean().x == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(post.mean().y == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("semi_supervised_update: psi marginal converges to the conditional slice") {
  const Gaussian2 prior = kRefPrior.materialize();
  const Gaussian1 marg = marginal_psi(semi_supervised_update(prior, 10000000000LL, 1.0, kRefLik));
  CHECK(marg.mean == doctest::Approx(0.75).epsilon(1e-8));
  CHECK(marg.var == doctest::Approx(0.4375).epsilon(1e-8));
}

TEST_CASE("chain_update: identity with no data, block structure at rho=0") {
  const Gaussian2 prior = kRefPrior.materialize();
  CHECK(same_gaussian2(chain_update(prior, 0, 0.0, SufficientStats{}, kRefLik), prior));

  // rho = 0: cause-only data must leave the psi marginal untouched per trial.
  const Gaussian2 diag_prior = unit_prior();
  RngStream rng(5, {17});
  for (int i = 0; i < 100; ++i) {
    const SufficientStats stats{1 + static_cast<std::int64_t>(rng.next_u64() % 9),
                                rng.normal(1.0, 1.0), rng.normal(-3.0, 1.0)};
    const std::int64_t m = static_cast<std::int64_t>(rng.next_u64() % 50);
    const double mean_x = rng.normal(1.0, 0.5);
    const Gaussian1 with_dx = marginal_psi(chain_update(diag_prior, m, mean_x, stats, kRefLik));
    const Gaussian1 without_dx = marginal_psi(supervised_update(diag_prior, stats, kRefLik));
    CHECK(std::abs(with_dx.mean - without_dx.mean) < 1e-12);
    CHECK(std::abs(with_dx.var - without_dx.var) < 1e-12);
  }
}

TEST_CASE("chain_update: factorized prior keeps the posterior factorized") {
  RngStream rng(5, {18});
  for (int i = 0; i < 100; ++i) {
    PriorSpec spec = testutil::random_prior(rng);
    const PriorSpec diag(spec.mean_theta, spec.mean_psi, spec.var_theta, spec.var_psi, 0.0);
    const LikelihoodSpec lik = testutil::random_lik(rng);
    const SufficientStats stats{3, rng.normal(0.0, 1.0), rng.normal(0.0, 1.0)};
    const Gaussian2 post = chain_update(diag.materialize(), 7, rng.normal(0.0, 1.0), stats, lik);
    CHECK(std::abs(post.cov().xy) < 1e-12);
  }
}

TEST_CASE("marginal_psi: reads the second component") {
  const Gaussian2 g({0.4, -1.7}, {1.0, 0.3, 2.0});
  const Gaussian1 m = marginal_psi(g);
  CHECK(m.mean == -1.7);
  CHECK(m.var == 2.0);

  const Gaussian1 ref = marginal_psi(kRefPrior.materialize());
  CHECK(ref.mean == 0.0);
  CHECK(ref.var == 1.0);

  const Gaussian1 post = marginal_psi(
      supervised_update(unit_prior(), SufficientStats{1, 1.0, -3.0}, kRefLik));
  CHECK(post.mean == doctest::Approx(-1.5).epsilon(1e-13));
  CHECK(post.var == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("condition_psi_on_theta: conditioning identities") {
  const Gaussian2 indep({0.2, -0.5}, {1.5, 0.0, 0.7});
  for (double theta : {-2.0, 0.0, 3.0}) {
    const Gaussian1 c = condition_psi_on_theta(indep, theta);
    CHECK(c.mean == -0.5);
    CHECK(c.var == 0.7);
  }

  const Gaussian2 ref = kRefPrior.materialize();
  const Gaussian1 at1 = condition_psi_on_theta(ref, 1.0);
  CHECK(at1.mean == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(at1.var == doctest::Approx(0.4375).epsilon(1e-15));
  const Gaussian1 at0 = condition_psi_on_theta(ref, 0.0);
  CHECK(at0.mean == 0.0);
  CHECK(at0.var == doctest::Approx(0.4375).epsilon(1e-15));
}

TEST_CASE("log_density_1d: closed-form values") {
  const Gaussian1 std_norm(0.0, 1.0);
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  CHECK(log_density_1d(std_norm, 0.0) == doctest::Approx(-half_log_2pi).epsilon(1e-14));
  CHECK(log_density_1d(std_norm, 2.0) ==
        doctest::Approx(-half_log_2pi - 2.0).epsilon(1e-14));
  const Gaussian1 g(1.3, 0.6);
  CHECK(log_density_1d(g, 1.3) ==
        doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi * 0.6)).epsilon(1e-14));
}

TEST_CASE("property: order invariance of supervised updates") {
  RngStream rng(5, {19});
  for (int i = 0; i < 120; ++i) {
    const Gaussian2 prior = testutil::random_prior(rng).materialize();
    const LikelihoodSpec lik = testutil::random_lik(rng);
    const auto d1 = testutil::random_pairs(rng, static_cast<int>(rng.next_u64() % 7));
    const auto d2 = testutil::random_pairs(rng, 1 + static_cast<int>(rng.next_u64() % 6));
    auto both = d1;
    both.insert(both.end(), d2.begin(), d2.end());

    const Gaussian2 joint = supervised_update(prior, both, lik);
    const Gaussian2 staged = supervised_update(supervised_update(prior, d1, lik), d2, lik);
    CHECK(std::abs(joint.mean().x - staged.mean().x) < 1e-10);
    CHECK(std::abs(joint.mean().y - staged.mean().y) < 1e-10);
    CHECK(std::abs(joint.cov().xx - staged.cov().xx) < 1e-10);
    CHECK(std::abs(joint.cov().xy - staged.cov().xy) < 1e-10);
    CHECK(std::abs(joint.cov().yy - staged.cov().yy) < 1e-10);
  }
}

TEST_CASE("property: posterior covariance shrinks in the Loewner order") {
  RngStream rng(5, {20});
  for (int i = 0; i < 120; ++i) {
    const Gaussian2 prior = testutil::random_prior(rng).materialize();
    const LikelihoodSpec lik = testutil::random_lik(rng);
    const SufficientStats stats{1 + static_cast<std::int64_t>(rng.next_u64() % 20),
                                rng.normal(0.0, 2.0), rng.normal(0.0, 2.0)};
    const std::int64_t m = static_cast<std::int64_t>(rng.next_u64() % 30);
    const Gaussian2 post = chain_update(prior, m, rng.normal(0.0, 1.0), stats, lik);
    const SymMat2 diff{prior.cov().xx - post.cov().xx, prior.cov().xy - post.cov().xy,
                       prior.cov().yy - post.cov().yy};
    CHECK(diff.xx >= -1e-10);
    CHECK(diff.yy >= -1e-10);
    CHECK(diff.det() >= -1e-10 * std::max(1.0, prior.cov().frobenius_sq()));
  }
}

TEST_CASE("property: psi-marginal invariance to cause-only data at rho=0") {
  RngStream rng(5, {21});
  for (int i = 0; i < 120; ++i) {
    PriorSpec spec = testutil::random_prior(rng);
    const PriorSpec diag(spec.mean_theta, spec.mean_psi, spec.var_theta, spec.var_psi, 0.0);
    const Gaussian2 prior = diag.materialize();
    const LikelihoodSpec lik = testutil::random_lik(rng);
    const std::int64_t m = 1 + static_cast<std::int64_t>(rng.next_u64() % 100);
    const Gaussian1 before = marginal_psi(prior);
    const Gaussian1 after = marginal_psi(semi_supervised_update(prior, m, rng.normal(0.0, 3.0), lik));
    CHECK(std::abs(before.mean - after.mean) < 1e-12);
    CHECK(std::abs(before.var - after.var) < 1e-12);
  }
}

TEST_CASE("property: cause-only data never moves the psi-given-theta conditional") {
  // Holds for any prior, including strongly correlated ones: the conditional
  // slice of the posterior with cause-only data equals the one without it.
  RngStream rng(5, {22});
  for (int i = 0; i < 150; ++i) {
    const Gaussian2 prior = testutil::random_prior(rng, 0.95).materialize();
    const LikelihoodSpec lik = testutil::random_lik(rng);
    const SufficientStats stats{static_cast<std::int64_t>(rng.next_u64() % 15),
                                rng.normal(0.0, 2.0), rng.normal(0.0, 2.0)};
    const std::int64_t m = static_cast<std::int64_t>(rng.next_u64() % 200);
    const double mean_x = rng.normal(0.0, 2.0);
    const double theta = rng.normal(0.0, 2.0);

    const Gaussian1 with_dx =
        condition_psi_on_theta(chain_update(prior, m, mean_x, stats, lik), theta);
    const Gaussian1 without_dx =
        condition_psi_on_theta(supervised_update(prior, stats, lik), theta);
    CHECK(std::abs(with_dx.mean - without_dx.mean) < 1e-10);
    CHECK(std::abs(with_dx.var - without_dx.var) < 1e-10);
  }
}

TEST_CASE("near-singular prior covariance is rejected with a singularity error") {
  const Gaussian2 prior({0.0, 0.0}, {1.0, 1.0 - 1e-15, 1.0});
  CHECK_THROWS_AS(supervised_update(prior, SufficientStats{1, 0.0, 0.0}, kRefLik),
                  SingularCovarianceError);
}

TEST_CASE("Gaussian1 validates its variance") {
  CHECK_THROWS_AS(Gaussian1(0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Gaussian1(0.0, -1.0), std::invalid_argument);
}
