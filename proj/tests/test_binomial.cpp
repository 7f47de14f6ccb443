#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hprobit/binomial_mixture.hpp"
#include "hprobit/diagnostics.hpp"
#include "hprobit/errors.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <fmt/format.h>

#include <fstream>
#include <numeric>

using namespace hprobit;

namespace {

const std::vector<BinomialObservation> kFour{{0, 3}, {3, 3}, {1, 4}, {2, 2}};

}  // namespace

TEST_CASE("beta-binomial pmf sums to one") {
  auto rng = IterationRng{21, 0, 0}.stream(Stage::init);
  for (int t = 0; t < 20; ++t) {
    const long n = 1 + static_cast<long>(rng.uniform() * 60);
    const double a = 0.05 + 5 * rng.uniform();
    const double b = 0.05 + 5 * rng.uniform();
    double total = 0.0;
    for (long y = 0; y <= n; ++y) total += std::exp(beta_binomial_log_pmf(y, n, a, b));
    CHECK(std::abs(total - 1.0) < 1e-10);
  }
  const double direct = boost::math::binomial_coefficient<double>(7, 2) * boost::math::beta(2.5 + 2, 1.5 + 5) /
                        boost::math::beta(2.5, 1.5);
  CHECK(std::exp(beta_binomial_log_pmf(2, 7, 2.5, 1.5)) == doctest::Approx(direct).epsilon(1e-12));
  CHECK_THROWS_AS(beta_binomial_log_pmf(4, 3, 1, 1), std::domain_error);
}

TEST_CASE("collapsed weights are the cluster predictive") {
  const BetaHyper h{1.5, 0.7};
  std::vector<std::size_t> z{0, 1, 1, 0};
  auto totals = ComponentTotals::from_assignments(kFour, z, 2);
  totals.remove(kFour[2], 1);
  const std::vector<double> w{0.3, 0.7};
  const auto lw = collapsed_z_logweights(kFour[2], totals, w, h);
  // component 0 holds units 0 and 3: Y = 2, F = 3; component 1 holds unit 1: Y = 3, F = 0
  auto pred = [&](double Y, double F) {
    return boost::math::beta(h.a + Y + 1, h.b + F + 3) / boost::math::beta(h.a + Y, h.b + F);
  };
  const double r0 = std::log(0.3 * pred(2, 3));
  const double r1 = std::log(0.7 * pred(3, 0));
  CHECK(lw[1] - lw[0] == doctest::Approx(r1 - r0).epsilon(1e-12));
  totals.add(kFour[2], 1);
  CHECK(totals.members[1] == 2);
  CHECK(totals.successes[1] == 4.0);
  CHECK(totals.trials[1] == 7.0);
}

TEST_CASE("marginal likelihood equals the sum of pmfs") {
  const BetaHyper h{2.0, 3.0};
  double expected = 0.0;
  for (const auto& o : kFour) expected += beta_binomial_log_pmf(o.y, o.n, h.a, h.b);
  CHECK(beta_marginal_log_likelihood(kFour, h) == doctest::Approx(expected));
}

TEST_CASE("both samplers reproduce the enumerated assignment probabilities") {
  const auto exact = oracles::enumerate_assignment_probabilities(kFour, {3.0, 1.0}, 1.0, 1.0);
  for (bool collapsed : {true, false}) {
    BinomialMixtureConfig model;
    model.components = 2;
    model.weight_prior = {3.0, 1.0};
    model.collapsed = collapsed;
    ChainConfig cfg;
    cfg.iterations = 40000;
    cfg.burn_in = 1000;
    cfg.seed = 31;
    cfg.store_random_effects = true;
    const auto fit = fit_binomial_mixture(kFour, model, cfg);
    for (std::size_t i = 0; i < kFour.size(); ++i) {
      std::vector<double> ind;
      for (double v : fit.draws.pooled(fit.draws.column(fmt::format("z_{}", i + 1)))) ind.push_back(v == 1.0);
      const double se = std::max(mcse_mean(ind), 1e-4);
      CAPTURE(collapsed);
      CAPTURE(i);
      const double freq = std::accumulate(ind.begin(), ind.end(), 0.0) / static_cast<double>(ind.size());
      CHECK(fit.assignment_probabilities(static_cast<Eigen::Index>(i), 0) == doctest::Approx(freq));
      CHECK(std::abs(fit.assignment_probabilities(static_cast<Eigen::Index>(i), 0) - exact[i][0]) < 4.0 * se);
    }
  }
}

TEST_CASE("configuration and input validation") {
  BinomialMixtureConfig model;
  CHECK(model.resolved_weight_prior() == std::vector<double>{0.5, 0.5});
  model.components = 5;
  CHECK_THROWS_AS(model.validate(4), ConfigError);
  model.components = 2;
  model.weight_prior = {1.0};
  CHECK_THROWS_AS(model.validate(4), ConfigError);

  testing_support::TempDir dir("binomial");
  std::ofstream(dir.path / "ok.csv") << "n,y\n3,1\n5,5\n";
  const auto obs = read_binomial_csv(dir.path / "ok.csv");
  REQUIRE(obs.size() == 2);
  CHECK(obs[1].y == 5);
  CHECK(obs[0].n == 3);
  std::ofstream(dir.path / "bad.csv") << "y,n\n4,3\n";
  CHECK_THROWS_AS(read_binomial_csv(dir.path / "bad.csv"), DataError);
}
