#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hprobit/errors.hpp"
#include "hprobit/simulation.hpp"
#include "support.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

using namespace hprobit;

namespace {

// Quantile of P after k successes in n trials via adaptive quadrature and
// bracketing root search on the theta posterior cdf.
double reference_quantile(double offset, double tau, int n, int k, double q) {
  auto dens = [&](double t) {
    const double p = testing_support::ref_cdf(offset + tau * t);
    return std::exp(-0.5 * t * t) * std::pow(p, k) * std::pow(1 - p, n - k);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double inf = std::numeric_limits<double>::infinity();
  const double total = GK::integrate(dens, -inf, inf, 15, 1e-13);
  auto cdf = [&](double x) { return GK::integrate(dens, -inf, x, 15, 1e-13) / total - q; };
  boost::uintmax_t iters = 200;
  const auto root = boost::math::tools::toms748_solve(cdf, -10.0, 10.0, boost::math::tools::eps_tolerance<double>(50), iters);
  return testing_support::ref_cdf(offset + tau * 0.5 * (root.first + root.second));
}

}  // namespace

TEST_CASE("posterior interval of P matches an adaptive reference") {
  const ThetaGrid grid{4001, -8.0, 8.0};
  const double offset = std_normal_quantile(0.2);
  struct Case {
    double tau;
    int n, k;
  };
  for (const auto& c : {Case{0.1, 1, 0}, Case{0.1, 1, 1}, Case{0.45, 10, 3}, Case{0.45, 100, 20}, Case{0.6, 5, 5}}) {
    const auto iv = posterior_p_interval(offset, c.tau, c.n, c.k, 0.95, grid);
    CAPTURE(c.tau);
    CAPTURE(c.n);
    CHECK(iv.lower == doctest::Approx(reference_quantile(offset, c.tau, c.n, c.k, 0.025)).epsilon(1e-5));
    CHECK(iv.median == doctest::Approx(reference_quantile(offset, c.tau, c.n, c.k, 0.5)).epsilon(1e-5));
    CHECK(iv.upper == doctest::Approx(reference_quantile(offset, c.tau, c.n, c.k, 0.975)).epsilon(1e-5));
  }
  const auto point = posterior_p_interval(offset, 0.0, 10, 2, 0.95, grid);
  CHECK(point.length() == 0.0);
  CHECK(point.median == doctest::Approx(0.2));
  CHECK_THROWS(posterior_p_interval(offset, 0.3, 2, 3, 0.95, grid));
}

TEST_CASE("interval length curve shrinks with data and grows with tau") {
  SimulationScenario s;
  s.taus = {0.1, 0.45};
  s.n_points = {1, 10, 100};
  s.replicates = 300;
  s.seed = 3;
  const auto curve = interval_length_curve(s);
  REQUIRE(curve.size() == 6);
  CHECK(curve[0].mean_length > curve[2].mean_length);
  CHECK(curve[3].mean_length > curve[5].mean_length);
  for (std::size_t i = 0; i < 3; ++i) CHECK(curve[i].mean_length < curve[i + 3].mean_length);
  s.threads = 4;
  const auto again = interval_length_curve(s);
  for (std::size_t i = 0; i < curve.size(); ++i) CHECK(again[i].mean_length == curve[i].mean_length);
  s.replicates = 0;
  CHECK_THROWS_AS(interval_length_curve(s), ConfigError);
}

TEST_CASE("first crossing is the first n below the level") {
  SimulationScenario s;
  s.taus = {0.1};
  s.replicates = 200;
  s.seed = 8;
  const auto n = first_crossing(s, 0.1, 0.10, 400);
  REQUIRE(n > 1);
  s.n_points = {n - 1, n};
  const auto curve = interval_length_curve(s);
  CHECK(curve[0].mean_length >= 0.10);
  CHECK(curve[1].mean_length < 0.10);
  CHECK(first_crossing(s, 0.1, 1e-6, 50) == 0);
}

TEST_CASE("signal and noise intervals") {
  SignalNoiseConfig cfg;
  cfg.cohort = 30;
  cfg.seed = 2;
  const auto r = signal_noise_intervals(cfg);
  CHECK(r.intervals.size() == 2 * 2 * 3 * 30);
  for (const auto& iv : r.intervals) {
    CHECK(iv.interval.lower <= iv.interval.upper);
    CHECK((iv.outcome == 0 || iv.outcome == 1));
  }
  // with little heterogeneity the strata of the low-signal design overlap less
  const double noisy = r.overlap("low", 0.45, 0, 0);
  const double quiet = r.overlap("low", 0.10, 0, 0);
  CHECK(quiet <= noisy);
  CHECK(r.overlap("high", 0.10, 1, 3) == 0.0);
  CHECK_THROWS(r.overlap("medium", 0.1, 1, 2));
}
