#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hprobit/errors.hpp"
#include "hprobit/gibbs_gaussian.hpp"
#include "gir.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace hprobit;

namespace {

double truncated_density(const NormalParams& c, double tau) {
  const double sd = std::sqrt(c.variance);
  return std::exp(-0.5 * (tau - c.mean) * (tau - c.mean) / c.variance) / (sd * std::sqrt(2 * M_PI)) /
         testing_support::ref_cdf(c.mean / sd);
}

}  // namespace

TEST_CASE("tau full conditional agrees with quadrature of the joint") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto inst = oracles::random_tau_instance(seed);
    GaussianGibbs g(inst.data, inst.hyper);
    const auto fc = g.tau_conditional(inst.state);
    const oracles::TauQuadrature quad(inst);
    double worst = 0.0;
    for (int k = 1; k <= 200; ++k) {
      const double tau = 4.0 * k / 200.0;
      worst = std::max(worst, std::abs(truncated_density(fc, tau) - quad.density(tau)));
    }
    CAPTURE(seed);
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("mu, theta and beta conditionals match direct formulas") {
  const auto inst = oracles::random_tau_instance(17);
  const auto& d = inst.data;
  const auto& s = inst.state;
  GaussianGibbs g(d, inst.hyper);

  Eigen::VectorXd theta_row(static_cast<Eigen::Index>(d.observations()));
  for (std::size_t r = 0; r < d.observations(); ++r)
    theta_row(static_cast<Eigen::Index>(r)) = s.theta(static_cast<Eigen::Index>(d.row_person()[r]));
  const Eigen::VectorXd xb = d.design() * s.beta;

  const double prec_mu = static_cast<double>(d.observations()) + 1.0 / inst.hyper.mu_variance;
  const auto mu = g.mu_conditional(s);
  CHECK(mu.variance == doctest::Approx(1.0 / prec_mu));
  CHECK(mu.mean == doctest::Approx((s.omega - s.tau * theta_row - xb).sum() / prec_mu));

  for (std::size_t i = 0; i < d.persons(); ++i) {
    const auto& p = d.person_index()[i];
    double resid = 0.0;
    for (std::size_t r = p.first_row; r < p.first_row + p.count; ++r)
      resid += s.omega(static_cast<Eigen::Index>(r)) - s.mu - xb(static_cast<Eigen::Index>(r));
    const double prec = static_cast<double>(p.count) * s.tau * s.tau + 1.0;
    const auto th = g.theta_conditional(s, i);
    CHECK(th.variance == doctest::Approx(1.0 / prec));
    CHECK(th.mean == doctest::Approx(s.tau * resid / prec));
  }

  const Eigen::MatrixXd& x = d.design();
  const auto pdim = x.cols();
  const Eigen::MatrixXd prec =
      x.transpose() * x + Eigen::MatrixXd::Identity(pdim, pdim) / inst.hyper.beta_variance;
  const Eigen::VectorXd rhs = x.transpose() * (s.omega.array() - s.mu - s.tau * theta_row.array()).matrix();
  const Eigen::VectorXd expected = prec.colPivHouseholderQr().solve(rhs);
  CHECK((g.beta_conditional_mean(s) - expected).norm() < 1e-10);
  CHECK((g.beta_conditional_covariance() - prec.inverse()).norm() < 1e-10);
}

TEST_CASE("beta draws have the conditional mean and covariance") {
  const auto inst = oracles::random_tau_instance(4);
  GaussianGibbs g(inst.data, inst.hyper);
  auto s = inst.state;
  const Eigen::VectorXd mean = g.beta_conditional_mean(s);
  const Eigen::MatrixXd cov = g.beta_conditional_covariance();
  const int n = 40000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(mean.size());
  Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(mean.size(), mean.size());
  for (int t = 0; t < n; ++t) {
    g.update_beta(s, IterationRng{8, 0, static_cast<std::uint64_t>(t)});
    sum += s.beta;
    outer += (s.beta - mean) * (s.beta - mean).transpose();
  }
  const Eigen::VectorXd emp_mean = sum / n;
  for (Eigen::Index k = 0; k < mean.size(); ++k) {
    CHECK(std::abs(emp_mean(k) - mean(k)) < 4.5 * std::sqrt(cov(k, k) / n));
  }
  CHECK(((outer / n) - cov).norm() < 0.03 * cov.norm());
}

TEST_CASE("omega draws respect the outcome signs") {
  const auto inst = oracles::random_tau_instance(6);
  GaussianGibbs g(inst.data, inst.hyper);
  auto s = inst.state;
  g.update_omega(s, IterationRng{1, 0, 1});
  for (std::size_t r = 0; r < inst.data.observations(); ++r) {
    const double w = s.omega(static_cast<Eigen::Index>(r));
    CHECK((inst.data.outcomes()[r] ? w > 0 : w <= 0));
  }
}

TEST_CASE("short getting-it-right run") {
  const auto rows = gir::gaussian(20, 2, 30000, 99);
  for (const auto& c : rows) {
    CAPTURE(c.name);
    CAPTURE(c.forward);
    CAPTURE(c.successive);
    CHECK(std::abs(c.z()) < 4.0);
  }
}

TEST_CASE("chains are reproducible and independent of thread count") {
  testing_support::SyntheticTruth truth;
  truth.beta = {0.3, -0.2};
  testing_support::PanelSpec spec;
  spec.persons = 150;
  const auto data = testing_support::synthetic_panel(spec, truth);
  ChainConfig cfg;
  cfg.iterations = 300;
  cfg.burn_in = 100;
  cfg.thin = 2;
  cfg.chains = 2;
  cfg.seed = 5;
  cfg.store_random_effects = true;
  const auto a = run_chain(data, {}, cfg);
  cfg.threads = 3;
  const auto b = run_chain(data, {}, cfg);
  REQUIRE(a.draws.chains.size() == 2);
  CHECK(a.draws.chains[0].rows() == 100);
  CHECK(a.draws.columns.size() == 4 + data.persons());
  CHECK(a.draws.chains[0] == b.draws.chains[0]);
  CHECK(a.draws.chains[1] == b.draws.chains[1]);
  CHECK(a.draws.chains[0] != a.draws.chains[1]);
  for (double t : a.draws.pooled(a.draws.column("tau"))) CHECK(t > 0.0);
  cfg.seed = 6;
  CHECK(run_chain(data, {}, cfg).draws.chains[0] != a.draws.chains[0]);

  auto raw = data.with_design(data.design(), false);
  CHECK_THROWS_AS(run_chain(raw, {}, cfg), DataError);
  GaussianHyperParams bad;
  bad.tau_variance = -1;
  CHECK_THROWS_AS(run_chain(data, bad, cfg), ConfigError);
}
