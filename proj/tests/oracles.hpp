#pragma once

// Independent reference computations used by the unit and acceptance tests.

#include "hprobit/binomial_mixture.hpp"
#include "hprobit/gibbs_gaussian.hpp"
#include "support.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/binomial.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace oracles {

using namespace hprobit;

struct TauInstance {
  PanelDataset data;
  GaussianState state;
  GaussianHyperParams hyper;
};

// A random state of the Gaussian model on at most three persons.
inline TauInstance random_tau_instance(std::uint64_t seed) {
  auto rng = IterationRng{seed, 0, 0}.stream(Stage::forward);
  const std::size_t m = 1 + static_cast<std::size_t>(rng.uniform() * 3.0);
  const std::size_t p = 1 + static_cast<std::size_t>(rng.uniform() * 2.0);
  std::vector<ObservationRecord> records;
  std::vector<std::string> names;
  for (std::size_t k = 0; k < p; ++k) names.push_back("x" + std::to_string(k));
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 3.0);
    for (std::size_t j = 0; j < n; ++j) {
      ObservationRecord r;
      r.person_id = "p" + std::to_string(i);
      r.date = Date{std::chrono::days{static_cast<int>(10 * j)}};
      for (std::size_t k = 0; k < p; ++k) r.covariates.push_back(rng.normal());
      r.outcome = rng.uniform() < 0.5 ? 1 : 0;
      records.push_back(r);
    }
  }
  auto ds = PanelDataset::from_records(records, names);
  ds = ds.with_design(ds.design(), true);
  GaussianState s;
  s.mu = rng.normal();
  s.tau = std::abs(rng.normal());
  s.beta = Eigen::VectorXd(static_cast<Eigen::Index>(p));
  for (auto& b : s.beta) b = rng.normal();
  s.theta = Eigen::VectorXd(static_cast<Eigen::Index>(m));
  for (auto& t : s.theta) t = 1.5 * rng.normal();
  s.omega = Eigen::VectorXd(static_cast<Eigen::Index>(ds.observations()));
  for (Eigen::Index r = 0; r < s.omega.size(); ++r) {
    const double v = std::abs(rng.normal()) + 0.01;
    s.omega(r) = ds.outcomes()[static_cast<std::size_t>(r)] ? v : -v;
  }
  return {ds, s, GaussianHyperParams{}};
}

// Density of tau given (omega, theta, beta) from the joint of (mu, tau) by
// numerical integration over mu, normalized by numerical integration over tau.
class TauQuadrature {
 public:
  explicit TauQuadrature(const TauInstance& inst) : hyper_(inst.hyper) {
    const auto& d = inst.data;
    for (std::size_t r = 0; r < d.observations(); ++r) {
      const auto ri = static_cast<Eigen::Index>(r);
      resid_.push_back(inst.state.omega(ri) - d.design().row(ri).dot(inst.state.beta));
      theta_.push_back(inst.state.theta(static_cast<Eigen::Index>(d.row_person()[r])));
    }
    shift_ = log_marginal(0.5);
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    norm_ = GK::integrate([&](double t) { return std::exp(log_marginal(t) - shift_); }, 0.0, 40.0, 15, 1e-14);
  }

  double density(double tau) const { return std::exp(log_marginal(tau) - shift_) / norm_; }

 private:
  double log_joint(double mu, double tau) const {
    double s = 0.0;
    for (std::size_t r = 0; r < resid_.size(); ++r) {
      const double e = resid_[r] - mu - tau * theta_[r];
      s += e * e;
    }
    return -0.5 * s - mu * mu / (2 * hyper_.mu_variance) - tau * tau / (2 * hyper_.tau_variance);
  }

  double log_marginal(double tau) const {
    double centre = 0.0;
    for (std::size_t r = 0; r < resid_.size(); ++r) centre += (resid_[r] - tau * theta_[r]) / resid_.size();
    const double ref = log_joint(centre, tau);
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    // mu has conditional sd at most 3, so +/- 60 covers the mass.
    const double inner = GK::integrate([&](double mu) { return std::exp(log_joint(mu, tau) - ref); },
                                       centre - 60.0, centre + 60.0, 15, 1e-14);
    return ref + std::log(inner);
  }

  GaussianHyperParams hyper_;
  std::vector<double> resid_;
  std::vector<double> theta_;
  double shift_ = 0.0;
  double norm_ = 1.0;
};

// Exact P[z_i = j | data] for a J-component binomial mixture with
// pi_j ~ Beta(a, b) and w ~ Dir(alpha), by summing over all J^n assignments.
inline std::vector<std::vector<double>> enumerate_assignment_probabilities(
    const std::vector<BinomialObservation>& data, const std::vector<double>& alpha, double a, double b) {
  const std::size_t n = data.size();
  const std::size_t J = alpha.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= J;
  std::vector<std::vector<double>> prob(n, std::vector<double>(J, 0.0));
  double norm = 0.0;
  double alpha_sum = 0.0;
  for (double v : alpha) alpha_sum += v;
  for (std::size_t code = 0; code < total; ++code) {
    std::vector<std::size_t> z(n);
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = c % J;
      c /= J;
    }
    // Dirichlet-multinomial probability of the labelled sequence z.
    std::vector<double> counts(J, 0.0), ys(J, 0.0), fs(J, 0.0);
    double weight = boost::math::tgamma(alpha_sum) / boost::math::tgamma(alpha_sum + static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      counts[z[i]] += 1.0;
      ys[z[i]] += static_cast<double>(data[i].y);
      fs[z[i]] += static_cast<double>(data[i].n - data[i].y);
    }
    for (std::size_t j = 0; j < J; ++j) {
      weight *= boost::math::tgamma(alpha[j] + counts[j]) / boost::math::tgamma(alpha[j]);
      weight *= boost::math::beta(a + ys[j], b + fs[j]) / boost::math::beta(a, b);
    }
    for (std::size_t i = 0; i < n; ++i) {
      weight *= boost::math::binomial_coefficient<double>(static_cast<unsigned>(data[i].n),
                                                          static_cast<unsigned>(data[i].y));
    }
    norm += weight;
    for (std::size_t i = 0; i < n; ++i) prob[i][z[i]] += weight;
  }
  for (auto& row : prob)
    for (auto& v : row) v /= norm;
  return prob;
}

// Minimum within-cluster sum of squares over every split of the sorted values
// into k contiguous nonempty groups.
inline double brute_force_kmeans(std::vector<double> values, std::size_t k) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> cuts(k - 1);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t depth, std::size_t start) {
    if (depth == k - 1) {
      double ss = 0.0;
      std::size_t lo = 0;
      for (std::size_t g = 0; g < k; ++g) {
        const std::size_t hi = g + 1 < k ? cuts[g] : n;
        double mean = 0.0;
        for (std::size_t i = lo; i < hi; ++i) mean += values[i];
        mean /= static_cast<double>(hi - lo);
        for (std::size_t i = lo; i < hi; ++i) ss += (values[i] - mean) * (values[i] - mean);
        lo = hi;
      }
      best = std::min(best, ss);
      return;
    }
    for (std::size_t c = start; c + (k - 2 - depth) <= n - 1; ++c) {
      cuts[depth] = c;
      rec(depth + 1, c + 1);
    }
  };
  rec(0, 1);
  return best;
}

}  // namespace oracles
