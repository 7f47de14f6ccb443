#pragma once

// Getting-it-right joint distribution checks: moments of the global
// parameters under forward simulation from the prior against the
// successive-conditional chain that alternates data regeneration and one
// Gibbs sweep.

#include "hprobit/diagnostics.hpp"
#include "hprobit/gibbs_discrete.hpp"
#include "hprobit/gibbs_gaussian.hpp"
#include "support.hpp"

#include <fmt/format.h>

#include <string>
#include <vector>

namespace gir {

using namespace hprobit;

struct Comparison {
  std::string name;
  double forward = 0.0;
  double forward_se = 0.0;
  double successive = 0.0;
  double successive_se = 0.0;
  double z() const {
    return (forward - successive) / std::sqrt(forward_se * forward_se + successive_se * successive_se);
  }
};

// Fixed design with m persons, occasions cycling through 1..3.
inline PanelDataset design_panel(std::size_t m, std::size_t p, std::uint64_t seed) {
  auto rng = IterationRng{seed, 0, 0}.stream(Stage::init);
  std::vector<ObservationRecord> records;
  std::vector<std::string> names;
  for (std::size_t k = 0; k < p; ++k) names.push_back("x" + std::to_string(k + 1));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < 1 + i % 3; ++j) {
      ObservationRecord r;
      r.person_id = "p" + std::to_string(i);
      r.date = Date{std::chrono::days{static_cast<int>(j)}};
      for (std::size_t k = 0; k < p; ++k) r.covariates.push_back(rng.normal());
      records.push_back(r);
    }
  }
  auto ds = PanelDataset::from_records(records, names);
  return ds.with_design(ds.design(), true);
}

// Columns of f(draw) summarized as moments with Monte Carlo standard errors.
inline std::vector<Comparison> compare(const std::vector<std::string>& names,
                                       const std::vector<std::vector<double>>& forward,
                                       const std::vector<std::vector<double>>& successive) {
  std::vector<Comparison> out;
  for (std::size_t c = 0; c < names.size(); ++c) {
    const auto f = testing_support::iid_moment(forward[c]);
    double mean = 0.0;
    for (double v : successive[c]) mean += v;
    mean /= static_cast<double>(successive[c].size());
    out.push_back({names[c], f.mean, f.se, mean, mcse_mean(successive[c])});
  }
  return out;
}

inline void add_moments(std::vector<std::vector<double>>& cols, const std::vector<double>& values) {
  for (std::size_t k = 0; k < values.size(); ++k) {
    cols[2 * k].push_back(values[k]);
    cols[2 * k + 1].push_back(values[k] * values[k]);
  }
}

inline std::vector<std::string> moment_names(const std::vector<std::string>& params) {
  std::vector<std::string> out;
  for (const auto& p : params) {
    out.push_back(p);
    out.push_back(p + "^2");
  }
  return out;
}

inline std::vector<int> simulate_outcomes(const PanelDataset& data, const std::vector<double>& eta, RngStream& rng) {
  std::vector<int> y(data.observations());
  for (std::size_t r = 0; r < y.size(); ++r) y[r] = rng.uniform() < testing_support::ref_cdf(eta[r]) ? 1 : 0;
  return y;
}

inline std::vector<Comparison> gaussian(std::size_t m, std::size_t p, std::size_t samples, std::uint64_t seed) {
  const GaussianHyperParams hyper;
  const auto base = design_panel(m, p, seed);
  const auto& x = base.design();
  std::vector<std::string> params{"mu", "tau"};
  for (std::size_t k = 0; k < p; ++k) params.push_back(fmt::format("beta_{}", k + 1));
  const auto names = moment_names(params);

  auto prior_draw = [&](RngStream& rng) {
    GaussianState s;
    s.mu = std::sqrt(hyper.mu_variance) * rng.normal();
    s.tau = std::abs(std::sqrt(hyper.tau_variance) * rng.normal());
    s.beta = Eigen::VectorXd(static_cast<Eigen::Index>(p));
    for (auto& b : s.beta) b = std::sqrt(hyper.beta_variance) * rng.normal();
    s.theta = Eigen::VectorXd(static_cast<Eigen::Index>(m));
    for (auto& t : s.theta) t = rng.normal();
    s.omega = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(base.observations()));
    return s;
  };
  auto globals = [&](const GaussianState& s) {
    std::vector<double> v{s.mu, s.tau};
    for (double b : s.beta) v.push_back(b);
    return v;
  };

  std::vector<std::vector<double>> fwd(names.size()), sc(names.size());
  for (std::size_t t = 0; t < samples; ++t) {
    auto rng = IterationRng{seed, 1, t}.stream(Stage::forward);
    add_moments(fwd, globals(prior_draw(rng)));
  }

  auto rng0 = IterationRng{seed, 2, 0}.stream(Stage::forward);
  auto state = prior_draw(rng0);
  for (std::size_t t = 0; t < samples; ++t) {
    auto rng = IterationRng{seed, 2, t + 1}.stream(Stage::outcome);
    std::vector<double> eta(base.observations());
    for (std::size_t r = 0; r < eta.size(); ++r) {
      const auto ri = static_cast<Eigen::Index>(r);
      eta[r] = state.mu + state.tau * state.theta(static_cast<Eigen::Index>(base.row_person()[r])) +
               x.row(ri).dot(state.beta);
    }
    const auto data = testing_support::with_outcomes(base, simulate_outcomes(base, eta, rng));
    GaussianGibbs sampler(data, hyper);
    sampler.sweep(state, IterationRng{seed, 3, t + 1});
    add_moments(sc, globals(state));
  }
  return compare(names, fwd, sc);
}

inline std::vector<Comparison> discrete(std::size_t m, std::size_t p, std::size_t K, std::size_t samples,
                                        std::uint64_t seed) {
  DiscreteConfig config;
  config.components = K;
  config.conjugate_atoms = true;
  config.person_count_weights = true;
  const auto base = design_panel(m, p, seed);
  const auto& x = base.design();
  std::vector<std::string> params;
  for (std::size_t k = 0; k < p; ++k) params.push_back(fmt::format("beta_{}", k + 1));
  for (std::size_t k = 0; k < K; ++k) params.push_back(fmt::format("atom_{}", k + 1));
  for (std::size_t k = 0; k < K; ++k) params.push_back(fmt::format("weight_{}", k + 1));
  const auto names = moment_names(params);

  auto prior_draw = [&](RngStream& rng) {
    DiscreteState s;
    s.beta = Eigen::VectorXd(static_cast<Eigen::Index>(p));
    for (auto& b : s.beta) b = std::sqrt(config.beta_variance) * rng.normal();
    s.atoms = Eigen::VectorXd(static_cast<Eigen::Index>(K));
    for (auto& a : s.atoms) a = rng.normal();
    // Dirichlet(1/K) through normalized gammas, on the log scale.
    std::vector<double> lg(K);
    for (auto& v : lg) v = sample_log_gamma(1.0 / static_cast<double>(K), rng);
    const double top = *std::max_element(lg.begin(), lg.end());
    double total = 0.0;
    for (auto& v : lg) total += (v = std::exp(v - top));
    s.weights = Eigen::VectorXd(static_cast<Eigen::Index>(K));
    for (std::size_t k = 0; k < K; ++k) s.weights(static_cast<Eigen::Index>(k)) = lg[k] / total;
    s.z.resize(m);
    for (auto& z : s.z) {
      double u = rng.uniform(), acc = 0.0;
      z = K - 1;
      for (std::size_t k = 0; k < K; ++k) {
        acc += s.weights(static_cast<Eigen::Index>(k));
        if (u < acc) {
          z = k;
          break;
        }
      }
    }
    s.omega = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(base.observations()));
    return s;
  };
  auto globals = [&](const DiscreteState& s) {
    std::vector<double> v(s.beta.begin(), s.beta.end());
    for (double a : s.atoms) v.push_back(a);
    for (double w : s.weights) v.push_back(w);
    return v;
  };

  std::vector<std::vector<double>> fwd(names.size()), sc(names.size());
  for (std::size_t t = 0; t < samples; ++t) {
    auto rng = IterationRng{seed, 1, t}.stream(Stage::forward);
    add_moments(fwd, globals(prior_draw(rng)));
  }
  auto rng0 = IterationRng{seed, 2, 0}.stream(Stage::forward);
  auto state = prior_draw(rng0);
  for (std::size_t t = 0; t < samples; ++t) {
    auto rng = IterationRng{seed, 2, t + 1}.stream(Stage::outcome);
    std::vector<double> eta(base.observations());
    for (std::size_t r = 0; r < eta.size(); ++r) {
      const auto ri = static_cast<Eigen::Index>(r);
      eta[r] = state.atoms(static_cast<Eigen::Index>(state.z[base.row_person()[r]])) + x.row(ri).dot(state.beta);
    }
    const auto data = testing_support::with_outcomes(base, simulate_outcomes(base, eta, rng));
    DiscreteGibbs sampler(data, config);
    sampler.sweep(state, IterationRng{seed, 3, t + 1});
    add_moments(sc, globals(state));
  }
  return compare(names, fwd, sc);
}

}  // namespace gir
