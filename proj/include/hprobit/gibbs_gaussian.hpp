#pragma once

#include "hprobit/chain.hpp"
#include "hprobit/data.hpp"
#include "hprobit/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>

namespace hprobit {

// Priors of the uncentered Gaussian random-effects probit model
//   y_ij ~ Bern(Phi(mu + tau theta_i + x_ij beta)),  theta_i ~ N(0, 1),
//   mu ~ N(0, mu_variance), tau ~ N(0, tau_variance) restricted to tau > 0,
//   beta ~ N(0, beta_variance I).
struct GaussianHyperParams {
  double mu_variance = 9.0;
  double tau_variance = 1.0;
  double beta_variance = 9.0;

  void validate() const;
};

struct GaussianState {
  double mu = 0.0;
  double tau = 0.5;
  Eigen::VectorXd beta;
  Eigen::VectorXd theta;  // one per person
  Eigen::VectorXd omega;  // one per observation, sign matches y
};

// Mean and variance of a univariate normal full conditional.
struct NormalParams {
  double mean = 0.0;
  double variance = 1.0;
};

using ProgressFn = std::function<void(std::size_t chain, std::size_t iteration)>;

// Blocked data-augmentation Gibbs sampler. Each update draws from its exact
// full conditional; omega and theta are drawn in parallel with per-entity
// keyed streams.
class GaussianGibbs {
 public:
  GaussianGibbs(const PanelDataset& data, GaussianHyperParams hyper = {}, std::size_t threads = 1);

  // mu = Phi^{-1}(mean y), tau = 0.5, beta = 0, theta = 0, omega from its
  // conditional. With jitter the global parameters are overdispersed.
  GaussianState initial_state(const IterationRng& rng, bool jitter = false) const;

  void update_omega(GaussianState& state, const IterationRng& rng) const;

  // tau | theta, omega, beta with mu integrated out (before truncation).
  NormalParams tau_conditional(const GaussianState& state) const;
  void update_tau(GaussianState& state, const IterationRng& rng) const;

  NormalParams mu_conditional(const GaussianState& state) const;
  void update_mu(GaussianState& state, const IterationRng& rng) const;

  NormalParams theta_conditional(const GaussianState& state, std::size_t person) const;
  void update_theta(GaussianState& state, const IterationRng& rng) const;

  Eigen::VectorXd beta_conditional_mean(const GaussianState& state) const;
  const Eigen::MatrixXd& beta_conditional_covariance() const { return beta_covariance_; }
  void update_beta(GaussianState& state, const IterationRng& rng) const;

  // One iteration: omega, tau (marginal of mu), mu, theta, beta.
  void sweep(GaussianState& state, const IterationRng& rng) const;

  const PanelDataset& data() const { return data_; }
  const GaussianHyperParams& hyper() const { return hyper_; }

 private:
  Eigen::VectorXd linear_covariates(const GaussianState& state) const;

  const PanelDataset& data_;
  GaussianHyperParams hyper_;
  std::size_t threads_;
  Eigen::LLT<Eigen::MatrixXd> beta_precision_;  // X'X + I / beta_variance
  Eigen::MatrixXd beta_covariance_;
};

struct GaussianFit {
  ChainDraws draws;
  std::vector<GaussianState> final_states;
};

// Runs config.chains independent chains. Columns: mu, tau, beta_1..p and,
// with store_random_effects, theta_1..m.
GaussianFit run_chain(const PanelDataset& data, const GaussianHyperParams& hyper, const ChainConfig& config,
                      const ProgressFn& progress = {});

std::vector<std::string> gaussian_global_columns(std::size_t covariates);

}  // namespace hprobit
