#pragma once

#include "hprobit/chain.hpp"
#include "hprobit/data.hpp"
#include "hprobit/gibbs_gaussian.hpp"
#include "hprobit/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <vector>

namespace hprobit {

// Overfitted discrete-mixture random-effects probit model
//   y_ij ~ Bern(Phi(theta_{z_i} + x_ij beta)),  z_i ~ Cat(nu),
//   nu ~ Dir(1/K, ..., 1/K),  theta_k ~ N(0, 1),  beta ~ N(0, beta_variance I).
struct DiscreteConfig {
  std::size_t components = 30;
  double beta_variance = 9.0;
  // Atom update with the N(0,1) prior precision, s_k = 1 / (sum n_i + 1).
  // When false the prior term is dropped, s_k = 1 / sum n_i.
  bool conjugate_atoms = true;
  // Weight concentrations 1/K + (persons in k) instead of 1/K + (observations in k).
  bool person_count_weights = false;

  void validate() const;
};

struct DiscreteState {
  Eigen::VectorXd beta;
  Eigen::VectorXd atoms;    // K
  Eigen::VectorXd weights;  // K, on the simplex
  std::vector<std::size_t> z;  // 0-based component of every person
  Eigen::VectorXd omega;

  std::size_t occupied() const;
};

class DiscreteGibbs {
 public:
  DiscreteGibbs(const PanelDataset& data, DiscreteConfig config = {}, std::size_t threads = 1);

  // beta = 0, nu uniform, atoms spread over Phi^{-1}(mean y) + Phi^{-1}((k + 1/2) / K),
  // then z and omega drawn from their conditionals.
  DiscreteState initial_state(const IterationRng& rng, bool jitter = false) const;

  // Unnormalized log assignment weights of one person (omega integrated out).
  std::vector<double> assignment_logweights(const DiscreteState& state, std::size_t person) const;
  void update_z(DiscreteState& state, const IterationRng& rng) const;
  void update_omega(DiscreteState& state, const IterationRng& rng) const;
  Eigen::VectorXd beta_conditional_mean(const DiscreteState& state) const;
  void update_beta(DiscreteState& state, const IterationRng& rng) const;
  // Mean and variance of atom k; empty components return the N(0,1) prior.
  NormalParams atom_conditional(const DiscreteState& state, std::size_t k) const;
  void update_atoms(DiscreteState& state, const IterationRng& rng) const;
  std::vector<double> weight_concentrations(const DiscreteState& state) const;
  void update_weights(DiscreteState& state, const IterationRng& rng) const;

  // z, omega, beta, atoms, weights.
  void sweep(DiscreteState& state, const IterationRng& rng) const;

  const DiscreteConfig& config() const { return config_; }
  const Eigen::MatrixXd& beta_conditional_covariance() const { return beta_covariance_; }

 private:
  const PanelDataset& data_;
  DiscreteConfig config_;
  std::size_t threads_;
  Eigen::LLT<Eigen::MatrixXd> beta_precision_;
  Eigen::MatrixXd beta_covariance_;
};

struct DiscreteFit {
  ChainDraws draws;
  std::vector<DiscreteState> final_states;
  // Posterior frequency of the number of occupied components, pooled over chains.
  std::map<std::size_t, std::size_t> occupancy;
};

// Columns: beta_1..p, atom_1..K, weight_1..K, occupied and, with
// store_random_effects, theta_1..m holding theta_{z_i}.
DiscreteFit run_chain_discrete(const PanelDataset& data, const DiscreteConfig& model, const ChainConfig& config,
                               const ProgressFn& progress = {});

// The sampler defaults of the appendix run: 80000 iterations, 40000 burn-in.
ChainConfig discrete_default_chain_config();

}  // namespace hprobit
