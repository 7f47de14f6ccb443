#pragma once

#include "hprobit/chain.hpp"
#include "hprobit/gibbs_gaussian.hpp"
#include "hprobit/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace hprobit {

// y successes out of n trials for one unit.
struct BinomialObservation {
  long y = 0;
  long n = 1;
};

struct BetaHyper {
  double a = 1.0;
  double b = 1.0;
};

struct BinMixState {
  std::vector<double> support;  // pi_j
  std::vector<double> weights;  // w_j
  std::vector<std::size_t> z;   // 0-based component of every unit
};

// log[ C(n, y) B(a + y, b + n - y) / B(a, b) ].
double beta_binomial_log_pmf(long y, long n, double a, double b);

// Success and trial totals per component, maintained by the collapsed sampler.
struct ComponentTotals {
  std::vector<double> successes;
  std::vector<double> trials;
  std::vector<std::size_t> members;

  static ComponentTotals from_assignments(std::span<const BinomialObservation> data, std::span<const std::size_t> z,
                                          std::size_t components);
  void remove(const BinomialObservation& obs, std::size_t j);
  void add(const BinomialObservation& obs, std::size_t j);
};

// Log weights of z_i = j given the other assignments, with pi integrated out.
// `totals` must exclude unit i.
std::vector<double> collapsed_z_logweights(const BinomialObservation& obs, const ComponentTotals& totals,
                                           std::span<const double> weights, const BetaHyper& hyper);

// Resamples z_i in place, keeping `totals` consistent.
void collapsed_z_update(std::size_t i, std::span<const BinomialObservation> data, BinMixState& state,
                        ComponentTotals& totals, const BetaHyper& hyper, RngStream& rng);

// pi_j ~ Beta(a + sum y, b + sum (n - y)) over the members of j.
void update_support_points(BinMixState& state, std::span<const BinomialObservation> data, const BetaHyper& hyper,
                           const IterationRng& rng);

// Beta mixing distribution marginal, binomial coefficients included.
double beta_marginal_log_likelihood(std::span<const BinomialObservation> data, const BetaHyper& hyper);

struct BinomialMixtureConfig {
  std::size_t components = 2;
  BetaHyper hyper;
  // Dirichlet prior on w; empty means 1/J for every component.
  std::vector<double> weight_prior;
  // Upper bound on J; 0 means the number of observations.
  std::size_t max_components = 0;
  // Sample z with pi integrated out (default) or conditional on explicit pi draws.
  bool collapsed = true;

  std::vector<double> resolved_weight_prior() const;
  void validate(std::size_t observations) const;
};

struct BinomialMixtureFit {
  ChainDraws draws;  // pi_1..J, w_1..J, occupied and optionally z_1..n (1-based labels)
  // Posterior frequency of z_i = j over stored draws of all chains (n x J).
  Eigen::MatrixXd assignment_probabilities;
  std::vector<BinMixState> final_states;
};

BinomialMixtureFit fit_binomial_mixture(std::span<const BinomialObservation> data, const BinomialMixtureConfig& model,
                                        const ChainConfig& config, const ProgressFn& progress = {});

// CSV with integer columns y and n.
std::vector<BinomialObservation> read_binomial_csv(const std::filesystem::path& path);

}  // namespace hprobit
