#include "hprobit/gibbs_discrete.hpp"

#include "hprobit/errors.hpp"
#include "hprobit/parallel.hpp"
#include "hprobit/stats.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hprobit {

void DiscreteConfig::validate() const {
  if (components == 0) throw ConfigError("the discrete model needs at least one component");
  if (!(beta_variance > 0.0)) throw ConfigError("beta prior variance must be positive");
}

std::size_t DiscreteState::occupied() const {
  std::vector<bool> used(static_cast<std::size_t>(atoms.size()), false);
  for (auto k : z) used[k] = true;
  return static_cast<std::size_t>(std::count(used.begin(), used.end(), true));
}

ChainConfig discrete_default_chain_config() {
  ChainConfig c;
  c.iterations = 80000;
  c.burn_in = 40000;
  return c;
}

DiscreteGibbs::DiscreteGibbs(const PanelDataset& data, DiscreteConfig config, std::size_t threads)
    : data_(data), config_(config), threads_(std::max<std::size_t>(threads, 1)) {
  config_.validate();
  if (data_.empty()) throw DataError("cannot fit an empty dataset");
  const auto& x = data_.design();
  Eigen::MatrixXd precision = x.transpose() * x;
  precision.diagonal().array() += 1.0 / config_.beta_variance;
  beta_precision_.compute(precision);
  if (beta_precision_.info() != Eigen::Success) throw SamplerError("X'X + I/9 is not positive definite");
  beta_covariance_ = beta_precision_.solve(Eigen::MatrixXd::Identity(precision.rows(), precision.cols()));
}

DiscreteState DiscreteGibbs::initial_state(const IterationRng& rng, bool jitter) const {
  const std::size_t k_count = config_.components;
  const auto y = data_.outcomes();
  const double n = static_cast<double>(y.size());
  const double rate = std::accumulate(y.begin(), y.end(), 0.0) / n;
  const double centre = std_normal_quantile(std::clamp(rate, 0.5 / n, 1.0 - 0.5 / n));

  DiscreteState s;
  s.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data_.covariates()));
  s.atoms.resize(static_cast<Eigen::Index>(k_count));
  for (std::size_t k = 0; k < k_count; ++k) {
    s.atoms(static_cast<Eigen::Index>(k)) =
        centre + std_normal_quantile((static_cast<double>(k) + 0.5) / static_cast<double>(k_count));
  }
  s.weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(k_count), 1.0 / static_cast<double>(k_count));
  if (jitter) {
    auto stream = rng.stream(Stage::init);
    const double shift = 0.5 * stream.normal();
    s.atoms.array() += shift;
    for (Eigen::Index k = 0; k < s.beta.size(); ++k) s.beta(k) = 0.25 * stream.normal();
  }
  s.z.assign(data_.persons(), 0);
  update_z(s, rng);
  update_omega(s, rng);
  return s;
}

std::vector<double> DiscreteGibbs::assignment_logweights(const DiscreteState& state, std::size_t person) const {
  const auto& p = data_.person_index()[person];
  const auto& x = data_.design();
  const auto y = data_.outcomes();
  const std::size_t k_count = static_cast<std::size_t>(state.atoms.size());
  std::vector<double> logw(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    const double nu = state.weights(static_cast<Eigen::Index>(k));
    logw[k] = nu > 0.0 ? std::log(nu) : -std::numeric_limits<double>::infinity();
  }
  for (std::size_t r = p.first_row; r < p.first_row + p.count; ++r) {
    const double xb = x.row(static_cast<Eigen::Index>(r)).dot(state.beta);
    const double sign = y[r] > 0 ? 1.0 : -1.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      if (std::isinf(logw[k])) continue;
      logw[k] += log_std_normal_cdf(sign * (state.atoms(static_cast<Eigen::Index>(k)) + xb));
    }
  }
  return logw;
}

void DiscreteGibbs::update_z(DiscreteState& state, const IterationRng& rng) const {
  state.z.resize(data_.persons());
  parallel_for(data_.persons(), threads_, [&](std::size_t i) {
    const auto logw = assignment_logweights(state, i);
    auto stream = rng.stream(Stage::assignment, i);
    state.z[i] = sample_categorical_from_logweights(logw, stream);
  }, 64);
}

void DiscreteGibbs::update_omega(DiscreteState& state, const IterationRng& rng) const {
  const Eigen::VectorXd xb = data_.design() * state.beta;
  const auto y = data_.outcomes();
  const auto person = data_.row_person();
  state.omega.resize(static_cast<Eigen::Index>(data_.observations()));
  parallel_for(data_.observations(), threads_, [&](std::size_t r) {
    auto stream = rng.stream(Stage::omega, r);
    const auto ri = static_cast<Eigen::Index>(r);
    const double mean = state.atoms(static_cast<Eigen::Index>(state.z[person[r]])) + xb(ri);
    state.omega(ri) = sample_truncated_normal(mean, 1.0, side_for_outcome(y[r]), stream);
  });
}

Eigen::VectorXd DiscreteGibbs::beta_conditional_mean(const DiscreteState& state) const {
  const auto person = data_.row_person();
  Eigen::VectorXd target(static_cast<Eigen::Index>(data_.observations()));
  for (std::size_t r = 0; r < data_.observations(); ++r) {
    const auto ri = static_cast<Eigen::Index>(r);
    target(ri) = state.omega(ri) - state.atoms(static_cast<Eigen::Index>(state.z[person[r]]));
  }
  return beta_precision_.solve(data_.design().transpose() * target);
}

void DiscreteGibbs::update_beta(DiscreteState& state, const IterationRng& rng) const {
  const Eigen::VectorXd mean = beta_conditional_mean(state);
  auto stream = rng.stream(Stage::beta);
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = stream.normal();
  state.beta = mean + beta_precision_.matrixU().solve(z);
}

NormalParams DiscreteGibbs::atom_conditional(const DiscreteState& state, std::size_t k) const {
  const auto& x = data_.design();
  double count = 0.0;
  double resid = 0.0;
  for (std::size_t i = 0; i < data_.persons(); ++i) {
    if (state.z[i] != k) continue;
    const auto& p = data_.person_index()[i];
    count += static_cast<double>(p.count);
    for (std::size_t r = p.first_row; r < p.first_row + p.count; ++r) {
      const auto ri = static_cast<Eigen::Index>(r);
      resid += state.omega(ri) - x.row(ri).dot(state.beta);
    }
  }
  if (count == 0.0) return {0.0, 1.0};
  const double variance = 1.0 / (count + (config_.conjugate_atoms ? 1.0 : 0.0));
  return {variance * resid, variance};
}

void DiscreteGibbs::update_atoms(DiscreteState& state, const IterationRng& rng) const {
  const std::size_t k_count = static_cast<std::size_t>(state.atoms.size());
  // One pass over the data gathers the sufficient statistics of every atom.
  std::vector<double> count(k_count, 0.0), resid(k_count, 0.0);
  const Eigen::VectorXd xb = data_.design() * state.beta;
  for (std::size_t i = 0; i < data_.persons(); ++i) {
    const auto& p = data_.person_index()[i];
    const std::size_t k = state.z[i];
    count[k] += static_cast<double>(p.count);
    for (std::size_t r = p.first_row; r < p.first_row + p.count; ++r) {
      const auto ri = static_cast<Eigen::Index>(r);
      resid[k] += state.omega(ri) - xb(ri);
    }
  }
  for (std::size_t k = 0; k < k_count; ++k) {
    auto stream = rng.stream(Stage::atoms, k);
    double mean = 0.0, variance = 1.0;
    if (count[k] > 0.0) {
      variance = 1.0 / (count[k] + (config_.conjugate_atoms ? 1.0 : 0.0));
      mean = variance * resid[k];
    }
    state.atoms(static_cast<Eigen::Index>(k)) = mean + std::sqrt(variance) * stream.normal();
  }
}

std::vector<double> DiscreteGibbs::weight_concentrations(const DiscreteState& state) const {
  const std::size_t k_count = static_cast<std::size_t>(state.atoms.size());
  std::vector<double> alpha(k_count, 1.0 / static_cast<double>(k_count));
  for (std::size_t i = 0; i < data_.persons(); ++i) {
    alpha[state.z[i]] += config_.person_count_weights ? 1.0 : static_cast<double>(data_.person_index()[i].count);
  }
  return alpha;
}

void DiscreteGibbs::update_weights(DiscreteState& state, const IterationRng& rng) const {
  const auto alpha = weight_concentrations(state);
  auto stream = rng.stream(Stage::weights);
  const auto nu = sample_dirichlet(alpha, stream);
  state.weights = Eigen::Map<const Eigen::VectorXd>(nu.data(), static_cast<Eigen::Index>(nu.size()));
}

void DiscreteGibbs::sweep(DiscreteState& state, const IterationRng& rng) const {
  update_z(state, rng);
  update_omega(state, rng);
  update_beta(state, rng);
  update_atoms(state, rng);
  update_weights(state, rng);
}

DiscreteFit run_chain_discrete(const PanelDataset& data, const DiscreteConfig& model, const ChainConfig& config,
                               const ProgressFn& progress) {
  config.validate();
  model.validate();
  if (!data.standardized()) throw DataError("run_chain_discrete expects a standardized dataset");
  const std::size_t p = data.covariates();
  const std::size_t m = data.persons();
  const std::size_t k_count = model.components;

  DiscreteFit fit;
  fit.draws.model = ModelTag::discrete;
  for (std::size_t k = 0; k < p; ++k) fit.draws.columns.push_back(fmt::format("beta_{}", k + 1));
  for (std::size_t k = 0; k < k_count; ++k) fit.draws.columns.push_back(fmt::format("atom_{}", k + 1));
  for (std::size_t k = 0; k < k_count; ++k) fit.draws.columns.push_back(fmt::format("weight_{}", k + 1));
  fit.draws.columns.push_back("occupied");
  const std::size_t theta_offset = fit.draws.columns.size();
  if (config.store_random_effects) {
    for (std::size_t i = 0; i < m; ++i) fit.draws.columns.push_back(fmt::format("theta_{}", i + 1));
  }
  for (std::size_t it = 0; it < config.iterations; ++it) {
    if (config.keep(it)) fit.draws.iterations.push_back(it);
  }
  fit.draws.chains.assign(config.chains, Eigen::MatrixXd(static_cast<Eigen::Index>(config.stored_draws()),
                                                         static_cast<Eigen::Index>(fit.draws.columns.size())));
  fit.final_states.resize(config.chains);

  const std::size_t outer = std::min(config.threads, config.chains);
  const std::size_t inner = std::max<std::size_t>(1, config.threads / std::max<std::size_t>(outer, 1));

  parallel_for(
      config.chains, outer,
      [&](std::size_t c) {
        DiscreteGibbs sampler(data, model, inner);
        IterationRng rng{config.seed, c, 0};
        DiscreteState state;
        try {
          state = sampler.initial_state(rng, config.overdispersed_start && c > 0);
        } catch (const std::domain_error& e) {
          throw SamplerError(fmt::format("chain {} initialization: {}", c + 1, e.what()));
        }
        auto& out = fit.draws.chains[c];
        Eigen::Index row = 0;
        for (std::size_t it = 0; it < config.iterations; ++it) {
          rng.iteration = it + 1;
          try {
            sampler.sweep(state, rng);
          } catch (const std::domain_error& e) {
            throw SamplerError(fmt::format("chain {} iteration {}: {}", c + 1, it + 1, e.what()));
          }
          if (config.keep(it)) {
            Eigen::Index col = 0;
            for (std::size_t k = 0; k < p; ++k) out(row, col++) = state.beta(static_cast<Eigen::Index>(k));
            for (std::size_t k = 0; k < k_count; ++k) out(row, col++) = state.atoms(static_cast<Eigen::Index>(k));
            for (std::size_t k = 0; k < k_count; ++k) out(row, col++) = state.weights(static_cast<Eigen::Index>(k));
            out(row, col++) = static_cast<double>(state.occupied());
            if (config.store_random_effects) {
              for (std::size_t i = 0; i < m; ++i) {
                out(row, static_cast<Eigen::Index>(theta_offset + i)) = state.atoms(static_cast<Eigen::Index>(state.z[i]));
              }
            }
            ++row;
          }
          if (progress) progress(c, it + 1);
        }
        fit.final_states[c] = std::move(state);
      },
      1);

  const auto occ = fit.draws.column("occupied");
  for (double q : fit.draws.pooled(occ)) ++fit.occupancy[static_cast<std::size_t>(q)];
  return fit;
}

}  // namespace hprobit
