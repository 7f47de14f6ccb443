#include "hprobit/gibbs_gaussian.hpp"

#include "hprobit/errors.hpp"
#include "hprobit/parallel.hpp"
#include "hprobit/stats.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hprobit {

void GaussianHyperParams::validate() const {
  if (!(mu_variance > 0.0) || !(tau_variance > 0.0) || !(beta_variance > 0.0)) {
    throw ConfigError("prior variances must be positive");
  }
}

GaussianGibbs::GaussianGibbs(const PanelDataset& data, GaussianHyperParams hyper, std::size_t threads)
    : data_(data), hyper_(hyper), threads_(std::max<std::size_t>(threads, 1)) {
  hyper_.validate();
  if (data_.empty()) throw DataError("cannot fit an empty dataset");
  const auto& x = data_.design();
  Eigen::MatrixXd precision = x.transpose() * x;
  precision.diagonal().array() += 1.0 / hyper_.beta_variance;
  beta_precision_.compute(precision);
  if (beta_precision_.info() != Eigen::Success) throw SamplerError("X'X + I/9 is not positive definite");
  beta_covariance_ = beta_precision_.solve(Eigen::MatrixXd::Identity(precision.rows(), precision.cols()));
}

Eigen::VectorXd GaussianGibbs::linear_covariates(const GaussianState& state) const {
  return data_.design() * state.beta;
}

GaussianState GaussianGibbs::initial_state(const IterationRng& rng, bool jitter) const {
  GaussianState s;
  const auto y = data_.outcomes();
  const double rate = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  const double n = static_cast<double>(y.size());
  // Keep the starting intercept finite when every outcome is equal.
  s.mu = std_normal_quantile(std::clamp(rate, 0.5 / n, 1.0 - 0.5 / n));
  s.tau = 0.5;
  s.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data_.covariates()));
  s.theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data_.persons()));
  s.omega = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data_.observations()));
  if (jitter) {
    auto stream = rng.stream(Stage::init);
    s.mu += 0.5 * stream.normal();
    s.tau *= std::exp(0.5 * stream.normal());
    for (Eigen::Index k = 0; k < s.beta.size(); ++k) s.beta(k) = 0.25 * stream.normal();
  }
  update_omega(s, rng);
  return s;
}

void GaussianGibbs::update_omega(GaussianState& state, const IterationRng& rng) const {
  const Eigen::VectorXd xb = linear_covariates(state);
  const auto y = data_.outcomes();
  const auto person = data_.row_person();
  state.omega.resize(static_cast<Eigen::Index>(data_.observations()));
  parallel_for(data_.observations(), threads_, [&](std::size_t r) {
    auto stream = rng.stream(Stage::omega, r);
    const auto ri = static_cast<Eigen::Index>(r);
    const double mean = state.mu + state.tau * state.theta(static_cast<Eigen::Index>(person[r])) + xb(ri);
    state.omega(ri) = sample_truncated_normal(mean, 1.0, side_for_outcome(y[r]), stream);
  });
}

NormalParams GaussianGibbs::tau_conditional(const GaussianState& state) const {
  const Eigen::VectorXd resid = state.omega - linear_covariates(state);
  const double c_inv = 1.0 / hyper_.mu_variance + static_cast<double>(data_.observations());
  double sum_n_theta_sq = 0.0;  // sum_i n_i theta_i^2
  double sum_n_theta = 0.0;     // sum_i n_i theta_i
  double cross = 0.0;           // sum_ij theta_i (omega_ij - x_ij beta)
  double resid_total = 0.0;     // sum_ij (omega_ij - x_ij beta)
  for (std::size_t i = 0; i < data_.persons(); ++i) {
    const auto& p = data_.person_index()[i];
    const double th = state.theta(static_cast<Eigen::Index>(i));
    const double n = static_cast<double>(p.count);
    double rsum = 0.0;
    for (std::size_t r = p.first_row; r < p.first_row + p.count; ++r) rsum += resid(static_cast<Eigen::Index>(r));
    sum_n_theta_sq += n * th * th;
    sum_n_theta += n * th;
    cross += th * rsum;
    resid_total += rsum;
  }
  const double precision = sum_n_theta_sq - sum_n_theta * sum_n_theta / c_inv + 1.0 / hyper_.tau_variance;
  if (!(precision > 0.0)) throw SamplerError("tau full conditional has nonpositive precision");
  const double variance = 1.0 / precision;
  return {variance * (cross - sum_n_theta * resid_total / c_inv), variance};
}

void GaussianGibbs::update_tau(GaussianState& state, const IterationRng& rng) const {
  const auto fc = tau_conditional(state);
  auto stream = rng.stream(Stage::tau);
  state.tau = sample_truncated_normal(fc.mean, std::sqrt(fc.variance), TruncationSide::positive, stream);
}

NormalParams GaussianGibbs::mu_conditional(const GaussianState& state) const {
  const Eigen::VectorXd xb = linear_covariates(state);
  const auto person = data_.row_person();
  double total = 0.0;
  for (std::size_t r = 0; r < data_.observations(); ++r) {
    const auto ri = static_cast<Eigen::Index>(r);
    total += state.omega(ri) - state.tau * state.theta(static_cast<Eigen::Index>(person[r])) - xb(ri);
  }
  const double variance = 1.0 / (1.0 / hyper_.mu_variance + static_cast<double>(data_.observations()));
  return {variance * total, variance};
}

void GaussianGibbs::update_mu(GaussianState& state, const IterationRng& rng) const {
  const auto fc = mu_conditional(state);
  auto stream = rng.stream(Stage::mu);
  state.mu = fc.mean + std::sqrt(fc.variance) * stream.normal();
}

NormalParams GaussianGibbs::theta_conditional(const GaussianState& state, std::size_t person) const {
  const auto& p = data_.person_index()[person];
  const auto& x = data_.design();
  double rsum = 0.0;
  for (std::size_t r = p.first_row; r < p.first_row + p.count; ++r) {
    const auto ri = static_cast<Eigen::Index>(r);
    rsum += state.omega(ri) - state.mu - x.row(ri).dot(state.beta);
  }
  const double variance = 1.0 / (state.tau * state.tau * static_cast<double>(p.count) + 1.0);
  return {variance * state.tau * rsum, variance};
}

void GaussianGibbs::update_theta(GaussianState& state, const IterationRng& rng) const {
  parallel_for(data_.persons(), threads_, [&](std::size_t i) {
    const auto fc = theta_conditional(state, i);
    auto stream = rng.stream(Stage::theta, i);
    state.theta(static_cast<Eigen::Index>(i)) = fc.mean + std::sqrt(fc.variance) * stream.normal();
  });
}

Eigen::VectorXd GaussianGibbs::beta_conditional_mean(const GaussianState& state) const {
  const auto person = data_.row_person();
  Eigen::VectorXd target(static_cast<Eigen::Index>(data_.observations()));
  for (std::size_t r = 0; r < data_.observations(); ++r) {
    const auto ri = static_cast<Eigen::Index>(r);
    target(ri) = state.omega(ri) - state.mu - state.tau * state.theta(static_cast<Eigen::Index>(person[r]));
  }
  return beta_precision_.solve(data_.design().transpose() * target);
}

void GaussianGibbs::update_beta(GaussianState& state, const IterationRng& rng) const {
  const Eigen::VectorXd mean = beta_conditional_mean(state);
  auto stream = rng.stream(Stage::beta);
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = stream.normal();
  // Precision = L L', so L'^{-1} z has covariance (L L')^{-1}.
  state.beta = mean + beta_precision_.matrixU().solve(z);
}

void GaussianGibbs::sweep(GaussianState& state, const IterationRng& rng) const {
  update_omega(state, rng);
  update_tau(state, rng);
  update_mu(state, rng);
  update_theta(state, rng);
  update_beta(state, rng);
}

std::vector<std::string> gaussian_global_columns(std::size_t covariates) {
  std::vector<std::string> cols{"mu", "tau"};
  for (std::size_t k = 0; k < covariates; ++k) cols.push_back(fmt::format("beta_{}", k + 1));
  return cols;
}

GaussianFit run_chain(const PanelDataset& data, const GaussianHyperParams& hyper, const ChainConfig& config,
                      const ProgressFn& progress) {
  config.validate();
  if (!data.standardized()) throw DataError("run_chain expects a standardized dataset");
  const std::size_t p = data.covariates();
  const std::size_t m = data.persons();

  GaussianFit fit;
  fit.draws.model = ModelTag::gaussian;
  fit.draws.columns = gaussian_global_columns(p);
  if (config.store_random_effects) {
    for (std::size_t i = 0; i < m; ++i) fit.draws.columns.push_back(fmt::format("theta_{}", i + 1));
  }
  const std::size_t stored = config.stored_draws();
  for (std::size_t it = 0; it < config.iterations; ++it) {
    if (config.keep(it)) fit.draws.iterations.push_back(it);
  }
  fit.draws.chains.assign(config.chains, Eigen::MatrixXd(static_cast<Eigen::Index>(stored),
                                                         static_cast<Eigen::Index>(fit.draws.columns.size())));
  fit.final_states.resize(config.chains);

  const std::size_t outer = std::min(config.threads, config.chains);
  const std::size_t inner = std::max<std::size_t>(1, config.threads / std::max<std::size_t>(outer, 1));

  parallel_for(
      config.chains, outer,
      [&](std::size_t c) {
        GaussianGibbs sampler(data, hyper, inner);
        IterationRng rng{config.seed, c, 0};
        GaussianState state;
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
            out(row, 0) = state.mu;
            out(row, 1) = state.tau;
            for (std::size_t k = 0; k < p; ++k) out(row, static_cast<Eigen::Index>(2 + k)) = state.beta(static_cast<Eigen::Index>(k));
            if (config.store_random_effects) {
              out.row(row).segment(static_cast<Eigen::Index>(2 + p), static_cast<Eigen::Index>(m)) = state.theta.transpose();
            }
            ++row;
          }
          if (progress) progress(c, it + 1);
        }
        fit.final_states[c] = std::move(state);
      },
      1);
  return fit;
}

}  // namespace hprobit
