#include "hprobit/binomial_mixture.hpp"

#include "hprobit/errors.hpp"
#include "hprobit/parallel.hpp"
#include "hprobit/stats.hpp"

#include <boost/algorithm/string.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace hprobit {

namespace {

void check_observation(const BinomialObservation& obs) {
  if (obs.n < 1 || obs.y < 0 || obs.y > obs.n) {
    throw std::domain_error(fmt::format("invalid binomial observation y={} n={}", obs.y, obs.n));
  }
}

}  // namespace

double beta_binomial_log_pmf(long y, long n, double a, double b) {
  if (n < 0 || y < 0 || y > n) throw std::domain_error("beta-binomial requires 0 <= y <= n");
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("beta-binomial requires a, b > 0");
  const auto yd = static_cast<double>(y);
  const auto nd = static_cast<double>(n);
  return log_choose(n, y) + log_beta_fn(a + yd, b + nd - yd) - log_beta_fn(a, b);
}

ComponentTotals ComponentTotals::from_assignments(std::span<const BinomialObservation> data,
                                                  std::span<const std::size_t> z, std::size_t components) {
  ComponentTotals t;
  t.successes.assign(components, 0.0);
  t.trials.assign(components, 0.0);
  t.members.assign(components, 0);
  for (std::size_t i = 0; i < data.size(); ++i) t.add(data[i], z[i]);
  return t;
}

void ComponentTotals::remove(const BinomialObservation& obs, std::size_t j) {
  successes[j] -= static_cast<double>(obs.y);
  trials[j] -= static_cast<double>(obs.n);
  --members[j];
}

void ComponentTotals::add(const BinomialObservation& obs, std::size_t j) {
  successes[j] += static_cast<double>(obs.y);
  trials[j] += static_cast<double>(obs.n);
  ++members[j];
}

std::vector<double> collapsed_z_logweights(const BinomialObservation& obs, const ComponentTotals& totals,
                                           std::span<const double> weights, const BetaHyper& hyper) {
  check_observation(obs);
  const double y = static_cast<double>(obs.y);
  const double f = static_cast<double>(obs.n - obs.y);
  std::vector<double> logw(weights.size());
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (!(weights[j] > 0.0)) {
      logw[j] = -std::numeric_limits<double>::infinity();
      continue;
    }
    const double a = hyper.a + totals.successes[j];
    const double b = hyper.b + totals.trials[j] - totals.successes[j];
    logw[j] = std::log(weights[j]) + log_beta_fn(a + y, b + f) - log_beta_fn(a, b);
  }
  return logw;
}

void collapsed_z_update(std::size_t i, std::span<const BinomialObservation> data, BinMixState& state,
                        ComponentTotals& totals, const BetaHyper& hyper, RngStream& rng) {
  totals.remove(data[i], state.z[i]);
  const auto logw = collapsed_z_logweights(data[i], totals, state.weights, hyper);
  state.z[i] = sample_categorical_from_logweights(logw, rng);
  totals.add(data[i], state.z[i]);
}

void update_support_points(BinMixState& state, std::span<const BinomialObservation> data, const BetaHyper& hyper,
                           const IterationRng& rng) {
  const std::size_t j_count = state.support.size();
  const auto totals = ComponentTotals::from_assignments(data, state.z, j_count);
  for (std::size_t j = 0; j < j_count; ++j) {
    auto stream = rng.stream(Stage::support, j);
    state.support[j] = sample_beta(hyper.a + totals.successes[j],
                                   hyper.b + totals.trials[j] - totals.successes[j], stream);
  }
}

double beta_marginal_log_likelihood(std::span<const BinomialObservation> data, const BetaHyper& hyper) {
  double total = 0.0;
  for (const auto& obs : data) total += beta_binomial_log_pmf(obs.y, obs.n, hyper.a, hyper.b);
  return total;
}

std::vector<double> BinomialMixtureConfig::resolved_weight_prior() const {
  if (!weight_prior.empty()) return weight_prior;
  return std::vector<double>(components, 1.0 / static_cast<double>(components));
}

void BinomialMixtureConfig::validate(std::size_t observations) const {
  if (components < 1) throw ConfigError("binomial mixture needs J >= 1");
  const std::size_t cap = max_components ? max_components : observations;
  if (components > cap) throw ConfigError(fmt::format("J = {} exceeds the cap of {}", components, cap));
  if (!(hyper.a > 0.0) || !(hyper.b > 0.0)) throw ConfigError("Beta hyperparameters must be positive");
  if (!weight_prior.empty()) {
    if (weight_prior.size() != components) throw ConfigError("weight prior length must equal J");
    for (double v : weight_prior) {
      if (!(v > 0.0)) throw ConfigError("weight prior concentrations must be positive");
    }
  }
}

namespace {

void draw_weights(BinMixState& state, const std::vector<double>& prior, const IterationRng& rng) {
  std::vector<double> alpha = prior;
  for (auto k : state.z) alpha[k] += 1.0;
  auto stream = rng.stream(Stage::weights);
  state.weights = sample_dirichlet(alpha, stream);
}

void uncollapsed_z_update(BinMixState& state, std::span<const BinomialObservation> data, const IterationRng& rng) {
  const std::size_t j_count = state.support.size();
  std::vector<double> logw(j_count);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double y = static_cast<double>(data[i].y);
    const double f = static_cast<double>(data[i].n - data[i].y);
    for (std::size_t j = 0; j < j_count; ++j) {
      logw[j] = state.weights[j] > 0.0 ? std::log(state.weights[j]) + y * std::log(state.support[j]) +
                                             f * std::log1p(-state.support[j])
                                       : -std::numeric_limits<double>::infinity();
    }
    auto stream = rng.stream(Stage::assignment, i);
    state.z[i] = sample_categorical_from_logweights(logw, stream);
  }
}

}  // namespace

BinomialMixtureFit fit_binomial_mixture(std::span<const BinomialObservation> data, const BinomialMixtureConfig& model,
                                        const ChainConfig& config, const ProgressFn& progress) {
  config.validate();
  model.validate(data.size());
  if (data.empty()) throw DataError("binomial mixture needs at least one observation");
  for (const auto& obs : data) {
    if (obs.n < 1 || obs.y < 0 || obs.y > obs.n) throw DataError(fmt::format("invalid observation y={} n={}", obs.y, obs.n));
  }
  const std::size_t j_count = model.components;
  const std::size_t n_obs = data.size();
  const auto prior = model.resolved_weight_prior();

  BinomialMixtureFit fit;
  fit.draws.model = ModelTag::binomial_mixture;
  for (std::size_t j = 0; j < j_count; ++j) fit.draws.columns.push_back(fmt::format("pi_{}", j + 1));
  for (std::size_t j = 0; j < j_count; ++j) fit.draws.columns.push_back(fmt::format("w_{}", j + 1));
  fit.draws.columns.push_back("occupied");
  const std::size_t z_offset = fit.draws.columns.size();
  if (config.store_random_effects) {
    for (std::size_t i = 0; i < n_obs; ++i) fit.draws.columns.push_back(fmt::format("z_{}", i + 1));
  }
  for (std::size_t it = 0; it < config.iterations; ++it) {
    if (config.keep(it)) fit.draws.iterations.push_back(it);
  }
  fit.draws.chains.assign(config.chains, Eigen::MatrixXd(static_cast<Eigen::Index>(config.stored_draws()),
                                                         static_cast<Eigen::Index>(fit.draws.columns.size())));
  fit.final_states.resize(config.chains);
  std::vector<Eigen::MatrixXd> counts(config.chains, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_obs),
                                                                            static_cast<Eigen::Index>(j_count)));

  parallel_for(
      config.chains, config.threads,
      [&](std::size_t c) {
        IterationRng rng{config.seed, c, 0};
        BinMixState state;
        state.weights.assign(j_count, 1.0 / static_cast<double>(j_count));
        state.support.resize(j_count);
        state.z.resize(n_obs);
        {
          auto stream = rng.stream(Stage::init);
          for (auto& zi : state.z) zi = static_cast<std::size_t>(stream.next_u64() % j_count);
        }
        update_support_points(state, data, model.hyper, rng);
        auto totals = ComponentTotals::from_assignments(data, state.z, j_count);
        auto& out = fit.draws.chains[c];
        Eigen::Index row = 0;
        for (std::size_t it = 0; it < config.iterations; ++it) {
          rng.iteration = it + 1;
          try {
            if (model.collapsed) {
              for (std::size_t i = 0; i < n_obs; ++i) {
                auto stream = rng.stream(Stage::assignment, i);
                collapsed_z_update(i, data, state, totals, model.hyper, stream);
              }
              draw_weights(state, prior, rng);
              update_support_points(state, data, model.hyper, rng);
            } else {
              uncollapsed_z_update(state, data, rng);
              draw_weights(state, prior, rng);
              update_support_points(state, data, model.hyper, rng);
            }
          } catch (const std::domain_error& e) {
            throw SamplerError(fmt::format("chain {} iteration {}: {}", c + 1, it + 1, e.what()));
          }
          if (config.keep(it)) {
            Eigen::Index col = 0;
            for (double v : state.support) out(row, col++) = v;
            for (double v : state.weights) out(row, col++) = v;
            std::vector<bool> used(j_count, false);
            for (auto k : state.z) used[k] = true;
            out(row, col++) = static_cast<double>(std::count(used.begin(), used.end(), true));
            for (std::size_t i = 0; i < n_obs; ++i) {
              counts[c](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(state.z[i])) += 1.0;
              if (config.store_random_effects) {
                out(row, static_cast<Eigen::Index>(z_offset + i)) = static_cast<double>(state.z[i] + 1);
              }
            }
            ++row;
          }
          if (progress) progress(c, it + 1);
        }
        fit.final_states[c] = std::move(state);
      },
      1);

  fit.assignment_probabilities = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_obs), static_cast<Eigen::Index>(j_count));
  for (const auto& m : counts) fit.assignment_probabilities += m;
  fit.assignment_probabilities /= static_cast<double>(fit.draws.total_draws());
  return fit;
}

std::vector<BinomialObservation> read_binomial_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty binomial data file " + path.string());
  std::vector<std::string> header;
  boost::algorithm::split(header, line, boost::is_any_of(","));
  for (auto& h : header) boost::algorithm::trim(h);
  const auto find = [&](const char* name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError(fmt::format("binomial data file lacks a '{}' column", name), 1);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t iy = find("y");
  const std::size_t in_ = find("n");
  std::vector<BinomialObservation> out;
  std::vector<std::string> fields;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    boost::algorithm::trim(line);
    if (line.empty()) continue;
    boost::algorithm::split(fields, line, boost::is_any_of(","));
    if (fields.size() != header.size()) throw DataError("wrong field count", line_no);
    BinomialObservation obs;
    auto parse = [&](std::string f, long& v) {
      boost::algorithm::trim(f);
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) throw DataError("unparseable integer '" + f + "'", line_no);
    };
    parse(fields[iy], obs.y);
    parse(fields[in_], obs.n);
    if (obs.n < 1 || obs.y < 0 || obs.y > obs.n) throw DataError("need 0 <= y <= n and n >= 1", line_no);
    out.push_back(obs);
  }
  return out;
}

}  // namespace hprobit
