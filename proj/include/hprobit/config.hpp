#pragma once

#include "hprobit/binomial_mixture.hpp"
#include "hprobit/chain.hpp"
#include "hprobit/data.hpp"
#include "hprobit/gibbs_discrete.hpp"
#include "hprobit/gibbs_gaussian.hpp"
#include "hprobit/risk.hpp"
#include "hprobit/simulation.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hprobit {

struct AnalyzeOptions {
  std::vector<SchemeTag> schemes{SchemeTag::psa_midpoint, SchemeTag::psa_sized, SchemeTag::clustered};
  std::vector<double> custom_thresholds;
  std::size_t clusters = 6;
  // Draws used for the training point estimates that define the thresholds.
  std::size_t threshold_draws = 200;
  double interval_threshold = 0.25;
  std::size_t interval_sample = 10000;
  std::vector<double> flag_c{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  std::vector<double> flag_h{0.5, 0.6, 0.7, 0.8, 0.9, 0.95};
  std::size_t density_bins = 100;
};

// Effective run configuration. Built from an INI file:
//
//   seed = 20240101            (required)
//   model = gaussian           gaussian | discrete | binomial-mixture
//   output = out
//
//   [data]      path, schema (key=value file) or an inline [schema] section,
//               cutoff (YYYY-MM-DD), binomial (CSV with y,n)
//   [schema]    person_id, date, outcome, covariates, external_risk_group, missing, na_values
//   [chain]     iterations, burn_in, thin, chains, store_random_effects, overdispersed_start
//   [gaussian]  mu_variance, tau_variance, beta_variance
//   [discrete]  components, beta_variance, conjugate_atoms, person_count_weights
//   [binomial]  components, a, b, weight_prior, max_components, collapsed
//   [predict]   max_draws, grid_points, grid_lower, grid_upper, interval_level
//   [analyze]   schemes, custom_thresholds, clusters, threshold_draws, interval_threshold,
//               interval_sample, flag_c, flag_h, density_bins
//   [simulate]  p0, taus, n_points, replicates, level, grid_points, crossing_length,
//               crossing_max_n, cohort, low_signal, high_signal, noise_taus
//
// Relative paths resolve against the directory of the config file. Command
// line overrides use the same dotted keys ("chain.iterations").
struct RunConfig {
  std::map<std::string, std::string> entries;  // dotted key -> value, after overrides

  std::uint64_t seed = 0;
  ModelTag model = ModelTag::gaussian;
  std::filesystem::path output_dir;
  std::size_t threads = 1;

  std::optional<std::filesystem::path> data_path;
  std::optional<SchemaConfig> schema;
  std::optional<Date> cutoff;
  std::optional<std::filesystem::path> binomial_path;

  ChainConfig chain;
  GaussianHyperParams gaussian;
  DiscreteConfig discrete;
  BinomialMixtureConfig binomial;
  PredictiveOptions predict;
  AnalyzeOptions analyze;
  SimulationScenario simulate;
  SignalNoiseConfig signal_noise;
  double crossing_length = 0.10;
  std::size_t crossing_max_n = 1000;

  // FNV-1a over the canonical key=value listing, excluding keys that cannot
  // change any output (threads, output).
  std::uint64_t hash() const;
};

// Overrides are applied before validation; keys not recognised raise ConfigError.
RunConfig load_run_config(const std::filesystem::path& path,
                          const std::map<std::string, std::string>& overrides = {});

RunConfig parse_run_config(std::map<std::string, std::string> entries, const std::filesystem::path& base_dir);

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ULL);

}  // namespace hprobit
