#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hprobit {

enum class ModelTag { gaussian, discrete, binomial_mixture };

std::string to_string(ModelTag tag);
ModelTag model_tag_from_string(std::string_view text);

struct ChainConfig {
  std::size_t iterations = 20000;
  std::size_t burn_in = 5000;
  std::size_t thin = 1;
  std::uint64_t seed = 0;
  std::size_t chains = 1;
  // Worker threads; never changes the draws.
  std::size_t threads = 1;
  // Also keep per-person random effects (m columns).
  bool store_random_effects = false;
  // Jitter the starting point of chains after the first.
  bool overdispersed_start = true;

  void validate() const;
  std::size_t stored_draws() const { return (iterations - burn_in) / thin; }
  bool keep(std::size_t iteration) const {
    return iteration >= burn_in && (iteration - burn_in) % thin == thin - 1;
  }
};

// Post-burn-in draws of one model, one matrix per chain (rows are stored
// iterations, columns named in `columns`).
struct ChainDraws {
  ModelTag model = ModelTag::gaussian;
  std::vector<std::string> columns;
  std::vector<Eigen::MatrixXd> chains;
  std::vector<std::size_t> iterations;  // 0-based iteration index of each stored row

  std::size_t column(std::string_view name) const;
  std::optional<std::size_t> find_column(std::string_view name) const;
  std::size_t draws_per_chain() const { return chains.empty() ? 0 : static_cast<std::size_t>(chains.front().rows()); }
  std::size_t total_draws() const { return draws_per_chain() * chains.size(); }
  std::vector<std::vector<double>> per_chain(std::size_t col) const;
  std::vector<double> pooled(std::size_t col) const;
  // Row `draw` of the pooled (chain-major) draw sequence.
  Eigen::RowVectorXd pooled_row(std::size_t draw) const;
};

struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
  double rhat = 0.0;
  double ess = 0.0;
};

// Posterior mean, sd, central 95% interval, split R-hat and ESS per column.
std::vector<ParameterSummary> summarize(const ChainDraws& draws, const std::vector<std::string>& columns);

// Empirical quantile by linear interpolation of order statistics (type 7).
double quantile_sorted(const std::vector<double>& sorted, double q);
double quantile(std::vector<double> values, double q);

// Columnar CSV: chain, iteration, then one column per parameter.
void write_draws_csv(const ChainDraws& draws, const std::filesystem::path& path);
ChainDraws read_draws_csv(const std::filesystem::path& path, ModelTag model);

void write_summary_csv(const std::vector<ParameterSummary>& rows, const std::filesystem::path& path);

// Shortest round-trip decimal representation used by every CSV writer.
std::string format_number(double value);

}  // namespace hprobit
