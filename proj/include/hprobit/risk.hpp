#pragma once

#include "hprobit/chain.hpp"
#include "hprobit/data.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hprobit {

// Quadrature grid for the per-person random effect under the Gaussian model.
struct ThetaGrid {
  std::size_t points = 401;
  double lower = -8.0;
  double upper = 8.0;

  void validate() const;
  std::vector<double> nodes() const;
};

// Global parameters of one stored iteration. For the discrete model the
// random effect lives on `atoms` with prior probabilities `weights`.
struct GlobalDraw {
  bool discrete = false;
  double mu = 0.0;
  double tau = 0.0;
  Eigen::VectorXd beta;
  std::vector<double> atoms;
  std::vector<double> weights;

  double linear_predictor(double theta, double xb) const {
    return discrete ? theta + xb : mu + tau * theta + xb;
  }
};

// Indices of `count` draws spread evenly over `total` (all of them when count
// is 0 or at least total).
std::vector<std::size_t> select_draws(std::size_t total, std::size_t count);

std::vector<GlobalDraw> extract_global_draws(const ChainDraws& draws, std::size_t covariates,
                                             std::size_t max_draws = 0);

struct HistoryEntry {
  int y = 0;
  double xb = 0.0;
};

// Discrete representation of p(theta_i | history, globals).
struct ThetaPosterior {
  std::vector<double> values;
  std::vector<double> weights;  // sums to 1

  double mean() const;
};

// Prior N(0,1) on the grid (trapezoid weights) or the atom weights, tilted by
// the probit likelihood of the history.
ThetaPosterior theta_conditional_posterior(std::span<const HistoryEntry> history, const GlobalDraw& draw,
                                           const ThetaGrid& grid = {});

struct PredictiveOptions {
  ThetaGrid grid;
  std::size_t max_draws = 1000;
  double interval_level = 0.95;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

// Sample sets of P*_ij (history through j-1) and P_ij (history through j) for
// a set of target rows, one sample per global draw. History is every earlier
// row of the same person in the dataset.
struct PredictiveSummary {
  std::vector<std::size_t> rows;
  Eigen::MatrixXd pstar;  // rows x draws
  Eigen::MatrixXd p;
  std::vector<double> pstar_mean;
  std::vector<double> p_mean;
  std::vector<double> p_median;
  std::vector<double> p_lower;
  std::vector<double> p_upper;
  std::vector<std::size_t> prior_count;
  std::vector<int> outcomes;
  std::vector<std::optional<int>> external_groups;

  std::size_t size() const { return rows.size(); }
};

PredictiveSummary predictive_samples(const PanelDataset& data, std::span<const std::size_t> rows,
                                     std::span<const GlobalDraw> draws, const PredictiveOptions& options);

// Posterior mean of P*_ij by quadrature (no sampling), averaged over draws.
std::vector<double> expected_pstar(const PanelDataset& data, std::span<const std::size_t> rows,
                                   std::span<const GlobalDraw> draws, const PredictiveOptions& options);

// Outcomes for the target rows drawn from the posterior predictive: one global
// draw and one theta_i per person, theta_i conditioned on the non-target history.
std::vector<int> simulate_predictive_outcomes(const PanelDataset& data, std::span<const std::size_t> rows,
                                              std::span<const GlobalDraw> draws, const ThetaGrid& grid,
                                              std::uint64_t seed);

enum class SchemeTag { psa_midpoint, psa_sized, clustered, custom };

std::string to_string(SchemeTag tag);
SchemeTag scheme_tag_from_string(std::string_view text);

struct RiskGroupScheme {
  SchemeTag tag = SchemeTag::custom;
  std::vector<double> thresholds;  // strictly increasing, inside (0, 1)

  std::size_t groups() const { return thresholds.size() + 1; }
  void validate() const;
};

struct GroupRate {
  int group = 0;
  std::size_t count = 0;
  double rate = 0.0;
};

// Empirical outcome rate of every external risk group 1..G among `rows`;
// rows without a group are skipped.
std::vector<GroupRate> external_group_rates(const PanelDataset& data, std::span<const std::size_t> rows);

// c_k = (rate_k + rate_{k+1}) / 2. Inverted adjacent rates are an error.
RiskGroupScheme thresholds_psa_midpoint(std::span<const GroupRate> rates);

// Group k receives sizes[k] of the sorted values; each threshold is the
// midpoint of the boundary pair, moved past ties.
RiskGroupScheme thresholds_equal_count(std::span<const double> values, std::span<const std::size_t> sizes);

struct KMeans1D {
  double within_ss = 0.0;
  std::vector<double> centers;
  // Sorted distinct values and the cluster of each.
  std::vector<double> values;
  std::vector<std::size_t> cluster;
};

// Globally optimal 1-D k-means by dynamic programming over the sorted distinct
// values (with multiplicities as weights).
KMeans1D kmeans_1d(std::span<const double> values, std::size_t k);
RiskGroupScheme thresholds_kmeans_1d(std::span<const double> values, std::size_t k = 6);

// 1-based label g with c_{g-1} <= estimate < c_g.
std::size_t bin(double estimate, const RiskGroupScheme& scheme);

struct CalibrationRow {
  std::size_t group = 0;
  std::size_t size = 0;
  double mean_pstar = 0.0;
  double mean_p = 0.0;
  double rate = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  bool flagged = false;  // empty group or degenerate interval
};

std::vector<CalibrationRow> calibration_table(const PredictiveSummary& summary, const RiskGroupScheme& scheme,
                                              std::span<const int> outcomes);

struct WrongBinMatrix {
  Eigen::MatrixXd probability;  // assigned group x group of P_ij
  std::vector<std::size_t> assigned;
  std::vector<bool> empty_rows;
  // Average over occasions of P[P_ij in the assigned bin].
  double assigned_mass = 0.0;
};

WrongBinMatrix wrong_bin_matrix(const PredictiveSummary& summary, const RiskGroupScheme& scheme);

struct IntervalCell {
  std::optional<int> group;
  std::size_t prior_count = 0;
  std::size_t count = 0;
  double mean_length = 0.0;
};

// Mean interval length by external risk group and number of prior occasions.
std::vector<IntervalCell> interval_length_table(const PredictiveSummary& summary);

struct SortedInterval {
  std::size_t position = 0;
  std::size_t row = 0;
  double lower = 0.0;
  double median = 0.0;
  double upper = 0.0;
  int outcome = 0;
  bool separated = false;  // interval lies entirely on one side of the threshold
};

// Intervals whose median is in the bottom half are sorted by their upper end,
// the rest by their lower end. `sample` > 0 draws that many intervals first.
std::vector<SortedInterval> sorted_intervals(const PredictiveSummary& summary, double threshold = 0.25,
                                             std::size_t sample = 0, std::uint64_t seed = 0);

// Occasion flagged when the fraction of P*_ij samples above c is at least h.
std::vector<bool> flag_by_certainty(const PredictiveSummary& summary, double c, double h);

struct FlagCell {
  double c = 0.0;
  double h = 0.0;
  double proportion = 0.0;
};

std::vector<FlagCell> flag_grid(const PredictiveSummary& summary, std::span<const double> cs,
                                std::span<const double> hs);

struct DensityCell {
  std::size_t group = 0;
  double bin_lower = 0.0;
  double bin_upper = 0.0;
  double p_density = 0.0;           // average of the per-occasion P_ij densities
  double pstar_hat_density = 0.0;   // density of the point estimates
};

std::vector<DensityCell> group_densities(const PredictiveSummary& summary, const RiskGroupScheme& scheme,
                                         std::size_t bins = 100);

void write_predictive_csv(const PanelDataset& data, const PredictiveSummary& summary,
                          const std::filesystem::path& path);
void write_calibration_csv(std::span<const CalibrationRow> rows, const std::filesystem::path& path);
void write_wrong_bin_csv(const WrongBinMatrix& matrix, const std::filesystem::path& path);
void write_interval_table_csv(std::span<const IntervalCell> cells, const std::filesystem::path& path);
void write_sorted_intervals_csv(const PanelDataset& data, std::span<const SortedInterval> intervals,
                                const std::filesystem::path& path);
void write_flag_grid_csv(std::span<const FlagCell> cells, const std::filesystem::path& path);
void write_density_csv(std::span<const DensityCell> cells, const std::filesystem::path& path);
void write_scheme_csv(std::span<const RiskGroupScheme> schemes, const std::filesystem::path& path);

}  // namespace hprobit
