#pragma once

#include "hprobit/risk.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace hprobit {

// One individual with covariates fixed at Phi(x beta) = p0 and tau known; the
// random effect theta ~ N(0, 1) is learned from n Bernoulli(p0) outcomes.
struct SimulationScenario {
  double p0 = 0.2;
  std::vector<double> taus{0.1, 0.2, 0.3, 0.45, 0.6};
  std::vector<std::size_t> n_points{1, 2, 5, 10, 20, 50, 100, 200, 500, 1000};
  std::size_t replicates = 1000;
  double level = 0.95;
  // Finer than the analysis grid: at n = 1000 the theta posterior is narrow.
  ThetaGrid grid{4001, -8.0, 8.0};
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const;
};

struct IntervalBounds {
  double lower = 0.0;
  double median = 0.0;
  double upper = 0.0;
  double length() const { return upper - lower; }
};

// Equal-tailed interval of P = Phi(offset + tau theta) after k successes in n
// trials, theta ~ N(0,1) a priori, by quadrature.
IntervalBounds posterior_p_interval(double offset, double tau, std::size_t n, std::size_t k, double level,
                                    const ThetaGrid& grid);

struct CurvePoint {
  double tau = 0.0;
  std::size_t n = 0;
  double mean_length = 0.0;
  double mcse = 0.0;
};

// Mean interval length over replicates for every (tau, n).
std::vector<CurvePoint> interval_length_curve(const SimulationScenario& scenario);

// Smallest n <= n_max at which the mean interval length for `tau` is below
// `level_length`, scanning every n; 0 if it never is.
std::size_t first_crossing(const SimulationScenario& scenario, double tau, double level_length, std::size_t n_max);

struct SignalNoiseConfig {
  std::vector<double> low_signal{0.05, 0.15, 0.25};
  std::vector<double> high_signal{0.01, 0.25, 0.50};
  std::vector<double> taus{0.45, 0.10};
  std::size_t cohort = 100;  // individuals per stratum
  double level = 0.95;
  ThetaGrid grid{4001, -8.0, 8.0};
  std::uint64_t seed = 0;
};

struct SignalNoiseInterval {
  std::string signal;  // "low" or "high"
  double tau = 0.0;
  std::size_t stratum = 0;  // 1-based
  double stratum_probability = 0.0;
  std::size_t individual = 0;
  int outcome = 0;
  IntervalBounds interval;
};

struct OverlapSummary {
  std::string signal;
  double tau = 0.0;
  std::size_t stratum_a = 0;
  std::size_t stratum_b = 0;
  double fraction_overlapping = 0.0;
};

struct SignalNoiseResult {
  std::vector<SignalNoiseInterval> intervals;
  // Per stratum pair, plus stratum_a = stratum_b = 0 for all cross-strata pairs.
  std::vector<OverlapSummary> overlaps;

  double overlap(const std::string& signal, double tau, std::size_t a, std::size_t b) const;
};

SignalNoiseResult signal_noise_intervals(const SignalNoiseConfig& config);

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::filesystem::path& path);
void write_signal_noise_csv(const SignalNoiseResult& result, const std::filesystem::path& intervals_path,
                            const std::filesystem::path& overlap_path);

}  // namespace hprobit
