#pragma once

#include "hprobit/rng.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace hprobit {

// Standard normal distribution function, 0.5 * erfc(-x / sqrt(2)).
// Throws std::domain_error for non-finite x.
double std_normal_cdf(double x);

// log Phi(x), accurate far into the lower tail (asymptotic series below -35).
double log_std_normal_cdf(double x);

double std_normal_pdf(double x);

// Inverse of std_normal_cdf on (0, 1).
double std_normal_quantile(double p);

enum class TruncationSide {
  positive,     // support (0, inf)
  nonpositive,  // support (-inf, 0]
};

inline TruncationSide side_for_outcome(int y) {
  return y > 0 ? TruncationSide::positive : TruncationSide::nonpositive;
}

// Normal(mean, sd^2) restricted to one side of zero. Inverse-CDF sampling when
// the truncation point lies at most 4 sd above the mean, exponential rejection
// (Robert 1995) further out.
double sample_truncated_normal(double mean, double sd, TruncationSide side, RngStream& rng);

// Standard normal conditioned on Z > lower.
double sample_std_normal_above(double lower, RngStream& rng);

// log of a Gamma(shape, 1) draw. Stays finite for shapes far below one.
double sample_log_gamma(double shape, RngStream& rng);
double sample_gamma(double shape, RngStream& rng);
double sample_beta(double a, double b, RngStream& rng);

std::vector<double> sample_dirichlet(std::span<const double> concentrations, RngStream& rng);

// Index k with probability proportional to exp(logw[k]).
std::size_t sample_categorical_from_logweights(std::span<const double> logw, RngStream& rng);

double log_sum_exp(std::span<const double> values);

double log_beta_fn(double a, double b);
double log_choose(long n, long k);

}  // namespace hprobit
