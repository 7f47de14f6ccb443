#include "hprobit/stats.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hprobit {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kTailSwitch = 4.0;

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw std::domain_error(std::string(what) + ": non-finite argument");
}

// Robert (1995) exponential proposal for Z > lower, lower large.
double sample_tail_rejection(double lower, RngStream& rng) {
  const double rate = 0.5 * (lower + std::sqrt(lower * lower + 4.0));
  for (;;) {
    const double z = lower + rng.exponential() / rate;
    const double d = z - rate;
    if (rng.uniform() <= std::exp(-0.5 * d * d)) return z;
  }
}

}  // namespace

double std_normal_cdf(double x) {
  require_finite(x, "std_normal_cdf");
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

double log_std_normal_cdf(double x) {
  if (std::isnan(x)) throw std::domain_error("log_std_normal_cdf: NaN argument");
  if (x == std::numeric_limits<double>::infinity()) return 0.0;
  if (x == -std::numeric_limits<double>::infinity()) return -std::numeric_limits<double>::infinity();
  if (x > 5.0) return std::log1p(-0.5 * std::erfc(x * kInvSqrt2));
  if (x > -35.0) return std::log(0.5 * std::erfc(-x * kInvSqrt2));
  // Mills ratio expansion.
  const double r = 1.0 / (x * x);
  const double series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
  return -0.5 * x * x - std::log(-x) - kLogSqrt2Pi + std::log(series);
}

double std_normal_pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("std_normal_quantile: p outside (0, 1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double sample_std_normal_above(double lower, RngStream& rng) {
  if (lower > kTailSwitch) return sample_tail_rejection(lower, rng);
  // Upper-tail inversion: Z = -Phi^{-1}(U * Phi(-lower)).
  const double upper_mass = std_normal_cdf(-lower);
  for (;;) {
    const double z = -std_normal_quantile(rng.uniform() * upper_mass);
    if (z > lower) return z;
  }
}

double sample_truncated_normal(double mean, double sd, TruncationSide side, RngStream& rng) {
  if (!(sd > 0.0) || !std::isfinite(sd)) throw std::domain_error("sample_truncated_normal: sd must be positive");
  require_finite(mean, "sample_truncated_normal");
  // Reflect the nonpositive case onto the positive one.
  const double m = side == TruncationSide::positive ? mean : -mean;
  double x = 0.0;
  do {
    x = m + sd * sample_std_normal_above(-m / sd, rng);
  } while (!(x > 0.0));
  return side == TruncationSide::positive ? x : -x;
}

double sample_log_gamma(double shape, RngStream& rng) {
  if (!(shape > 0.0) || !std::isfinite(shape)) throw std::domain_error("sample_gamma: shape must be positive");
  if (shape < 1.0) {
    // Gamma(a) = Gamma(a + 1) * U^(1/a)
    return sample_log_gamma(shape + 1.0, rng) + std::log(rng.uniform()) / shape;
  }
  // Marsaglia & Tsang (2000).
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = rng.normal();
    const double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    const double v = t * t * t;
    const double u = rng.uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return std::log(d) + std::log(v);
  }
}

double sample_gamma(double shape, RngStream& rng) { return std::exp(sample_log_gamma(shape, rng)); }

double sample_beta(double a, double b, RngStream& rng) {
  const double la = sample_log_gamma(a, rng);
  const double lb = sample_log_gamma(b, rng);
  const double hi = std::max(la, lb);
  const double lse = hi + std::log(std::exp(la - hi) + std::exp(lb - hi));
  const double x = std::exp(la - lse);
  return std::clamp(x, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

std::vector<double> sample_dirichlet(std::span<const double> concentrations, RngStream& rng) {
  if (concentrations.empty()) throw std::domain_error("sample_dirichlet: empty concentration vector");
  for (double a : concentrations) {
    if (!(a > 0.0) || !std::isfinite(a)) throw std::domain_error("sample_dirichlet: concentrations must be positive");
  }
  std::vector<double> logs(concentrations.size());
  for (std::size_t k = 0; k < logs.size(); ++k) logs[k] = sample_log_gamma(concentrations[k], rng);
  const double top = *std::max_element(logs.begin(), logs.end());
  double total = 0.0;
  for (double& v : logs) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : logs) v /= total;
  return logs;
}

double log_sum_exp(std::span<const double> values) {
  double top = -std::numeric_limits<double>::infinity();
  for (double v : values) top = std::max(top, v);
  if (!std::isfinite(top)) return top;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - top);
  return top + std::log(sum);
}

std::size_t sample_categorical_from_logweights(std::span<const double> logw, RngStream& rng) {
  double top = -std::numeric_limits<double>::infinity();
  for (double v : logw) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
      throw std::domain_error("sample_categorical_from_logweights: invalid log-weight");
    }
    top = std::max(top, v);
  }
  if (!std::isfinite(top)) throw std::domain_error("sample_categorical_from_logweights: all weights are zero");
  double total = 0.0;
  for (double v : logw) total += std::exp(v - top);
  double target = rng.uniform() * total;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < logw.size(); ++k) {
    const double w = std::exp(logw[k] - top);
    if (w <= 0.0) continue;
    last_positive = k;
    if (target < w) return k;
    target -= w;
  }
  return last_positive;
}

double log_beta_fn(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw std::domain_error("log_beta_fn: arguments must be positive");
  }
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double log_choose(long n, long k) {
  if (n < 0 || k < 0 || k > n) throw std::domain_error("log_choose: need 0 <= k <= n");
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace hprobit
