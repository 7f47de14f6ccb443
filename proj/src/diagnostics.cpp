#include "hprobit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace hprobit {
namespace {

std::size_t common_length(const std::vector<std::vector<double>>& chains) {
  if (chains.empty()) throw std::invalid_argument("diagnostics: no chains");
  std::size_t n = chains.front().size();
  for (const auto& c : chains) n = std::min(n, c.size());
  if (n < 4) throw std::invalid_argument("diagnostics: need at least 4 draws per chain");
  return n;
}

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

}  // namespace

double split_rhat(const std::vector<std::vector<double>>& chains) {
  const std::size_t n = common_length(chains);
  const std::size_t half = n / 2;
  std::vector<double> means, vars;
  for (const auto& c : chains) {
    for (std::size_t part = 0; part < 2; ++part) {
      // With odd n the middle draw is dropped.
      std::span<const double> piece(c.data() + (part == 0 ? 0 : n - half), half);
      means.push_back(mean_of(piece));
      vars.push_back(sample_variance(piece));
    }
  }
  const double w = mean_of(vars);
  const double b_over_n = sample_variance(means);
  if (!(w > 0.0)) return b_over_n > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  const double hn = static_cast<double>(half);
  const double var_plus = (hn - 1.0) / hn * w + b_over_n;
  return std::sqrt(var_plus / w);
}

double effective_sample_size(const std::vector<std::vector<double>>& chains) {
  const std::size_t n = common_length(chains);
  const std::size_t m = chains.size();
  const double dn = static_cast<double>(n);

  std::vector<double> means(m), acov0(m);
  for (std::size_t c = 0; c < m; ++c) {
    std::span<const double> x(chains[c].data(), n);
    means[c] = mean_of(x);
    double s = 0.0;
    for (double v : x) s += (v - means[c]) * (v - means[c]);
    acov0[c] = s / dn;
  }
  const double mean_var = mean_of(acov0) * dn / (dn - 1.0);
  double var_plus = mean_var * (dn - 1.0) / dn;
  if (m > 1) var_plus += sample_variance(means);
  const double total = static_cast<double>(m) * dn;
  if (!(var_plus > 0.0)) return total;

  auto mean_acov = [&](std::size_t lag) {
    double acc = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      const auto& x = chains[c];
      double s = 0.0;
      for (std::size_t t = 0; t + lag < n; ++t) s += (x[t] - means[c]) * (x[t + lag] - means[c]);
      acc += s / dn;
    }
    return acc / static_cast<double>(m);
  };
  auto rho = [&](std::size_t lag) { return 1.0 - (mean_var - mean_acov(lag)) / var_plus; };

  // Geyer's initial positive and monotone sequence on pair sums.
  double tau = -1.0;
  double previous_pair = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = (k == 0 ? 1.0 : rho(2 * k)) + rho(2 * k + 1);
    if (pair < 0.0) break;
    pair = std::min(pair, previous_pair);
    previous_pair = pair;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1.0 / std::log10(total));
  return total / tau;
}

double effective_sample_size(std::span<const double> draws) {
  return effective_sample_size(std::vector<std::vector<double>>{std::vector<double>(draws.begin(), draws.end())});
}

double mcse_mean(std::span<const double> draws) {
  const double ess = effective_sample_size(draws);
  return std::sqrt(sample_variance(draws) / ess);
}

}  // namespace hprobit
