#pragma once

#include <span>
#include <vector>

namespace hprobit {

// Convergence diagnostics over several chains of one scalar quantity.
// Chains may differ in length only if each has at least 4 draws; the
// shortest common length is used.

// Split R-hat (Gelman et al., BDA3): every chain is cut in half and the
// potential scale reduction is computed over the 2M half-chains.
double split_rhat(const std::vector<std::vector<double>>& chains);

// Effective sample size with Geyer's initial monotone sequence estimator on
// the multi-chain autocorrelation (Stan's formulation).
double effective_sample_size(const std::vector<std::vector<double>>& chains);

double effective_sample_size(std::span<const double> draws);

// Monte Carlo standard error of the mean, sd / sqrt(ESS).
double mcse_mean(std::span<const double> draws);

}  // namespace hprobit
