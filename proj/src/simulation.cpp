#include "hprobit/simulation.hpp"

#include "hprobit/errors.hpp"
#include "hprobit/parallel.hpp"
#include "hprobit/rng.hpp"
#include "hprobit/stats.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>

namespace hprobit {

void SimulationScenario::validate() const {
  if (!(p0 > 0.0 && p0 < 1.0)) throw ConfigError("p0 must lie in (0, 1)");
  if (replicates < 1) throw ConfigError("at least one replicate is required");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("interval level must lie in (0, 1)");
  for (double t : taus) {
    if (!(t >= 0.0)) throw ConfigError("tau values must be nonnegative");
  }
  for (auto n : n_points) {
    if (n < 1) throw ConfigError("evaluation points must be positive");
  }
  grid.validate();
}

IntervalBounds posterior_p_interval(double offset, double tau, std::size_t n, std::size_t k, double level,
                                    const ThetaGrid& grid) {
  if (k > n) throw std::invalid_argument("k cannot exceed n");
  if (tau == 0.0) {
    const double p = std_normal_cdf(offset);
    return {p, p, p};
  }
  const auto nodes = grid.nodes();
  const double kd = static_cast<double>(k);
  const double fd = static_cast<double>(n - k);
  std::vector<double> logw(nodes.size());
  for (std::size_t g = 0; g < nodes.size(); ++g) {
    const double eta = offset + tau * nodes[g];
    logw[g] = -0.5 * nodes[g] * nodes[g];
    if (kd > 0) logw[g] += kd * log_std_normal_cdf(eta);
    if (fd > 0) logw[g] += fd * log_std_normal_cdf(-eta);
  }
  const double top = *std::max_element(logw.begin(), logw.end());
  std::vector<double> dens(nodes.size());
  for (std::size_t g = 0; g < nodes.size(); ++g) dens[g] = std::exp(logw[g] - top);
  // Cumulative trapezoid integral of the (unnormalized) density at each node.
  std::vector<double> cdf(nodes.size(), 0.0);
  for (std::size_t g = 1; g < nodes.size(); ++g) {
    cdf[g] = cdf[g - 1] + 0.5 * (dens[g - 1] + dens[g]) * (nodes[g] - nodes[g - 1]);
  }
  const double total = cdf.back();
  auto theta_quantile = [&](double q) {
    const double target = q * total;
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
    if (it == cdf.begin()) return nodes.front();
    if (it == cdf.end()) return nodes.back();
    const auto g = static_cast<std::size_t>(it - cdf.begin());
    const double span = cdf[g] - cdf[g - 1];
    const double frac = span > 0.0 ? (target - cdf[g - 1]) / span : 0.0;
    return nodes[g - 1] + frac * (nodes[g] - nodes[g - 1]);
  };
  const double tail = 0.5 * (1.0 - level);
  // P is increasing in theta, so quantiles map through Phi.
  return {std_normal_cdf(offset + tau * theta_quantile(tail)), std_normal_cdf(offset + tau * theta_quantile(0.5)),
          std_normal_cdf(offset + tau * theta_quantile(1.0 - tail))};
}

namespace {

// Successes among the first n outcomes of every replicate, for each requested n.
std::vector<std::vector<std::size_t>> replicate_success_counts(const SimulationScenario& s,
                                                               const std::vector<std::size_t>& ns) {
  const std::size_t n_max = *std::max_element(ns.begin(), ns.end());
  std::vector<std::vector<std::size_t>> counts(ns.size(), std::vector<std::size_t>(s.replicates));
  parallel_for(
      s.replicates, s.threads,
      [&](std::size_t r) {
        auto stream = IterationRng{s.seed, 0, 0}.stream(Stage::simulate, r);
        std::size_t successes = 0;
        std::size_t next = 0;
        for (std::size_t j = 1; j <= n_max; ++j) {
          if (stream.uniform() < s.p0) ++successes;
          while (next < ns.size() && ns[next] == j) counts[next++][r] = successes;
        }
      },
      16);
  return counts;
}

struct LengthCache {
  explicit LengthCache(const SimulationScenario& s, double tau) : scenario(s), tau(tau) {}

  double length(std::size_t n, std::size_t k) {
    {
      std::lock_guard lock(mutex);
      auto it = cache.find({n, k});
      if (it != cache.end()) return it->second;
    }
    const double v = posterior_p_interval(std_normal_quantile(scenario.p0), tau, n, k, scenario.level, scenario.grid).length();
    std::lock_guard lock(mutex);
    cache.emplace(std::make_pair(n, k), v);
    return v;
  }

  const SimulationScenario& scenario;
  double tau;
  std::map<std::pair<std::size_t, std::size_t>, double> cache;
  std::mutex mutex;
};

CurvePoint average_length(LengthCache& cache, std::size_t n, const std::vector<std::size_t>& successes) {
  double sum = 0.0, sum_sq = 0.0;
  for (auto k : successes) {
    const double len = cache.length(n, k);
    sum += len;
    sum_sq += len * len;
  }
  const double r = static_cast<double>(successes.size());
  const double mean = sum / r;
  const double var = r > 1 ? std::max(0.0, (sum_sq - r * mean * mean) / (r - 1.0)) : 0.0;
  return {cache.tau, n, mean, std::sqrt(var / r)};
}

}  // namespace

std::vector<CurvePoint> interval_length_curve(const SimulationScenario& scenario) {
  scenario.validate();
  std::vector<std::size_t> ns = scenario.n_points;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  const auto counts = replicate_success_counts(scenario, ns);
  std::vector<CurvePoint> out;
  for (double tau : scenario.taus) {
    LengthCache cache(scenario, tau);
    for (std::size_t a = 0; a < ns.size(); ++a) out.push_back(average_length(cache, ns[a], counts[a]));
  }
  return out;
}

std::size_t first_crossing(const SimulationScenario& scenario, double tau, double level_length, std::size_t n_max) {
  scenario.validate();
  std::vector<std::size_t> ns(n_max);
  for (std::size_t n = 1; n <= n_max; ++n) ns[n - 1] = n;
  const auto counts = replicate_success_counts(scenario, ns);
  LengthCache cache(scenario, tau);
  for (std::size_t a = 0; a < ns.size(); ++a) {
    if (average_length(cache, ns[a], counts[a]).mean_length < level_length) return ns[a];
  }
  return 0;
}

double SignalNoiseResult::overlap(const std::string& signal, double tau, std::size_t a, std::size_t b) const {
  for (const auto& o : overlaps) {
    if (o.signal == signal && o.tau == tau && o.stratum_a == a && o.stratum_b == b) return o.fraction_overlapping;
  }
  throw std::out_of_range(fmt::format("no overlap summary for {} signal, tau {}, strata {} and {}", signal, tau, a, b));
}

SignalNoiseResult signal_noise_intervals(const SignalNoiseConfig& config) {
  config.grid.validate();
  if (config.cohort < 1) throw ConfigError("cohort size must be positive");
  SignalNoiseResult result;
  std::uint64_t scenario_index = 0;
  for (const auto& [label, strata] : {std::pair{std::string("low"), config.low_signal},
                                      std::pair{std::string("high"), config.high_signal}}) {
    for (double tau : config.taus) {
      std::vector<std::vector<IntervalBounds>> by_stratum(strata.size());
      // Outcome y in {0, 1} determines the interval within a stratum.
      for (std::size_t s = 0; s < strata.size(); ++s) {
        const double offset = std_normal_quantile(strata[s]);
        const IntervalBounds given[2] = {posterior_p_interval(offset, tau, 1, 0, config.level, config.grid),
                                         posterior_p_interval(offset, tau, 1, 1, config.level, config.grid)};
        for (std::size_t i = 0; i < config.cohort; ++i) {
          auto stream = IterationRng{config.seed, scenario_index, s}.stream(Stage::simulate, i);
          const double truth = std_normal_cdf(offset + tau * stream.normal());
          const int y = stream.uniform() < truth ? 1 : 0;
          result.intervals.push_back({label, tau, s + 1, strata[s], i + 1, y, given[y]});
          by_stratum[s].push_back(given[y]);
        }
      }
      std::size_t all_pairs = 0, all_overlap = 0;
      for (std::size_t a = 0; a < strata.size(); ++a) {
        for (std::size_t b = a + 1; b < strata.size(); ++b) {
          std::size_t pairs = 0, overlapping = 0;
          for (const auto& ia : by_stratum[a]) {
            for (const auto& ib : by_stratum[b]) {
              ++pairs;
              if (std::max(ia.lower, ib.lower) <= std::min(ia.upper, ib.upper)) ++overlapping;
            }
          }
          all_pairs += pairs;
          all_overlap += overlapping;
          result.overlaps.push_back(
              {label, tau, a + 1, b + 1, static_cast<double>(overlapping) / static_cast<double>(pairs)});
        }
      }
      result.overlaps.push_back(
          {label, tau, 0, 0, all_pairs ? static_cast<double>(all_overlap) / static_cast<double>(all_pairs) : 0.0});
      ++scenario_index;
    }
  }
  return result;
}

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "tau,n,mean_length,mcse\n";
  for (const auto& c : curve) {
    out << format_number(c.tau) << ',' << c.n << ',' << format_number(c.mean_length) << ',' << format_number(c.mcse)
        << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_signal_noise_csv(const SignalNoiseResult& result, const std::filesystem::path& intervals_path,
                            const std::filesystem::path& overlap_path) {
  std::ofstream out(intervals_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + intervals_path.string());
  out << "signal,tau,stratum,stratum_probability,individual,outcome,lower,median,upper\n";
  for (const auto& iv : result.intervals) {
    out << iv.signal << ',' << format_number(iv.tau) << ',' << iv.stratum << ','
        << format_number(iv.stratum_probability) << ',' << iv.individual << ',' << iv.outcome << ','
        << format_number(iv.interval.lower) << ',' << format_number(iv.interval.median) << ','
        << format_number(iv.interval.upper) << '\n';
  }
  if (!out) throw IoError("failed writing " + intervals_path.string());
  std::ofstream ov(overlap_path, std::ios::binary);
  if (!ov) throw IoError("cannot write " + overlap_path.string());
  ov << "signal,tau,stratum_a,stratum_b,fraction_overlapping\n";
  for (const auto& o : result.overlaps) {
    ov << o.signal << ',' << format_number(o.tau) << ',' << o.stratum_a << ',' << o.stratum_b << ','
       << format_number(o.fraction_overlapping) << '\n';
  }
  if (!ov) throw IoError("failed writing " + overlap_path.string());
}

}  // namespace hprobit
