#include "hprobit/risk.hpp"

#include "hprobit/errors.hpp"
#include "hprobit/parallel.hpp"
#include "hprobit/rng.hpp"
#include "hprobit/stats.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

namespace hprobit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void finish_output(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

// Log prior weights of the quadrature nodes: N(0,1) density times trapezoid weights.
std::vector<double> grid_log_prior(const ThetaGrid& grid, const std::vector<double>& nodes) {
  const double h = (grid.upper - grid.lower) / static_cast<double>(grid.points - 1);
  std::vector<double> logp(nodes.size());
  for (std::size_t g = 0; g < nodes.size(); ++g) {
    const double trap = (g == 0 || g + 1 == nodes.size()) ? 0.5 * h : h;
    logp[g] = -0.5 * nodes[g] * nodes[g] + std::log(trap);
  }
  return logp;
}

// Shared per-call quadrature context.
struct Quadrature {
  explicit Quadrature(const ThetaGrid& grid) : nodes(grid.nodes()), logprior(grid_log_prior(grid, nodes)) {}

  void prior(const GlobalDraw& draw, const std::vector<double>*& values, std::vector<double>& logw) const {
    if (draw.discrete) {
      values = &draw.atoms;
      logw.resize(draw.weights.size());
      for (std::size_t k = 0; k < draw.weights.size(); ++k) {
        logw[k] = draw.weights[k] > 0.0 ? std::log(draw.weights[k]) : kNegInf;
      }
    } else {
      values = &nodes;
      logw = logprior;
    }
  }

  std::vector<double> nodes;
  std::vector<double> logprior;
};

void add_likelihood(const GlobalDraw& draw, const std::vector<double>& values, int y, double xb,
                    std::vector<double>& logw) {
  if (!draw.discrete && draw.tau == 0.0) return;  // likelihood constant in theta
  const double sign = y > 0 ? 1.0 : -1.0;
  for (std::size_t g = 0; g < values.size(); ++g) {
    if (logw[g] == kNegInf) continue;
    logw[g] += log_std_normal_cdf(sign * draw.linear_predictor(values[g], xb));
  }
}

void normalize_weights(const std::vector<double>& logw, std::vector<double>& w) {
  const double top = *std::max_element(logw.begin(), logw.end());
  if (!std::isfinite(top)) throw SamplerError("theta posterior has no finite mass");
  w.resize(logw.size());
  double total = 0.0;
  for (std::size_t g = 0; g < logw.size(); ++g) {
    w[g] = std::exp(logw[g] - top);
    total += w[g];
  }
  for (auto& v : w) v /= total;
}

// Groups target slots by person; each entry lists (row, slot) in row order.
std::vector<std::vector<std::pair<std::size_t, std::size_t>>> targets_by_person(const PanelDataset& data,
                                                                               std::span<const std::size_t> rows) {
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> by_person(data.persons());
  const auto person = data.row_person();
  for (std::size_t s = 0; s < rows.size(); ++s) {
    if (rows[s] >= data.observations()) {
      throw std::out_of_range(fmt::format("row {} is outside the dataset", rows[s]));
    }
    by_person[person[rows[s]]].emplace_back(rows[s], s);
  }
  for (auto& v : by_person) std::sort(v.begin(), v.end());
  return by_person;
}

}  // namespace

void ThetaGrid::validate() const {
  if (points < 3) throw ConfigError("theta grid needs at least 3 points");
  if (!(upper > lower)) throw ConfigError("theta grid upper bound must exceed the lower bound");
}

std::vector<double> ThetaGrid::nodes() const {
  validate();
  std::vector<double> out(points);
  const double h = (upper - lower) / static_cast<double>(points - 1);
  for (std::size_t g = 0; g < points; ++g) out[g] = lower + h * static_cast<double>(g);
  return out;
}

std::vector<std::size_t> select_draws(std::size_t total, std::size_t count) {
  std::vector<std::size_t> out;
  if (count == 0 || count >= total) {
    out.resize(total);
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
  }
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(k * total / count);
  return out;
}

std::vector<GlobalDraw> extract_global_draws(const ChainDraws& draws, std::size_t covariates, std::size_t max_draws) {
  if (draws.model == ModelTag::binomial_mixture) {
    throw ConfigError("predictive quantities need a gaussian or discrete probit fit");
  }
  std::vector<std::size_t> beta_cols;
  for (std::size_t k = 0; k < covariates; ++k) beta_cols.push_back(draws.column(fmt::format("beta_{}", k + 1)));
  const bool discrete = draws.model == ModelTag::discrete;
  std::vector<std::size_t> atom_cols, weight_cols;
  std::size_t mu_col = 0, tau_col = 0;
  if (discrete) {
    for (std::size_t k = 1;; ++k) {
      auto a = draws.find_column(fmt::format("atom_{}", k));
      if (!a) break;
      atom_cols.push_back(*a);
      weight_cols.push_back(draws.column(fmt::format("weight_{}", k)));
    }
    if (atom_cols.empty()) throw DataError("discrete draws lack atom columns");
  } else {
    mu_col = draws.column("mu");
    tau_col = draws.column("tau");
  }
  std::vector<GlobalDraw> out;
  for (std::size_t d : select_draws(draws.total_draws(), max_draws)) {
    const Eigen::RowVectorXd row = draws.pooled_row(d);
    GlobalDraw g;
    g.discrete = discrete;
    g.beta.resize(static_cast<Eigen::Index>(covariates));
    for (std::size_t k = 0; k < covariates; ++k) g.beta(static_cast<Eigen::Index>(k)) = row(static_cast<Eigen::Index>(beta_cols[k]));
    if (discrete) {
      for (auto c : atom_cols) g.atoms.push_back(row(static_cast<Eigen::Index>(c)));
      for (auto c : weight_cols) g.weights.push_back(row(static_cast<Eigen::Index>(c)));
    } else {
      g.mu = row(static_cast<Eigen::Index>(mu_col));
      g.tau = row(static_cast<Eigen::Index>(tau_col));
    }
    out.push_back(std::move(g));
  }
  return out;
}

double ThetaPosterior::mean() const {
  double m = 0.0;
  for (std::size_t g = 0; g < values.size(); ++g) m += weights[g] * values[g];
  return m;
}

ThetaPosterior theta_conditional_posterior(std::span<const HistoryEntry> history, const GlobalDraw& draw,
                                           const ThetaGrid& grid) {
  Quadrature quad(grid);
  const std::vector<double>* values = nullptr;
  std::vector<double> logw;
  quad.prior(draw, values, logw);
  for (const auto& h : history) add_likelihood(draw, *values, h.y, h.xb, logw);
  ThetaPosterior post;
  post.values = *values;
  normalize_weights(logw, post.weights);
  return post;
}

PredictiveSummary predictive_samples(const PanelDataset& data, std::span<const std::size_t> rows,
                                     std::span<const GlobalDraw> draws, const PredictiveOptions& options) {
  if (draws.empty()) throw DataError("no posterior draws available for prediction");
  if (!(options.interval_level > 0.0 && options.interval_level < 1.0)) {
    throw ConfigError("interval level must lie in (0, 1)");
  }
  const Quadrature quad(options.grid);
  const auto by_person = targets_by_person(data, rows);
  const auto& x = data.design();
  const auto y = data.outcomes();
  const std::size_t n_draws = draws.size();

  PredictiveSummary out;
  out.rows.assign(rows.begin(), rows.end());
  out.pstar.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_draws));
  out.p.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_draws));

  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < by_person.size(); ++i) {
    if (!by_person[i].empty()) active.push_back(i);
  }
  parallel_for(
      active.size(), options.threads,
      [&](std::size_t a) {
        const std::size_t i = active[a];
        const auto& targets = by_person[i];
        const auto& person = data.person_index()[i];
        const std::size_t last = targets.back().first;
        const std::vector<double>* values = nullptr;
        std::vector<double> logw;
        for (std::size_t d = 0; d < n_draws; ++d) {
          const auto& draw = draws[d];
          const IterationRng rng{options.seed, 0, d};
          quad.prior(draw, values, logw);
          std::size_t next = 0;
          for (std::size_t r = person.first_row; r <= last; ++r) {
            const double xb = x.row(static_cast<Eigen::Index>(r)).dot(draw.beta);
            const bool is_target = next < targets.size() && targets[next].first == r;
            if (is_target) {
              const auto slot = static_cast<Eigen::Index>(targets[next].second);
              auto s1 = rng.stream(Stage::predictive, 2 * r);
              const auto g1 = sample_categorical_from_logweights(logw, s1);
              out.pstar(slot, static_cast<Eigen::Index>(d)) = std_normal_cdf(draw.linear_predictor((*values)[g1], xb));
              add_likelihood(draw, *values, y[r], xb, logw);
              auto s2 = rng.stream(Stage::predictive, 2 * r + 1);
              const auto g2 = sample_categorical_from_logweights(logw, s2);
              out.p(slot, static_cast<Eigen::Index>(d)) = std_normal_cdf(draw.linear_predictor((*values)[g2], xb));
              ++next;
            } else {
              add_likelihood(draw, *values, y[r], xb, logw);
            }
          }
        }
      },
      1);

  const double tail = 0.5 * (1.0 - options.interval_level);
  const std::size_t n = rows.size();
  out.pstar_mean.resize(n);
  out.p_mean.resize(n);
  out.p_median.resize(n);
  out.p_lower.resize(n);
  out.p_upper.resize(n);
  out.prior_count.resize(n);
  out.outcomes.resize(n);
  out.external_groups.resize(n);
  std::vector<double> sorted(n_draws);
  for (std::size_t s = 0; s < n; ++s) {
    const auto si = static_cast<Eigen::Index>(s);
    out.pstar_mean[s] = out.pstar.row(si).mean();
    out.p_mean[s] = out.p.row(si).mean();
    for (std::size_t d = 0; d < n_draws; ++d) sorted[d] = out.p(si, static_cast<Eigen::Index>(d));
    std::sort(sorted.begin(), sorted.end());
    out.p_median[s] = quantile_sorted(sorted, 0.5);
    out.p_lower[s] = quantile_sorted(sorted, tail);
    out.p_upper[s] = quantile_sorted(sorted, 1.0 - tail);
    const std::size_t r = rows[s];
    out.prior_count[s] = r - data.person_index()[data.row_person()[r]].first_row;
    out.outcomes[s] = y[r];
    out.external_groups[s] = data.external_groups()[r];
  }
  return out;
}

std::vector<double> expected_pstar(const PanelDataset& data, std::span<const std::size_t> rows,
                                   std::span<const GlobalDraw> draws, const PredictiveOptions& options) {
  if (draws.empty()) throw DataError("no posterior draws available for prediction");
  const Quadrature quad(options.grid);
  const auto by_person = targets_by_person(data, rows);
  const auto& x = data.design();
  const auto y = data.outcomes();
  std::vector<double> out(rows.size(), 0.0);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < by_person.size(); ++i) {
    if (!by_person[i].empty()) active.push_back(i);
  }
  parallel_for(
      active.size(), options.threads,
      [&](std::size_t a) {
        const std::size_t i = active[a];
        const auto& targets = by_person[i];
        const auto& person = data.person_index()[i];
        const std::size_t last = targets.back().first;
        const std::vector<double>* values = nullptr;
        std::vector<double> logw, w;
        for (const auto& draw : draws) {
          quad.prior(draw, values, logw);
          std::size_t next = 0;
          for (std::size_t r = person.first_row; r <= last; ++r) {
            const double xb = x.row(static_cast<Eigen::Index>(r)).dot(draw.beta);
            if (next < targets.size() && targets[next].first == r) {
              normalize_weights(logw, w);
              double e = 0.0;
              for (std::size_t g = 0; g < w.size(); ++g) {
                if (w[g] > 0.0) e += w[g] * std_normal_cdf(draw.linear_predictor((*values)[g], xb));
              }
              out[targets[next].second] += e;
              ++next;
            }
            add_likelihood(draw, *values, y[r], xb, logw);
          }
        }
      },
      1);
  for (auto& v : out) v /= static_cast<double>(draws.size());
  return out;
}

std::vector<int> simulate_predictive_outcomes(const PanelDataset& data, std::span<const std::size_t> rows,
                                              std::span<const GlobalDraw> draws, const ThetaGrid& grid,
                                              std::uint64_t seed) {
  if (draws.empty()) throw DataError("no posterior draws available for simulation");
  const Quadrature quad(grid);
  const auto by_person = targets_by_person(data, rows);
  const auto& x = data.design();
  const auto y = data.outcomes();
  std::vector<int> out(rows.size(), 0);
  const std::vector<double>* values = nullptr;
  std::vector<double> logw;
  for (std::size_t i = 0; i < by_person.size(); ++i) {
    const auto& targets = by_person[i];
    if (targets.empty()) continue;
    auto stream = IterationRng{seed, 0, 0}.stream(Stage::outcome, i);
    const auto& draw = draws[static_cast<std::size_t>(stream.next_u64() % draws.size())];
    quad.prior(draw, values, logw);
    const auto& person = data.person_index()[i];
    std::size_t next = 0;
    for (std::size_t r = person.first_row; r < person.first_row + person.count; ++r) {
      if (next < targets.size() && targets[next].first == r) {
        ++next;
        continue;
      }
      add_likelihood(draw, *values, y[r], x.row(static_cast<Eigen::Index>(r)).dot(draw.beta), logw);
    }
    const double theta = (*values)[sample_categorical_from_logweights(logw, stream)];
    for (const auto& [r, slot] : targets) {
      const double prob = std_normal_cdf(draw.linear_predictor(theta, x.row(static_cast<Eigen::Index>(r)).dot(draw.beta)));
      out[slot] = stream.uniform() < prob ? 1 : 0;
    }
  }
  return out;
}

std::string to_string(SchemeTag tag) {
  switch (tag) {
    case SchemeTag::psa_midpoint:
      return "psa_midpoint";
    case SchemeTag::psa_sized:
      return "psa_sized";
    case SchemeTag::clustered:
      return "clustered";
    case SchemeTag::custom:
      return "custom";
  }
  return "unknown";
}

SchemeTag scheme_tag_from_string(std::string_view text) {
  if (text == "psa_midpoint") return SchemeTag::psa_midpoint;
  if (text == "psa_sized") return SchemeTag::psa_sized;
  if (text == "clustered") return SchemeTag::clustered;
  if (text == "custom") return SchemeTag::custom;
  throw ConfigError(fmt::format("unknown scheme '{}'", text));
}

void RiskGroupScheme::validate() const {
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    const double c = thresholds[k];
    if (!(c > 0.0 && c < 1.0)) throw DataError(fmt::format("threshold {} is outside (0, 1)", c));
    if (k > 0 && !(c > thresholds[k - 1])) throw DataError("thresholds must be strictly increasing");
  }
}

std::vector<GroupRate> external_group_rates(const PanelDataset& data, std::span<const std::size_t> rows) {
  int top = 0;
  for (auto r : rows) {
    const auto g = data.external_groups()[r];
    if (g) {
      if (*g < 1) throw DataError(fmt::format("external risk group {} is not positive", *g));
      top = std::max(top, *g);
    }
  }
  std::vector<GroupRate> out(static_cast<std::size_t>(top));
  std::vector<double> events(out.size(), 0.0);
  for (int g = 0; g < top; ++g) out[static_cast<std::size_t>(g)].group = g + 1;
  for (auto r : rows) {
    const auto g = data.external_groups()[r];
    if (!g) continue;
    const auto k = static_cast<std::size_t>(*g - 1);
    ++out[k].count;
    events[k] += data.outcomes()[r];
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].rate = out[k].count ? events[k] / static_cast<double>(out[k].count) : std::nan("");
  }
  return out;
}

RiskGroupScheme thresholds_psa_midpoint(std::span<const GroupRate> rates) {
  if (rates.size() < 2) throw DataError("midpoint thresholds need at least two external risk groups");
  for (std::size_t k = 0; k < rates.size(); ++k) {
    if (rates[k].count == 0) throw DataError(fmt::format("external risk group {} has no observations", rates[k].group));
    if (k > 0 && rates[k].rate < rates[k - 1].rate) {
      throw DataError(fmt::format(
          "empirical rates of external groups {} and {} are inverted ({} > {}); supply custom thresholds",
          rates[k - 1].group, rates[k].group, rates[k - 1].rate, rates[k].rate));
    }
  }
  RiskGroupScheme scheme;
  scheme.tag = SchemeTag::psa_midpoint;
  for (std::size_t k = 0; k + 1 < rates.size(); ++k) scheme.thresholds.push_back(0.5 * (rates[k].rate + rates[k + 1].rate));
  try {
    scheme.validate();
  } catch (const DataError& e) {
    throw DataError(std::string("midpoint thresholds are degenerate: ") + e.what() + "; supply custom thresholds");
  }
  return scheme;
}

RiskGroupScheme thresholds_equal_count(std::span<const double> values, std::span<const std::size_t> sizes) {
  const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  if (total != values.size()) {
    throw DataError(fmt::format("reference group sizes sum to {} but there are {} values", total, values.size()));
  }
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  if (v.empty() || v.front() == v.back()) throw DataError("equal-count thresholds need at least two distinct values");
  RiskGroupScheme scheme;
  scheme.tag = SchemeTag::psa_sized;
  std::size_t boundary = 0;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    boundary += sizes[k];
    std::size_t b = boundary;
    while (b > 0 && b < v.size() && v[b - 1] == v[b]) ++b;
    if (b == 0 || b >= v.size()) throw DataError("equal-count boundary falls outside the data; groups collapse");
    scheme.thresholds.push_back(0.5 * (v[b - 1] + v[b]));
  }
  scheme.validate();
  return scheme;
}

KMeans1D kmeans_1d(std::span<const double> values, std::size_t k) {
  if (k == 0) throw DataError("k-means needs k >= 1");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  KMeans1D out;
  std::vector<double> weight;
  for (double v : sorted) {
    if (!std::isfinite(v)) throw DataError("k-means input contains a non-finite value");
    if (out.values.empty() || v != out.values.back()) {
      out.values.push_back(v);
      weight.push_back(1.0);
    } else {
      weight.back() += 1.0;
    }
  }
  const std::size_t n = out.values.size();
  if (n < k) throw DataError(fmt::format("k-means with k={} needs at least {} distinct values, found {}", k, k, n));

  const long double centre = std::accumulate(sorted.begin(), sorted.end(), 0.0L) / static_cast<long double>(sorted.size());
  std::vector<long double> pw(n + 1, 0), ps(n + 1, 0), pq(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const long double d = static_cast<long double>(out.values[i]) - centre;
    pw[i + 1] = pw[i] + weight[i];
    ps[i + 1] = ps[i] + weight[i] * d;
    pq[i + 1] = pq[i] + weight[i] * d * d;
  }
  auto cost = [&](std::size_t i, std::size_t j) {  // inclusive segment
    const long double w = pw[j + 1] - pw[i];
    const long double s = ps[j + 1] - ps[i];
    const long double c = (pq[j + 1] - pq[i]) - s * s / w;
    return c > 0 ? c : 0.0L;
  };

  // cost_table[c][j]: optimal cost of the first j+1 values in c+1 clusters;
  // start[c][j]: first index of the last cluster in that solution.
  std::vector<std::vector<long double>> table(k, std::vector<long double>(n, 0));
  std::vector<std::vector<std::size_t>> start(k, std::vector<std::size_t>(n, 0));
  for (std::size_t j = 0; j < n; ++j) table[0][j] = cost(0, j);
  for (std::size_t c = 1; c < k; ++c) {
    // Divide and conquer: the optimal start is nondecreasing in j.
    auto solve = [&](auto&& self, std::size_t lo, std::size_t hi, std::size_t opt_lo, std::size_t opt_hi) -> void {
      if (lo > hi) return;
      const std::size_t mid = lo + (hi - lo) / 2;
      long double best = std::numeric_limits<long double>::infinity();
      std::size_t arg = std::max(opt_lo, c);
      for (std::size_t i = std::max(opt_lo, c); i <= std::min(mid, opt_hi); ++i) {
        const long double v = table[c - 1][i - 1] + cost(i, mid);
        if (v < best) {
          best = v;
          arg = i;
        }
      }
      table[c][mid] = best;
      start[c][mid] = arg;
      if (mid > lo) self(self, lo, mid - 1, opt_lo, arg);
      self(self, mid + 1, hi, arg, opt_hi);
    };
    solve(solve, c, n - 1, c, n - 1);
  }
  out.within_ss = static_cast<double>(table[k - 1][n - 1]);
  out.cluster.assign(n, 0);
  std::size_t end = n - 1;
  for (std::size_t c = k; c-- > 0;) {
    const std::size_t first = c == 0 ? 0 : start[c][end];
    for (std::size_t i = first; i <= end; ++i) out.cluster[i] = c;
    if (c > 0) end = first - 1;
  }
  out.centers.assign(k, 0.0);
  std::vector<double> mass(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    out.centers[out.cluster[i]] += weight[i] * out.values[i];
    mass[out.cluster[i]] += weight[i];
  }
  for (std::size_t c = 0; c < k; ++c) out.centers[c] /= mass[c];
  return out;
}

RiskGroupScheme thresholds_kmeans_1d(std::span<const double> values, std::size_t k) {
  const auto km = kmeans_1d(values, k);
  RiskGroupScheme scheme;
  scheme.tag = SchemeTag::clustered;
  for (std::size_t i = 0; i + 1 < km.values.size(); ++i) {
    if (km.cluster[i] != km.cluster[i + 1]) scheme.thresholds.push_back(0.5 * (km.values[i] + km.values[i + 1]));
  }
  scheme.validate();
  return scheme;
}

std::size_t bin(double estimate, const RiskGroupScheme& scheme) {
  const auto it = std::upper_bound(scheme.thresholds.begin(), scheme.thresholds.end(), estimate);
  return static_cast<std::size_t>(it - scheme.thresholds.begin()) + 1;
}

std::vector<CalibrationRow> calibration_table(const PredictiveSummary& summary, const RiskGroupScheme& scheme,
                                              std::span<const int> outcomes) {
  if (outcomes.size() != summary.size()) throw std::invalid_argument("one outcome per predicted occasion is required");
  const std::size_t groups = scheme.groups();
  std::vector<CalibrationRow> rows(groups);
  std::vector<double> events(groups, 0.0);
  for (std::size_t g = 0; g < groups; ++g) rows[g].group = g + 1;
  for (std::size_t s = 0; s < summary.size(); ++s) {
    const std::size_t g = bin(summary.pstar_mean[s], scheme) - 1;
    ++rows[g].size;
    rows[g].mean_pstar += summary.pstar_mean[s];
    rows[g].mean_p += summary.p_mean[s];
    events[g] += outcomes[s];
  }
  for (std::size_t g = 0; g < groups; ++g) {
    auto& row = rows[g];
    if (row.size == 0) {
      row.mean_pstar = row.mean_p = row.rate = row.ci_lower = row.ci_upper = std::nan("");
      row.flagged = true;
      continue;
    }
    const double n = static_cast<double>(row.size);
    row.mean_pstar /= n;
    row.mean_p /= n;
    row.rate = events[g] / n;
    const double half = 1.959963984540054 * std::sqrt(row.rate * (1.0 - row.rate) / n);
    row.ci_lower = std::max(0.0, row.rate - half);
    row.ci_upper = std::min(1.0, row.rate + half);
    row.flagged = half == 0.0;
  }
  return rows;
}

WrongBinMatrix wrong_bin_matrix(const PredictiveSummary& summary, const RiskGroupScheme& scheme) {
  const std::size_t groups = scheme.groups();
  WrongBinMatrix out;
  out.probability = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(groups), static_cast<Eigen::Index>(groups));
  std::vector<std::size_t> count(groups, 0);
  const auto n_draws = static_cast<std::size_t>(summary.p.cols());
  std::vector<double> frac(groups);
  double own = 0.0;
  for (std::size_t s = 0; s < summary.size(); ++s) {
    const std::size_t g = bin(summary.pstar_mean[s], scheme) - 1;
    out.assigned.push_back(g + 1);
    std::fill(frac.begin(), frac.end(), 0.0);
    for (std::size_t d = 0; d < n_draws; ++d) {
      frac[bin(summary.p(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(d)), scheme) - 1] += 1.0;
    }
    for (std::size_t k = 0; k < groups; ++k) {
      out.probability(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(k)) += frac[k] / static_cast<double>(n_draws);
    }
    own += frac[g] / static_cast<double>(n_draws);
    ++count[g];
  }
  out.empty_rows.assign(groups, false);
  for (std::size_t g = 0; g < groups; ++g) {
    const auto gi = static_cast<Eigen::Index>(g);
    if (count[g] == 0) {
      out.probability.row(gi).setConstant(std::nan(""));
      out.empty_rows[g] = true;
    } else {
      out.probability.row(gi) /= static_cast<double>(count[g]);
    }
  }
  out.assigned_mass = summary.size() ? own / static_cast<double>(summary.size()) : std::nan("");
  return out;
}

std::vector<IntervalCell> interval_length_table(const PredictiveSummary& summary) {
  std::map<std::pair<std::optional<int>, std::size_t>, std::pair<double, std::size_t>> cells;
  for (std::size_t s = 0; s < summary.size(); ++s) {
    auto& cell = cells[{summary.external_groups[s], summary.prior_count[s]}];
    cell.first += summary.p_upper[s] - summary.p_lower[s];
    ++cell.second;
  }
  std::vector<IntervalCell> out;
  for (const auto& [key, value] : cells) {
    out.push_back({key.first, key.second, value.second, value.first / static_cast<double>(value.second)});
  }
  return out;
}

std::vector<SortedInterval> sorted_intervals(const PredictiveSummary& summary, double threshold, std::size_t sample,
                                             std::uint64_t seed) {
  std::vector<std::size_t> idx(summary.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (sample > 0 && sample < idx.size()) {
    auto stream = IterationRng{seed, 0, 0}.stream(Stage::simulate);
    for (std::size_t k = 0; k < sample; ++k) {
      const std::size_t j = k + static_cast<std::size_t>(stream.next_u64() % (idx.size() - k));
      std::swap(idx[k], idx[j]);
    }
    idx.resize(sample);
    std::sort(idx.begin(), idx.end());
  }
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return summary.p_median[a] < summary.p_median[b]; });
  const auto half = static_cast<std::ptrdiff_t>(idx.size() / 2);
  std::stable_sort(idx.begin(), idx.begin() + half,
                   [&](std::size_t a, std::size_t b) { return summary.p_upper[a] < summary.p_upper[b]; });
  std::stable_sort(idx.begin() + half, idx.end(),
                   [&](std::size_t a, std::size_t b) { return summary.p_lower[a] < summary.p_lower[b]; });
  std::vector<SortedInterval> out;
  out.reserve(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const std::size_t s = idx[k];
    SortedInterval iv;
    iv.position = k + 1;
    iv.row = summary.rows[s];
    iv.lower = summary.p_lower[s];
    iv.median = summary.p_median[s];
    iv.upper = summary.p_upper[s];
    iv.outcome = summary.outcomes[s];
    iv.separated = iv.lower > threshold || iv.upper < threshold;
    out.push_back(iv);
  }
  return out;
}

std::vector<bool> flag_by_certainty(const PredictiveSummary& summary, double c, double h) {
  std::vector<bool> flags(summary.size());
  const auto n_draws = summary.pstar.cols();
  for (std::size_t s = 0; s < summary.size(); ++s) {
    const auto above = (summary.pstar.row(static_cast<Eigen::Index>(s)).array() > c).count();
    flags[s] = static_cast<double>(above) / static_cast<double>(n_draws) >= h;
  }
  return flags;
}

std::vector<FlagCell> flag_grid(const PredictiveSummary& summary, std::span<const double> cs,
                                std::span<const double> hs) {
  std::vector<FlagCell> out;
  for (double c : cs) {
    for (double h : hs) {
      const auto flags = flag_by_certainty(summary, c, h);
      const auto n = std::count(flags.begin(), flags.end(), true);
      out.push_back({c, h, summary.size() ? static_cast<double>(n) / static_cast<double>(summary.size()) : std::nan("")});
    }
  }
  return out;
}

std::vector<DensityCell> group_densities(const PredictiveSummary& summary, const RiskGroupScheme& scheme,
                                         std::size_t bins) {
  if (bins == 0) throw ConfigError("density export needs at least one bin");
  const std::size_t groups = scheme.groups();
  const double width = 1.0 / static_cast<double>(bins);
  auto bin_of = [&](double v) {
    return std::min(bins - 1, static_cast<std::size_t>(std::max(0.0, v) * static_cast<double>(bins)));
  };
  std::vector<std::vector<double>> p_mass(groups, std::vector<double>(bins, 0.0));
  std::vector<std::vector<double>> hat_mass(groups, std::vector<double>(bins, 0.0));
  std::vector<std::size_t> count(groups, 0);
  const auto n_draws = static_cast<std::size_t>(summary.p.cols());
  for (std::size_t s = 0; s < summary.size(); ++s) {
    const std::size_t g = bin(summary.pstar_mean[s], scheme) - 1;
    ++count[g];
    hat_mass[g][bin_of(summary.pstar_mean[s])] += 1.0;
    for (std::size_t d = 0; d < n_draws; ++d) {
      p_mass[g][bin_of(summary.p(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(d)))] +=
          1.0 / static_cast<double>(n_draws);
    }
  }
  std::vector<DensityCell> out;
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t b = 0; b < bins; ++b) {
      DensityCell cell;
      cell.group = g + 1;
      cell.bin_lower = static_cast<double>(b) * width;
      cell.bin_upper = static_cast<double>(b + 1) * width;
      if (count[g] > 0) {
        cell.p_density = p_mass[g][b] / static_cast<double>(count[g]) / width;
        cell.pstar_hat_density = hat_mass[g][b] / static_cast<double>(count[g]) / width;
      } else {
        cell.p_density = cell.pstar_hat_density = std::nan("");
      }
      out.push_back(cell);
    }
  }
  return out;
}

void write_predictive_csv(const PanelDataset& data, const PredictiveSummary& summary,
                          const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "person_id,occasion_index,date,outcome,external_risk_group,prior_count,pstar_mean,p_mean,p_median,p_lower,"
         "p_upper\n";
  for (std::size_t s = 0; s < summary.size(); ++s) {
    const std::size_t r = summary.rows[s];
    const auto& g = summary.external_groups[s];
    out << data.person_index()[data.row_person()[r]].id << ',' << data.occasions()[r] << ','
        << format_date(data.dates()[r]) << ',' << summary.outcomes[s] << ',' << (g ? std::to_string(*g) : "") << ','
        << summary.prior_count[s] << ',' << format_number(summary.pstar_mean[s]) << ','
        << format_number(summary.p_mean[s]) << ',' << format_number(summary.p_median[s]) << ','
        << format_number(summary.p_lower[s]) << ',' << format_number(summary.p_upper[s]) << '\n';
  }
  finish_output(out, path);
}

void write_calibration_csv(std::span<const CalibrationRow> rows, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "group,size,mean_pstar,mean_p,rate,ci_lower,ci_upper,flagged\n";
  for (const auto& r : rows) {
    out << r.group << ',' << r.size << ',' << format_number(r.mean_pstar) << ',' << format_number(r.mean_p) << ','
        << format_number(r.rate) << ',' << format_number(r.ci_lower) << ',' << format_number(r.ci_upper) << ','
        << (r.flagged ? 1 : 0) << '\n';
  }
  finish_output(out, path);
}

void write_wrong_bin_csv(const WrongBinMatrix& matrix, const std::filesystem::path& path) {
  auto out = open_output(path);
  const auto groups = matrix.probability.rows();
  out << "assigned_group";
  for (Eigen::Index k = 0; k < groups; ++k) out << ",group_" << k + 1;
  out << ",empty\n";
  for (Eigen::Index g = 0; g < groups; ++g) {
    out << g + 1;
    for (Eigen::Index k = 0; k < groups; ++k) out << ',' << format_number(matrix.probability(g, k));
    out << ',' << (matrix.empty_rows[static_cast<std::size_t>(g)] ? 1 : 0) << '\n';
  }
  finish_output(out, path);
}

void write_interval_table_csv(std::span<const IntervalCell> cells, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "external_risk_group,prior_count,count,mean_length\n";
  for (const auto& c : cells) {
    out << (c.group ? std::to_string(*c.group) : "") << ',' << c.prior_count << ',' << c.count << ','
        << format_number(c.mean_length) << '\n';
  }
  finish_output(out, path);
}

void write_sorted_intervals_csv(const PanelDataset& data, std::span<const SortedInterval> intervals,
                                const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "position,person_id,occasion_index,lower,median,upper,outcome,separated\n";
  for (const auto& iv : intervals) {
    out << iv.position << ',' << data.person_index()[data.row_person()[iv.row]].id << ',' << data.occasions()[iv.row]
        << ',' << format_number(iv.lower) << ',' << format_number(iv.median) << ',' << format_number(iv.upper) << ','
        << iv.outcome << ',' << (iv.separated ? 1 : 0) << '\n';
  }
  finish_output(out, path);
}

void write_flag_grid_csv(std::span<const FlagCell> cells, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "c,h,proportion\n";
  for (const auto& c : cells) out << format_number(c.c) << ',' << format_number(c.h) << ',' << format_number(c.proportion) << '\n';
  finish_output(out, path);
}

void write_density_csv(std::span<const DensityCell> cells, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "group,bin_lower,bin_upper,p_density,pstar_hat_density\n";
  for (const auto& c : cells) {
    out << c.group << ',' << format_number(c.bin_lower) << ',' << format_number(c.bin_upper) << ','
        << format_number(c.p_density) << ',' << format_number(c.pstar_hat_density) << '\n';
  }
  finish_output(out, path);
}

void write_scheme_csv(std::span<const RiskGroupScheme> schemes, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "scheme,index,threshold\n";
  for (const auto& s : schemes) {
    for (std::size_t k = 0; k < s.thresholds.size(); ++k) {
      out << to_string(s.tag) << ',' << k + 1 << ',' << format_number(s.thresholds[k]) << '\n';
    }
  }
  finish_output(out, path);
}

}  // namespace hprobit
