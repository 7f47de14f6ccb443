#pragma once

#include "hprobit/data.hpp"
#include "hprobit/rng.hpp"
#include "hprobit/stats.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace testing_support {

using namespace hprobit;

// Reference normal cdf from Boost, kept separate from the library's own.
inline double ref_cdf(double x) { return boost::math::cdf(boost::math::normal(), x); }

struct SyntheticTruth {
  double mu = -0.8416212335729143;  // Phi^{-1}(0.2)
  double tau = 0.45;
  std::vector<double> beta;
  std::vector<double> theta;
};

struct PanelSpec {
  std::size_t persons = 200;
  std::size_t min_occasions = 1;
  std::size_t max_occasions = 5;
  std::size_t covariates = 2;
  std::uint64_t seed = 1;
  int first_year = 2015;
  // Six external groups cut from the true probability.
  bool external_groups = true;
};

// Standard-normal covariates, already standardized, and outcomes from the
// Gaussian random-effects probit model with the supplied truth.
inline PanelDataset synthetic_panel(const PanelSpec& spec, SyntheticTruth& truth) {
  std::mt19937_64 gen(spec.seed);
  std::normal_distribution<double> z;
  std::uniform_int_distribution<std::size_t> count(spec.min_occasions, spec.max_occasions);
  std::uniform_int_distribution<int> gap(20, 400);
  std::uniform_real_distribution<double> u;
  if (truth.beta.size() != spec.covariates) truth.beta.assign(spec.covariates, 0.0);
  truth.theta.clear();
  std::vector<ObservationRecord> records;
  std::vector<std::string> names;
  for (std::size_t k = 0; k < spec.covariates; ++k) names.push_back("x" + std::to_string(k + 1));
  for (std::size_t i = 0; i < spec.persons; ++i) {
    const double theta = z(gen);
    truth.theta.push_back(theta);
    const std::size_t n = count(gen);
    Date date = std::chrono::sys_days{std::chrono::year{spec.first_year} / 1 / 1} + std::chrono::days{gap(gen)};
    for (std::size_t j = 0; j < n; ++j) {
      ObservationRecord rec;
      rec.person_id = "p" + std::to_string(i + 1);
      rec.date = date;
      double eta = truth.mu + truth.tau * theta;
      for (std::size_t k = 0; k < spec.covariates; ++k) {
        rec.covariates.push_back(z(gen));
        eta += truth.beta[k] * rec.covariates.back();
      }
      const double p = ref_cdf(eta);
      rec.outcome = u(gen) < p ? 1 : 0;
      if (spec.external_groups) rec.external_risk_group = 1 + std::min(5, static_cast<int>(p * 10.0));
      records.push_back(std::move(rec));
      date += std::chrono::days{gap(gen)};
    }
  }
  auto ds = PanelDataset::from_records(std::move(records), names);
  return ds.with_design(ds.design(), true);
}

// Replaces the outcomes of a dataset, keeping everything else.
inline PanelDataset with_outcomes(const PanelDataset& data, const std::vector<int>& y) {
  auto records = data.records();
  for (std::size_t r = 0; r < records.size(); ++r) records[r].outcome = y[r];
  auto out = PanelDataset::from_records(std::move(records), data.covariate_names(), false);
  return out.with_design(data.design(), data.standardized());
}

inline void write_panel_csv(const PanelDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  out << "id,date,y";
  for (const auto& n : data.covariate_names()) out << ',' << n;
  out << ",group\n";
  out.precision(17);
  for (std::size_t r = 0; r < data.observations(); ++r) {
    const auto rec = data.record(r);
    out << rec.person_id << ',' << format_date(rec.date) << ',' << rec.outcome;
    for (double x : rec.covariates) out << ',' << x;
    out << ',' << (rec.external_risk_group ? std::to_string(*rec.external_risk_group) : std::string("NA")) << '\n';
  }
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct TempDir {
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("hprobit-" + tag + "-" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path path;
};

// Mean and Monte Carlo standard error of a sample, with an optional
// effective sample size for autocorrelated series.
struct MomentEstimate {
  double mean = 0.0;
  double se = 0.0;
};

inline MomentEstimate iid_moment(const std::vector<double>& x) {
  double s = 0.0, ss = 0.0;
  for (double v : x) {
    s += v;
    ss += v * v;
  }
  const double n = static_cast<double>(x.size());
  const double mean = s / n;
  const double var = (ss - n * mean * mean) / (n - 1.0);
  return {mean, std::sqrt(std::max(var, 0.0) / n)};
}

}  // namespace testing_support
