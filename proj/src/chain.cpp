#include "hprobit/chain.hpp"

#include "hprobit/diagnostics.hpp"
#include "hprobit/errors.hpp"

#include <boost/algorithm/string.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

namespace hprobit {

std::string to_string(ModelTag tag) {
  switch (tag) {
    case ModelTag::gaussian:
      return "gaussian";
    case ModelTag::discrete:
      return "discrete";
    case ModelTag::binomial_mixture:
      return "binomial-mixture";
  }
  return "unknown";
}

ModelTag model_tag_from_string(std::string_view text) {
  if (text == "gaussian") return ModelTag::gaussian;
  if (text == "discrete") return ModelTag::discrete;
  if (text == "binomial-mixture") return ModelTag::binomial_mixture;
  throw ConfigError(fmt::format("unknown model '{}' (expected gaussian, discrete or binomial-mixture)", text));
}

void ChainConfig::validate() const {
  if (iterations == 0) throw ConfigError("iterations must be positive");
  if (burn_in >= iterations) throw ConfigError("burn_in must be smaller than iterations");
  if (thin == 0) throw ConfigError("thin must be positive");
  if (chains == 0) throw ConfigError("chains must be positive");
  if (stored_draws() == 0) throw ConfigError("no draws would be stored; reduce burn_in or thin");
}

std::optional<std::size_t> ChainDraws::find_column(std::string_view name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) return std::nullopt;
  return static_cast<std::size_t>(it - columns.begin());
}

std::size_t ChainDraws::column(std::string_view name) const {
  auto c = find_column(name);
  if (!c) throw std::out_of_range(fmt::format("no column '{}' in chain draws", name));
  return *c;
}

std::vector<std::vector<double>> ChainDraws::per_chain(std::size_t col) const {
  std::vector<std::vector<double>> out;
  for (const auto& m : chains) {
    const auto c = m.col(static_cast<Eigen::Index>(col));
    out.emplace_back(c.data(), c.data() + c.size());
  }
  return out;
}

std::vector<double> ChainDraws::pooled(std::size_t col) const {
  std::vector<double> out;
  out.reserve(total_draws());
  for (const auto& m : chains) {
    const auto c = m.col(static_cast<Eigen::Index>(col));
    out.insert(out.end(), c.data(), c.data() + c.size());
  }
  return out;
}

Eigen::RowVectorXd ChainDraws::pooled_row(std::size_t draw) const {
  const std::size_t per = draws_per_chain();
  return chains.at(draw / per).row(static_cast<Eigen::Index>(draw % per));
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::nan("");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, q);
}

std::vector<ParameterSummary> summarize(const ChainDraws& draws, const std::vector<std::string>& columns) {
  std::vector<ParameterSummary> out;
  for (const auto& name : columns) {
    const auto col = draws.column(name);
    auto pooled = draws.pooled(col);
    ParameterSummary s;
    s.name = name;
    const double n = static_cast<double>(pooled.size());
    for (double v : pooled) s.mean += v;
    s.mean /= n;
    for (double v : pooled) s.sd += (v - s.mean) * (v - s.mean);
    s.sd = pooled.size() > 1 ? std::sqrt(s.sd / (n - 1.0)) : 0.0;
    std::sort(pooled.begin(), pooled.end());
    s.q025 = quantile_sorted(pooled, 0.025);
    s.q975 = quantile_sorted(pooled, 0.975);
    if (draws.draws_per_chain() >= 4) {
      const auto chains = draws.per_chain(col);
      s.rhat = split_rhat(chains);
      s.ess = effective_sample_size(chains);
    } else {
      s.rhat = std::nan("");
      s.ess = std::nan("");
    }
    out.push_back(s);
  }
  return out;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "NaN";
  return fmt::format("{}", value);
}

void write_draws_csv(const ChainDraws& draws, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "chain,iteration";
  for (const auto& c : draws.columns) out << ',' << c;
  out << '\n';
  std::string line;
  for (std::size_t c = 0; c < draws.chains.size(); ++c) {
    const auto& m = draws.chains[c];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      line.clear();
      fmt::format_to(std::back_inserter(line), "{},{}", c + 1, draws.iterations[static_cast<std::size_t>(r)] + 1);
      for (Eigen::Index k = 0; k < m.cols(); ++k) {
        line += ',';
        line += format_number(m(r, k));
      }
      line += '\n';
      out << line;
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

ChainDraws read_draws_csv(const std::filesystem::path& path, ModelTag model) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty draws file " + path.string());
  std::vector<std::string> header;
  boost::algorithm::split(header, line, boost::is_any_of(","));
  if (header.size() < 3 || header[0] != "chain" || header[1] != "iteration") {
    throw DataError("draws file " + path.string() + " lacks the chain,iteration header");
  }
  ChainDraws draws;
  draws.model = model;
  draws.columns.assign(header.begin() + 2, header.end());
  std::map<std::size_t, std::vector<std::vector<double>>> rows;
  std::map<std::size_t, std::vector<std::size_t>> iters;
  std::size_t line_no = 1;
  std::vector<std::string> fields;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    boost::algorithm::split(fields, line, boost::is_any_of(","));
    if (fields.size() != header.size()) throw DataError("draws file: wrong field count", line_no);
    std::vector<double> values(fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (fields[k] == "NaN") {
        values[k] = std::nan("");
        continue;
      }
      auto [ptr, ec] = std::from_chars(fields[k].data(), fields[k].data() + fields[k].size(), values[k]);
      if (ec != std::errc()) throw DataError("draws file: unparseable number '" + fields[k] + "'", line_no);
    }
    const auto chain = static_cast<std::size_t>(values[0]);
    iters[chain].push_back(static_cast<std::size_t>(values[1]) - 1);
    rows[chain].emplace_back(values.begin() + 2, values.end());
  }
  for (auto& [chain, chain_rows] : rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(chain_rows.size()), static_cast<Eigen::Index>(draws.columns.size()));
    for (std::size_t r = 0; r < chain_rows.size(); ++r) {
      for (std::size_t k = 0; k < draws.columns.size(); ++k) {
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = chain_rows[r][k];
      }
    }
    if (!draws.chains.empty() && m.rows() != draws.chains.front().rows()) {
      throw DataError("draws file: chains have different lengths");
    }
    draws.chains.push_back(std::move(m));
  }
  if (!iters.empty()) draws.iterations = iters.begin()->second;
  return draws;
}

void write_summary_csv(const std::vector<ParameterSummary>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "parameter,mean,sd,q025,q975,rhat,ess\n";
  for (const auto& s : rows) {
    out << s.name << ',' << format_number(s.mean) << ',' << format_number(s.sd) << ',' << format_number(s.q025)
        << ',' << format_number(s.q975) << ',' << format_number(s.rhat) << ',' << format_number(s.ess) << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace hprobit
