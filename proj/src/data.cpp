#include "hprobit/data.hpp"

#include "hprobit/errors.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/tokenizer.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_map>

namespace hprobit {
namespace {

using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;

std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> fields;
  try {
    Tokenizer tok(line, boost::escaped_list_separator<char>('\\', ',', '"'));
    for (const auto& f : tok) fields.push_back(boost::algorithm::trim_copy(f));
  } catch (const boost::escaped_list_error& e) {
    throw DataError(std::string("malformed CSV: ") + e.what());
  }
  return fields;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, value, boost::is_any_of(","));
  std::vector<std::string> out;
  for (auto& p : parts) {
    boost::algorithm::trim(p);
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<int> parse_int(const std::string& s) {
  int v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    // Accept integral values written as reals ("3.0").
    auto d = parse_double(s);
    if (d && std::floor(*d) == *d && std::abs(*d) < 1e9) return static_cast<int>(*d);
    return std::nullopt;
  }
  return v;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\\\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Date parse_date(std::string_view text) {
  int y = 0;
  unsigned m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw DataError(fmt::format("invalid date '{}', expected YYYY-MM-DD", text));
  }
  auto num = [&](std::size_t pos, std::size_t len, auto& out) {
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
    return ec == std::errc() && ptr == text.data() + pos + len;
  };
  if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) {
    throw DataError(fmt::format("invalid date '{}', expected YYYY-MM-DD", text));
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw DataError(fmt::format("invalid calendar date '{}'", text));
  return Date{ymd};
}

std::string format_date(Date date) {
  const std::chrono::year_month_day ymd{date};
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                     static_cast<unsigned>(ymd.day()));
}

SchemaConfig SchemaConfig::parse(const std::map<std::string, std::string>& entries) {
  SchemaConfig schema;
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    auto it = entries.find(key);
    if (it == entries.end() || it->second.empty()) return std::nullopt;
    return it->second;
  };
  auto required = [&](const std::string& key) {
    auto v = get(key);
    if (!v) throw ConfigError("schema: missing required key '" + key + "'");
    return *v;
  };
  schema.person_column = required("person_id");
  schema.date_column = required("date");
  schema.outcome_column = required("outcome");
  schema.covariate_columns = split_list(required("covariates"));
  if (schema.covariate_columns.empty()) throw ConfigError("schema: at least one covariate column is required");
  schema.external_group_column = get("external_risk_group");
  if (auto m = get("missing")) {
    if (*m == "drop") {
      schema.missing = MissingPolicy::drop;
    } else if (*m == "abort") {
      schema.missing = MissingPolicy::abort;
    } else {
      throw ConfigError("schema: missing must be 'drop' or 'abort', got '" + *m + "'");
    }
  }
  if (auto na = get("na_values")) schema.na_values = split_list(*na);
  return schema;
}

SchemaConfig SchemaConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schema file " + path.string());
  std::map<std::string, std::string> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    boost::algorithm::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("schema file line {}: expected key = value", line_no));
    entries[boost::algorithm::trim_copy(line.substr(0, eq))] = boost::algorithm::trim_copy(line.substr(eq + 1));
  }
  return parse(entries);
}

PanelDataset PanelDataset::from_records(std::vector<ObservationRecord> records,
                                        std::vector<std::string> covariate_names, bool assign_occasions) {
  PanelDataset ds;
  ds.covariate_names_ = std::move(covariate_names);
  const std::size_t p = ds.covariate_names_.size();

  std::unordered_map<std::string, std::size_t> person_slot;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (records[r].covariates.size() != p) {
      throw DataError(fmt::format("record {} has {} covariates, expected {}", r, records[r].covariates.size(), p));
    }
    auto [it, inserted] = person_slot.try_emplace(records[r].person_id, members.size());
    if (inserted) members.emplace_back();
    members[it->second].push_back(r);
  }

  const std::size_t n = records.size();
  ds.design_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  ds.row_person_.reserve(n);
  ds.occasions_.reserve(n);
  ds.dates_.reserve(n);
  ds.outcomes_.reserve(n);
  ds.external_groups_.reserve(n);

  std::size_t row = 0;
  for (auto& rows : members) {
    std::stable_sort(rows.begin(), rows.end(),
                     [&](std::size_t a, std::size_t b) { return records[a].date < records[b].date; });
    Person person{records[rows.front()].person_id, row, rows.size()};
    int previous = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      auto& rec = records[rows[k]];
      const int occasion = assign_occasions ? static_cast<int>(k + 1) : rec.occasion_index;
      if (occasion <= previous) {
        throw DataError(fmt::format("person '{}': occasion indices must increase with date", person.id));
      }
      previous = occasion;
      if (rec.outcome != 0 && rec.outcome != 1) {
        throw DataError(fmt::format("person '{}': outcome must be 0 or 1", person.id));
      }
      ds.row_person_.push_back(ds.persons_.size());
      ds.occasions_.push_back(occasion);
      ds.dates_.push_back(rec.date);
      ds.outcomes_.push_back(rec.outcome);
      ds.external_groups_.push_back(rec.external_risk_group);
      for (std::size_t c = 0; c < p; ++c) {
        ds.design_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(c)) = rec.covariates[c];
      }
      ++row;
    }
    ds.persons_.push_back(std::move(person));
  }
  return ds;
}

ObservationRecord PanelDataset::record(std::size_t row) const {
  ObservationRecord rec;
  rec.person_id = persons_[row_person_[row]].id;
  rec.occasion_index = occasions_[row];
  rec.date = dates_[row];
  rec.outcome = outcomes_[row];
  rec.external_risk_group = external_groups_[row];
  rec.covariates.resize(covariates());
  for (std::size_t c = 0; c < covariates(); ++c) {
    rec.covariates[c] = design_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(c));
  }
  return rec;
}

std::vector<ObservationRecord> PanelDataset::records() const {
  std::vector<ObservationRecord> out;
  out.reserve(observations());
  for (std::size_t r = 0; r < observations(); ++r) out.push_back(record(r));
  return out;
}

PanelDataset PanelDataset::with_design(Eigen::MatrixXd design, bool standardized) const {
  if (design.rows() != design_.rows() || design.cols() != design_.cols()) {
    throw DataError("with_design: shape mismatch");
  }
  PanelDataset out = *this;
  out.design_ = std::move(design);
  out.standardized_ = standardized;
  return out;
}

IngestResult ingest_csv(const std::filesystem::path& path, const SchemaConfig& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw DataError("data file " + path.string() + " is empty", 1);
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
  const auto header = split_csv_line(line);

  auto column = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ConfigError("column '" + name + "' not found in " + path.string());
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t person_col = column(schema.person_column);
  const std::size_t date_col = column(schema.date_column);
  const std::size_t outcome_col = column(schema.outcome_column);
  std::vector<std::size_t> cov_cols;
  for (const auto& c : schema.covariate_columns) cov_cols.push_back(column(c));
  std::optional<std::size_t> group_col;
  if (schema.external_group_column) group_col = column(*schema.external_group_column);
  // Canonical files carry explicit occasion indices; honor them when present.
  std::optional<std::size_t> occasion_col;
  if (auto it = std::find(header.begin(), header.end(), "occasion_index"); it != header.end()) {
    occasion_col = static_cast<std::size_t>(it - header.begin());
  }

  const std::set<std::string> na(schema.na_values.begin(), schema.na_values.end());
  auto missing = [&](const std::string& s) { return s.empty() || na.count(s) > 0; };

  IngestResult result;
  std::vector<ObservationRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    ++result.rows_read;
    std::string problem;
    ObservationRecord rec;
    std::vector<std::string> fields;
    try {
      fields = split_csv_line(line);
    } catch (const DataError& e) {
      problem = e.what();
    }
    if (problem.empty() && fields.size() != header.size()) {
      problem = fmt::format("expected {} fields, found {}", header.size(), fields.size());
    }
    auto field = [&](std::size_t col, const std::string& role) -> const std::string* {
      if (!problem.empty()) return nullptr;
      if (missing(fields[col])) {
        problem = "missing " + role;
        return nullptr;
      }
      return &fields[col];
    };
    if (const auto* v = field(person_col, "person id")) rec.person_id = *v;
    if (const auto* v = field(date_col, "date")) {
      try {
        rec.date = parse_date(*v);
      } catch (const DataError& e) {
        problem = e.what();
      }
    }
    if (const auto* v = field(outcome_col, "outcome")) {
      auto y = parse_int(*v);
      if (!y || (*y != 0 && *y != 1)) {
        problem = "outcome '" + *v + "' is not 0 or 1";
      } else {
        rec.outcome = *y;
      }
    }
    for (std::size_t k = 0; k < cov_cols.size(); ++k) {
      if (const auto* v = field(cov_cols[k], "covariate " + schema.covariate_columns[k])) {
        auto x = parse_double(*v);
        if (!x) {
          problem = "covariate " + schema.covariate_columns[k] + " value '" + *v + "' is not numeric";
        } else {
          rec.covariates.push_back(*x);
        }
      }
    }
    if (occasion_col) {
      if (const auto* v = field(*occasion_col, "occasion index")) {
        auto j = parse_int(*v);
        if (!j || *j < 1) {
          problem = "occasion index '" + *v + "' is not a positive integer";
        } else {
          rec.occasion_index = *j;
        }
      }
    }
    if (group_col && problem.empty() && !missing(fields[*group_col])) {
      auto g = parse_int(fields[*group_col]);
      if (!g || *g < 1) {
        problem = "external risk group '" + fields[*group_col] + "' is not a positive integer";
      } else {
        rec.external_risk_group = *g;
      }
    }

    if (!problem.empty()) {
      if (schema.missing == MissingPolicy::abort) throw DataError(problem, line_no);
      ++result.rows_dropped;
      result.warnings.push_back(fmt::format("line {}: dropped row ({})", line_no, problem));
      continue;
    }
    records.push_back(std::move(rec));
  }

  // Same-date ties keep file order; note them.
  std::set<std::pair<std::string, Date>> seen;
  for (const auto& r : records) {
    if (!seen.emplace(r.person_id, r.date).second) {
      result.warnings.push_back(
          fmt::format("person '{}' has several rows dated {}; file order kept", r.person_id, format_date(r.date)));
    }
  }

  result.dataset = PanelDataset::from_records(std::move(records), schema.covariate_columns, !occasion_col);
  return result;
}

void write_canonical_csv(const PanelDataset& dataset, const SchemaConfig& schema,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  std::vector<std::string> header{schema.person_column, "occasion_index", schema.date_column, schema.outcome_column};
  for (const auto& c : dataset.covariate_names()) header.push_back(c);
  if (schema.external_group_column) header.push_back(*schema.external_group_column);
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << quote_if_needed(header[k]);
  out << '\n';
  for (std::size_t r = 0; r < dataset.observations(); ++r) {
    const auto rec = dataset.record(r);
    out << quote_if_needed(rec.person_id) << ',' << rec.occasion_index << ',' << format_date(rec.date) << ','
        << rec.outcome;
    for (double x : rec.covariates) out << ',' << fmt::format("{}", x);
    if (schema.external_group_column) {
      out << ',';
      if (rec.external_risk_group) out << *rec.external_risk_group;
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

StandardizeResult standardize(const PanelDataset& dataset, const std::optional<StandardizationParams>& params,
                              bool allow_constant) {
  StandardizeResult result;
  const auto& x = dataset.design();
  const std::size_t p = dataset.covariates();
  if (params) {
    if (params->mean.size() != p || params->sd.size() != p) {
      throw DataError("standardize: parameter length does not match covariate count");
    }
    result.params = *params;
  } else {
    if (dataset.empty()) throw DataError("standardize: cannot estimate parameters from an empty dataset");
    const double n = static_cast<double>(dataset.observations());
    for (std::size_t c = 0; c < p; ++c) {
      const auto col = x.col(static_cast<Eigen::Index>(c));
      const double mean = col.sum() / n;
      const double var = (col.array() - mean).square().sum() / n;
      double sd = std::sqrt(var);
      if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
        if (!allow_constant) {
          throw DataError("standardize: column '" + dataset.covariate_names()[c] + "' has zero variance");
        }
        result.warnings.push_back("column '" + dataset.covariate_names()[c] + "' is constant; mapped to zeros");
        sd = 0.0;
      }
      result.params.mean.push_back(mean);
      result.params.sd.push_back(sd);
    }
  }
  Eigen::MatrixXd z(x.rows(), x.cols());
  for (std::size_t c = 0; c < p; ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    if (result.params.sd[c] == 0.0) {
      z.col(ci).setZero();
    } else {
      z.col(ci) = (x.col(ci).array() - result.params.mean[c]) / result.params.sd[c];
    }
  }
  result.dataset = dataset.with_design(std::move(z), true);
  return result;
}

std::pair<PanelDataset, PanelDataset> split_train_holdout(const PanelDataset& dataset, Date cutoff) {
  const auto dates = dataset.dates();
  auto train = dataset.filter_rows([&](std::size_t r) { return dates[r] <= cutoff; });
  auto holdout = dataset.filter_rows([&](std::size_t r) { return dates[r] > cutoff; });
  if (train.empty()) throw DataError("split: no training rows on or before " + format_date(cutoff));
  return {std::move(train), std::move(holdout)};
}

std::map<std::size_t, std::size_t> release_count_histogram(const PanelDataset& dataset) {
  std::map<std::size_t, std::size_t> hist;
  for (const auto& p : dataset.person_index()) ++hist[p.count];
  return hist;
}

}  // namespace hprobit
