#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hprobit {

using Date = std::chrono::sys_days;

// ISO 8601 calendar date, YYYY-MM-DD.
Date parse_date(std::string_view text);
std::string format_date(Date date);

struct ObservationRecord {
  std::string person_id;
  int occasion_index = 0;  // 1-based, chronological within a person
  Date date{};
  std::vector<double> covariates;
  int outcome = 0;
  std::optional<int> external_risk_group;

  bool operator==(const ObservationRecord&) const = default;
};

enum class MissingPolicy { drop, abort };

// Column roles for CSV ingestion.
//
// Key-value file format (one `key = value` per line, `#` comments):
//   person_id           = <column>
//   date                = <column>
//   outcome             = <column>
//   covariates          = <column>, <column>, ...
//   external_risk_group = <column>        (optional)
//   missing             = drop | abort    (default drop)
//   na_values           = NA, NaN, .      (empty cells are always missing)
struct SchemaConfig {
  std::string person_column;
  std::string date_column;
  std::string outcome_column;
  std::vector<std::string> covariate_columns;
  std::optional<std::string> external_group_column;
  MissingPolicy missing = MissingPolicy::drop;
  std::vector<std::string> na_values{"NA", "NaN", "."};

  static SchemaConfig load(const std::filesystem::path& path);
  static SchemaConfig parse(const std::map<std::string, std::string>& entries);
};

struct StandardizationParams {
  std::vector<double> mean;
  std::vector<double> sd;  // population (divide-by-N) standard deviation; 0 marks a constant column
};

// Long-format panel grouped by person. Rows of one person are contiguous and
// in chronological order, so the person-to-row incidence is a set of row
// ranges. Immutable after construction.
class PanelDataset {
 public:
  struct Person {
    std::string id;
    std::size_t first_row = 0;
    std::size_t count = 0;
  };

  PanelDataset() = default;

  // Groups records by person (in order of first appearance) and stably sorts
  // each person's rows by date. With assign_occasions the occasion indices
  // are rewritten to 1..n_i; otherwise the supplied ones are kept and must
  // increase within each person.
  static PanelDataset from_records(std::vector<ObservationRecord> records,
                                   std::vector<std::string> covariate_names, bool assign_occasions = true);

  std::size_t persons() const { return persons_.size(); }
  std::size_t observations() const { return outcomes_.size(); }
  std::size_t covariates() const { return covariate_names_.size(); }
  bool empty() const { return outcomes_.empty(); }

  const std::vector<Person>& person_index() const { return persons_; }
  const std::vector<std::string>& covariate_names() const { return covariate_names_; }
  const Eigen::MatrixXd& design() const { return design_; }
  std::span<const int> outcomes() const { return outcomes_; }
  std::span<const int> occasions() const { return occasions_; }
  std::span<const Date> dates() const { return dates_; }
  std::span<const std::optional<int>> external_groups() const { return external_groups_; }
  // Person index of every row (the incidence matrix W in compressed form).
  std::span<const std::size_t> row_person() const { return row_person_; }
  bool standardized() const { return standardized_; }

  ObservationRecord record(std::size_t row) const;
  std::vector<ObservationRecord> records() const;

  PanelDataset with_design(Eigen::MatrixXd design, bool standardized) const;
  // Keeps rows for which keep(row) is true; occasion indices are preserved.
  template <typename Pred>
  PanelDataset filter_rows(Pred keep) const {
    std::vector<ObservationRecord> kept;
    for (std::size_t r = 0; r < observations(); ++r) {
      if (keep(r)) kept.push_back(record(r));
    }
    auto out = from_records(std::move(kept), covariate_names_, false);
    out.standardized_ = standardized_;
    return out;
  }

 private:
  std::vector<std::string> covariate_names_;
  std::vector<Person> persons_;
  std::vector<std::size_t> row_person_;
  std::vector<int> occasions_;
  std::vector<Date> dates_;
  std::vector<int> outcomes_;
  std::vector<std::optional<int>> external_groups_;
  Eigen::MatrixXd design_;
  bool standardized_ = false;
};

struct IngestResult {
  PanelDataset dataset;
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
  std::vector<std::string> warnings;
};

IngestResult ingest_csv(const std::filesystem::path& path, const SchemaConfig& schema);

// Canonical form: the schema's columns plus occasion_index. Covariates are
// written with round-trip precision.
void write_canonical_csv(const PanelDataset& dataset, const SchemaConfig& schema,
                         const std::filesystem::path& path);

struct StandardizeResult {
  PanelDataset dataset;
  StandardizationParams params;
  std::vector<std::string> warnings;
};

// Without params the dataset is treated as training data and the parameters
// are estimated from it. Constant training columns map to zero (with a
// warning) when allow_constant is set and raise DataError otherwise.
StandardizeResult standardize(const PanelDataset& dataset,
                              const std::optional<StandardizationParams>& params = std::nullopt,
                              bool allow_constant = true);

// Rows dated strictly after the cutoff form the holdout.
std::pair<PanelDataset, PanelDataset> split_train_holdout(const PanelDataset& dataset, Date cutoff);

// Number of occasions per person -> number of persons with that count.
std::map<std::size_t, std::size_t> release_count_histogram(const PanelDataset& dataset);

}  // namespace hprobit
