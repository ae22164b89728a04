#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixlogit/errors.hpp"

namespace mixlogit {

// One occupant-level record after severity aggregation, before dummy coding.
struct RawRecord {
  std::string severity_label;  // "minor", "serious" or "fatal"
  std::map<std::string, std::string> covariates;  // column -> categorical level
  std::string crash_id;
  std::string occupant_id;
};

struct DummyLevel {
  std::string level;
  std::string dummy;  // emitted column name; empty for the base level
  bool base = false;
};

struct VariableCoding {
  std::string column;
  std::vector<DummyLevel> levels;  // exactly one base level
};

// Coding table mapping raw categorical columns to dummy variables, plus the
// severity aggregation and the sentinel strings that mark unusable records.
class CodingSchema {
 public:
  std::vector<VariableCoding> variables;
  std::vector<std::string> sentinels{"unknown", "not reported", ""};
  std::map<std::string, std::string> severity_levels;  // raw label -> category
  std::string severity_column{"severity"};
  std::string crash_id_column{"crash_id"};
  std::string occupant_id_column{"occupant_id"};

  CodingSchema();

  static CodingSchema from_json(const nlohmann::json& config);
  static CodingSchema from_file(const std::string& path);
  // Treat each listed column as an already-coded 0/1 dummy named after itself.
  static CodingSchema binary_passthrough(const std::vector<std::string>& columns);

  // Emitted dummy names, in variable order then level order.
  std::vector<std::string> dummy_names() const;
  bool is_sentinel(const std::string& value) const;
  // Inverse lookup: the categorical level a full encoded row implies for `column`.
  std::string decode_level(const std::string& column, std::span<const double> encoded_row) const;

  void validate() const;
};

// Occupant-level observations in file order, dummy-coded and immutable once built.
struct ChoiceDataset {
  std::vector<std::string> variable_names;
  int n_alternatives = 0;
  int base_alternative = 0;
  std::vector<int> chosen;              // per observation, 0..n_alternatives-1
  std::vector<double> x;                // row-major, n_obs x n_vars, entries in {0,1}
  std::vector<std::string> crash_ids;

  int n_obs() const { return static_cast<int>(chosen.size()); }
  int n_vars() const { return static_cast<int>(variable_names.size()); }
  double value(int obs, int var) const { return x[static_cast<size_t>(obs) * variable_names.size() + var]; }
  std::span<const double> row(int obs) const {
    return {x.data() + static_cast<size_t>(obs) * variable_names.size(), variable_names.size()};
  }
  // Index of a variable name, or -1 when absent.
  int variable_index(const std::string& name) const;

  void check_invariants() const;
};

struct LoadReport {
  int kept = 0;
  int dropped = 0;
};

struct LoadResult {
  ChoiceDataset dataset;
  LoadReport report;
};

// Encode one record against the schema: one entry per non-base level,
// 1.0 where the record matches.
std::vector<double> encode_dummies(const RawRecord& record, const CodingSchema& schema);

// Load a delimited text table (comma separated, header row) into a ChoiceDataset.
// Rows containing sentinel values in any used column are dropped and counted.
LoadResult load_dataset(const std::string& path, const CodingSchema& schema);

// Header row of a delimited text table.
std::vector<std::string> csv_header(const std::string& path);

// Map a raw severity label to the category index (minor=0, serious=1, fatal=2).
// Returns -1 for sentinel labels; throws ValueError for unmappable ones.
int map_severity(const std::string& raw_label, const CodingSchema& schema, int row_number);

}  // namespace mixlogit
