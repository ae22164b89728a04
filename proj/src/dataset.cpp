#include "mixlogit/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>


namespace mixlogit {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Minimal CSV field splitter with double-quote support.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(trim(field));
  return fields;
}

const std::map<std::string, std::string>& default_severity_levels() {
  // Three-way aggregation of the raw police-report severity scale.
  static const std::map<std::string, std::string> kMap = {
      {"minor", "minor"},
      {"serious", "serious"},
      {"fatal", "fatal"},
      {"no apparent injury", "minor"},
      {"possible injury", "minor"},
      {"suspected minor injury", "serious"},
      {"suspected serious injury", "serious"},
      {"death", "fatal"},
  };
  return kMap;
}

int severity_index(const std::string& category) {
  if (category == "minor") return 0;
  if (category == "serious") return 1;
  if (category == "fatal") return 2;
  return -1;
}

}  // namespace

CodingSchema::CodingSchema() : severity_levels(default_severity_levels()) {}

CodingSchema CodingSchema::from_json(const nlohmann::json& config) {
  CodingSchema schema;
  if (config.contains("sentinels")) {
    schema.sentinels = config.at("sentinels").get<std::vector<std::string>>();
  }
  if (config.contains("severity_column")) schema.severity_column = config.at("severity_column");
  if (config.contains("crash_id_column")) schema.crash_id_column = config.at("crash_id_column");
  if (config.contains("severity_levels")) {
    schema.severity_levels.clear();
    for (const auto& [raw, cat] : config.at("severity_levels").items()) {
      schema.severity_levels[lower(raw)] = lower(cat.get<std::string>());
    }
  }
  if (!config.contains("variables")) {
    throw SchemaError("schema config missing 'variables'");
  }
  for (const auto& var : config.at("variables")) {
    VariableCoding coding;
    coding.column = var.at("column");
    if (var.value("binary", false)) {
      coding.levels.push_back({"0", "", true});
      coding.levels.push_back({"1", var.value("dummy", coding.column), false});
    } else {
      for (const auto& lvl : var.at("levels")) {
        DummyLevel dl;
        dl.level = lvl.at("level");
        dl.base = lvl.value("base", false);
        if (!dl.base) dl.dummy = lvl.value("dummy", coding.column + "_" + lower(dl.level));
        coding.levels.push_back(dl);
      }
    }
    schema.variables.push_back(std::move(coding));
  }
  schema.validate();
  return schema;
}

CodingSchema CodingSchema::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open schema file: " + path);
  nlohmann::json config;
  in >> config;
  return from_json(config);
}

CodingSchema CodingSchema::binary_passthrough(const std::vector<std::string>& columns) {
  CodingSchema schema;
  for (const auto& col : columns) {
    VariableCoding coding;
    coding.column = col;
    coding.levels.push_back({"0", "", true});
    coding.levels.push_back({"1", col, false});
    schema.variables.push_back(std::move(coding));
  }
  schema.validate();
  return schema;
}

std::vector<std::string> CodingSchema::dummy_names() const {
  std::vector<std::string> names;
  for (const auto& var : variables) {
    for (const auto& lvl : var.levels) {
      if (!lvl.base) names.push_back(lvl.dummy);
    }
  }
  return names;
}

bool CodingSchema::is_sentinel(const std::string& value) const {
  const std::string v = lower(trim(value));
  return std::find(sentinels.begin(), sentinels.end(), v) != sentinels.end();
}

std::string CodingSchema::decode_level(const std::string& column,
                                       std::span<const double> encoded_row) const {
  size_t offset = 0;
  for (const auto& var : variables) {
    size_t width = 0;
    for (const auto& lvl : var.levels) {
      if (!lvl.base) ++width;
    }
    if (var.column == column) {
      size_t i = offset;
      const DummyLevel* base = nullptr;
      for (const auto& lvl : var.levels) {
        if (lvl.base) {
          base = &lvl;
          continue;
        }
        if (encoded_row[i] == 1.0) return lvl.level;
        ++i;
      }
      return base->level;
    }
    offset += width;
  }
  throw NameError("decode_level: unknown column '" + column + "'");
}

void CodingSchema::validate() const {
  for (const auto& var : variables) {
    int n_base = 0;
    for (const auto& lvl : var.levels) n_base += lvl.base ? 1 : 0;
    if (n_base != 1) {
      throw SchemaError("variable '" + var.column + "' must declare exactly one base level");
    }
  }
  for (const auto& [raw, cat] : severity_levels) {
    if (severity_index(cat) < 0) {
      throw SchemaError("severity level '" + raw + "' maps to unknown category '" + cat + "'");
    }
  }
}

int ChoiceDataset::variable_index(const std::string& name) const {
  auto it = std::find(variable_names.begin(), variable_names.end(), name);
  return it == variable_names.end() ? -1 : static_cast<int>(it - variable_names.begin());
}

void ChoiceDataset::check_invariants() const {
  if (n_alternatives < 2) throw ValueError("dataset needs at least 2 alternatives");
  if (base_alternative < 0 || base_alternative >= n_alternatives) {
    throw ValueError("base alternative out of range");
  }
  if (x.size() != static_cast<size_t>(n_obs()) * variable_names.size()) {
    throw ValueError("covariate matrix shape mismatch");
  }
  if (crash_ids.size() != chosen.size()) throw ValueError("crash id count mismatch");
  for (int alt : chosen) {
    if (alt < 0 || alt >= n_alternatives) throw ValueError("chosen alternative out of range");
  }
  for (double v : x) {
    if (v != 0.0 && v != 1.0) throw ValueError("covariates must be 0/1 dummies");
  }
}

std::vector<double> encode_dummies(const RawRecord& record, const CodingSchema& schema) {
  std::vector<double> out;
  for (const auto& var : schema.variables) {
    auto it = record.covariates.find(var.column);
    if (it == record.covariates.end()) {
      throw SchemaError("record is missing column '" + var.column + "'");
    }
    const std::string& value = it->second;
    const DummyLevel* match = nullptr;
    for (const auto& lvl : var.levels) {
      if (lvl.level == value) {
        match = &lvl;
        break;
      }
    }
    if (match == nullptr) {
      throw ValueError("variable '" + var.column + "': level '" + value + "' not in schema");
    }
    for (const auto& lvl : var.levels) {
      if (lvl.base) continue;
      out.push_back(&lvl == match ? 1.0 : 0.0);
    }
  }
  return out;
}

int map_severity(const std::string& raw_label, const CodingSchema& schema, int row_number) {
  const std::string key = lower(trim(raw_label));
  auto it = schema.severity_levels.find(key);
  if (it == schema.severity_levels.end()) {
    if (schema.is_sentinel(raw_label)) return -1;
    throw ValueError("row " + std::to_string(row_number) + ": unmappable severity label '" +
                     raw_label + "'");
  }
  return severity_index(it->second);
}

LoadResult load_dataset(const std::string& path, const CodingSchema& schema) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open dataset file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw SchemaError("dataset file is empty: " + path);
  const std::vector<std::string> header = split_csv_line(line);

  std::unordered_map<std::string, int> col_index;
  for (size_t i = 0; i < header.size(); ++i) col_index[header[i]] = static_cast<int>(i);

  auto require = [&](const std::string& name) {
    auto it = col_index.find(name);
    if (it == col_index.end()) {
      throw SchemaError("dataset is missing required column '" + name + "'");
    }
    return it->second;
  };

  const int severity_col = require(schema.severity_column);
  const int crash_col = require(schema.crash_id_column);
  std::vector<int> var_cols;
  for (const auto& var : schema.variables) var_cols.push_back(require(var.column));
  const auto occupant_it = col_index.find(schema.occupant_id_column);

  LoadResult result;
  ChoiceDataset& ds = result.dataset;
  ds.variable_names = schema.dummy_names();
  ds.n_alternatives = 3;
  ds.base_alternative = 0;

  int row_number = 1;  // header was row 1
  while (std::getline(in, line)) {
    ++row_number;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() < header.size()) {
      throw ValueError("row " + std::to_string(row_number) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }

    // Reject records with sentinel values in any used column.
    bool drop = schema.is_sentinel(fields[severity_col]);
    for (size_t v = 0; v < var_cols.size() && !drop; ++v) {
      drop = schema.is_sentinel(fields[var_cols[v]]);
    }
    const int severity = drop ? -1 : map_severity(fields[severity_col], schema, row_number);
    if (drop || severity < 0) {
      ++result.report.dropped;
      continue;
    }

    RawRecord record;
    record.crash_id = fields[crash_col];
    record.occupant_id = occupant_it != col_index.end() ? fields[occupant_it->second]
                                                        : std::to_string(row_number);
    for (size_t v = 0; v < var_cols.size(); ++v) {
      record.covariates[schema.variables[v].column] = fields[var_cols[v]];
    }
    std::vector<double> encoded;
    try {
      encoded = encode_dummies(record, schema);
    } catch (const ValueError& e) {
      throw ValueError("row " + std::to_string(row_number) + ": " + e.what());
    }

    ds.chosen.push_back(severity);
    ds.crash_ids.push_back(record.crash_id);
    ds.x.insert(ds.x.end(), encoded.begin(), encoded.end());
    ++result.report.kept;
  }

  if (ds.n_obs() == 0) {
    throw DatasetEmptyError("no observations remain after filtering: " + path);
  }
  ds.check_invariants();
  return result;
}

std::vector<std::string> csv_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open dataset file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("dataset file is empty: " + path);
  return split_csv_line(line);
}

}  // namespace mixlogit
