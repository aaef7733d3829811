#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "perfband/common/matrix.hpp"

namespace perfband::tabular {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ColumnKind { numeric, categorical };

struct ColumnMeta {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  // Dictionary for categorical columns, in first-seen order. Values are
  // stored in the data matrix as their dictionary index; values outside the
  // dictionary encode as the reserved code `categories.size()`.
  std::vector<std::string> categories;

  bool operator==(const ColumnMeta&) const = default;
};

// Declares how to read a CSV file: which column carries the label, per-column
// kinds (default numeric), optional excluded columns, and optionally the
// admissible label values.
struct DatasetSchema {
  std::string id;
  std::string label;
  std::map<std::string, ColumnKind> column_kinds;
  std::vector<std::string> exclude;
  std::optional<std::vector<std::string>> label_values;
};

DatasetSchema load_schema(const std::string& json_path);
DatasetSchema schema_from_json_text(const std::string& json_text);

// In-memory tabular dataset. Numeric cells hold raw values (NaN when
// missing); categorical cells hold dictionary codes.
struct Dataset {
  std::string id;
  std::string label_name;
  std::vector<std::string> label_names;
  std::vector<ColumnMeta> columns;
  Matrix values;
  std::vector<int> labels;

  std::size_t n() const { return values.rows; }
  std::size_t dim() const { return values.cols; }
  int n_classes() const { return static_cast<int>(label_names.size()); }

  bool operator==(const Dataset&) const = default;
};

Dataset load_dataset(const std::string& csv_path, const DatasetSchema& schema);
void write_dataset_csv(const Dataset& dataset, const std::string& csv_path);

// Dictionary code for a category value under a fixed column meta; values not
// in the dictionary map to the reserved code `categories.size()`.
int category_code(const ColumnMeta& column, const std::string& value);

}  // namespace perfband::tabular
