#include "perfband/tabular/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace perfband::tabular {

namespace {

// Splits one CSV record. Supports quoted fields with doubled-quote escapes.
std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (in_quotes)
    throw ParseError("line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(std::move(field));
  return fields;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

double parse_numeric(const std::string& s, std::size_t line_no, const std::string& col) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError("line " + std::to_string(line_no) + ": column '" + col +
                     "': not a number: '" + s + "'");
  return value;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

bool needs_quoting(const std::string& s) {
  return s.find(',') != std::string::npos || s.find('"') != std::string::npos ||
         s.find('\n') != std::string::npos;
}

std::string csv_escape(const std::string& s) {
  if (!needs_quoting(s)) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

}  // namespace

DatasetSchema schema_from_json_text(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("schema: invalid JSON: ") + e.what());
  }
  DatasetSchema schema;
  if (!j.contains("label") || !j["label"].is_string())
    throw SchemaError("schema: missing string field 'label'");
  schema.label = j["label"].get<std::string>();
  schema.id = j.value("id", std::string("dataset"));
  if (j.contains("columns")) {
    for (auto& [name, kind] : j["columns"].items()) {
      std::string k = kind.get<std::string>();
      if (k == "numeric") schema.column_kinds[name] = ColumnKind::numeric;
      else if (k == "categorical") schema.column_kinds[name] = ColumnKind::categorical;
      else throw SchemaError("schema: column '" + name + "': unknown kind '" + k + "'");
    }
  }
  if (j.contains("exclude")) schema.exclude = j["exclude"].get<std::vector<std::string>>();
  if (j.contains("label_values"))
    schema.label_values = j["label_values"].get<std::vector<std::string>>();
  return schema;
}

DatasetSchema load_schema(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw SchemaError("schema: cannot open " + json_path);
  std::stringstream buf;
  buf << in.rdbuf();
  return schema_from_json_text(buf.str());
}

int category_code(const ColumnMeta& column, const std::string& value) {
  for (std::size_t i = 0; i < column.categories.size(); ++i) {
    if (column.categories[i] == value) return static_cast<int>(i);
  }
  return static_cast<int>(column.categories.size());
}

Dataset load_dataset(const std::string& csv_path, const DatasetSchema& schema) {
  std::ifstream in(csv_path);
  if (!in) throw ParseError("cannot open " + csv_path);

  std::string line;
  if (!std::getline(in, line)) throw ParseError(csv_path + ": empty file");
  line = strip_cr(line);
  std::vector<std::string> header = split_csv_line(line, 1);

  Dataset ds;
  ds.id = schema.id;
  ds.label_name = schema.label;

  int label_col = -1;
  std::vector<int> feature_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (name == schema.label) {
      if (label_col >= 0) throw SchemaError("duplicate label column '" + name + "'");
      label_col = static_cast<int>(c);
      continue;
    }
    if (std::find(schema.exclude.begin(), schema.exclude.end(), name) != schema.exclude.end())
      continue;
    ColumnMeta meta;
    meta.name = name;
    auto it = schema.column_kinds.find(name);
    meta.kind = (it != schema.column_kinds.end()) ? it->second : ColumnKind::numeric;
    feature_cols.push_back(static_cast<int>(c));
    ds.columns.push_back(std::move(meta));
  }
  if (label_col < 0)
    throw SchemaError("label column '" + schema.label + "' not found in header");
  for (const auto& [name, kind] : schema.column_kinds) {
    (void)kind;
    if (std::find(header.begin(), header.end(), name) == header.end())
      throw SchemaError("schema column '" + name + "' not found in header");
  }

  // Dictionaries built per column in first-seen order.
  std::vector<std::unordered_map<std::string, int>> dicts(ds.columns.size());
  std::unordered_map<std::string, int> label_dict;
  if (schema.label_values) {
    for (const auto& v : *schema.label_values) {
      label_dict.emplace(v, static_cast<int>(ds.label_names.size()));
      ds.label_names.push_back(v);
    }
  }

  std::vector<double> cells;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line, line_no);
    if (fields.size() != header.size())
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));

    const std::string& label_value = fields[static_cast<std::size_t>(label_col)];
    auto lit = label_dict.find(label_value);
    if (lit == label_dict.end()) {
      if (schema.label_values)
        throw SchemaError("line " + std::to_string(line_no) + ": unknown label value '" +
                          label_value + "'");
      lit = label_dict.emplace(label_value, static_cast<int>(ds.label_names.size())).first;
      ds.label_names.push_back(label_value);
    }
    ds.labels.push_back(lit->second);

    for (std::size_t k = 0; k < ds.columns.size(); ++k) {
      const std::string& raw = fields[static_cast<std::size_t>(feature_cols[k])];
      if (ds.columns[k].kind == ColumnKind::numeric) {
        cells.push_back(parse_numeric(raw, line_no, ds.columns[k].name));
      } else {
        auto it = dicts[k].find(raw);
        if (it == dicts[k].end()) {
          it = dicts[k].emplace(raw, static_cast<int>(ds.columns[k].categories.size())).first;
          ds.columns[k].categories.push_back(raw);
        }
        cells.push_back(static_cast<double>(it->second));
      }
    }
  }

  if (ds.labels.empty()) throw ParseError(csv_path + ": no data rows");
  if (ds.label_names.size() < 2)
    throw SchemaError(csv_path + ": label column has fewer than two classes");

  ds.values.rows = ds.labels.size();
  ds.values.cols = ds.columns.size();
  ds.values.data = std::move(cells);
  return ds;
}

void write_dataset_csv(const Dataset& dataset, const std::string& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("cannot write " + csv_path);
  for (const auto& col : dataset.columns) out << csv_escape(col.name) << ",";
  out << csv_escape(dataset.label_name) << "\n";
  for (std::size_t r = 0; r < dataset.n(); ++r) {
    for (std::size_t c = 0; c < dataset.dim(); ++c) {
      double v = dataset.values.at(r, c);
      if (dataset.columns[c].kind == ColumnKind::numeric) {
        if (!std::isnan(v)) out << format_double(v);
      } else {
        out << csv_escape(dataset.columns[c].categories.at(static_cast<std::size_t>(v)));
      }
      out << ",";
    }
    out << csv_escape(dataset.label_names.at(static_cast<std::size_t>(dataset.labels[r]))) << "\n";
  }
}

}  // namespace perfband::tabular
