#ifndef BAYESNET_IO_HPP_
#define BAYESNET_IO_HPP_

// Persistence and ingestion:
//   * network documents: JSON with a fixed field order on save, so golden
//     files diff cleanly and load(save(x)) round-trips bit-identically;
//   * CSV datasets: UTF-8, comma separated, header row, "?" for missing
//     entries (marker configurable);
//   * counts tables: a header block declaring variables and states followed
//     by whitespace-separated counts in row-major order with the last
//     variable varying fastest, expanded into individual cases;
//   * DOT export of the structure (no CPTs).

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "bayesnet/core.hpp"
#include "bayesnet/error.hpp"

namespace bayesnet {

// In-memory form of the persisted network: structure plus optional CPTs.
struct NetworkDocument {
  NetworkStructure structure;
  std::optional<ParameterSet> params;
};

namespace detail {

inline nlohmann::ordered_json document_to_json(const NetworkDocument& doc) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["variables"] = nlohmann::ordered_json::array();
  const NetworkStructure& s = doc.structure;
  for (std::size_t i = 0; i < s.size(); ++i) {
    nlohmann::ordered_json v;
    v["name"] = s.variable(static_cast<int>(i)).name;
    v["states"] = s.variable(static_cast<int>(i)).states;
    j["variables"].push_back(v);
  }
  j["arcs"] = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < s.size(); ++c) {
    for (int p : s.parents(static_cast<int>(c))) {
      j["arcs"].push_back({s.variable(p).name, s.variable(static_cast<int>(c)).name});
    }
  }
  if (doc.params) {
    nlohmann::ordered_json cpt;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const int r = s.cardinality(static_cast<int>(i));
      nlohmann::ordered_json rows = nlohmann::ordered_json::array();
      for (std::int64_t q = 0; q < s.config_count(static_cast<int>(i)); ++q) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (int k = 0; k < r; ++k) row.push_back(doc.params->theta(static_cast<int>(i), q, k));
        rows.push_back(row);
      }
      cpt[s.variable(static_cast<int>(i)).name] = rows;
    }
    j["cpt"] = cpt;
  }
  return j;
}

}  // namespace detail

inline std::string save_network_string(const NetworkDocument& doc) {
  return detail::document_to_json(doc).dump(2) + "\n";
}

inline void save_network(const std::string& path, const NetworkDocument& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("ParseError", "cannot open '" + path + "' for writing");
  out << save_network_string(doc);
}

inline NetworkDocument load_network_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail("ParseError", e.what());
  }
  try {
    std::vector<VariableSpec> variables;
    for (const auto& v : j.at("variables")) {
      variables.push_back({v.at("name").get<std::string>(),
                           v.at("states").get<std::vector<std::string>>()});
    }
    std::vector<std::vector<std::string>> parents(variables.size());
    if (j.contains("arcs")) {
      for (const auto& arc : j.at("arcs")) {
        const std::string p = arc.at(0).get<std::string>();
        const std::string c = arc.at(1).get<std::string>();
        bool found = false;
        for (std::size_t i = 0; i < variables.size(); ++i) {
          if (variables[i].name == c) {
            parents[i].push_back(p);
            found = true;
            break;
          }
        }
        if (!found) fail("InvariantViolation", "UnknownParent: arc into undeclared '" + c + "'");
      }
    }
    NetworkStructure structure(variables, parents);

    std::optional<ParameterSet> params;
    if (j.contains("cpt")) {
      std::vector<std::vector<double>> rows(structure.size());
      for (std::size_t i = 0; i < structure.size(); ++i) {
        const std::string& name = structure.variable(static_cast<int>(i)).name;
        if (!j.at("cpt").contains(name)) {
          fail("InvariantViolation", "cpt block is missing variable '" + name + "'");
        }
        const auto table = j.at("cpt").at(name).get<std::vector<std::vector<double>>>();
        if (static_cast<std::int64_t>(table.size()) !=
            structure.config_count(static_cast<int>(i))) {
          fail("InvariantViolation", "cpt for '" + name + "' has " +
                                         std::to_string(table.size()) + " rows, expected " +
                                         std::to_string(structure.config_count(
                                             static_cast<int>(i))));
        }
        for (const auto& row : table) {
          if (static_cast<int>(row.size()) != structure.cardinality(static_cast<int>(i))) {
            fail("InvariantViolation", "cpt row width mismatch for '" + name + "'");
          }
          rows[i].insert(rows[i].end(), row.begin(), row.end());
        }
      }
      params = ParameterSet::from_rows(structure, rows);
    }
    return NetworkDocument{std::move(structure), std::move(params)};
  } catch (const Error& e) {
    if (e.code() == "ParseError" || e.code() == "InvariantViolation") throw;
    fail("InvariantViolation", e.what());  // e.what() already carries the inner code
  } catch (const nlohmann::json::exception& e) {
    fail("ParseError", e.what());
  }
}

inline NetworkDocument load_network(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("ParseError", "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_network_string(buf.str());
}

// ---------------------------------------------------------------------------
// CSV datasets
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field += ch;
    }
  }
  fields.push_back(field);
  return fields;
}

}  // namespace detail

// Loads a comma-separated dataset whose header must list exactly the schema's
// variable names (any order).  `missing_marker` entries become kMissing;
// anything else must be a declared state of its column.
inline DataSet load_csv_string(const std::string& text, const std::vector<VariableSpec>& schema,
                               const std::string& missing_marker = "?") {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail("ParseError", "line 1: missing header row");
  const std::vector<std::string> header = detail::split_csv_line(line);
  if (header.size() != schema.size()) {
    fail("SchemaMismatch", "header has " + std::to_string(header.size()) +
                               " columns, schema declares " + std::to_string(schema.size()));
  }
  std::vector<VariableSpec> columns;
  for (const std::string& name : header) {
    bool found = false;
    for (const VariableSpec& v : schema) {
      if (v.name == name) {
        columns.push_back(v);
        found = true;
        break;
      }
    }
    if (!found) fail("SchemaMismatch", "header column '" + name + "' is not in the schema");
  }

  std::vector<std::vector<int>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = detail::split_csv_line(line);
    if (fields.size() != columns.size()) {
      fail("ParseError", "line " + std::to_string(line_no) + ": expected " +
                             std::to_string(columns.size()) + " fields, found " +
                             std::to_string(fields.size()));
    }
    std::vector<int> row(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (fields[c] == missing_marker) {
        row[c] = kMissing;
        continue;
      }
      bool found = false;
      for (std::size_t k = 0; k < columns[c].states.size(); ++k) {
        if (columns[c].states[k] == fields[c]) {
          row[c] = static_cast<int>(k);
          found = true;
          break;
        }
      }
      if (!found) {
        fail("UnknownState", "line " + std::to_string(line_no) + ", column '" +
                                 columns[c].name + "': '" + fields[c] +
                                 "' is not a declared state");
      }
    }
    rows.push_back(std::move(row));
  }
  return DataSet(columns, rows);
}

inline DataSet load_csv(const std::string& path, const std::vector<VariableSpec>& schema,
                        const std::string& missing_marker = "?") {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("ParseError", "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_csv_string(buf.str(), schema, missing_marker);
}

inline std::string save_csv_string(const DataSet& data, const std::string& missing_marker = "?") {
  std::ostringstream out;
  const auto& schema = data.schema();
  for (std::size_t c = 0; c < schema.size(); ++c) {
    out << (c ? "," : "") << schema[c].name;
  }
  out << "\n";
  for (std::size_t l = 0; l < data.case_count(); ++l) {
    const auto& row = data.row(l);
    for (std::size_t c = 0; c < schema.size(); ++c) {
      out << (c ? "," : "")
          << (row[c] == kMissing ? missing_marker : schema[c].states[row[c]]);
    }
    out << "\n";
  }
  return out.str();
}

inline void save_csv(const std::string& path, const DataSet& data,
                     const std::string& missing_marker = "?") {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("ParseError", "cannot open '" + path + "' for writing");
  out << save_csv_string(data, missing_marker);
}

// ---------------------------------------------------------------------------
// Counts tables
// ---------------------------------------------------------------------------

// Declares the variable order and states of a flattened contingency table.
// The count sequence is row-major with the LAST variable varying fastest.
struct CountsTableSpec {
  std::vector<VariableSpec> variables;

  std::int64_t cell_count() const {
    std::int64_t total = 1;
    for (const VariableSpec& v : variables) total *= v.cardinality();
    return total;
  }
};

// Expands the flat table into one case per observation; the dataset's case
// count equals the table's grand total.
inline DataSet expand_counts(const CountsTableSpec& spec,
                             const std::vector<std::int64_t>& counts) {
  detail::check_variable_specs(spec.variables);
  if (static_cast<std::int64_t>(counts.size()) != spec.cell_count()) {
    fail("LengthMismatch", "table has " + std::to_string(counts.size()) +
                               " entries, expected " + std::to_string(spec.cell_count()));
  }
  std::vector<std::vector<int>> rows;
  std::vector<int> config(spec.variables.size(), 0);
  for (std::int64_t cell = 0; cell < spec.cell_count(); ++cell) {
    const std::int64_t c = counts[cell];
    if (c < 0) fail("NegativeCount", "cell " + std::to_string(cell) + " is negative");
    for (std::int64_t rep = 0; rep < c; ++rep) rows.push_back(config);
    for (std::size_t t = spec.variables.size(); t-- > 0;) {
      if (++config[t] < spec.variables[t].cardinality()) break;
      config[t] = 0;
    }
  }
  return DataSet(spec.variables, rows);
}

// Text format: any number of lines
//     var NAME STATE STATE...
// followed by a line `counts` and whitespace-separated integers.  `#` starts
// a comment.
inline std::pair<CountsTableSpec, std::vector<std::int64_t>> load_counts_table_string(
    const std::string& text) {
  std::istringstream in(text);
  std::string line;
  CountsTableSpec spec;
  int line_no = 0;
  bool in_counts = false;
  std::vector<std::int64_t> counts;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first)) continue;
    if (!in_counts) {
      if (first == "var") {
        VariableSpec v;
        if (!(fields >> v.name)) {
          fail("ParseError", "line " + std::to_string(line_no) + ": var needs a name");
        }
        std::string state;
        while (fields >> state) v.states.push_back(state);
        if (v.cardinality() < 2) {
          fail("ParseError", "line " + std::to_string(line_no) + ": variable '" + v.name +
                                 "' needs at least 2 states");
        }
        spec.variables.push_back(std::move(v));
      } else if (first == "counts") {
        in_counts = true;
      } else {
        fail("ParseError", "line " + std::to_string(line_no) + ": expected 'var' or 'counts'");
      }
    } else {
      std::istringstream nums(line);
      std::string token;
      while (nums >> token) {
        try {
          std::size_t used = 0;
          const long long v = std::stoll(token, &used);
          if (used != token.size()) throw std::invalid_argument(token);
          counts.push_back(v);
        } catch (const std::exception&) {
          fail("ParseError",
               "line " + std::to_string(line_no) + ": '" + token + "' is not an integer");
        }
      }
    }
  }
  if (spec.variables.empty()) fail("ParseError", "no variables declared");
  if (!in_counts) fail("ParseError", "missing 'counts' section");
  return {std::move(spec), std::move(counts)};
}

inline DataSet load_counts_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("ParseError", "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  auto [spec, counts] = load_counts_table_string(buf.str());
  return expand_counts(spec, counts);
}

// ---------------------------------------------------------------------------
// DOT export (structure only)
// ---------------------------------------------------------------------------

inline std::string export_dot(const NetworkStructure& s) {
  std::ostringstream out;
  out << "digraph network {\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << "  \"" << s.variable(static_cast<int>(i)).name << "\";\n";
  }
  for (std::size_t c = 0; c < s.size(); ++c) {
    for (int p : s.parents(static_cast<int>(c))) {
      out << "  \"" << s.variable(p).name << "\" -> \""
          << s.variable(static_cast<int>(c)).name << "\";\n";
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace bayesnet

#endif  // BAYESNET_IO_HPP_
