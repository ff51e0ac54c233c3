#ifndef BAYESNET_CORE_HPP_
#define BAYESNET_CORE_HPP_

// Discrete Bayesian-network building blocks: variables, DAG structure,
// multinomial parameter tables, datasets with missing entries, sufficient
// statistics and Dirichlet hyperparameter tables.
//
// Conventions used throughout the library:
//   * all indices are 0-based;
//   * parent configurations are mixed-radix encoded with the LAST listed
//     parent varying fastest;
//   * state order is declaration order, never lexicographic;
//   * probabilities are linear-domain; scores are log-domain.
//
// Every type here is immutable after construction and every free function is
// pure, so values can be shared freely across threads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bayesnet/error.hpp"

namespace bayesnet {

// A dataset entry whose value was not observed.
inline constexpr int kMissing = -1;

struct VariableSpec {
  std::string name;
  std::vector<std::string> states;  // at least two, unique

  int cardinality() const { return static_cast<int>(states.size()); }

  // Index of a state label, or UnknownState.
  int state_index(const std::string& label) const {
    for (std::size_t k = 0; k < states.size(); ++k) {
      if (states[k] == label) return static_cast<int>(k);
    }
    fail("UnknownState", "variable '" + name + "' has no state '" + label + "'");
  }

  bool operator==(const VariableSpec&) const = default;
};

namespace detail {

inline void check_variable_specs(const std::vector<VariableSpec>& vars) {
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const VariableSpec& v = vars[i];
    if (v.cardinality() < 2) {
      fail("InvalidVariable", "variable '" + v.name + "' needs at least 2 states");
    }
    for (std::size_t a = 0; a < v.states.size(); ++a) {
      for (std::size_t b = a + 1; b < v.states.size(); ++b) {
        if (v.states[a] == v.states[b]) {
          fail("InvalidVariable",
               "variable '" + v.name + "' repeats state '" + v.states[a] + "'");
        }
      }
    }
    for (std::size_t a = 0; a < i; ++a) {
      if (vars[a].name == v.name) {
        fail("DuplicateVariable", "variable '" + v.name + "' declared twice");
      }
    }
  }
}

}  // namespace detail

// Checks that the named parent lists describe a DAG over `variables` and
// returns a topological order of variable indices (parents before children).
// Ties are broken by declaration order, so the result is deterministic.
inline std::vector<int> validate_dag(const std::vector<VariableSpec>& variables,
                                     const std::vector<std::vector<std::string>>& parents) {
  detail::check_variable_specs(variables);
  const std::size_t n = variables.size();
  if (parents.size() != n) {
    fail("SchemaMismatch", "parent list count does not match variable count");
  }
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < n; ++i) index[variables[i].name] = static_cast<int>(i);

  std::vector<std::vector<int>> parent_idx(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const std::string& p : parents[i]) {
      auto it = index.find(p);
      if (it == index.end()) {
        fail("UnknownParent",
             "variable '" + variables[i].name + "' lists unknown parent '" + p + "'");
      }
      if (it->second == static_cast<int>(i)) {
        fail("CycleDetected", "self-loop on '" + variables[i].name + "'");
      }
      if (std::count(parent_idx[i].begin(), parent_idx[i].end(), it->second) > 0) {
        fail("UnknownParent",
             "variable '" + variables[i].name + "' repeats parent '" + p + "'");
      }
      parent_idx[i].push_back(it->second);
    }
  }

  // Kahn's algorithm; on failure, report one cycle by walking unresolved nodes.
  std::vector<int> remaining(n, 0);
  for (std::size_t i = 0; i < n; ++i) remaining[i] = static_cast<int>(parent_idx[i].size());
  std::vector<int> order;
  order.reserve(n);
  std::vector<bool> placed(n, false);
  for (;;) {
    int next = -1;
    for (std::size_t i = 0; i < n; ++i) {
      if (!placed[i] && remaining[i] == 0) {
        next = static_cast<int>(i);
        break;
      }
    }
    if (next < 0) break;
    placed[next] = true;
    order.push_back(next);
    for (std::size_t i = 0; i < n; ++i) {
      if (!placed[i]) {
        for (int p : parent_idx[i]) {
          if (p == next) --remaining[i];
        }
      }
    }
  }
  if (order.size() != n) {
    // Walk parent links among unplaced nodes until one repeats.
    int start = 0;
    while (placed[start]) ++start;
    std::vector<int> path;
    std::vector<int> seen(n, -1);
    int cur = start;
    while (seen[cur] < 0) {
      seen[cur] = static_cast<int>(path.size());
      path.push_back(cur);
      for (int p : parent_idx[cur]) {
        if (!placed[p]) {
          cur = p;
          break;
        }
      }
    }
    std::string cycle;
    for (std::size_t i = seen[cur]; i < path.size(); ++i) {
      cycle += variables[path[i]].name + " <- ";
    }
    cycle += variables[cur].name;
    fail("CycleDetected", cycle);
  }
  return order;
}

// A directed acyclic graph over named discrete variables.  Construction
// validates everything, so an instance is always a well-formed DAG.
class NetworkStructure {
 public:
  NetworkStructure(std::vector<VariableSpec> variables,
                   std::vector<std::vector<std::string>> parents)
      : variables_(std::move(variables)) {
    topo_order_ = validate_dag(variables_, parents);
    const std::size_t n = variables_.size();
    parent_idx_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (const std::string& p : parents[i]) parent_idx_[i].push_back(index_of(p));
    }
    q_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::int64_t q = 1;
      for (int p : parent_idx_[i]) q *= cardinality(p);
      q_[i] = q;
    }
  }

  std::size_t size() const { return variables_.size(); }
  const std::vector<VariableSpec>& variables() const { return variables_; }
  const VariableSpec& variable(int i) const { return variables_[i]; }
  const std::vector<int>& parents(int i) const { return parent_idx_[i]; }
  int cardinality(int i) const { return variables_[i].cardinality(); }
  std::int64_t config_count(int i) const { return q_[i]; }  // q_i (1 when no parents)
  const std::vector<int>& topological_order() const { return topo_order_; }

  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < variables_.size(); ++i) {
      if (variables_[i].name == name) return static_cast<int>(i);
    }
    fail("UnknownVariable", "no variable named '" + name + "'");
  }

  std::optional<int> find(const std::string& name) const {
    for (std::size_t i = 0; i < variables_.size(); ++i) {
      if (variables_[i].name == name) return static_cast<int>(i);
    }
    return std::nullopt;
  }

  bool has_arc(int parent, int child) const {
    const auto& ps = parent_idx_[child];
    return std::find(ps.begin(), ps.end(), parent) != ps.end();
  }

  std::vector<int> children(int i) const {
    std::vector<int> out;
    for (std::size_t c = 0; c < variables_.size(); ++c) {
      if (has_arc(i, static_cast<int>(c))) out.push_back(static_cast<int>(c));
    }
    return out;
  }

  std::size_t arc_count() const {
    std::size_t a = 0;
    for (const auto& ps : parent_idx_) a += ps.size();
    return a;
  }

  // Same variables (names, states, order); arcs may differ.
  bool same_variables(const NetworkStructure& other) const {
    return variables_ == other.variables_;
  }

  bool same_arcs(const NetworkStructure& other) const {
    if (!same_variables(other)) return false;
    for (std::size_t i = 0; i < size(); ++i) {
      std::vector<int> a = parent_idx_[i], b = other.parent_idx_[i];
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      if (a != b) return false;
    }
    return true;
  }

  std::vector<std::vector<std::string>> parent_names() const {
    std::vector<std::vector<std::string>> out(size());
    for (std::size_t i = 0; i < size(); ++i) {
      for (int p : parent_idx_[i]) out[i].push_back(variables_[p].name);
    }
    return out;
  }

 private:
  std::vector<VariableSpec> variables_;
  std::vector<std::vector<int>> parent_idx_;
  std::vector<std::int64_t> q_;
  std::vector<int> topo_order_;
};

// Mixed-radix parent-configuration index of variable i for the given row
// (full or partial assignment of state indices, kMissing for unobserved).
// The last listed parent varies fastest; no parents gives j = 0.
inline std::int64_t parent_config_index(const NetworkStructure& s, int i,
                                        std::span<const int> row) {
  std::int64_t j = 0;
  for (int p : s.parents(i)) {
    const int v = row[p];
    if (v == kMissing) {
      fail("MissingParentValue", "parent '" + s.variable(p).name + "' of '" +
                                     s.variable(i).name + "' is missing");
    }
    if (v < 0 || v >= s.cardinality(p)) {
      fail("UnknownState", "state index out of range for '" + s.variable(p).name + "'");
    }
    j = j * s.cardinality(p) + v;
  }
  return j;
}

// Inverse of parent_config_index: the parent states encoded by j, in the
// order the parents are listed.
inline std::vector<int> parent_config_states(const NetworkStructure& s, int i,
                                             std::int64_t j) {
  if (j < 0 || j >= s.config_count(i)) {
    fail("InvalidIndex", "parent configuration index out of range");
  }
  const auto& ps = s.parents(i);
  std::vector<int> states(ps.size());
  for (std::size_t t = ps.size(); t-- > 0;) {
    const int r = s.cardinality(ps[t]);
    states[t] = static_cast<int>(j % r);
    j /= r;
  }
  return states;
}

// Per-family multinomial parameters theta[i][j*r_i + k] = p(X_i = k | Pa_i = j).
class ParameterSet {
 public:
  static ParameterSet from_rows(const NetworkStructure& s,
                                std::vector<std::vector<double>> rows) {
    ParameterSet p;
    p.card_.resize(s.size());
    if (rows.size() != s.size()) fail("ShapeMismatch", "wrong family count");
    for (std::size_t i = 0; i < s.size(); ++i) {
      p.card_[i] = s.cardinality(static_cast<int>(i));
      const std::size_t want =
          static_cast<std::size_t>(s.config_count(static_cast<int>(i))) * p.card_[i];
      if (rows[i].size() != want) {
        fail("ShapeMismatch", "family '" + s.variable(static_cast<int>(i)).name +
                                  "' has the wrong number of parameters");
      }
      for (std::int64_t j = 0; j < s.config_count(static_cast<int>(i)); ++j) {
        double sum = 0.0;
        for (int k = 0; k < p.card_[i]; ++k) {
          const double v = rows[i][j * p.card_[i] + k];
          if (!(v >= 0.0)) {
            fail("InvalidParameter", "negative or NaN probability in family '" +
                                         s.variable(static_cast<int>(i)).name + "'");
          }
          sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
          fail("InvalidParameter", "row does not sum to 1 in family '" +
                                       s.variable(static_cast<int>(i)).name + "'");
        }
      }
    }
    p.cells_ = std::move(rows);
    return p;
  }

  static ParameterSet uniform(const NetworkStructure& s) {
    std::vector<std::vector<double>> rows(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      const int r = s.cardinality(static_cast<int>(i));
      rows[i].assign(static_cast<std::size_t>(s.config_count(static_cast<int>(i))) * r,
                     1.0 / r);
    }
    return from_rows(s, rows);
  }

  double theta(int i, std::int64_t j, int k) const {
    return cells_[i][j * card_[i] + k];
  }
  std::span<const double> row(int i, std::int64_t j) const {
    return {cells_[i].data() + j * card_[i], static_cast<std::size_t>(card_[i])};
  }
  const std::vector<std::vector<double>>& cells() const { return cells_; }

 private:
  std::vector<int> card_;
  std::vector<std::vector<double>> cells_;
};

// Ordered cases over named variables; entries are state indices or kMissing.
// Rows are resolved against the owning schema at construction, so every
// non-missing entry is a declared state.
class DataSet {
 public:
  DataSet(std::vector<VariableSpec> schema, std::vector<std::vector<int>> rows)
      : schema_(std::move(schema)), rows_(std::move(rows)) {
    detail::check_variable_specs(schema_);
    for (std::size_t l = 0; l < rows_.size(); ++l) {
      if (rows_[l].size() != schema_.size()) {
        fail("SchemaMismatch", "case " + std::to_string(l + 1) + " has " +
                                   std::to_string(rows_[l].size()) + " entries, expected " +
                                   std::to_string(schema_.size()));
      }
      for (std::size_t i = 0; i < schema_.size(); ++i) {
        const int v = rows_[l][i];
        if (v != kMissing && (v < 0 || v >= schema_[i].cardinality())) {
          fail("UnknownState", "case " + std::to_string(l + 1) + ", variable '" +
                                   schema_[i].name + "': state index out of range");
        }
      }
    }
  }

  // Convenience: rows given as state labels, `missing_marker` for gaps.
  static DataSet from_labels(std::vector<VariableSpec> schema,
                             const std::vector<std::vector<std::string>>& label_rows,
                             const std::string& missing_marker = "?") {
    std::vector<std::vector<int>> rows;
    rows.reserve(label_rows.size());
    for (std::size_t l = 0; l < label_rows.size(); ++l) {
      if (label_rows[l].size() != schema.size()) {
        fail("SchemaMismatch", "case " + std::to_string(l + 1) + " has " +
                                   std::to_string(label_rows[l].size()) +
                                   " entries, expected " + std::to_string(schema.size()));
      }
      std::vector<int> row(schema.size());
      for (std::size_t i = 0; i < schema.size(); ++i) {
        const std::string& label = label_rows[l][i];
        row[i] = (label == missing_marker) ? kMissing : schema[i].state_index(label);
      }
      rows.push_back(std::move(row));
    }
    return DataSet(std::move(schema), std::move(rows));
  }

  const std::vector<VariableSpec>& schema() const { return schema_; }
  std::size_t case_count() const { return rows_.size(); }
  const std::vector<int>& row(std::size_t l) const { return rows_[l]; }
  const std::vector<std::vector<int>>& rows() const { return rows_; }

  bool complete() const {
    for (const auto& r : rows_) {
      for (int v : r) {
        if (v == kMissing) return false;
      }
    }
    return true;
  }

  // Column permutation mapping structure variable order onto dataset columns.
  // Variables must match by name with identical state lists (SchemaMismatch
  // otherwise); column order may differ.
  std::vector<int> align_to(const NetworkStructure& s) const {
    if (s.size() != schema_.size()) {
      fail("SchemaMismatch", "dataset has " + std::to_string(schema_.size()) +
                                 " variables, network has " + std::to_string(s.size()));
    }
    std::vector<int> col(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      const VariableSpec& v = s.variable(static_cast<int>(i));
      int found = -1;
      for (std::size_t c = 0; c < schema_.size(); ++c) {
        if (schema_[c].name == v.name) {
          found = static_cast<int>(c);
          break;
        }
      }
      if (found < 0) fail("SchemaMismatch", "dataset is missing variable '" + v.name + "'");
      if (schema_[found].states != v.states) {
        fail("SchemaMismatch", "state lists differ for variable '" + v.name + "'");
      }
      col[i] = found;
    }
    return col;
  }

  // Case l reordered into the structure's variable order.
  std::vector<int> aligned_row(std::span<const int> col, std::size_t l) const {
    std::vector<int> out(col.size());
    for (std::size_t i = 0; i < col.size(); ++i) out[i] = rows_[l][col[i]];
    return out;
  }

 private:
  std::vector<VariableSpec> schema_;
  std::vector<std::vector<int>> rows_;
};

// Sufficient statistics N_ijk for a structure: counts[i][j*r_i + k].
class FamilyCounts {
 public:
  explicit FamilyCounts(const NetworkStructure& s) : card_(s.size()) {
    cells_.resize(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      card_[i] = s.cardinality(static_cast<int>(i));
      cells_[i].assign(
          static_cast<std::size_t>(s.config_count(static_cast<int>(i))) * card_[i], 0);
    }
  }

  std::int64_t count(int i, std::int64_t j, int k) const {
    return cells_[i][j * card_[i] + k];
  }
  std::int64_t& count(int i, std::int64_t j, int k) { return cells_[i][j * card_[i] + k]; }

  std::int64_t row_total(int i, std::int64_t j) const {  // N_ij
    std::int64_t t = 0;
    for (int k = 0; k < card_[i]; ++k) t += count(i, j, k);
    return t;
  }

  std::span<const std::int64_t> row(int i, std::int64_t j) const {
    return {cells_[i].data() + j * card_[i], static_cast<std::size_t>(card_[i])};
  }

  std::size_t family_count() const { return cells_.size(); }
  std::int64_t config_count(int i) const {
    return static_cast<std::int64_t>(cells_[i].size()) / card_[i];
  }
  int cardinality(int i) const { return card_[i]; }

  bool shape_matches(const NetworkStructure& s) const {
    if (s.size() != cells_.size()) return false;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      if (card_[i] != s.cardinality(static_cast<int>(i))) return false;
      if (config_count(static_cast<int>(i)) != s.config_count(static_cast<int>(i)))
        return false;
    }
    return true;
  }

 private:
  std::vector<int> card_;
  std::vector<std::vector<std::int64_t>> cells_;
};

// Dirichlet hyperparameters alpha_ijk > 0, aligned with a structure.  The
// minimum-information limit alpha -> 0 is not representable; callers wanting
// it supply their own small epsilon.
class DirichletSpec {
 public:
  static DirichletSpec from_cells(const NetworkStructure& s,
                                  std::vector<std::vector<double>> cells) {
    DirichletSpec d;
    d.card_.resize(s.size());
    if (cells.size() != s.size()) fail("ShapeMismatch", "wrong family count");
    for (std::size_t i = 0; i < s.size(); ++i) {
      d.card_[i] = s.cardinality(static_cast<int>(i));
      const std::size_t want =
          static_cast<std::size_t>(s.config_count(static_cast<int>(i))) * d.card_[i];
      if (cells[i].size() != want) {
        fail("ShapeMismatch", "family '" + s.variable(static_cast<int>(i)).name +
                                  "' has the wrong number of hyperparameters");
      }
      for (double a : cells[i]) {
        if (!(a > 0.0)) {
          fail("NonPositiveAlpha", "hyperparameters must be strictly positive (family '" +
                                       s.variable(static_cast<int>(i)).name + "')");
        }
      }
    }
    d.cells_ = std::move(cells);
    return d;
  }

  // Shape carried by explicit cardinalities instead of a structure; used when
  // deriving one spec from another.
  static DirichletSpec from_cells_with_cardinalities(std::vector<int> card,
                                                     std::vector<std::vector<double>> cells) {
    DirichletSpec d;
    if (card.size() != cells.size()) fail("ShapeMismatch", "wrong family count");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (card[i] < 2 || cells[i].size() % card[i] != 0) {
        fail("ShapeMismatch", "family " + std::to_string(i) + " has a malformed table");
      }
      for (double a : cells[i]) {
        if (!(a > 0.0)) fail("NonPositiveAlpha", "hyperparameters must be strictly positive");
      }
    }
    d.card_ = std::move(card);
    d.cells_ = std::move(cells);
    return d;
  }

  // alpha_ijk = value for every cell (e.g. the classic all-ones prior).
  static DirichletSpec constant(const NetworkStructure& s, double value) {
    std::vector<std::vector<double>> cells(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      cells[i].assign(static_cast<std::size_t>(s.config_count(static_cast<int>(i))) *
                          s.cardinality(static_cast<int>(i)),
                      value);
    }
    return from_cells(s, cells);
  }

  double alpha(int i, std::int64_t j, int k) const { return cells_[i][j * card_[i] + k]; }
  double& alpha_mut(int i, std::int64_t j, int k) { return cells_[i][j * card_[i] + k]; }

  double row_total(int i, std::int64_t j) const {  // alpha_ij
    double t = 0.0;
    for (int k = 0; k < card_[i]; ++k) t += alpha(i, j, k);
    return t;
  }

  std::span<const double> row(int i, std::int64_t j) const {
    return {cells_[i].data() + j * card_[i], static_cast<std::size_t>(card_[i])};
  }

  std::size_t family_count() const { return cells_.size(); }
  std::int64_t config_count(int i) const {
    return static_cast<std::int64_t>(cells_[i].size()) / card_[i];
  }
  int cardinality(int i) const { return card_[i]; }

  bool shape_matches(const FamilyCounts& c) const {
    if (c.family_count() != cells_.size()) return false;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      if (card_[i] != c.cardinality(static_cast<int>(i))) return false;
      if (config_count(static_cast<int>(i)) != c.config_count(static_cast<int>(i)))
        return false;
    }
    return true;
  }

  bool shape_matches(const NetworkStructure& s) const {
    if (s.size() != cells_.size()) return false;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      if (card_[i] != s.cardinality(static_cast<int>(i))) return false;
      if (config_count(static_cast<int>(i)) != s.config_count(static_cast<int>(i)))
        return false;
    }
    return true;
  }

 private:
  std::vector<int> card_;
  std::vector<std::vector<double>> cells_;
};

// N_ijk over a complete dataset.  IncompleteData directs callers with missing
// entries to the EM/Gibbs routines instead.
inline FamilyCounts count_sufficient_stats(const NetworkStructure& s, const DataSet& data) {
  const std::vector<int> col = data.align_to(s);
  FamilyCounts counts(s);
  for (std::size_t l = 0; l < data.case_count(); ++l) {
    const std::vector<int> row = data.aligned_row(col, l);
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (row[i] == kMissing) {
        fail("IncompleteData", "case " + std::to_string(l + 1) + " has a missing entry for '" +
                                   s.variable(static_cast<int>(i)).name +
                                   "'; complete-data counting requires fully observed "
                                   "cases (use the EM or Gibbs routines)");
      }
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::int64_t j = parent_config_index(s, static_cast<int>(i), row);
      ++counts.count(static_cast<int>(i), j, row[i]);
    }
  }
  return counts;
}

// Joint probability of a full assignment: the product of the n local
// conditionals selected by the row.
inline double joint_probability(const NetworkStructure& s, const ParameterSet& params,
                                std::span<const int> row) {
  if (row.size() != s.size()) fail("SchemaMismatch", "assignment width mismatch");
  double p = 1.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (row[i] == kMissing) {
      fail("MissingValue", "assignment is missing '" + s.variable(static_cast<int>(i)).name + "'");
    }
    if (row[i] < 0 || row[i] >= s.cardinality(static_cast<int>(i))) {
      fail("UnknownState", "state index out of range for '" +
                               s.variable(static_cast<int>(i)).name + "'");
    }
    const std::int64_t j = parent_config_index(s, static_cast<int>(i), row);
    p *= params.theta(static_cast<int>(i), j, row[i]);
  }
  return p;
}

// Iterates all full assignments over the structure's variables in mixed-radix
// order (last variable fastest).  Row is reused between calls.
class AssignmentRange {
 public:
  explicit AssignmentRange(const NetworkStructure& s) : s_(s), row_(s.size(), 0) {}

  std::int64_t total() const {
    std::int64_t t = 1;
    for (std::size_t i = 0; i < s_.size(); ++i) t *= s_.cardinality(static_cast<int>(i));
    return t;
  }

  const std::vector<int>& row() const { return row_; }

  bool advance() {
    for (std::size_t i = s_.size(); i-- > 0;) {
      if (++row_[i] < s_.cardinality(static_cast<int>(i))) return true;
      row_[i] = 0;
    }
    return false;
  }

 private:
  const NetworkStructure& s_;
  std::vector<int> row_;
};

}  // namespace bayesnet

#endif  // BAYESNET_CORE_HPP_
