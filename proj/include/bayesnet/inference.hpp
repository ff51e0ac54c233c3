#ifndef BAYESNET_INFERENCE_HPP_
#define BAYESNET_INFERENCE_HPP_

// Exact conditional queries on a parameterized network.  Queries run variable
// elimination after pruning barren variables; the elimination order is
// min-degree with a lexicographic (variable name) tie-break, which keeps
// results deterministic.  Everything here is pure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "bayesnet/core.hpp"
#include "bayesnet/error.hpp"

namespace bayesnet {

// Observed variable -> observed state label.  A variable appears at most once.
class Evidence {
 public:
  Evidence() = default;
  explicit Evidence(std::map<std::string, std::string> values)
      : values_(std::move(values)) {}

  void set(const std::string& variable, const std::string& state) {
    if (values_.count(variable)) {
      fail("DuplicateEvidence", "variable '" + variable + "' observed twice");
    }
    values_[variable] = state;
  }

  const std::map<std::string, std::string>& values() const { return values_; }
  bool empty() const { return values_.empty(); }

  // Partial row of state indices in structure order, kMissing elsewhere.
  std::vector<int> to_row(const NetworkStructure& s) const {
    std::vector<int> row(s.size(), kMissing);
    for (const auto& [name, state] : values_) {
      const int i = s.index_of(name);
      row[i] = s.variable(i).state_index(state);
    }
    return row;
  }

 private:
  std::map<std::string, std::string> values_;
};

// Exact conditional distribution over the target variables.  The table is
// mixed-radix indexed over targets in the order given, last target fastest.
struct QueryResult {
  std::vector<std::string> targets;
  std::vector<int> target_index;        // structure indices of targets
  std::vector<int> target_cardinality;  // r for each target
  std::vector<double> table;            // normalized, sums to 1
  double evidence_probability = 1.0;    // p(evidence)

  double at(std::span<const int> target_states) const {
    std::size_t idx = 0;
    for (std::size_t t = 0; t < target_cardinality.size(); ++t) {
      idx = idx * target_cardinality[t] + target_states[t];
    }
    return table[idx];
  }
};

namespace detail {

// A factor over a set of structure variable indices; values mixed-radix
// indexed with the last scope variable varying fastest.
struct Factor {
  std::vector<int> scope;  // ascending structure indices
  std::vector<int> card;
  std::vector<double> values;

  static Factor unit() { return Factor{{}, {}, {1.0}}; }
};

inline Factor multiply(const Factor& a, const Factor& b) {
  Factor out;
  {
    std::set<int> scope(a.scope.begin(), a.scope.end());
    scope.insert(b.scope.begin(), b.scope.end());
    out.scope.assign(scope.begin(), scope.end());
  }
  out.card.resize(out.scope.size());
  std::map<int, int> pos;
  for (std::size_t t = 0; t < out.scope.size(); ++t) pos[out.scope[t]] = static_cast<int>(t);
  for (std::size_t t = 0; t < a.scope.size(); ++t) out.card[pos[a.scope[t]]] = a.card[t];
  for (std::size_t t = 0; t < b.scope.size(); ++t) out.card[pos[b.scope[t]]] = b.card[t];

  std::int64_t total = 1;
  for (int c : out.card) total *= c;
  out.values.assign(total, 0.0);

  std::vector<int> state(out.scope.size(), 0);
  std::vector<int> apos(a.scope.size()), bpos(b.scope.size());
  for (std::size_t t = 0; t < a.scope.size(); ++t) apos[t] = pos[a.scope[t]];
  for (std::size_t t = 0; t < b.scope.size(); ++t) bpos[t] = pos[b.scope[t]];
  for (std::int64_t idx = 0; idx < total; ++idx) {
    std::int64_t ia = 0, ib = 0;
    for (std::size_t t = 0; t < apos.size(); ++t) ia = ia * a.card[t] + state[apos[t]];
    for (std::size_t t = 0; t < bpos.size(); ++t) ib = ib * b.card[t] + state[bpos[t]];
    out.values[idx] = a.values[ia] * b.values[ib];
    for (std::size_t t = out.scope.size(); t-- > 0;) {
      if (++state[t] < out.card[t]) break;
      state[t] = 0;
    }
  }
  return out;
}

inline Factor sum_out(const Factor& f, int var) {
  auto it = std::find(f.scope.begin(), f.scope.end(), var);
  if (it == f.scope.end()) return f;
  const std::size_t d = static_cast<std::size_t>(it - f.scope.begin());

  Factor out;
  out.scope = f.scope;
  out.scope.erase(out.scope.begin() + d);
  out.card = f.card;
  const int rd = out.card[d];
  out.card.erase(out.card.begin() + d);

  std::int64_t total = 1;
  for (int c : out.card) total *= c;
  out.values.assign(total, 0.0);

  std::int64_t inner = 1;  // stride of `var` in f
  for (std::size_t t = d + 1; t < f.card.size(); ++t) inner *= f.card[t];

  for (std::int64_t o = 0; o < total; ++o) {
    const std::int64_t high = o / inner, low = o % inner;
    const std::int64_t base = high * inner * rd + low;
    double sum = 0.0;
    for (int k = 0; k < rd; ++k) sum += f.values[base + k * inner];
    out.values[o] = sum;
  }
  return out;
}

// CPT of family i restricted by the evidence row (kMissing = unobserved).
// Scope keeps only unobserved variables.
inline Factor family_factor(const NetworkStructure& s, const ParameterSet& params, int i,
                            std::span<const int> evidence_row) {
  std::vector<int> members = s.parents(i);
  members.push_back(i);

  Factor f;
  for (int m : members) {
    if (evidence_row[m] == kMissing) f.scope.push_back(m);
  }
  std::sort(f.scope.begin(), f.scope.end());
  f.scope.erase(std::unique(f.scope.begin(), f.scope.end()), f.scope.end());
  f.card.resize(f.scope.size());
  for (std::size_t t = 0; t < f.scope.size(); ++t) f.card[t] = s.cardinality(f.scope[t]);

  std::int64_t total = 1;
  for (int c : f.card) total *= c;
  f.values.assign(total, 0.0);

  std::vector<int> row(s.size(), kMissing);
  for (std::size_t m = 0; m < s.size(); ++m) row[m] = evidence_row[m];
  std::vector<int> state(f.scope.size(), 0);
  for (std::int64_t idx = 0; idx < total; ++idx) {
    for (std::size_t t = 0; t < f.scope.size(); ++t) row[f.scope[t]] = state[t];
    const std::int64_t j = parent_config_index(s, i, row);
    f.values[idx] = params.theta(i, j, row[i]);
    for (std::size_t t = f.scope.size(); t-- > 0;) {
      if (++state[t] < f.card[t]) break;
      state[t] = 0;
    }
  }
  return f;
}

// Variables whose factors are relevant to `kept`: iteratively drop leaves
// outside the kept set (their CPTs sum to one and cannot change the answer).
inline std::vector<bool> barren_pruned(const NetworkStructure& s,
                                       const std::vector<bool>& kept) {
  std::vector<bool> active(s.size(), true);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!active[i] || kept[i]) continue;
      bool leaf = true;
      for (std::size_t c = 0; c < s.size(); ++c) {
        if (active[c] && s.has_arc(static_cast<int>(i), static_cast<int>(c))) {
          leaf = false;
          break;
        }
      }
      if (leaf) {
        active[i] = false;
        changed = true;
      }
    }
  }
  return active;
}

// Unnormalized joint factor over `target_idx` given the evidence row.  The
// values sum to p(evidence).
inline Factor eliminate(const NetworkStructure& s, const ParameterSet& params,
                        const std::vector<int>& target_idx,
                        std::span<const int> evidence_row) {
  std::vector<bool> kept(s.size(), false);
  for (int t : target_idx) kept[t] = true;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (evidence_row[i] != kMissing) kept[i] = true;
  }
  const std::vector<bool> active = barren_pruned(s, kept);

  std::vector<Factor> factors;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (active[i]) factors.push_back(family_factor(s, params, static_cast<int>(i), evidence_row));
  }

  std::set<int> to_eliminate;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (active[i] && evidence_row[i] == kMissing &&
        std::find(target_idx.begin(), target_idx.end(), static_cast<int>(i)) ==
            target_idx.end()) {
      to_eliminate.insert(static_cast<int>(i));
    }
  }

  while (!to_eliminate.empty()) {
    // Min-degree: fewest distinct neighbours across factors mentioning the
    // variable; ties broken by variable name.
    int best = -1;
    std::size_t best_degree = 0;
    for (int v : to_eliminate) {
      std::set<int> neighbours;
      for (const Factor& f : factors) {
        if (std::find(f.scope.begin(), f.scope.end(), v) != f.scope.end()) {
          neighbours.insert(f.scope.begin(), f.scope.end());
        }
      }
      neighbours.erase(v);
      const std::size_t degree = neighbours.size();
      if (best < 0 || degree < best_degree ||
          (degree == best_degree && s.variable(v).name < s.variable(best).name)) {
        best = v;
        best_degree = degree;
      }
    }

    Factor product = Factor::unit();
    std::vector<Factor> rest;
    for (Factor& f : factors) {
      if (std::find(f.scope.begin(), f.scope.end(), best) != f.scope.end()) {
        product = multiply(product, f);
      } else {
        rest.push_back(std::move(f));
      }
    }
    rest.push_back(sum_out(product, best));
    factors = std::move(rest);
    to_eliminate.erase(best);
  }

  Factor joint = Factor::unit();
  for (const Factor& f : factors) joint = multiply(joint, f);
  return joint;
}

}  // namespace detail

// Exact p(targets | evidence).  Matches full-joint enumeration to 1e-10 by
// construction (both are exact); ZeroEvidenceProbability when the evidence
// has probability zero.
inline QueryResult query(const NetworkStructure& s, const ParameterSet& params,
                         const std::vector<std::string>& targets, const Evidence& evidence) {
  if (targets.empty()) fail("InvalidQuery", "at least one target variable is required");
  const std::vector<int> evidence_row = evidence.to_row(s);

  QueryResult result;
  result.targets = targets;
  for (const std::string& t : targets) {
    const int i = s.index_of(t);
    if (evidence_row[i] != kMissing) {
      fail("OverlapTargetEvidence", "'" + t + "' is both target and evidence");
    }
    if (std::count(result.target_index.begin(), result.target_index.end(), i) > 0) {
      fail("InvalidQuery", "target '" + t + "' repeated");
    }
    result.target_index.push_back(i);
    result.target_cardinality.push_back(s.cardinality(i));
  }

  const detail::Factor joint =
      detail::eliminate(s, params, result.target_index, evidence_row);

  double z = 0.0;
  for (double v : joint.values) z += v;
  if (!(z > 0.0)) {
    fail("ZeroEvidenceProbability", "the observed evidence has probability 0");
  }
  result.evidence_probability = z;

  // Reorder the ascending-scope joint into the caller's target order.
  std::int64_t total = 1;
  for (int c : result.target_cardinality) total *= c;
  result.table.assign(total, 0.0);
  std::vector<int> scope_pos(result.target_index.size());
  for (std::size_t t = 0; t < result.target_index.size(); ++t) {
    const auto it =
        std::find(joint.scope.begin(), joint.scope.end(), result.target_index[t]);
    scope_pos[t] = static_cast<int>(it - joint.scope.begin());
  }
  std::vector<int> state(joint.scope.size(), 0);
  for (std::int64_t idx = 0; idx < static_cast<std::int64_t>(joint.values.size()); ++idx) {
    std::int64_t out_idx = 0;
    for (std::size_t t = 0; t < scope_pos.size(); ++t) {
      out_idx = out_idx * result.target_cardinality[t] + state[scope_pos[t]];
    }
    result.table[out_idx] = joint.values[idx] / z;
    for (std::size_t t = joint.scope.size(); t-- > 0;) {
      if (++state[t] < joint.card[t]) break;
      state[t] = 0;
    }
  }
  return result;
}

// Per-family joint posteriors p(x_i^k, pa_i^j | observed part of the case),
// one table per family, each summing to one.  When X_i and all its parents
// are observed the family's table is an indicator.  This is the quantity the
// EM expectation step accumulates.
//
// The case row uses structure variable order with kMissing for gaps.
class FamilyPosteriors {
 public:
  FamilyPosteriors(const NetworkStructure& s, std::vector<std::vector<double>> tables)
      : card_(s.size()), tables_(std::move(tables)) {
    for (std::size_t i = 0; i < s.size(); ++i) card_[i] = s.cardinality(static_cast<int>(i));
  }

  double at(int i, std::int64_t j, int k) const { return tables_[i][j * card_[i] + k]; }
  const std::vector<std::vector<double>>& tables() const { return tables_; }

 private:
  std::vector<int> card_;
  std::vector<std::vector<double>> tables_;
};

inline FamilyPosteriors family_posteriors(const NetworkStructure& s,
                                          const ParameterSet& params,
                                          std::span<const int> case_row) {
  if (case_row.size() != s.size()) fail("SchemaMismatch", "case width mismatch");

  // One upfront zero-probability check for the observed part.
  {
    std::vector<int> none;
    // eliminate() with no targets yields a scalar factor equal to p(evidence).
    const detail::Factor f = detail::eliminate(s, params, none, case_row);
    double z = 0.0;
    for (double v : f.values) z += v;
    if (!(z > 0.0)) {
      fail("ZeroEvidenceProbability", "the observed part of the case has probability 0");
    }
  }

  std::vector<std::vector<double>> tables(s.size());
  for (std::size_t iu = 0; iu < s.size(); ++iu) {
    const int i = static_cast<int>(iu);
    const int r = s.cardinality(i);
    const std::int64_t q = s.config_count(i);
    tables[iu].assign(q * r, 0.0);

    std::vector<int> members = s.parents(i);
    members.push_back(i);
    std::vector<int> unobserved;
    for (int m : members) {
      if (case_row[m] == kMissing) unobserved.push_back(m);
    }
    std::sort(unobserved.begin(), unobserved.end());
    unobserved.erase(std::unique(unobserved.begin(), unobserved.end()), unobserved.end());

    std::vector<int> row(case_row.begin(), case_row.end());
    if (unobserved.empty()) {
      const std::int64_t j = parent_config_index(s, i, row);
      tables[iu][j * r + row[i]] = 1.0;
      continue;
    }

    const detail::Factor joint = detail::eliminate(s, params, unobserved, case_row);
    double z = 0.0;
    for (double v : joint.values) z += v;
    if (!(z > 0.0)) {
      fail("ZeroEvidenceProbability", "the observed part of the case has probability 0");
    }

    std::vector<int> state(joint.scope.size(), 0);
    for (std::int64_t idx = 0; idx < static_cast<std::int64_t>(joint.values.size()); ++idx) {
      for (std::size_t t = 0; t < joint.scope.size(); ++t) row[joint.scope[t]] = state[t];
      const std::int64_t j = parent_config_index(s, i, row);
      tables[iu][j * r + row[i]] += joint.values[idx] / z;
      for (std::size_t t = joint.scope.size(); t-- > 0;) {
        if (++state[t] < joint.card[t]) break;
        state[t] = 0;
      }
    }
  }
  return FamilyPosteriors(s, std::move(tables));
}

// p(evidence) alone, via the same elimination path as query().
inline double evidence_probability(const NetworkStructure& s, const ParameterSet& params,
                                   std::span<const int> evidence_row) {
  std::vector<int> none;
  const detail::Factor f = detail::eliminate(s, params, none, evidence_row);
  double z = 0.0;
  for (double v : f.values) z += v;
  return z;
}

}  // namespace bayesnet

#endif  // BAYESNET_INFERENCE_HPP_
