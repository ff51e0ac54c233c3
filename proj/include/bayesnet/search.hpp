#ifndef BAYESNET_SEARCH_HPP_
#define BAYESNET_SEARCH_HPP_

// Score-based structure search over DAG space with separable-score caching,
// plus independence-equivalence utilities (skeleton + v-structures),
// compelled-edge extraction, and model averaging over explicit structure
// sets.
//
// Randomized routines take an explicit 64-bit seed and use mt19937_64; each
// greedy restart draws from its own stream seeded with (seed, restart), so
// restarts could run concurrently without changing results.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bayesnet/core.hpp"
#include "bayesnet/error.hpp"
#include "bayesnet/param_learn.hpp"
#include "bayesnet/scoring.hpp"

namespace bayesnet {

// ---------------------------------------------------------------------------
// Equivalence-class utilities
// ---------------------------------------------------------------------------

namespace detail {

// Undirected adjacency (skeleton) as canonical index pairs (a < b).
inline std::set<std::pair<int, int>> skeleton_of(const NetworkStructure& s) {
  std::set<std::pair<int, int>> edges;
  for (std::size_t c = 0; c < s.size(); ++c) {
    for (int p : s.parents(static_cast<int>(c))) {
      edges.insert({std::min(p, static_cast<int>(c)), std::max(p, static_cast<int>(c))});
    }
  }
  return edges;
}

// v-structures as (x, y, z) with x -> y <- z, no x-z adjacency, x < z.
inline std::set<std::tuple<int, int, int>> v_structures_of(const NetworkStructure& s) {
  const std::set<std::pair<int, int>> skel = skeleton_of(s);
  std::set<std::tuple<int, int, int>> out;
  for (std::size_t y = 0; y < s.size(); ++y) {
    const auto& ps = s.parents(static_cast<int>(y));
    for (std::size_t a = 0; a < ps.size(); ++a) {
      for (std::size_t b = a + 1; b < ps.size(); ++b) {
        const int x = std::min(ps[a], ps[b]);
        const int z = std::max(ps[a], ps[b]);
        if (!skel.count({x, z})) out.insert({x, static_cast<int>(y), z});
      }
    }
  }
  return out;
}

inline bool acyclic(std::size_t n, const std::vector<std::vector<int>>& parent_idx) {
  std::vector<int> remaining(n, 0);
  for (std::size_t i = 0; i < n; ++i) remaining[i] = static_cast<int>(parent_idx[i].size());
  std::vector<bool> placed(n, false);
  for (std::size_t done = 0; done < n; ++done) {
    int next = -1;
    for (std::size_t i = 0; i < n; ++i) {
      if (!placed[i] && remaining[i] == 0) {
        next = static_cast<int>(i);
        break;
      }
    }
    if (next < 0) return false;
    placed[next] = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (!placed[i]) {
        for (int p : parent_idx[i]) {
          if (p == next) --remaining[i];
        }
      }
    }
  }
  return true;
}

// Maps other's variable indices onto s's; VariableSetMismatch when the
// variable names differ.
inline std::vector<int> variable_map(const NetworkStructure& s, const NetworkStructure& other) {
  if (s.size() != other.size()) {
    fail("VariableSetMismatch", "structures declare different variable sets");
  }
  std::vector<int> map(other.size());
  for (std::size_t i = 0; i < other.size(); ++i) {
    const auto found = s.find(other.variable(static_cast<int>(i)).name);
    if (!found) {
      fail("VariableSetMismatch", "no variable named '" +
                                      other.variable(static_cast<int>(i)).name + "'");
    }
    map[i] = *found;
  }
  return map;
}

}  // namespace detail

// True iff the two DAGs have identical skeletons and identical v-structure
// sets (the Verma-Pearl characterization of independence equivalence).
inline bool independence_equivalent(const NetworkStructure& s1, const NetworkStructure& s2) {
  const std::vector<int> map = detail::variable_map(s1, s2);

  std::set<std::pair<int, int>> skel2;
  for (std::size_t c = 0; c < s2.size(); ++c) {
    for (int p : s2.parents(static_cast<int>(c))) {
      const int a = map[p], b = map[c];
      skel2.insert({std::min(a, b), std::max(a, b)});
    }
  }
  if (detail::skeleton_of(s1) != skel2) return false;

  std::set<std::tuple<int, int, int>> v2;
  for (const auto& [x, y, z] : detail::v_structures_of(s2)) {
    const int a = map[x], b = map[y], c = map[z];
    v2.insert({std::min(a, c), b, std::max(a, c)});
  }
  return detail::v_structures_of(s1) == v2;
}

// All DAGs over the same skeleton with the same v-structures as s (s itself
// included), by brute-force orientation of the skeleton.  Guarded to small
// graphs; TooLarge otherwise.
inline std::vector<NetworkStructure> enumerate_equivalence_class(const NetworkStructure& s) {
  if (s.size() > 8) {
    fail("TooLarge", "equivalence-class enumeration is limited to 8 variables");
  }
  const std::set<std::pair<int, int>> skel_set = detail::skeleton_of(s);
  const std::vector<std::pair<int, int>> skel(skel_set.begin(), skel_set.end());
  if (skel.size() > 20) {
    fail("TooLarge", "equivalence-class enumeration is limited to 20 edges");
  }
  const auto reference_v = detail::v_structures_of(s);

  std::vector<NetworkStructure> members;
  const std::size_t n = s.size();
  for (std::uint32_t bits = 0; bits < (1u << skel.size()); ++bits) {
    std::vector<std::vector<int>> parent_idx(n);
    for (std::size_t e = 0; e < skel.size(); ++e) {
      const auto [a, b] = skel[e];
      if (bits & (1u << e)) {
        parent_idx[b].push_back(a);  // a -> b
      } else {
        parent_idx[a].push_back(b);  // b -> a
      }
    }
    if (!detail::acyclic(n, parent_idx)) continue;

    std::vector<std::vector<std::string>> parent_names(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::sort(parent_idx[i].begin(), parent_idx[i].end());
      for (int p : parent_idx[i]) parent_names[i].push_back(s.variable(p).name);
    }
    NetworkStructure candidate(s.variables(), parent_names);
    if (detail::v_structures_of(candidate) == reference_v) {
      members.push_back(std::move(candidate));
    }
  }
  return members;
}

// Directed edges oriented identically in every member of s's equivalence
// class.  Under the causal Markov condition, and assuming no hidden variables
// and no selection bias, these are the arcs that can be read causally; the
// CLI attaches that caveat when reporting them.
inline std::vector<std::pair<std::string, std::string>> compelled_edges(
    const NetworkStructure& s) {
  const std::vector<NetworkStructure> members = enumerate_equivalence_class(s);
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t c = 0; c < s.size(); ++c) {
    for (int p : s.parents(static_cast<int>(c))) {
      bool same_everywhere = true;
      for (const NetworkStructure& m : members) {
        if (!m.has_arc(p, static_cast<int>(c))) {
          same_everywhere = false;
          break;
        }
      }
      if (same_everywhere) {
        out.emplace_back(s.variable(p).name, s.variable(static_cast<int>(c)).name);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Eligible single-arc changes
// ---------------------------------------------------------------------------

struct ChangeOp {
  enum class Kind { kAdd, kDelete, kReverse };
  Kind kind = Kind::kAdd;
  std::string from;  // arc tail (parent)
  std::string to;    // arc head (child)

  bool operator==(const ChangeOp&) const = default;
};

inline const char* to_string(ChangeOp::Kind k) {
  switch (k) {
    case ChangeOp::Kind::kAdd: return "add";
    case ChangeOp::Kind::kDelete: return "delete";
    case ChangeOp::Kind::kReverse: return "reverse";
  }
  return "?";
}

namespace detail {

inline bool path_exists(const NetworkStructure& s, int from, int to) {
  if (from == to) return true;
  std::vector<bool> seen(s.size(), false);
  std::vector<int> stack{from};
  seen[from] = true;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (std::size_t c = 0; c < s.size(); ++c) {
      if (!seen[c] && s.has_arc(v, static_cast<int>(c))) {
        if (static_cast<int>(c) == to) return true;
        seen[c] = true;
        stack.push_back(static_cast<int>(c));
      }
    }
  }
  return false;
}

// Directed path from -> to that does not use the arc (skip_tail -> skip_head);
// used to decide whether reversing that arc closes a cycle.
inline bool path_exists_excluding(const NetworkStructure& s, int from, int to, int skip_tail,
                                  int skip_head) {
  if (from == to) return true;
  std::vector<bool> seen(s.size(), false);
  std::vector<int> stack{from};
  seen[from] = true;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (std::size_t c = 0; c < s.size(); ++c) {
      if (v == skip_tail && static_cast<int>(c) == skip_head) continue;
      if (!seen[c] && s.has_arc(v, static_cast<int>(c))) {
        if (static_cast<int>(c) == to) return true;
        seen[c] = true;
        stack.push_back(static_cast<int>(c));
      }
    }
  }
  return false;
}

}  // namespace detail

// Applies a single-arc change, keeping parent lists sorted by declaration
// order so equal structures have a canonical representation.
inline NetworkStructure apply_change(const NetworkStructure& s, const ChangeOp& op) {
  const int from = s.index_of(op.from);
  const int to = s.index_of(op.to);
  std::vector<std::vector<int>> parent_idx(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) parent_idx[i] = s.parents(static_cast<int>(i));

  auto erase_arc = [&](int p, int c) {
    auto& ps = parent_idx[c];
    ps.erase(std::remove(ps.begin(), ps.end(), p), ps.end());
  };
  switch (op.kind) {
    case ChangeOp::Kind::kAdd:
      parent_idx[to].push_back(from);
      break;
    case ChangeOp::Kind::kDelete:
      erase_arc(from, to);
      break;
    case ChangeOp::Kind::kReverse:
      erase_arc(from, to);
      parent_idx[from].push_back(to);
      break;
  }
  std::vector<std::vector<std::string>> parent_names(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::sort(parent_idx[i].begin(), parent_idx[i].end());
    for (int p : parent_idx[i]) parent_names[i].push_back(s.variable(p).name);
  }
  return NetworkStructure(s.variables(), parent_names);
}

// All single-arc adds/deletes/reverses that keep the graph acyclic and
// satisfy the hard constraints, in deterministic order (kind, then endpoint
// names).
inline std::vector<ChangeOp> eligible_changes(const NetworkStructure& s,
                                              const SearchConstraints& constraints) {
  std::vector<ChangeOp> changes;
  const int n = static_cast<int>(s.size());

  auto parents_fit = [&](int child, int delta) {
    if (!constraints.max_parents) return true;
    return static_cast<int>(s.parents(child).size()) + delta <= *constraints.max_parents;
  };

  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      const std::string& from = s.variable(a).name;
      const std::string& to = s.variable(b).name;
      if (s.has_arc(a, b)) {
        changes.push_back({ChangeOp::Kind::kDelete, from, to});
        if (constraints.arc_allowed(to, from) && parents_fit(a, +1) &&
            !detail::path_exists_excluding(s, a, b, a, b)) {
          changes.push_back({ChangeOp::Kind::kReverse, from, to});
        }
      } else if (!s.has_arc(b, a)) {
        if (constraints.arc_allowed(from, to) && parents_fit(b, +1) &&
            !detail::path_exists(s, b, a)) {
          changes.push_back({ChangeOp::Kind::kAdd, from, to});
        }
      }
    }
  }
  std::sort(changes.begin(), changes.end(), [](const ChangeOp& x, const ChangeOp& y) {
    if (x.kind != y.kind) return static_cast<int>(x.kind) < static_cast<int>(y.kind);
    if (x.from != y.from) return x.from < y.from;
    return x.to < y.to;
  });
  return changes;
}

// ---------------------------------------------------------------------------
// BDe family-prior builder (parameter modularity)
// ---------------------------------------------------------------------------

// Produces the BDe hyperparameter block for any (variable, parent set) pair:
// alpha_ijk = ess * p(x_i^k, pa_i^j | prior network).  Parameter modularity
// means the block depends only on the family, so search can score candidate
// parent sets without assembling whole structures.
class BdeFamilyPrior {
 public:
  BdeFamilyPrior(double ess, NetworkStructure prior_structure, ParameterSet prior_params)
      : ess_(ess),
        prior_structure_(std::move(prior_structure)),
        prior_params_(std::move(prior_params)) {
    if (!(ess_ > 0.0)) fail("NonPositiveAlpha", "equivalent sample size must be positive");
  }

  double ess() const { return ess_; }
  const NetworkStructure& prior_structure() const { return prior_structure_; }

  // Flat (q*r) alpha table; parent configurations enumerate the given parent
  // order, last parent fastest.
  std::vector<double> family_alpha(int variable, const std::vector<int>& parents) const {
    std::vector<std::string> family;
    for (int p : parents) family.push_back(prior_structure_.variable(p).name);
    family.push_back(prior_structure_.variable(variable).name);
    const QueryResult joint = query(prior_structure_, prior_params_, family, Evidence{});
    std::vector<double> alpha(joint.table.size());
    for (std::size_t t = 0; t < joint.table.size(); ++t) {
      alpha[t] = ess_ * joint.table[t];
      if (!(alpha[t] > 1e-12)) {
        fail("ZeroPriorProbability",
             "prior network assigns (near-)zero probability to a configuration of family '" +
                 prior_structure_.variable(variable).name + "'");
      }
    }
    return alpha;
  }

  DirichletSpec spec_for(const NetworkStructure& target) const {
    BdePriorInputs inputs{ess_, prior_structure_, prior_params_};
    return bde_priors(inputs, target);
  }

 private:
  double ess_;
  NetworkStructure prior_structure_;
  ParameterSet prior_params_;
};

// ---------------------------------------------------------------------------
// Separable score with caching
// ---------------------------------------------------------------------------

// Per-variable family scores c(X_i, Pa_i, D_i) memoized by (variable, sorted
// parent set); the running total is the BD log marginal of the current
// structure.
class ScoreCache {
 public:
  ScoreCache(const NetworkStructure& variables_owner, const DataSet& data,
             const BdeFamilyPrior& prior)
      : prior_(&prior), card_(variables_owner.size()) {
    if (!prior.prior_structure().same_variables(variables_owner)) {
      fail("VariableSetMismatch", "prior network and search space differ in variables");
    }
    const std::vector<int> col = data.align_to(variables_owner);
    rows_.reserve(data.case_count());
    for (std::size_t l = 0; l < data.case_count(); ++l) {
      const std::vector<int> row = data.aligned_row(col, l);
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (row[i] == kMissing) {
          fail("IncompleteData", "structure search requires complete data (case " +
                                     std::to_string(l + 1) + " is incomplete)");
        }
      }
      rows_.push_back(row);
    }
    for (std::size_t i = 0; i < variables_owner.size(); ++i) {
      card_[i] = variables_owner.cardinality(static_cast<int>(i));
    }
  }

  // c(X_i, Pa_i, D_i): BD log marginal contribution of one family.
  double family_score(int variable, std::vector<int> parents) {
    std::sort(parents.begin(), parents.end());
    const Key key{variable, parents};
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;

    std::int64_t q = 1;
    for (int p : parents) q *= card_[p];
    const int r = card_[variable];

    std::vector<std::int64_t> counts(q * r, 0);
    for (const auto& row : rows_) {
      std::int64_t j = 0;
      for (int p : parents) j = j * card_[p] + row[p];
      ++counts[j * r + row[variable]];
    }
    const std::vector<double> alpha = prior_->family_alpha(variable, parents);

    double score = 0.0;
    for (std::int64_t j = 0; j < q; ++j) {
      score += family_marginal_loglik(
          std::span<const double>(alpha.data() + j * r, r),
          std::span<const std::int64_t>(counts.data() + j * r, r));
    }
    memo_.emplace(key, score);
    return score;
  }

  // Recomputes the per-variable scores and total for a structure.
  void rebase(const NetworkStructure& s) {
    current_.assign(s.size(), 0.0);
    total_ = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      current_[i] = family_score(static_cast<int>(i), s.parents(static_cast<int>(i)));
      total_ += current_[i];
    }
  }

  // Marginal-likelihood delta of a change: at most one family recomputation
  // for add/delete, two for reverse.
  double delta(const NetworkStructure& s, const ChangeOp& op) {
    const int from = s.index_of(op.from);
    const int to = s.index_of(op.to);
    std::vector<int> to_parents = s.parents(to);
    switch (op.kind) {
      case ChangeOp::Kind::kAdd:
        to_parents.push_back(from);
        return family_score(to, to_parents) - current_[to];
      case ChangeOp::Kind::kDelete:
        to_parents.erase(std::remove(to_parents.begin(), to_parents.end(), from),
                         to_parents.end());
        return family_score(to, to_parents) - current_[to];
      case ChangeOp::Kind::kReverse: {
        to_parents.erase(std::remove(to_parents.begin(), to_parents.end(), from),
                         to_parents.end());
        std::vector<int> from_parents = s.parents(from);
        from_parents.push_back(to);
        return family_score(to, to_parents) - current_[to] +
               family_score(from, from_parents) - current_[from];
      }
    }
    return 0.0;
  }

  // Commits a change that apply_change() is about to make / has made.
  void commit(const NetworkStructure& changed, const ChangeOp& op) {
    const int from = changed.index_of(op.from);
    const int to = changed.index_of(op.to);
    auto refresh = [&](int v) {
      total_ -= current_[v];
      current_[v] = family_score(v, changed.parents(v));
      total_ += current_[v];
    };
    refresh(to);
    if (op.kind == ChangeOp::Kind::kReverse) refresh(from);
  }

  double total() const { return total_; }
  const std::vector<double>& per_family() const { return current_; }

 private:
  using Key = std::pair<int, std::vector<int>>;
  const BdeFamilyPrior* prior_;
  std::vector<int> card_;
  std::vector<std::vector<int>> rows_;
  std::map<Key, double> memo_;
  std::vector<double> current_;
  double total_ = 0.0;
};

// ---------------------------------------------------------------------------
// Search drivers
// ---------------------------------------------------------------------------

struct TraceEntry {
  int iteration = 0;
  ChangeOp change;
  double delta = 0.0;
  bool perturbation = false;  // random restart move rather than an accepted improvement
  int restart = 0;
};

struct SearchOutcome {
  NetworkStructure best;
  ScoreReport best_report;
  std::vector<TraceEntry> trace;   // every applied change, in order
  std::size_t best_trace_length = 0;  // replay trace[0..len) from init to reach best
  int best_restart = 0;
  std::uint64_t seed = 0;
  std::string rng_algorithm = "mt19937_64";
};

struct AnnealingSchedule {
  double initial_temperature = 1.0;  // T0 > 0
  int trials_per_temperature = 100;  // max trials before a decay decision
  int max_accepts_per_temperature = 10;  // accepted changes that trigger a decay
  double decay = 0.9;                // multiplies the temperature, in (0,1)
  int max_reductions = 20;           // stop after this many decays

  void validate() const {
    if (!(initial_temperature > 0.0)) fail("InvalidSchedule", "T0 must be positive");
    if (trials_per_temperature < 1) fail("InvalidSchedule", "trials must be >= 1");
    if (max_accepts_per_temperature < 1) fail("InvalidSchedule", "max accepts must be >= 1");
    if (!(decay > 0.0 && decay < 1.0)) fail("InvalidSchedule", "decay must lie in (0,1)");
    if (max_reductions < 0) fail("InvalidSchedule", "max reductions must be >= 0");
  }
};

namespace detail {

inline std::mt19937_64 stream_for(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

// Structure-prior contribution of a change (arc-count based, so uniform
// priors contribute 0 and per-arc priors shift adds/deletes by +-log(k/(1-k))).
inline double prior_delta(const StructurePrior& prior, const ChangeOp& op) {
  if (prior.kind == StructurePrior::Kind::kUniform) return 0.0;
  const double per_arc = std::log(prior.kappa) - std::log1p(-prior.kappa);
  switch (op.kind) {
    case ChangeOp::Kind::kAdd: return per_arc;
    case ChangeOp::Kind::kDelete: return -per_arc;
    case ChangeOp::Kind::kReverse: return 0.0;
  }
  return 0.0;
}

// Per-arc priors implicitly forbid arcs against their ordering; fold that
// into the constraints used for change generation.
inline SearchConstraints effective_constraints(const StructurePrior& prior,
                                               const NetworkStructure& s) {
  SearchConstraints c = prior.constraints;
  if (prior.kind == StructurePrior::Kind::kPerArc) {
    if (prior.ordering.size() != s.size()) {
      fail("InvalidPrior", "per-arc prior needs a complete variable ordering");
    }
    std::map<std::string, int> rank;
    for (std::size_t t = 0; t < prior.ordering.size(); ++t) {
      rank[prior.ordering[t]] = static_cast<int>(t);
    }
    std::vector<std::pair<std::string, std::string>> allowed;
    for (std::size_t a = 0; a < s.size(); ++a) {
      for (std::size_t b = 0; b < s.size(); ++b) {
        if (a == b) continue;
        const std::string& pa = s.variable(static_cast<int>(a)).name;
        const std::string& ch = s.variable(static_cast<int>(b)).name;
        if (rank[pa] < rank[ch] && c.arc_allowed(pa, ch)) allowed.emplace_back(pa, ch);
      }
    }
    c.allowed_arcs = std::move(allowed);
  }
  return c;
}

}  // namespace detail

// Greedy hill climbing with random restarts.  Each pass applies the best
// positive-delta change until none remains (ties resolved by the
// deterministic eligible_changes order); each restart perturbs the current
// local optimum with `perturbation_size` random eligible changes and repeats.
// `restarts` counts the perturbed passes, so 0 is plain greedy search.
inline SearchOutcome greedy_search(const DataSet& data, const BdeFamilyPrior& prior_builder,
                                   const StructurePrior& structure_prior,
                                   const NetworkStructure& init, int restarts,
                                   int perturbation_size, std::uint64_t seed) {
  if (!structure_prior.constraints.satisfied_by(init)) {
    fail("ConstraintViolation", "initial structure violates the hard constraints");
  }
  constexpr double kTieTolerance = 1e-9;

  ScoreCache cache(init, data, prior_builder);
  cache.rebase(init);

  NetworkStructure current = init;
  double current_total = cache.total() + structure_prior.log_prior(current);

  SearchOutcome outcome{current,
                        ScoreReport{},
                        {},
                        0,
                        0,
                        seed,
                        "mt19937_64"};
  double best_total = current_total;
  auto record_best = [&](int restart) {
    outcome.best = current;
    outcome.best_trace_length = outcome.trace.size();
    outcome.best_restart = restart;
    ScoreReport r;
    r.log_prior = structure_prior.log_prior(current);
    r.log_marginal = cache.total();
    r.per_family = cache.per_family();
    r.total = r.log_prior + r.log_marginal;
    outcome.best_report = r;
  };
  record_best(0);

  int iteration = 0;
  for (int restart = 0; restart <= restarts; ++restart) {
    if (restart > 0) {
      std::mt19937_64 rng = detail::stream_for(seed, static_cast<std::uint64_t>(restart));
      for (int t = 0; t < perturbation_size; ++t) {
        const std::vector<ChangeOp> moves =
            eligible_changes(current, detail::effective_constraints(structure_prior, current));
        if (moves.empty()) break;
        std::uniform_int_distribution<std::size_t> pick(0, moves.size() - 1);
        const ChangeOp op = moves[pick(rng)];
        const double d = cache.delta(current, op) + detail::prior_delta(structure_prior, op);
        current = apply_change(current, op);
        cache.commit(current, op);
        current_total += d;
        outcome.trace.push_back({iteration++, op, d, true, restart});
      }
    }
    for (;;) {
      const std::vector<ChangeOp> moves =
          eligible_changes(current, detail::effective_constraints(structure_prior, current));
      double best_delta = kTieTolerance;
      const ChangeOp* best_op = nullptr;
      for (const ChangeOp& op : moves) {
        const double d = cache.delta(current, op) + detail::prior_delta(structure_prior, op);
        if (d > best_delta) {
          best_delta = d;
          best_op = &op;
        }
      }
      if (!best_op) break;
      const ChangeOp op = *best_op;
      current = apply_change(current, op);
      cache.commit(current, op);
      current_total += best_delta;
      outcome.trace.push_back({iteration++, op, best_delta, false, restart});
      if (current_total > best_total + kTieTolerance) {
        best_total = current_total;
        record_best(restart);
      }
    }
  }
  return outcome;
}

// Simulated annealing: draw a random eligible change, accept when
// exp(delta/T) exceeds 1 and otherwise with that probability; a temperature
// level ends after `trials_per_temperature` draws or
// `max_accepts_per_temperature` accepted changes, the temperature then decays
// by `decay`, and the search stops after `max_reductions` decays or a level
// with no accepted change.  Both classic initializations are available
// through the arguments: the empty graph with a temperature high enough to
// randomize it, or any starting structure with a lower temperature.
inline SearchOutcome simulated_annealing(const DataSet& data,
                                         const BdeFamilyPrior& prior_builder,
                                         const StructurePrior& structure_prior,
                                         const NetworkStructure& init,
                                         const AnnealingSchedule& schedule,
                                         std::uint64_t seed) {
  schedule.validate();
  if (!structure_prior.constraints.satisfied_by(init)) {
    fail("ConstraintViolation", "initial structure violates the hard constraints");
  }

  ScoreCache cache(init, data, prior_builder);
  cache.rebase(init);
  NetworkStructure current = init;
  double current_total = cache.total() + structure_prior.log_prior(current);

  SearchOutcome outcome{current, ScoreReport{}, {}, 0, 0, seed, "mt19937_64"};
  double best_total = current_total;
  auto record_best = [&]() {
    outcome.best = current;
    outcome.best_trace_length = outcome.trace.size();
    ScoreReport r;
    r.log_prior = structure_prior.log_prior(current);
    r.log_marginal = cache.total();
    r.per_family = cache.per_family();
    r.total = r.log_prior + r.log_marginal;
    outcome.best_report = r;
  };
  record_best();

  std::mt19937_64 rng = detail::stream_for(seed, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  double temperature = schedule.initial_temperature;
  int iteration = 0;
  for (int reductions = 0;; ++reductions) {
    int accepted = 0;
    for (int trial = 0; trial < schedule.trials_per_temperature &&
                        accepted < schedule.max_accepts_per_temperature;
         ++trial) {
      const std::vector<ChangeOp> moves =
          eligible_changes(current, detail::effective_constraints(structure_prior, current));
      if (moves.empty()) break;
      std::uniform_int_distribution<std::size_t> pick(0, moves.size() - 1);
      const ChangeOp op = moves[pick(rng)];
      const double d = cache.delta(current, op) + detail::prior_delta(structure_prior, op);
      const double p = std::exp(d / temperature);
      if (p > 1.0 || unit(rng) < p) {
        current = apply_change(current, op);
        cache.commit(current, op);
        current_total += d;
        outcome.trace.push_back({iteration, op, d, false, 0});
        ++accepted;
        if (current_total > best_total + 1e-12) {
          best_total = current_total;
          record_best();
        }
      }
      ++iteration;
    }
    if (accepted == 0) break;
    if (reductions >= schedule.max_reductions) break;
    temperature *= schedule.decay;
  }
  return outcome;
}

// ---------------------------------------------------------------------------
// Model averaging
// ---------------------------------------------------------------------------

// One candidate model for averaging.  Structure hypotheses are treated as
// distinct models even when one factorization subsumes another; callers pick
// the candidate set.
struct ScoredModel {
  NetworkStructure structure;
  DirichletSpec posterior;  // prior already updated with the data
  double log_score;         // log p(D, S^h) up to a shared constant
};

// Softmax weights p(S^h | D) over the given model set.
inline std::vector<double> posterior_weights(std::span<const double> log_scores) {
  if (log_scores.empty()) fail("EmptyModelSet", "no models to weight");
  double max = log_scores[0];
  for (double s : log_scores) max = std::max(max, s);
  std::vector<double> w(log_scores.size());
  double z = 0.0;
  for (std::size_t m = 0; m < log_scores.size(); ++m) {
    if (!std::isfinite(log_scores[m])) fail("InvalidScore", "model scores must be finite");
    w[m] = std::exp(log_scores[m] - max);
    z += w[m];
  }
  for (double& v : w) v /= z;
  return w;
}

// Posterior-weighted next-case probability: sum_m p(S_m | D) * p(row | D, S_m).
// The row uses the first model's variable order; all models must share it.
inline double model_average_predict(std::span<const ScoredModel> models,
                                    std::span<const int> row) {
  if (models.empty()) fail("EmptyModelSet", "no models to average");
  std::vector<double> scores(models.size());
  for (std::size_t m = 0; m < models.size(); ++m) {
    if (!models[m].structure.same_variables(models[0].structure)) {
      fail("VariableSetMismatch", "models declare different variable sets");
    }
    scores[m] = models[m].log_score;
  }
  const std::vector<double> w = posterior_weights(scores);
  double p = 0.0;
  for (std::size_t m = 0; m < models.size(); ++m) {
    p += w[m] * network_predictive(models[m].structure, models[m].posterior, row);
  }
  return p;
}

}  // namespace bayesnet

#endif  // BAYESNET_SEARCH_HPP_
