#ifndef BAYESNET_SCORING_HPP_
#define BAYESNET_SCORING_HPP_

// Structure-level criteria.  The BD log marginal likelihood is the workhorse;
// per-family components are exposed so search can cache them.  All scores are
// relative: the uniform structure prior contributes 0 and no attempt is made
// to normalize over DAG space.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bayesnet/core.hpp"
#include "bayesnet/error.hpp"
#include "bayesnet/inference.hpp"
#include "bayesnet/param_learn.hpp"

namespace bayesnet {

// Hard structural constraints shared by scoring and search.
//   * forbid_parents: these variables may not have any parents;
//   * require_leaf:   these variables may not have any children;
//   * max_parents:    optional cap on parent-set size;
//   * allowed_arcs:   when set, only the listed (parent, child) arcs may appear.
struct SearchConstraints {
  std::vector<std::string> forbid_parents;
  std::vector<std::string> require_leaf;
  std::optional<int> max_parents;
  std::optional<std::vector<std::pair<std::string, std::string>>> allowed_arcs;

  bool arc_allowed(const std::string& parent, const std::string& child) const {
    for (const std::string& v : forbid_parents) {
      if (v == child) return false;
    }
    for (const std::string& v : require_leaf) {
      if (v == parent) return false;
    }
    if (allowed_arcs) {
      bool listed = false;
      for (const auto& [p, c] : *allowed_arcs) {
        if (p == parent && c == child) {
          listed = true;
          break;
        }
      }
      if (!listed) return false;
    }
    return true;
  }

  bool satisfied_by(const NetworkStructure& s) const {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string& child = s.variable(static_cast<int>(i)).name;
      const auto& ps = s.parents(static_cast<int>(i));
      if (max_parents && static_cast<int>(ps.size()) > *max_parents) return false;
      for (int p : ps) {
        if (!arc_allowed(s.variable(p).name, child)) return false;
      }
    }
    return true;
  }
};

// Prior over structures: uniform, or Buntine-style independent per-arc
// presence with probability kappa under a fixed variable ordering (arcs
// against the ordering are forbidden).
struct StructurePrior {
  enum class Kind { kUniform, kPerArc };

  Kind kind = Kind::kUniform;
  double kappa = 0.5;                  // per-arc presence probability, in (0,1)
  std::vector<std::string> ordering;   // required for kPerArc
  SearchConstraints constraints;

  static StructurePrior uniform() { return StructurePrior{}; }

  static StructurePrior per_arc(double kappa, std::vector<std::string> ordering) {
    if (!(kappa > 0.0 && kappa < 1.0)) fail("InvalidPrior", "kappa must lie in (0,1)");
    StructurePrior p;
    p.kind = Kind::kPerArc;
    p.kappa = kappa;
    p.ordering = std::move(ordering);
    return p;
  }

  double log_prior(const NetworkStructure& s) const {
    if (!constraints.satisfied_by(s)) {
      fail("ConstraintViolation", "structure violates the prior's hard constraints");
    }
    if (kind == Kind::kUniform) return 0.0;

    if (ordering.size() != s.size()) {
      fail("InvalidPrior", "per-arc prior needs a complete variable ordering");
    }
    std::vector<int> rank(s.size());
    for (std::size_t t = 0; t < ordering.size(); ++t) {
      rank[s.index_of(ordering[t])] = static_cast<int>(t);
    }
    std::int64_t arcs = 0;
    for (std::size_t c = 0; c < s.size(); ++c) {
      for (int p : s.parents(static_cast<int>(c))) {
        if (rank[p] >= rank[c]) {
          fail("ConstraintViolation", "arc " + s.variable(p).name + " -> " +
                                          s.variable(static_cast<int>(c)).name +
                                          " goes against the ordering");
        }
        ++arcs;
      }
    }
    const std::int64_t slots =
        static_cast<std::int64_t>(s.size()) * (static_cast<std::int64_t>(s.size()) - 1) / 2;
    return static_cast<double>(arcs) * std::log(kappa) +
           static_cast<double>(slots - arcs) * std::log1p(-kappa);
  }
};

// BD log marginal likelihood with per-family components (components sum to
// the total, enabling separable caching).
struct BdScore {
  std::vector<double> family;  // one component per variable
  double total = 0.0;
};

inline double bd_family_loglik(const NetworkStructure& s, const DirichletSpec& priors,
                               const FamilyCounts& counts, int i) {
  double c = 0.0;
  for (std::int64_t j = 0; j < s.config_count(i); ++j) {
    c += family_marginal_loglik(priors.row(i, j), counts.row(i, j));
  }
  return c;
}

inline BdScore bd_log_marginal(const NetworkStructure& s, const DirichletSpec& priors,
                               const FamilyCounts& counts) {
  if (!priors.shape_matches(counts) || !priors.shape_matches(s)) {
    fail("ShapeMismatch", "priors and counts must match the structure");
  }
  BdScore score;
  score.family.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    score.family[i] = bd_family_loglik(s, priors, counts, static_cast<int>(i));
    score.total += score.family[i];
  }
  return score;
}

// Log structure prior, log marginal likelihood, and their sum.
struct ScoreReport {
  double log_prior = 0.0;
  double log_marginal = 0.0;
  double total = 0.0;
  std::vector<double> per_family;
};

inline ScoreReport log_posterior_score(const NetworkStructure& s, const StructurePrior& prior,
                                       const DirichletSpec& priors, const FamilyCounts& counts) {
  ScoreReport report;
  report.log_prior = prior.log_prior(s);
  BdScore bd = bd_log_marginal(s, priors, counts);
  report.log_marginal = bd.total;
  report.per_family = std::move(bd.family);
  report.total = report.log_prior + report.log_marginal;
  return report;
}

// Sum over cases of log p(x_l | x_1..x_{l-1}) computed by incremental
// Dirichlet updates.  Telescopes to bd_log_marginal exactly, so the two are
// held to 1e-9 of each other in the tests.
inline double sequential_predictive_log(const NetworkStructure& s, const DirichletSpec& priors,
                                        const DataSet& data) {
  if (!priors.shape_matches(s)) fail("ShapeMismatch", "priors must match the structure");
  const std::vector<int> col = data.align_to(s);

  DirichletSpec running = priors;
  double total = 0.0;
  for (std::size_t l = 0; l < data.case_count(); ++l) {
    const std::vector<int> row = data.aligned_row(col, l);
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (row[i] == kMissing) {
        fail("IncompleteData", "case " + std::to_string(l + 1) +
                                   " is incomplete; the sequential criterion needs "
                                   "complete data");
      }
    }
    total += std::log(network_predictive(s, running, row));
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::int64_t j = parent_config_index(s, static_cast<int>(i), row);
      running.alpha_mut(static_cast<int>(i), j, row[i]) += 1.0;
    }
  }
  return total;
}

// Maximum-likelihood parameters N_ijk / N_ij, with unvisited configurations
// (N_ij = 0) given uniform rows: those rows contribute nothing to the
// likelihood, and any finite value keeps downstream scores well-defined.
inline ParameterSet ml_parameters(const NetworkStructure& s, const FamilyCounts& counts) {
  if (!counts.shape_matches(s)) fail("ShapeMismatch", "counts must match the structure");
  std::vector<std::vector<double>> rows(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const int r = s.cardinality(static_cast<int>(i));
    rows[i].resize(static_cast<std::size_t>(s.config_count(static_cast<int>(i))) * r);
    for (std::int64_t j = 0; j < s.config_count(static_cast<int>(i)); ++j) {
      const std::int64_t n = counts.row_total(static_cast<int>(i), j);
      for (int k = 0; k < r; ++k) {
        rows[i][j * r + k] =
            n > 0 ? static_cast<double>(counts.count(static_cast<int>(i), j, k)) / n
                  : 1.0 / r;
      }
    }
  }
  return ParameterSet::from_rows(s, rows);
}

// log p(D | theta-hat, S) - (d/2) log N with d = sum_i q_i (r_i - 1).
struct BicScore {
  double loglik = 0.0;
  std::int64_t dimension = 0;
  double penalty = 0.0;  // (d/2) log N
  double score = 0.0;    // loglik - penalty
};

inline BicScore bic_score(const NetworkStructure& s, const ParameterSet& ml_params,
                          const DataSet& data) {
  if (data.case_count() == 0) {
    fail("EmptyDataset", "BIC needs at least one case (log N is undefined at N = 0)");
  }
  const std::vector<int> col = data.align_to(s);
  BicScore out;
  for (std::size_t l = 0; l < data.case_count(); ++l) {
    const std::vector<int> row = data.aligned_row(col, l);
    for (int v : row) {
      if (v == kMissing) {
        fail("IncompleteData", "case " + std::to_string(l + 1) + " is incomplete");
      }
    }
    out.loglik += std::log(joint_probability(s, ml_params, row));
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.dimension +=
        s.config_count(static_cast<int>(i)) * (s.cardinality(static_cast<int>(i)) - 1);
  }
  out.penalty = 0.5 * static_cast<double>(out.dimension) *
                std::log(static_cast<double>(data.case_count()));
  out.score = out.loglik - out.penalty;
  return out;
}

// Sequential log score of the target's predictions only: the model is trained
// on cases 1..l-1 (posterior-mean parameters) and asked for the target given
// the remaining variables of case l.  For unrestricted multinomials with
// complete data, posterior-mean prediction coincides with full parameter
// averaging case by case, which is why this evaluation is exact.
inline double local_criterion(const NetworkStructure& s, const DirichletSpec& priors,
                              const DataSet& data, const std::string& target) {
  if (!priors.shape_matches(s)) fail("ShapeMismatch", "priors must match the structure");
  const int target_idx = s.index_of(target);
  const std::vector<int> col = data.align_to(s);

  DirichletSpec running = priors;
  double total = 0.0;
  for (std::size_t l = 0; l < data.case_count(); ++l) {
    const std::vector<int> row = data.aligned_row(col, l);
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (row[i] == kMissing) {
        fail("IncompleteData", "case " + std::to_string(l + 1) + " is incomplete");
      }
    }
    const ParameterSet params = posterior_mean_parameters(s, running);
    Evidence findings;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (static_cast<int>(i) != target_idx) {
        findings.set(s.variable(static_cast<int>(i)).name,
                     s.variable(static_cast<int>(i)).states[row[i]]);
      }
    }
    const QueryResult q = query(s, params, {target}, findings);
    total += std::log(q.table[row[target_idx]]);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::int64_t j = parent_config_index(s, static_cast<int>(i), row);
      running.alpha_mut(static_cast<int>(i), j, row[i]) += 1.0;
    }
  }
  return total;
}

}  // namespace bayesnet

#endif  // BAYESNET_SCORING_HPP_
