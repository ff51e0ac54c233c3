#ifndef BAYESNET_PARAM_LEARN_HPP_
#define BAYESNET_PARAM_LEARN_HPP_

// Conjugate Dirichlet machinery: posterior updating, predictive rows, the
// per-family marginal likelihood, whole-network predictives, and BDe prior
// construction from a prior network with an equivalent sample size.
//
// All likelihoods are computed and returned in log domain through
// std::lgamma; products of raw marginals underflow beyond ~100 cases.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bayesnet/core.hpp"
#include "bayesnet/error.hpp"
#include "bayesnet/inference.hpp"

namespace bayesnet {

// Posterior hyperparameters: alpha'_ijk = alpha_ijk + N_ijk.
inline DirichletSpec dirichlet_update(const DirichletSpec& prior, const FamilyCounts& counts) {
  if (!prior.shape_matches(counts)) {
    fail("ShapeMismatch", "hyperparameter and count tables have different shapes");
  }
  std::vector<std::vector<double>> cells(prior.family_count());
  std::vector<int> card(prior.family_count());
  for (std::size_t i = 0; i < prior.family_count(); ++i) {
    const int r = prior.cardinality(static_cast<int>(i));
    const std::int64_t q = prior.config_count(static_cast<int>(i));
    card[i] = r;
    cells[i].resize(q * r);
    for (std::int64_t j = 0; j < q; ++j) {
      for (int k = 0; k < r; ++k) {
        cells[i][j * r + k] = prior.alpha(static_cast<int>(i), j, k) +
                              static_cast<double>(counts.count(static_cast<int>(i), j, k));
      }
    }
  }
  return DirichletSpec::from_cells_with_cardinalities(std::move(card), std::move(cells));
}

// Posterior-mean (predictive) row: component k is alpha_ijk / alpha_ij.
inline std::vector<double> dirichlet_predictive(const DirichletSpec& spec, int i,
                                                std::int64_t j) {
  if (i < 0 || static_cast<std::size_t>(i) >= spec.family_count() || j < 0 ||
      j >= spec.config_count(i)) {
    fail("InvalidIndex", "no family/configuration (" + std::to_string(i) + ", " +
                             std::to_string(j) + ")");
  }
  const double total = spec.row_total(i, j);
  std::vector<double> row(spec.cardinality(i));
  for (int k = 0; k < spec.cardinality(i); ++k) row[k] = spec.alpha(i, j, k) / total;
  return row;
}

// Posterior-mean parameters for a whole spec (rows as above).
inline ParameterSet posterior_mean_parameters(const NetworkStructure& s,
                                              const DirichletSpec& spec) {
  if (!spec.shape_matches(s)) fail("ShapeMismatch", "spec does not fit the structure");
  std::vector<std::vector<double>> rows(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const int r = s.cardinality(static_cast<int>(i));
    rows[i].resize(static_cast<std::size_t>(s.config_count(static_cast<int>(i))) * r);
    for (std::int64_t j = 0; j < s.config_count(static_cast<int>(i)); ++j) {
      const std::vector<double> p = dirichlet_predictive(spec, static_cast<int>(i), j);
      for (int k = 0; k < r; ++k) rows[i][j * r + k] = p[k];
    }
  }
  return ParameterSet::from_rows(s, rows);
}

// log of Gamma(a)/Gamma(a+N) * prod_k Gamma(a_k+N_k)/Gamma(a_k) for one
// (i, j) row: the Dirichlet-multinomial marginal likelihood of the row's
// counts under its prior.
inline double family_marginal_loglik(std::span<const double> alpha_row,
                                     std::span<const std::int64_t> count_row) {
  if (alpha_row.size() != count_row.size()) {
    fail("ShapeMismatch", "alpha row and count row differ in length");
  }
  double alpha_total = 0.0;
  std::int64_t n_total = 0;
  double loglik = 0.0;
  for (std::size_t k = 0; k < alpha_row.size(); ++k) {
    if (!(alpha_row[k] > 0.0)) fail("NonPositiveAlpha", "alpha must be strictly positive");
    if (count_row[k] < 0) fail("NegativeCount", "counts must be non-negative");
    alpha_total += alpha_row[k];
    n_total += count_row[k];
    loglik += std::lgamma(alpha_row[k] + static_cast<double>(count_row[k])) -
              std::lgamma(alpha_row[k]);
  }
  loglik += std::lgamma(alpha_total) - std::lgamma(alpha_total + static_cast<double>(n_total));
  return loglik;
}

// Probability of one full case under the parameter posterior the given
// hyperparameters describe: prod_i alpha_ijk / alpha_ij with (j, k) picked by
// the row.  Handing in prior + counts makes this the next-case predictive.
inline double network_predictive(const NetworkStructure& s, const DirichletSpec& posterior,
                                 std::span<const int> row) {
  if (!posterior.shape_matches(s)) fail("ShapeMismatch", "spec does not fit the structure");
  if (row.size() != s.size()) fail("SchemaMismatch", "assignment width mismatch");
  double p = 1.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (row[i] == kMissing) {
      fail("MissingValue",
           "assignment is missing '" + s.variable(static_cast<int>(i)).name + "'");
    }
    const std::int64_t j = parent_config_index(s, static_cast<int>(i), row);
    p *= posterior.alpha(static_cast<int>(i), j, row[i]) /
         posterior.row_total(static_cast<int>(i), j);
  }
  return p;
}

// Equivalent sample size plus the prior network encoding the user's joint.
struct BdePriorInputs {
  double equivalent_sample_size = 1.0;
  NetworkStructure prior_structure;
  ParameterSet prior_params;
};

// BDe hyperparameters for `target`: alpha_ijk = ess * p(x_i^k, pa_i^j) where
// the joint is evaluated by exact inference on the prior network and Pa_i are
// the TARGET structure's parents (parameter modularity).  Any joint event at
// or below 1e-12 is an error rather than a silent clamp: zero hyperparameters
// corrupt score comparisons.
inline DirichletSpec bde_priors(const BdePriorInputs& inputs, const NetworkStructure& target) {
  if (!(inputs.equivalent_sample_size > 0.0)) {
    fail("NonPositiveAlpha", "equivalent sample size must be positive");
  }
  if (!inputs.prior_structure.same_variables(target)) {
    fail("SchemaMismatch", "prior network and target structure declare different variables");
  }

  std::vector<std::vector<double>> cells(target.size());
  for (std::size_t iu = 0; iu < target.size(); ++iu) {
    const int i = static_cast<int>(iu);
    const int r = target.cardinality(i);
    const std::int64_t q = target.config_count(i);
    cells[iu].assign(q * r, 0.0);

    // Joint over {X_i} u Pa_i on the prior network.
    std::vector<std::string> family;
    for (int p : target.parents(i)) family.push_back(target.variable(p).name);
    family.push_back(target.variable(i).name);
    const QueryResult joint = query(inputs.prior_structure, inputs.prior_params, family, Evidence{});

    // joint.table is indexed over (parents..., X_i) with X_i fastest, which
    // matches (j, k) directly.
    for (std::int64_t j = 0; j < q; ++j) {
      for (int k = 0; k < r; ++k) {
        const double a = inputs.equivalent_sample_size * joint.table[j * r + k];
        if (!(a > 1e-12)) {
          fail("ZeroPriorProbability",
               "prior network assigns (near-)zero probability to a configuration of "
               "family '" +
                   target.variable(i).name + "'");
        }
        cells[iu][j * r + k] = a;
      }
    }
  }
  return DirichletSpec::from_cells(target, cells);
}

}  // namespace bayesnet

#endif  // BAYESNET_PARAM_LEARN_HPP_
