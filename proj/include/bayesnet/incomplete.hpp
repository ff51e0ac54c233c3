#ifndef BAYESNET_INCOMPLETE_HPP_
#define BAYESNET_INCOMPLETE_HPP_

// Parameter learning from data with missing entries (absence assumed
// independent of state): EM to a local ML or MAP fixed point, collapsed Gibbs
// sampling over the missing entries with Rao-Blackwellized posterior-mean
// estimates, and the exact single-case Dirichlet-mixture posterior.
//
// EM restarts are independent given their seeds and the per-case E-step calls
// are independent too, so callers may parallelize both; the Gibbs chain
// itself is sequential by definition.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bayesnet/core.hpp"
#include "bayesnet/error.hpp"
#include "bayesnet/inference.hpp"
#include "bayesnet/param_learn.hpp"

namespace bayesnet {

enum class FitMode { kMl, kMap };
enum class EmInit { kUniform, kPriorMeans, kRandom };

// EM outcome.  The objective is the observed-data log likelihood in ML mode
// and the log posterior kernel  log p(D|theta) + sum alpha_ijk log theta_ijk
// in MAP mode (the kernel whose maximizer matches the canonical-coordinate
// M-step below); either is non-decreasing across iterations.  The trace has
// one entry for the initial parameters plus one per iteration.
struct EmResult {
  ParameterSet params;
  FitMode mode = FitMode::kMl;
  std::vector<double> objective;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

inline double em_objective(const NetworkStructure& s, const DirichletSpec& priors,
                           const std::vector<std::vector<int>>& rows,
                           const ParameterSet& params, FitMode mode) {
  double obj = 0.0;
  for (const auto& row : rows) {
    const double p = evidence_probability(s, params, row);
    if (!(p > 0.0)) fail("ZeroEvidenceProbability", "a case has probability 0");
    obj += std::log(p);
  }
  if (mode == FitMode::kMap) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::int64_t j = 0; j < s.config_count(static_cast<int>(i)); ++j) {
        for (int k = 0; k < s.cardinality(static_cast<int>(i)); ++k) {
          obj += priors.alpha(static_cast<int>(i), j, k) *
                 std::log(params.theta(static_cast<int>(i), j, k));
        }
      }
    }
  }
  return obj;
}

inline ParameterSet em_initial_params(const NetworkStructure& s, const DirichletSpec& priors,
                                      EmInit init, std::uint64_t seed) {
  switch (init) {
    case EmInit::kUniform:
      return ParameterSet::uniform(s);
    case EmInit::kPriorMeans:
      return posterior_mean_parameters(s, priors);
    case EmInit::kRandom: {
      std::seed_seq seq{static_cast<std::uint32_t>(seed),
                        static_cast<std::uint32_t>(seed >> 32), 0x9e3779b9u};
      std::mt19937_64 rng(seq);
      std::exponential_distribution<double> expo(1.0);
      std::vector<std::vector<double>> cells(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) {
        const int r = s.cardinality(static_cast<int>(i));
        cells[i].resize(static_cast<std::size_t>(s.config_count(static_cast<int>(i))) * r);
        for (std::int64_t j = 0; j < s.config_count(static_cast<int>(i)); ++j) {
          double sum = 0.0;
          std::vector<double> draw(r);
          for (int k = 0; k < r; ++k) {
            draw[k] = expo(rng);  // normalized exponentials = Dirichlet(1,..,1)
            sum += draw[k];
          }
          for (int k = 0; k < r; ++k) cells[i][j * r + k] = draw[k] / sum;
        }
      }
      return ParameterSet::from_rows(s, cells);
    }
  }
  fail("InvalidIndex", "unknown initialization policy");
}

}  // namespace detail

// EM for one start.  The E-step accumulates expected sufficient statistics
// E[N_ijk] = sum_l p(x_i^k, pa_i^j | y_l, theta); the M-step normalizes
// E[N_ijk] (ML) or alpha_ijk + E[N_ijk] (MAP).  Stops when the relative
// objective improvement falls below `tolerance` or after `max_iterations`.
inline EmResult em_fit(const NetworkStructure& s, const DirichletSpec& priors,
                       const DataSet& data, FitMode mode, EmInit init = EmInit::kPriorMeans,
                       double tolerance = 1e-6, int max_iterations = 200,
                       std::uint64_t seed = 0) {
  if (!priors.shape_matches(s)) fail("ShapeMismatch", "priors must match the structure");
  const std::vector<int> col = data.align_to(s);
  std::vector<std::vector<int>> rows;
  rows.reserve(data.case_count());
  for (std::size_t l = 0; l < data.case_count(); ++l) rows.push_back(data.aligned_row(col, l));

  EmResult result;
  result.mode = mode;
  result.params = detail::em_initial_params(s, priors, init, seed);
  result.objective.push_back(detail::em_objective(s, priors, rows, result.params, mode));

  for (int it = 0; it < max_iterations; ++it) {
    // E-step: expected counts under the current parameters.
    std::vector<std::vector<double>> expected(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      expected[i].assign(static_cast<std::size_t>(s.config_count(static_cast<int>(i))) *
                             s.cardinality(static_cast<int>(i)),
                         0.0);
    }
    for (const auto& row : rows) {
      const FamilyPosteriors post = family_posteriors(s, result.params, row);
      for (std::size_t i = 0; i < s.size(); ++i) {
        const int r = s.cardinality(static_cast<int>(i));
        for (std::int64_t j = 0; j < s.config_count(static_cast<int>(i)); ++j) {
          for (int k = 0; k < r; ++k) {
            expected[i][j * r + k] += post.at(static_cast<int>(i), j, k);
          }
        }
      }
    }

    // M-step.
    std::vector<std::vector<double>> cells(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      const int r = s.cardinality(static_cast<int>(i));
      cells[i].resize(expected[i].size());
      for (std::int64_t j = 0; j < s.config_count(static_cast<int>(i)); ++j) {
        double mass = 0.0;
        for (int k = 0; k < r; ++k) {
          double m = expected[i][j * r + k];
          if (mode == FitMode::kMap) m += priors.alpha(static_cast<int>(i), j, k);
          cells[i][j * r + k] = m;
          mass += m;
        }
        if (!(mass > 0.0)) {
          fail("ZeroFamilyMass",
               "family '" + s.variable(static_cast<int>(i)).name + "', configuration " +
                   std::to_string(j) +
                   " received no expected mass; its ML row is undefined");
        }
        for (int k = 0; k < r; ++k) cells[i][j * r + k] /= mass;
      }
    }
    result.params = ParameterSet::from_rows(s, cells);
    result.iterations = it + 1;
    result.objective.push_back(detail::em_objective(s, priors, rows, result.params, mode));

    const double prev = result.objective[result.objective.size() - 2];
    const double cur = result.objective.back();
    if (cur - prev < tolerance * std::max(1.0, std::abs(cur))) {
      result.converged = true;
      break;
    }
  }
  return result;
}

// Rao-Blackwellized Gibbs estimate of the parameter posterior's mean, with
// per-cell Monte-Carlo standard errors from batch means.
struct GibbsSummary {
  std::vector<std::vector<double>> mean;            // per family, (j, k) flattened
  std::vector<std::vector<double>> standard_error;  // same shape
  int iterations = 0;
  int burn_in = 0;
  std::uint64_t seed = 0;
  std::string missing_init = "prior-predictive";
  std::string rng_algorithm = "mt19937_64";

  double mean_at(const NetworkStructure& s, int i, std::int64_t j, int k) const {
    return mean[i][j * s.cardinality(i) + k];
  }
  double se_at(const NetworkStructure& s, int i, std::int64_t j, int k) const {
    return standard_error[i][j * s.cardinality(i) + k];
  }
};

// Gibbs sampling over the missing entries.  Each scan deterministically
// rotates through the cases and variables, resampling every missing entry
// from its complete-data conditional (a ratio of Dirichlet-multinomial
// predictive terms over the affected families).  After burn-in, each scan
// contributes the exact complete-data posterior means, whose running average
// is returned.  On complete data no stochastic branch executes and the result
// equals the exact posterior means with zero standard error.
inline GibbsSummary gibbs_posterior(const NetworkStructure& s, const DirichletSpec& priors,
                                    const DataSet& data, int iterations, int burn_in,
                                    std::uint64_t seed) {
  if (!priors.shape_matches(s)) fail("ShapeMismatch", "priors must match the structure");
  if (iterations <= burn_in) fail("InvalidSchedule", "iterations must exceed burn-in");
  const std::vector<int> col = data.align_to(s);
  std::vector<std::vector<int>> rows;
  rows.reserve(data.case_count());
  std::vector<std::pair<int, int>> missing;  // (case, variable)
  for (std::size_t l = 0; l < data.case_count(); ++l) {
    rows.push_back(data.aligned_row(col, l));
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (rows[l][i] == kMissing) missing.emplace_back(static_cast<int>(l), static_cast<int>(i));
    }
  }

  GibbsSummary summary;
  summary.iterations = iterations;
  summary.burn_in = burn_in;
  summary.seed = seed;

  auto posterior_means = [&](const FamilyCounts& counts) {
    std::vector<std::vector<double>> mean(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      const int r = s.cardinality(static_cast<int>(i));
      mean[i].resize(static_cast<std::size_t>(s.config_count(static_cast<int>(i))) * r);
      for (std::int64_t j = 0; j < s.config_count(static_cast<int>(i)); ++j) {
        double total = priors.row_total(static_cast<int>(i), j) +
                       static_cast<double>(counts.row_total(static_cast<int>(i), j));
        for (int k = 0; k < r; ++k) {
          mean[i][j * r + k] = (priors.alpha(static_cast<int>(i), j, k) +
                                static_cast<double>(counts.count(static_cast<int>(i), j, k))) /
                               total;
        }
      }
    }
    return mean;
  };

  if (missing.empty()) {
    // Complete data: the posterior is exact, nothing to sample.
    const FamilyCounts counts = count_sufficient_stats(s, data);
    summary.mean = posterior_means(counts);
    summary.standard_error = summary.mean;
    for (auto& fam : summary.standard_error) std::fill(fam.begin(), fam.end(), 0.0);
    return summary;
  }

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    0x67b6cf21u};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto sample_from = [&](std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) {
      fail("ZeroCompletionProbability", "a missing entry admits no positive-probability state");
    }
    double u = unit(rng) * total;
    for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
      if (u < weights[k]) return static_cast<int>(k);
      u -= weights[k];
    }
    return static_cast<int>(weights.size() - 1);
  };

  // Initialize missing entries by sampling the variable's prior-predictive
  // given its parents, in topological order so parents are filled first.
  for (auto& row : rows) {
    for (int i : s.topological_order()) {
      if (row[i] != kMissing) continue;
      const std::int64_t j = parent_config_index(s, i, row);
      const std::vector<double> pred = dirichlet_predictive(priors, i, j);
      row[i] = sample_from(pred);
    }
  }

  FamilyCounts counts(s);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      ++counts.count(static_cast<int>(i), parent_config_index(s, static_cast<int>(i), row),
                     row[i]);
    }
  }

  // Accumulators: overall mean plus batch means for the standard error.
  const int kept = iterations - burn_in;
  const int batches = std::min(30, kept);
  std::vector<std::vector<double>> sum(s.size()), batch_sum(s.size());
  std::vector<std::vector<std::vector<double>>> batch_means;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::size_t cells = static_cast<std::size_t>(s.config_count(static_cast<int>(i))) *
                              s.cardinality(static_cast<int>(i));
    sum[i].assign(cells, 0.0);
    batch_sum[i].assign(cells, 0.0);
  }
  int in_batch = 0;
  const int batch_size = (kept + batches - 1) / batches;

  for (int scan = 0; scan < iterations; ++scan) {
    for (const auto& [l, i] : missing) {
      auto& row = rows[l];
      // Remove this case's contribution to the families the entry touches.
      const std::vector<int> kids = s.children(i);
      const std::int64_t j_self = parent_config_index(s, i, row);
      --counts.count(i, j_self, row[i]);
      for (int c : kids) --counts.count(c, parent_config_index(s, c, row), row[c]);

      const int r = s.cardinality(i);
      std::vector<double> weight(r);
      for (int k = 0; k < r; ++k) {
        row[i] = k;
        double w = priors.alpha(i, j_self, k) + static_cast<double>(counts.count(i, j_self, k));
        for (int c : kids) {
          const std::int64_t jc = parent_config_index(s, c, row);
          w *= (priors.alpha(c, jc, row[c]) + static_cast<double>(counts.count(c, jc, row[c]))) /
               (priors.row_total(c, jc) + static_cast<double>(counts.row_total(c, jc)));
        }
        weight[k] = w;
      }
      row[i] = sample_from(weight);

      ++counts.count(i, j_self, row[i]);
      for (int c : kids) ++counts.count(c, parent_config_index(s, c, row), row[c]);
    }

    if (scan < burn_in) continue;
    const std::vector<std::vector<double>> mean = posterior_means(counts);
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t t = 0; t < mean[i].size(); ++t) {
        sum[i][t] += mean[i][t];
        batch_sum[i][t] += mean[i][t];
      }
    }
    if (++in_batch == batch_size || scan + 1 == iterations) {
      std::vector<std::vector<double>> bm(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) {
        bm[i].resize(batch_sum[i].size());
        for (std::size_t t = 0; t < batch_sum[i].size(); ++t) {
          bm[i][t] = batch_sum[i][t] / in_batch;
          batch_sum[i][t] = 0.0;
        }
      }
      batch_means.push_back(std::move(bm));
      in_batch = 0;
    }
  }

  summary.mean.resize(s.size());
  summary.standard_error.resize(s.size());
  const std::size_t b = batch_means.size();
  for (std::size_t i = 0; i < s.size(); ++i) {
    summary.mean[i].resize(sum[i].size());
    summary.standard_error[i].assign(sum[i].size(), 0.0);
    for (std::size_t t = 0; t < sum[i].size(); ++t) {
      summary.mean[i][t] = sum[i][t] / kept;
    }
    if (b > 1) {
      for (std::size_t t = 0; t < sum[i].size(); ++t) {
        double var = 0.0;
        for (const auto& bm : batch_means) {
          const double d = bm[i][t] - summary.mean[i][t];
          var += d * d;
        }
        summary.standard_error[i][t] = std::sqrt(var / (b * (b - 1.0)));
      }
    }
  }
  return summary;
}

// Exact posterior of one parameter row after a single (possibly incomplete)
// case: a mixture of Dirichlet rows with one unchanged-prior component of
// weight 1 - p(pa_i^j | y) and r_i incremented components of weight
// p(x_i^k, pa_i^j | y), probabilities evaluated at the prior means.
// Zero-weight components are dropped, so a fully observed family collapses to
// the single complete-data update.  Each further incomplete case would split
// every component again, growing the mixture exponentially, which is why this
// is deliberately a one-case primitive; use EM or Gibbs for whole datasets.
struct DirichletMixture {
  struct Component {
    double weight;
    std::vector<double> alpha_row;
  };
  std::vector<Component> components;

  std::vector<double> mean() const {
    if (components.empty()) return {};
    std::vector<double> m(components[0].alpha_row.size(), 0.0);
    for (const Component& c : components) {
      double total = 0.0;
      for (double a : c.alpha_row) total += a;
      for (std::size_t k = 0; k < m.size(); ++k) m[k] += c.weight * c.alpha_row[k] / total;
    }
    return m;
  }
};

inline DirichletMixture single_case_posterior(const NetworkStructure& s,
                                              const DirichletSpec& priors,
                                              std::span<const int> case_row, int i,
                                              std::int64_t j) {
  if (!priors.shape_matches(s)) fail("ShapeMismatch", "priors must match the structure");
  if (i < 0 || static_cast<std::size_t>(i) >= s.size() || j < 0 || j >= s.config_count(i)) {
    fail("InvalidIndex", "no family/configuration (" + std::to_string(i) + ", " +
                             std::to_string(j) + ")");
  }
  const ParameterSet prior_means = posterior_mean_parameters(s, priors);
  const FamilyPosteriors post = family_posteriors(s, prior_means, case_row);

  const int r = s.cardinality(i);
  std::vector<double> base(priors.row(i, j).begin(), priors.row(i, j).end());

  double config_mass = 0.0;
  for (int k = 0; k < r; ++k) config_mass += post.at(i, j, k);

  DirichletMixture mixture;
  const double unchanged = 1.0 - config_mass;
  if (unchanged > 0.0) mixture.components.push_back({unchanged, base});
  for (int k = 0; k < r; ++k) {
    const double w = post.at(i, j, k);
    if (w > 0.0) {
      std::vector<double> bumped = base;
      bumped[k] += 1.0;
      mixture.components.push_back({w, std::move(bumped)});
    }
  }
  return mixture;
}

}  // namespace bayesnet

#endif  // BAYESNET_INCOMPLETE_HPP_
