#ifndef BAYESNET_CLI_HPP_
#define BAYESNET_CLI_HPP_

// Command-line surface.  run_cli() does all the work against caller-supplied
// streams so tests can capture reports byte-for-byte; tools/bnet.cpp is a
// thin main() around it.
//
// Subcommands: score, learn-params, learn-structure, em, gibbs, infer,
// average, equiv, export-dot.  Reports are plain text with fixed formatting:
// probabilities to 4 decimals, log scores to 6.  Stochastic commands require
// an explicit --seed so identical invocations produce identical bytes.

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bayesnet/core.hpp"
#include "bayesnet/error.hpp"
#include "bayesnet/incomplete.hpp"
#include "bayesnet/inference.hpp"
#include "bayesnet/io.hpp"
#include "bayesnet/param_learn.hpp"
#include "bayesnet/scoring.hpp"
#include "bayesnet/search.hpp"

namespace bayesnet {
namespace cli {

inline std::string fmt_prob(double p) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4) << p;
  return out.str();
}

inline std::string fmt_log(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(6) << v;
  return out.str();
}

inline Evidence parse_bindings(const std::string& text) {
  Evidence ev;
  if (text.empty()) return ev;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
      fail("ParseError", "expected Name=state, got '" + item + "'");
    }
    ev.set(item.substr(0, eq), item.substr(eq + 1));
  }
  return ev;
}

inline std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> names;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) names.push_back(item);
  }
  return names;
}

// Full assignment row in structure order from Name=state bindings.
inline std::vector<int> parse_full_assignment(const NetworkStructure& s,
                                              const std::string& text) {
  const Evidence ev = parse_bindings(text);
  std::vector<int> row = ev.to_row(s);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (row[i] == kMissing) {
      fail("MissingValue",
           "assignment is missing '" + s.variable(static_cast<int>(i)).name + "'");
    }
  }
  return row;
}

// Arcless prior network with uniform CPTs over the given variables: the
// default p(x | S_c) when no --prior-net is supplied.
inline NetworkDocument uniform_prior_network(const std::vector<VariableSpec>& variables) {
  NetworkStructure structure(variables,
                             std::vector<std::vector<std::string>>(variables.size()));
  ParameterSet params = ParameterSet::uniform(structure);
  return NetworkDocument{std::move(structure), std::move(params)};
}

inline DataSet load_dataset(const std::string& csv_path, const std::string& counts_path,
                            const std::vector<VariableSpec>& schema,
                            const std::string& missing_marker) {
  if (!csv_path.empty() && !counts_path.empty()) {
    fail("ParseError", "give either --data or --counts, not both");
  }
  if (!csv_path.empty()) return load_csv(csv_path, schema, missing_marker);
  if (!counts_path.empty()) return load_counts_table(counts_path);
  fail("ParseError", "a dataset is required (--data or --counts)");
}

inline void print_structure(std::ostream& out, const NetworkStructure& s,
                            const std::string& indent = "  ") {
  std::vector<std::string> arcs;
  for (std::size_t c = 0; c < s.size(); ++c) {
    for (int p : s.parents(static_cast<int>(c))) {
      arcs.push_back(s.variable(p).name + " -> " + s.variable(static_cast<int>(c)).name);
    }
  }
  std::sort(arcs.begin(), arcs.end());
  if (arcs.empty()) {
    out << indent << "(no arcs)\n";
  } else {
    for (const std::string& a : arcs) out << indent << a << "\n";
  }
}

inline void print_cpts(std::ostream& out, const NetworkStructure& s, const ParameterSet& params) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    const VariableSpec& v = s.variable(static_cast<int>(i));
    for (std::int64_t j = 0; j < s.config_count(static_cast<int>(i)); ++j) {
      out << "  p(" << v.name;
      const auto& ps = s.parents(static_cast<int>(i));
      if (!ps.empty()) {
        const std::vector<int> states = parent_config_states(s, static_cast<int>(i), j);
        out << " | ";
        for (std::size_t t = 0; t < ps.size(); ++t) {
          out << (t ? ", " : "") << s.variable(ps[t]).name << "="
              << s.variable(ps[t]).states[states[t]];
        }
      }
      out << ") =";
      for (int k = 0; k < v.cardinality(); ++k) {
        out << " " << v.states[k] << ":" << fmt_prob(params.theta(static_cast<int>(i), j, k));
      }
      out << "\n";
    }
  }
}

inline ScoreReport score_network(const NetworkDocument& net, const NetworkDocument& prior_net,
                                 double ess, const StructurePrior& structure_prior,
                                 const DataSet& data) {
  BdePriorInputs inputs{ess, prior_net.structure,
                        prior_net.params ? *prior_net.params
                                         : ParameterSet::uniform(prior_net.structure)};
  const DirichletSpec priors = bde_priors(inputs, net.structure);
  const FamilyCounts counts = count_sufficient_stats(net.structure, data);
  return log_posterior_score(net.structure, structure_prior, priors, counts);
}

struct CommonOptions {
  std::vector<std::string> network_paths;
  std::string data_path;
  std::string counts_path;
  std::string prior_net_path;
  std::string missing_marker = "?";
  double ess = 1.0;
};

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"discrete Bayesian-network learning toolkit", "bnet"};
  app.require_subcommand(1);

  CommonOptions opt;
  std::string structure_prior_kind = "uniform";
  double kappa = 0.5;
  std::string ordering_text;
  std::string forbid_parents_text, require_leaf_text, allowed_arcs_text;
  int max_parents = -1;
  std::string evidence_text, target_text, assignment_text;
  std::string out_path, other_path, init_path;
  std::string mode_text = "ml", init_text = "prior-means";
  double tolerance = 1e-6;
  int max_iterations = 200;
  int restarts = 8, perturbation = 3;
  int iterations = 10000, burn_in = 1000;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string method = "greedy";
  AnnealingSchedule schedule;

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option_function<std::uint64_t>(
           "--seed",
           [&](const std::uint64_t& v) {
             seed = v;
             seed_given = true;
           },
           "RNG seed (mt19937_64)");
  };
  auto add_data = [&](CLI::App* cmd) {
    cmd->add_option("--data", opt.data_path, "CSV dataset");
    cmd->add_option("--counts", opt.counts_path, "counts-table dataset");
    cmd->add_option("--missing-marker", opt.missing_marker, "missing-entry marker")
        ->capture_default_str();
  };
  auto add_priors = [&](CLI::App* cmd) {
    cmd->add_option("--ess", opt.ess, "equivalent sample size")->capture_default_str();
    cmd->add_option("--prior-net", opt.prior_net_path,
                    "prior network document (default: uniform joint)");
  };
  auto add_structure_prior = [&](CLI::App* cmd) {
    cmd->add_option("--structure-prior", structure_prior_kind, "uniform or per-arc")
        ->capture_default_str();
    cmd->add_option("--kappa", kappa, "per-arc presence probability")->capture_default_str();
    cmd->add_option("--ordering", ordering_text, "variable ordering for the per-arc prior");
    cmd->add_option("--forbid-parents", forbid_parents_text,
                    "variables that may not have parents");
    cmd->add_option("--require-leaf", require_leaf_text,
                    "variables that may not have children");
    cmd->add_option("--allowed-arcs", allowed_arcs_text,
                    "whitelist of arcs Parent>Child,Parent>Child");
    cmd->add_option("--max-parents", max_parents, "parent-set size cap");
  };

  CLI::App* score_cmd = app.add_subcommand("score", "score structures against data");
  score_cmd->add_option("--network", opt.network_paths, "structure document(s)")->required();
  add_data(score_cmd);
  add_priors(score_cmd);
  add_structure_prior(score_cmd);

  CLI::App* learn_params_cmd =
      app.add_subcommand("learn-params", "posterior CPTs for a fixed structure");
  learn_params_cmd->add_option("--network", opt.network_paths, "structure document")
      ->required();
  add_data(learn_params_cmd);
  add_priors(learn_params_cmd);
  learn_params_cmd->add_option("--out", out_path, "write the fitted network document here");

  CLI::App* learn_structure_cmd =
      app.add_subcommand("learn-structure", "score-based structure search");
  add_data(learn_structure_cmd);
  add_priors(learn_structure_cmd);
  add_structure_prior(learn_structure_cmd);
  learn_structure_cmd->add_option("--init", init_path,
                                  "initial structure document (default: empty graph)");
  learn_structure_cmd->add_option("--restarts", restarts, "random restarts after the first pass")
      ->capture_default_str();
  learn_structure_cmd->add_option("--perturb", perturbation, "random changes per restart")
      ->capture_default_str();
  learn_structure_cmd->add_option("--method", method, "greedy or anneal")->capture_default_str();
  learn_structure_cmd->add_option("--anneal-t0", schedule.initial_temperature,
                                  "initial temperature");
  learn_structure_cmd->add_option("--anneal-trials", schedule.trials_per_temperature,
                                  "trials per temperature");
  learn_structure_cmd->add_option("--anneal-max-accepts", schedule.max_accepts_per_temperature,
                                  "accepted changes per temperature");
  learn_structure_cmd->add_option("--anneal-decay", schedule.decay, "temperature decay factor");
  learn_structure_cmd->add_option("--anneal-max-reductions", schedule.max_reductions,
                                  "temperature reductions before stopping");
  add_seed(learn_structure_cmd);
  learn_structure_cmd->add_option("--out", out_path, "write the best structure document here");

  CLI::App* em_cmd = app.add_subcommand("em", "EM parameter fitting with missing data");
  em_cmd->add_option("--network", opt.network_paths, "structure document")->required();
  add_data(em_cmd);
  add_priors(em_cmd);
  em_cmd->add_option("--mode", mode_text, "ml or map")->capture_default_str();
  em_cmd->add_option("--init", init_text, "uniform, prior-means, or random")
      ->capture_default_str();
  em_cmd->add_option("--tolerance", tolerance, "relative objective tolerance")
      ->capture_default_str();
  em_cmd->add_option("--max-iterations", max_iterations, "iteration cap")->capture_default_str();
  add_seed(em_cmd);
  em_cmd->add_option("--out", out_path, "write the fitted network document here");

  CLI::App* gibbs_cmd = app.add_subcommand("gibbs", "Gibbs posterior summaries");
  gibbs_cmd->add_option("--network", opt.network_paths, "structure document")->required();
  add_data(gibbs_cmd);
  add_priors(gibbs_cmd);
  gibbs_cmd->add_option("--iterations", iterations, "total scans")->capture_default_str();
  gibbs_cmd->add_option("--burn-in", burn_in, "scans discarded before averaging")
      ->capture_default_str();
  add_seed(gibbs_cmd);

  CLI::App* infer_cmd = app.add_subcommand("infer", "exact conditional query");
  infer_cmd->add_option("--network", opt.network_paths, "network document with CPTs")
      ->required();
  infer_cmd->add_option("--evidence", evidence_text, "Name=state,...");
  infer_cmd->add_option("--target", target_text,
                        "target variable(s); default: all unobserved variables");

  CLI::App* average_cmd =
      app.add_subcommand("average", "model-averaged prediction over structures");
  average_cmd->add_option("--network", opt.network_paths, "structure documents")->required();
  add_data(average_cmd);
  add_priors(average_cmd);
  average_cmd->add_option("--assignment", assignment_text, "full next case Name=state,...")
      ->required();

  CLI::App* equiv_cmd = app.add_subcommand("equiv", "independence-equivalence utilities");
  equiv_cmd->add_option("--network", opt.network_paths, "structure document")->required();
  equiv_cmd->add_option("--other", other_path, "second structure to compare against");

  CLI::App* export_cmd = app.add_subcommand("export-dot", "DOT digraph of the structure");
  export_cmd->add_option("--network", opt.network_paths, "structure document")->required();
  export_cmd->add_option("--out", out_path, "output path (default: stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    auto make_structure_prior = [&](const std::vector<VariableSpec>&) {
      StructurePrior prior;
      if (structure_prior_kind == "per-arc") {
        prior = StructurePrior::per_arc(kappa, split_names(ordering_text));
      } else if (structure_prior_kind != "uniform") {
        fail("ParseError", "unknown structure prior '" + structure_prior_kind + "'");
      }
      prior.constraints.forbid_parents = split_names(forbid_parents_text);
      prior.constraints.require_leaf = split_names(require_leaf_text);
      if (max_parents >= 0) prior.constraints.max_parents = max_parents;
      if (!allowed_arcs_text.empty()) {
        std::vector<std::pair<std::string, std::string>> arcs;
        for (const std::string& item : split_names(allowed_arcs_text)) {
          const std::size_t gt = item.find('>');
          if (gt == std::string::npos) {
            fail("ParseError", "expected Parent>Child, got '" + item + "'");
          }
          arcs.emplace_back(item.substr(0, gt), item.substr(gt + 1));
        }
        prior.constraints.allowed_arcs = std::move(arcs);
      }
      return prior;
    };

    auto prior_network_for = [&](const std::vector<VariableSpec>& variables) {
      if (opt.prior_net_path.empty()) return uniform_prior_network(variables);
      NetworkDocument doc = load_network(opt.prior_net_path);
      if (!doc.params) {
        fail("InvariantViolation",
             "prior network '" + opt.prior_net_path + "' carries no CPTs");
      }
      return doc;
    };

    if (*score_cmd) {
      std::vector<NetworkDocument> nets;
      for (const std::string& path : opt.network_paths) nets.push_back(load_network(path));
      const DataSet data = load_dataset(opt.data_path, opt.counts_path,
                                        nets[0].structure.variables(), opt.missing_marker);
      const NetworkDocument prior_net = prior_network_for(nets[0].structure.variables());
      const StructurePrior structure_prior =
          make_structure_prior(nets[0].structure.variables());

      std::vector<double> totals;
      for (std::size_t m = 0; m < nets.size(); ++m) {
        const ScoreReport report =
            score_network(nets[m], prior_net, opt.ess, structure_prior, data);
        totals.push_back(report.total);
        out << "network: " << opt.network_paths[m] << "\n";
        out << "  log structure prior     " << fmt_log(report.log_prior) << "\n";
        out << "  log marginal likelihood " << fmt_log(report.log_marginal) << "\n";
        out << "  log posterior score     " << fmt_log(report.total) << "\n";
        out << "  per-family components:\n";
        for (std::size_t i = 0; i < report.per_family.size(); ++i) {
          out << "    " << nets[m].structure.variable(static_cast<int>(i)).name << " "
              << fmt_log(report.per_family[i]) << "\n";
        }
      }
      if (nets.size() > 1) {
        const std::vector<double> w = posterior_weights(totals);
        out << "posterior over the " << nets.size() << " supplied structures:\n";
        for (std::size_t m = 0; m < nets.size(); ++m) {
          out << "  " << opt.network_paths[m] << " " << fmt_prob(w[m]) << "\n";
        }
      }
      return 0;
    }

    if (*learn_params_cmd) {
      NetworkDocument net = load_network(opt.network_paths[0]);
      const DataSet data = load_dataset(opt.data_path, opt.counts_path,
                                        net.structure.variables(), opt.missing_marker);
      const NetworkDocument prior_net = prior_network_for(net.structure.variables());
      BdePriorInputs inputs{opt.ess, prior_net.structure, *prior_net.params};
      const DirichletSpec prior = bde_priors(inputs, net.structure);
      const DirichletSpec posterior =
          dirichlet_update(prior, count_sufficient_stats(net.structure, data));
      const ParameterSet params = posterior_mean_parameters(net.structure, posterior);
      out << "posterior-mean parameters (" << data.case_count() << " cases, ess "
          << fmt_prob(opt.ess) << "):\n";
      print_cpts(out, net.structure, params);
      if (!out_path.empty()) {
        save_network(out_path, NetworkDocument{net.structure, params});
        out << "wrote " << out_path << "\n";
      }
      return 0;
    }

    if (*learn_structure_cmd) {
      DataSet data = [&] {
        if (!opt.counts_path.empty()) return load_counts_table(opt.counts_path);
        if (opt.data_path.empty()) fail("ParseError", "a dataset is required (--data or --counts)");
        if (opt.network_paths.empty() && init_path.empty()) {
          fail("ParseError", "--data needs --init or --network to supply the schema");
        }
        const NetworkDocument schema_doc =
            load_network(!init_path.empty() ? init_path : opt.network_paths[0]);
        return load_csv(opt.data_path, schema_doc.structure.variables(), opt.missing_marker);
      }();
      if (!seed_given) fail("ParseError", "learn-structure requires --seed");

      const std::vector<VariableSpec> variables = data.schema();
      const NetworkDocument prior_net = prior_network_for(variables);
      const StructurePrior structure_prior = make_structure_prior(variables);
      const NetworkStructure init =
          init_path.empty()
              ? NetworkStructure(variables,
                                 std::vector<std::vector<std::string>>(variables.size()))
              : load_network(init_path).structure;
      BdeFamilyPrior prior_builder(opt.ess, prior_net.structure, *prior_net.params);

      SearchOutcome outcome = [&] {
        if (method == "greedy") {
          return greedy_search(data, prior_builder, structure_prior, init, restarts,
                               perturbation, seed);
        }
        if (method == "anneal") {
          return simulated_annealing(data, prior_builder, structure_prior, init, schedule, seed);
        }
        fail("ParseError", "unknown method '" + method + "'");
      }();

      out << "best structure (restart " << outcome.best_restart << ", seed " << outcome.seed
          << ", rng " << outcome.rng_algorithm << "):\n";
      print_structure(out, outcome.best);
      out << "  log structure prior     " << fmt_log(outcome.best_report.log_prior) << "\n";
      out << "  log marginal likelihood " << fmt_log(outcome.best_report.log_marginal) << "\n";
      out << "  log posterior score     " << fmt_log(outcome.best_report.total) << "\n";
      out << "  per-family components:\n";
      for (std::size_t i = 0; i < outcome.best_report.per_family.size(); ++i) {
        out << "    " << outcome.best.variable(static_cast<int>(i)).name << " "
            << fmt_log(outcome.best_report.per_family[i]) << "\n";
      }
      out << "  applied changes " << outcome.trace.size() << " (best after "
          << outcome.best_trace_length << ")\n";
      if (!out_path.empty()) {
        save_network(out_path, NetworkDocument{outcome.best, std::nullopt});
        out << "wrote " << out_path << "\n";
      }
      return 0;
    }

    if (*em_cmd) {
      NetworkDocument net = load_network(opt.network_paths[0]);
      const DataSet data = load_dataset(opt.data_path, opt.counts_path,
                                        net.structure.variables(), opt.missing_marker);
      const NetworkDocument prior_net = prior_network_for(net.structure.variables());
      BdePriorInputs inputs{opt.ess, prior_net.structure, *prior_net.params};
      const DirichletSpec priors = bde_priors(inputs, net.structure);

      FitMode mode;
      if (mode_text == "ml") {
        mode = FitMode::kMl;
      } else if (mode_text == "map") {
        mode = FitMode::kMap;
      } else {
        fail("ParseError", "unknown mode '" + mode_text + "'");
      }
      EmInit init;
      if (init_text == "uniform") {
        init = EmInit::kUniform;
      } else if (init_text == "prior-means") {
        init = EmInit::kPriorMeans;
      } else if (init_text == "random") {
        init = EmInit::kRandom;
        if (!seed_given) fail("ParseError", "--init random requires --seed");
      } else {
        fail("ParseError", "unknown init policy '" + init_text + "'");
      }

      const EmResult result =
          em_fit(net.structure, priors, data, mode, init, tolerance, max_iterations, seed);
      out << "em " << (mode == FitMode::kMl ? "ml" : "map") << ": " << result.iterations
          << " iterations, " << (result.converged ? "converged" : "iteration cap reached")
          << "\n";
      out << "objective trace:\n";
      for (std::size_t t = 0; t < result.objective.size(); ++t) {
        out << "  " << t << " " << fmt_log(result.objective[t]) << "\n";
      }
      out << "fitted parameters:\n";
      print_cpts(out, net.structure, result.params);
      if (!out_path.empty()) {
        save_network(out_path, NetworkDocument{net.structure, result.params});
        out << "wrote " << out_path << "\n";
      }
      return 0;
    }

    if (*gibbs_cmd) {
      NetworkDocument net = load_network(opt.network_paths[0]);
      const DataSet data = load_dataset(opt.data_path, opt.counts_path,
                                        net.structure.variables(), opt.missing_marker);
      const NetworkDocument prior_net = prior_network_for(net.structure.variables());
      BdePriorInputs inputs{opt.ess, prior_net.structure, *prior_net.params};
      const DirichletSpec priors = bde_priors(inputs, net.structure);
      if (!seed_given) fail("ParseError", "gibbs requires --seed");

      const GibbsSummary summary =
          gibbs_posterior(net.structure, priors, data, iterations, burn_in, seed);
      out << "gibbs posterior means (" << summary.iterations << " iterations, burn-in "
          << summary.burn_in << ", seed " << summary.seed << ", rng "
          << summary.rng_algorithm << ", missing-init " << summary.missing_init << "):\n";
      const NetworkStructure& s = net.structure;
      for (std::size_t i = 0; i < s.size(); ++i) {
        const VariableSpec& v = s.variable(static_cast<int>(i));
        for (std::int64_t j = 0; j < s.config_count(static_cast<int>(i)); ++j) {
          out << "  " << v.name << " config " << j << ":";
          for (int k = 0; k < v.cardinality(); ++k) {
            out << " " << v.states[k] << ":"
                << fmt_prob(summary.mean_at(s, static_cast<int>(i), j, k)) << "(se "
                << fmt_prob(summary.se_at(s, static_cast<int>(i), j, k)) << ")";
          }
          out << "\n";
        }
      }
      return 0;
    }

    if (*infer_cmd) {
      NetworkDocument net = load_network(opt.network_paths[0]);
      if (!net.params) {
        fail("InvariantViolation",
             "network '" + opt.network_paths[0] + "' carries no CPTs; infer needs them");
      }
      const Evidence evidence = parse_bindings(evidence_text);
      std::vector<std::string> targets = split_names(target_text);
      if (targets.empty()) {
        for (std::size_t i = 0; i < net.structure.size(); ++i) {
          const std::string& name = net.structure.variable(static_cast<int>(i)).name;
          if (!evidence.values().count(name)) targets.push_back(name);
        }
      }
      const QueryResult result = query(net.structure, *net.params, targets, evidence);
      out << "p(evidence) = " << fmt_prob(result.evidence_probability) << " (log "
          << fmt_log(std::log(result.evidence_probability)) << ")\n";
      out << "p(";
      for (std::size_t t = 0; t < targets.size(); ++t) out << (t ? "," : "") << targets[t];
      out << " | evidence):\n";
      std::vector<int> state(targets.size(), 0);
      for (std::size_t idx = 0; idx < result.table.size(); ++idx) {
        out << "  ";
        for (std::size_t t = 0; t < targets.size(); ++t) {
          const int var = result.target_index[t];
          out << (t ? "," : "") << net.structure.variable(var).states[state[t]];
        }
        out << " " << fmt_prob(result.table[idx]) << "\n";
        for (std::size_t t = targets.size(); t-- > 0;) {
          if (++state[t] < result.target_cardinality[t]) break;
          state[t] = 0;
        }
      }
      return 0;
    }

    if (*average_cmd) {
      std::vector<NetworkDocument> nets;
      for (const std::string& path : opt.network_paths) nets.push_back(load_network(path));
      const DataSet data = load_dataset(opt.data_path, opt.counts_path,
                                        nets[0].structure.variables(), opt.missing_marker);
      const NetworkDocument prior_net = prior_network_for(nets[0].structure.variables());

      std::vector<ScoredModel> models;
      for (NetworkDocument& net : nets) {
        BdePriorInputs inputs{opt.ess, prior_net.structure, *prior_net.params};
        const DirichletSpec prior = bde_priors(inputs, net.structure);
        const FamilyCounts counts = count_sufficient_stats(net.structure, data);
        const BdScore score = bd_log_marginal(net.structure, prior, counts);
        models.push_back({net.structure, dirichlet_update(prior, counts), score.total});
      }
      std::vector<double> scores;
      for (const ScoredModel& m : models) scores.push_back(m.log_score);
      const std::vector<double> weights = posterior_weights(scores);
      out << "posterior weights (uniform structure prior):\n";
      for (std::size_t m = 0; m < models.size(); ++m) {
        out << "  " << opt.network_paths[m] << " " << fmt_prob(weights[m]) << " (log score "
            << fmt_log(models[m].log_score) << ")\n";
      }
      const std::vector<int> row = parse_full_assignment(nets[0].structure, assignment_text);
      const double p = model_average_predict(models, row);
      out << "averaged next-case probability: " << fmt_prob(p) << " (log "
          << fmt_log(std::log(p)) << ")\n";
      return 0;
    }

    if (*equiv_cmd) {
      NetworkDocument net = load_network(opt.network_paths[0]);
      if (!other_path.empty()) {
        NetworkDocument other = load_network(other_path);
        const bool eq = independence_equivalent(net.structure, other.structure);
        out << "independence equivalent: " << (eq ? "yes" : "no") << "\n";
        return 0;
      }
      const std::vector<NetworkStructure> members =
          enumerate_equivalence_class(net.structure);
      out << "equivalence class size: " << members.size() << "\n";
      for (std::size_t m = 0; m < members.size(); ++m) {
        out << "member " << (m + 1) << ":\n";
        print_structure(out, members[m]);
      }
      const auto compelled = compelled_edges(net.structure);
      out << "compelled edges (causal candidates under the causal Markov condition, "
             "assuming no hidden variables and no selection bias):\n";
      if (compelled.empty()) {
        out << "  (none)\n";
      } else {
        for (const auto& [p, c] : compelled) out << "  " << p << " -> " << c << "\n";
      }
      return 0;
    }

    if (*export_cmd) {
      NetworkDocument net = load_network(opt.network_paths[0]);
      const std::string dot = export_dot(net.structure);
      if (out_path.empty()) {
        out << dot;
      } else {
        std::ofstream file(out_path, std::ios::binary);
        if (!file) fail("ParseError", "cannot open '" + out_path + "' for writing");
        file << dot;
        out << "wrote " << out_path << "\n";
      }
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << "usage error: no subcommand\n";
  return 2;
}

}  // namespace cli

// argv-style entry point (argv[0] is the program name).
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int a = 1; a < argc; ++a) args.emplace_back(argv[a]);
  return cli::run(std::move(args), out, err);
}

}  // namespace bayesnet

#endif  // BAYESNET_CLI_HPP_
