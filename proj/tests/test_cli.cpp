#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "bayesnet/cli.hpp"
#include "testutil.hpp"

using namespace bayesnet;
using testutil::data_path;

namespace {

struct CliResult {
  int status;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int status = cli::run(std::move(args), out, err);
  return {status, out.str(), err.str()};
}

TEST(Cli, ScoreFraudPairReportsPosteriors) {
  const CliResult r = run({"score", "--network", data_path("fraud_s1.json"), "--network",
                           data_path("fraud_s2.json"), "--data", data_path("fraud.csv"),
                           "--ess", "10", "--prior-net", data_path("fraud_prior.json")});
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("0.2582"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("0.7418"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("log marginal likelihood"), std::string::npos);
}

TEST(Cli, InferProducesNormalizedTable) {
  const CliResult r = run({"infer", "--network", data_path("fraud_prior.json"), "--evidence",
                           "Age=30-50,Sex=male,Gas=yes,Jewelry=yes", "--target", "Fraud"});
  EXPECT_EQ(r.status, 0) << r.err;
  // Parse the two probability lines and check the sum.
  std::istringstream in(r.out);
  std::string line;
  double total = 0.0;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.rfind("  yes ", 0) == 0 || line.rfind("  no ", 0) == 0) {
      total += std::stod(line.substr(line.rfind(' ')));
      ++rows;
    }
  }
  EXPECT_EQ(rows, 2);
  EXPECT_NEAR(total, 1.0, 1e-3);  // 4-decimal rounding
}

TEST(Cli, LearnStructureCollegePlans) {
  const CliResult r = run({"learn-structure", "--counts", data_path("college_plans.tab"),
                           "--ess", "5", "--forbid-parents", "SEX,SES", "--require-leaf",
                           "CP", "--restarts", "4", "--seed", "1"});
  EXPECT_EQ(r.status, 0) << r.err;
  // Known best structure over the constrained space.
  EXPECT_NE(r.out.find("PE -> IQ"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("SEX -> PE"), std::string::npos);
  EXPECT_NE(r.out.find("SES -> IQ"), std::string::npos);
  EXPECT_NE(r.out.find("SES -> PE"), std::string::npos);
  EXPECT_NE(r.out.find("SES -> CP"), std::string::npos);
  EXPECT_NE(r.out.find("IQ -> CP"), std::string::npos);
  EXPECT_NE(r.out.find("PE -> CP"), std::string::npos);
  EXPECT_EQ(r.out.find("SEX -> IQ"), std::string::npos);
  EXPECT_EQ(r.out.find("SEX -> CP"), std::string::npos);
}

TEST(Cli, LearnStructureRequiresSeed) {
  const CliResult r = run({"learn-structure", "--counts", data_path("college_plans.tab"),
                           "--ess", "5"});
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("--seed"), std::string::npos);
}

TEST(Cli, DeterministicReports) {
  const std::vector<std::string> args{
      "learn-structure", "--counts", data_path("college_plans.tab"), "--ess", "5",
      "--forbid-parents", "SEX,SES", "--require-leaf", "CP", "--restarts", "3",
      "--seed", "42"};
  const CliResult a = run(args);
  const CliResult b = run(args);
  EXPECT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.err, b.err);
}

TEST(Cli, GibbsRunsSeeded) {
  const CliResult r = run({"gibbs", "--network", data_path("fraud_s1.json"), "--data",
                           data_path("fraud.csv"), "--ess", "10", "--prior-net",
                           data_path("fraud_prior.json"), "--iterations", "50",
                           "--burn-in", "10", "--seed", "7"});
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("seed 7"), std::string::npos);
  EXPECT_NE(r.out.find("mt19937_64"), std::string::npos);
}

TEST(Cli, EmReportsTrace) {
  // Write a small incomplete dataset.
  const std::string csv_path = ::testing::TempDir() + "bnet_tmp_em.csv";
  {
    std::ofstream f(csv_path);
    f << "Fraud,Gas,Jewelry,Age,Sex\n";
    f << "no,?,no,30-50,female\n";
    f << "no,no,no,?,male\n";
    f << "yes,yes,yes,>50,male\n";
  }
  const CliResult r = run({"em", "--network", data_path("fraud_s1.json"), "--data", csv_path,
                           "--ess", "10", "--prior-net", data_path("fraud_prior.json"),
                           "--mode", "map"});
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("objective trace:"), std::string::npos);
  EXPECT_NE(r.out.find("fitted parameters:"), std::string::npos);
  std::remove(csv_path.c_str());
}

TEST(Cli, AverageMatchesPaperWeights) {
  const CliResult r = run({"average", "--network", data_path("fraud_s1.json"), "--network",
                           data_path("fraud_s2.json"), "--data", data_path("fraud.csv"),
                           "--ess", "10", "--prior-net", data_path("fraud_prior.json"),
                           "--assignment", "Fraud=no,Age=<30,Sex=male,Gas=no,Jewelry=no"});
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("0.2582"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("0.7418"), std::string::npos);
  EXPECT_NE(r.out.find("averaged next-case probability"), std::string::npos);
}

TEST(Cli, EquivListsClassAndCompelledEdges) {
  // Persist a collider, then ask for its class.
  const std::string path = ::testing::TempDir() + "bnet_tmp_collider.json";
  NetworkStructure collider = testutil::collider3();
  save_network(path, NetworkDocument{collider, std::nullopt});

  const CliResult r = run({"equiv", "--network", path});
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("equivalence class size: 1"), std::string::npos);
  EXPECT_NE(r.out.find("causal Markov condition"), std::string::npos);
  EXPECT_NE(r.out.find("X -> Y"), std::string::npos);
  EXPECT_NE(r.out.find("Z -> Y"), std::string::npos);
  std::remove(path.c_str());
}

TEST(Cli, EquivComparesTwoStructures) {
  const std::string chain_path = ::testing::TempDir() + "bnet_tmp_chain.json";
  const std::string fork_path = ::testing::TempDir() + "bnet_tmp_fork.json";
  save_network(chain_path, NetworkDocument{testutil::chain3(), std::nullopt});
  NetworkStructure fork({{"X", {"s0", "s1"}}, {"Y", {"s0", "s1"}}, {"Z", {"s0", "s1"}}},
                        {{"Y"}, {}, {"Y"}});
  save_network(fork_path, NetworkDocument{fork, std::nullopt});

  const CliResult r = run({"equiv", "--network", chain_path, "--other", fork_path});
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("independence equivalent: yes"), std::string::npos);
  std::remove(chain_path.c_str());
  std::remove(fork_path.c_str());
}

TEST(Cli, ExportDotWritesDigraph) {
  const CliResult r = run({"export-dot", "--network", data_path("fraud_s1.json")});
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("digraph"), std::string::npos);
  EXPECT_NE(r.out.find("\"Fraud\" -> \"Gas\";"), std::string::npos);
}

TEST(Cli, LearnParamsWritesDocument) {
  const std::string out_path = ::testing::TempDir() + "bnet_tmp_fitted.json";
  const CliResult r = run({"learn-params", "--network", data_path("fraud_s1.json"), "--data",
                           data_path("fraud.csv"), "--ess", "10", "--prior-net",
                           data_path("fraud_prior.json"), "--out", out_path});
  EXPECT_EQ(r.status, 0) << r.err;
  const NetworkDocument fitted = load_network(out_path);
  ASSERT_TRUE(fitted.params.has_value());
  EXPECT_TRUE(fitted.structure.same_arcs(testutil::fraud_s1().structure));
  std::remove(out_path.c_str());
}

TEST(Cli, UsageErrorsExitNonzeroWithDiagnostic) {
  const CliResult unknown_flag =
      run({"score", "--network", data_path("fraud_s1.json"), "--bogus"});
  EXPECT_NE(unknown_flag.status, 0);
  EXPECT_NE(unknown_flag.err.find("--bogus"), std::string::npos);

  const CliResult no_subcommand = run({});
  EXPECT_NE(no_subcommand.status, 0);
}

TEST(Cli, DomainErrorsSurfaceModuleCodes) {
  // score on incomplete data must surface IncompleteData verbatim.
  const std::string csv_path = ::testing::TempDir() + "bnet_tmp_missing.csv";
  {
    std::ofstream f(csv_path);
    f << "Fraud,Gas,Jewelry,Age,Sex\nno,?,no,30-50,female\n";
  }
  const CliResult r = run({"score", "--network", data_path("fraud_s1.json"), "--data",
                           csv_path, "--ess", "10", "--prior-net",
                           data_path("fraud_prior.json")});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("IncompleteData"), std::string::npos) << r.err;
  std::remove(csv_path.c_str());
}

}  // namespace
