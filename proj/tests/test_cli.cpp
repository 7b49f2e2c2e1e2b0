#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include "test_util.hpp"

using namespace qstpi;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(QSTPI_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string fixture(const std::string& name) { return testutil::fixture_dir() + "/" + name; }

}  // namespace

TEST(Cli, SolveSiteFixtureWithIlbSplit) {
  const auto out = testutil::temp_path("cli_site10.solution.json");
  ASSERT_EQ(run("solve " + fixture("site10.json") + " --split ilb -o " + out), 0);
  const auto inst = load_instance(fixture("site10.json"));
  const auto s = load_solution(out);
  EXPECT_TRUE(s.proven_optimal);
  EXPECT_TRUE(verify_solution(inst, s).empty());
  EXPECT_NEAR(s.total_cost, solve_qstpi(inst).solution.total_cost, 1e-6);
  EXPECT_EQ(run("verify " + fixture("site10.json") + " " + out), 0);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("solve"), 1);
  EXPECT_EQ(run("solve /nonexistent.json"), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("solve " + fixture("infeasible_dmin.json") + " -o " + testutil::temp_path("inf.json")), 2);
  const auto bad = testutil::temp_path("cli_bad.json");
  std::ofstream(bad) << "{ not json";
  EXPECT_EQ(run("solve " + bad), 1);
}

TEST(Cli, VerifyRejectsTamperedSolution) {
  const auto out = testutil::temp_path("cli_tamper.solution.json");
  ASSERT_EQ(run("solve-hop " + fixture("site10.json") + " --hop 3 -o " + out), 0);
  EXPECT_EQ(run("verify " + fixture("site10.json") + " " + out + " --hop 3"), 0);
  auto s = load_solution(out);
  s.total_cost += 10.0;
  save_solution(s, out);
  EXPECT_EQ(run("verify " + fixture("site10.json") + " " + out), 2);
}

TEST(Cli, GenerateExportAndRender) {
  const auto inst = testutil::temp_path("cli_gen.json");
  ASSERT_EQ(run("gen -n 6 --seed 4 --side 3000 --d-min 600 -o " + inst), 0);
  EXPECT_EQ(load_instance(inst).positions.size(), 6u);
  const auto lp = testutil::temp_path("cli_gen.trans.lp");
  ASSERT_EQ(run("export-lp " + inst + " --model trans --ilb -o " + lp), 0);
  EXPECT_NO_THROW(check_lp_roundtrip(lp));
  EXPECT_EQ(run("export-lp " + inst + " --model simplex -o " + lp), 1);
  const auto sol = testutil::temp_path("cli_gen.oracle.json");
  ASSERT_EQ(run("oracle " + inst + " -o " + sol), 0);
  const auto svg = testutil::temp_path("cli_gen.svg");
  ASSERT_EQ(run("render " + inst + " " + sol + " --dmin -o " + svg), 0);
  std::ifstream in(svg);
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first.rfind("<svg", 0), 0u);
}
