#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "test_util.hpp"

using namespace qstpi;

namespace {

std::size_t count(const std::string& text, const std::string& what) {
  std::size_t c = 0;
  for (auto at = text.find(what); at != std::string::npos; at = text.find(what, at + 1)) ++c;
  return c;
}

// cheapest total build cost among feasible selections, by enumeration
double min_build_cost(const SiteInstance& inst) {
  const std::size_t n = inst.positions.size();
  double best = kInf;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
    std::vector<std::size_t> s;
    double b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (m >> i & 1) {
        s.push_back(i);
        b += inst.positions[i].build_cost;
      }
    }
    if (b < best && testutil::selection_ok(inst, s)) best = b;
  }
  return best;
}

}  // namespace

TEST(CostReduction, Examples) {
  EXPECT_DOUBLE_EQ(cost_reduction(100.0, 90.0), 10.0);
  EXPECT_DOUBLE_EQ(cost_reduction(100.0, 100.0), 0.0);
  EXPECT_NEAR(cost_reduction(100.0, 110.0), -10.0, 1e-12);
  EXPECT_THROW(cost_reduction(0.0, 10.0), InvariantError);
}

TEST(Pipelines, SeqMinimizesBuildCostFirst) {
  for (std::uint64_t seed : {4u, 5u, 6u}) {
    const auto inst = testutil::random_instance(8, seed, 3);
    const auto r = run_seq(inst, 3);
    double b = 0.0;
    for (int id : r.solution.selected) b += inst.positions[static_cast<std::size_t>(id - 1)].build_cost;
    EXPECT_NEAR(b, min_build_cost(inst), 1e-6) << "seed " << seed;
    EXPECT_TRUE(verify_solution(inst, r.solution, 3).empty());
  }
}

TEST(Pipelines, IntegratedHopDominatesSequentialPipelines) {
  for (std::uint64_t seed : {7u, 8u, 9u}) {
    const auto inst = testutil::random_instance(8, seed, 3);
    const auto row = compare_pipelines("r" + std::to_string(seed), inst, 3);
    ASSERT_EQ(row.status_qstpi_hop, "optimal");
    ASSERT_TRUE(row.c_seq && row.c_qstpi_seq && row.c_qstpi_hop);
    EXPECT_LE(*row.c_qstpi_hop, *row.c_seq + 1e-6);
    EXPECT_LE(*row.c_qstpi_hop, *row.c_qstpi_seq + 1e-6);
    ASSERT_TRUE(row.reduction_seq_vs_hop);
    EXPECT_NEAR(*row.reduction_seq_vs_hop, cost_reduction(*row.c_seq, *row.c_qstpi_hop), 1e-12);
    EXPECT_GE(*row.reduction_seq_vs_hop, -1e-9);
  }
}

TEST(Pipelines, InfeasibleInstanceIsRecorded) {
  const auto inst = testutil::make_instance({{0, 0}}, {{1000, 0}}, 5.0, {1});
  const auto row = compare_pipelines("bad", inst, 3);
  EXPECT_EQ(row.status_seq, "infeasible");
  EXPECT_EQ(row.status_qstpi_hop, "infeasible");
  EXPECT_FALSE(row.reduction_seq_vs_hop);
}

TEST(Csv, RoundTripAndEmptyBatch) {
  const std::string header =
      "instance,c_seq_keur,c_qstpi_seq_keur,c_qstpi_hop_keur,reduction_seq_vs_hop_pct,"
      "reduction_seq_vs_qstpi_seq_pct,status_seq,status_qstpi_seq,status_qstpi_hop\n";
  EXPECT_EQ(to_csv({}), header);
  const std::vector<ComparisonRow> rows{
      {"a", 100.5, 98.0, 95.25, 5.223880597014925, 2.4875621890547266, "optimal", "optimal", "optimal"},
      {"b", {}, {}, {}, {}, {}, "infeasible", "infeasible", "infeasible"},
  };
  const auto text = to_csv(rows);
  EXPECT_EQ(text.rfind(header, 0), 0u);
  EXPECT_EQ(parse_comparison_csv(text), rows);
  EXPECT_THROW(parse_comparison_csv(""), ParseError);
  EXPECT_THROW(parse_comparison_csv(header + "x,1\n"), ParseError);

  const auto dir = testutil::temp_path("batch_empty");
  const auto s = batch_report({}, 3, dir);
  EXPECT_EQ(s.rows, 0u);
  EXPECT_EQ(s.mean_reduction_seq_vs_hop, 0.0);
  std::ifstream in(dir + "/comparison.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), header);
}

TEST(Csv, BatchSummaryCounts) {
  std::vector<std::pair<std::string, SiteInstance>> batch;
  for (std::uint64_t seed : {11u, 12u}) batch.emplace_back("s" + std::to_string(seed), testutil::random_instance(7, seed));
  const auto s = batch_report(batch, 2, testutil::temp_path("batch_two"));
  EXPECT_EQ(s.rows, 2u);
  EXPECT_EQ(s.improved + s.ties + s.worse, s.compared);
  EXPECT_EQ(s.worse, 0u);
}

TEST(Svg, DeterministicWithOneLinePerCable) {
  const auto inst = testutil::random_instance(8, 3);
  const auto flat = solve_qstpi(inst).solution;
  const auto svg = render_solution_svg(inst, flat);
  EXPECT_EQ(svg, render_solution_svg(inst, flat));
  EXPECT_EQ(count(svg, "<line "), flat.arcs.size());
  EXPECT_EQ(count(svg, "<circle "), inst.positions.size());
  EXPECT_EQ(count(svg, "stroke-dasharray"), 0u);
  const auto with = render_solution_svg(inst, flat, true);
  EXPECT_EQ(count(with, "<circle "), inst.positions.size() + flat.selected.size());

  auto two = inst;
  two.substations.push_back(Position{900, 3500.0, 0.0, 0.0, {}});
  const auto hop = solve_qstpi_hop(two, 2).solution;
  // root links have no geometry
  std::size_t cables = 0;
  for (const auto& [t, h] : hop.arcs) cables += t != -1;
  EXPECT_EQ(count(render_solution_svg(two, hop), "<line "), cables);

  const auto path = testutil::temp_path("plot.svg");
  render_solution_svg(inst, flat, path);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), svg);
}
