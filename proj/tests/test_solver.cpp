#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace qstpi;

namespace {

SiteInstance line_instance(int n, double quota) {
  std::vector<testutil::Pt> pts;
  for (int i = 0; i < n; ++i) pts.push_back({1000.0 * (i + 1), 0.0});
  return testutil::make_instance({{0, 0}}, pts, quota, std::vector<double>(static_cast<std::size_t>(n), 1.0));
}

SolverConfig with_split(SplitStrategy s) {
  SolverConfig c;
  c.split = s;
  return c;
}

}  // namespace

TEST(Solver, ToyThreeTurbines) {
  // profits 9, 8, 5; the 5 MW site is far away, so {9, 8} is the cheapest way to 12 MW
  const auto inst =
      testutil::make_instance({{0, 0}}, {{1000, 0}, {0, 1000}, {8000, 8000}}, 12.0, {9, 8, 5}, {3000, 3000, 2000});
  const auto r = solve_qstpi(inst);
  EXPECT_TRUE(r.proven_optimal);
  EXPECT_EQ(r.solution.selected, (std::vector<int>{1, 2}));
  const auto ref = testutil::solve_ref(inst);
  EXPECT_NEAR(r.solution.total_cost, ref.cost, 1e-6);
  EXPECT_NEAR(r.solution.total_cost, 2 * 504.0 + 6000.0, 1e-9);
}

TEST(Solver, ZeroQuotaGivesEmptySolution) {
  const auto r = solve_qstpi(line_instance(4, 0.0));
  EXPECT_TRUE(r.solution.selected.empty());
  EXPECT_TRUE(r.solution.arcs.empty());
  EXPECT_EQ(r.solution.total_cost, 0.0);
}

TEST(Solver, MatchesIndependentReference) {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const int n = 6 + static_cast<int>(seed % 4);
    const auto inst = testutil::random_instance(n, seed);
    const auto ref = testutil::solve_ref(inst);
    if (!ref.feasible) {
      EXPECT_THROW(solve_qstpi(inst), InfeasibleError);
      continue;
    }
    const auto r = solve_qstpi(inst);
    EXPECT_TRUE(r.proven_optimal);
    EXPECT_NEAR(r.solution.total_cost, ref.cost, 1e-6) << "seed " << seed;
    EXPECT_TRUE(verify_solution(inst, r.solution).empty());
    const auto o = brute_force_oracle(inst);
    EXPECT_NEAR(o.total_cost, ref.cost, 1e-6);
    EXPECT_LE(r.solution.selected.size(), k_upper_bound(Problem(inst)));
  }
}

TEST(Solver, HopMatchesReferenceAndIsMonotone) {
  for (std::uint64_t seed = 40; seed < 46; ++seed) {
    const auto inst = testutil::random_instance(7, seed, 4);
    const auto ref_flat = testutil::solve_ref(inst);
    if (!ref_flat.feasible) continue;
    double prev = kInf;
    for (int H : {1, 2, 3, 6}) {
      const auto r = solve_qstpi_hop(inst, H);
      const auto ref = testutil::solve_ref(inst, H);
      EXPECT_NEAR(r.solution.total_cost, ref.cost, 1e-6) << "seed " << seed << " H " << H;
      EXPECT_TRUE(verify_solution(inst, r.solution, H).empty());
      EXPECT_LE(r.solution.total_cost, prev + 1e-9);
      EXPECT_GE(r.solution.total_cost, ref_flat.cost - 1e-9);
      prev = r.solution.total_cost;
    }
  }
}

TEST(Solver, CollinearChainsIntoOneString) {
  const auto r = solve_qstpi_hop(line_instance(4, 4.0), 4);
  ASSERT_TRUE(r.solution.strings);
  ASSERT_EQ(r.solution.strings->size(), 1u);
  EXPECT_EQ(r.solution.strings->front(), (std::vector<int>{1, 2, 3, 4}));
  EXPECT_NEAR(r.solution.total_cost, 4.0 * 504.0 + 4000.0, 1e-9);
}

TEST(Solver, SevenTurbinesWithHopSixNeedTwoStrings) {
  const auto r = solve_qstpi_hop(line_instance(9, 7.0), 6);
  EXPECT_EQ(r.solution.selected.size(), 7u);
  EXPECT_GE(r.solution.strings->size(), 2u);
}

TEST(Split, ValueChoice) {
  const auto zero = Problem(testutil::make_instance({{0, 0}}, {{1000, 0}, {0, 1000}}, 1.0));
  EXPECT_EQ(choose_split_value(zero, SplitStrategy::ilb()).value, 0.0);

  for (std::uint64_t seed : {3u, 8u, 13u}) {
    const Problem p(testutil::random_instance(9, seed, 4, 3000.0));
    const double ilb = total_interference_lb(p);
    const auto h = sph(p);
    if (h.feasible) {
      EXPECT_DOUBLE_EQ(choose_split_value(p, SplitStrategy::heuristic(0.1)).value, 0.1 * h.solution.i_tot);
    }
    EXPECT_GE(choose_split_value(p, SplitStrategy::mini(1.0)).value, ilb);
    EXPECT_TRUE(choose_split_value(p, SplitStrategy::ilb()).proven_lower_bound);
  }
  EXPECT_THROW(SplitStrategy::heuristic(0.0), InvariantError);
  EXPECT_THROW(SplitStrategy::mini(0.0), InvariantError);
}

TEST(Split, Certificates) {
  const auto inst = testutil::random_instance(8, 5, 4, 3000.0);
  const Problem p(inst);
  const auto full = solve_problem(p, {});
  const auto zero = solve_with_split(p, 0.0, {});
  EXPECT_EQ(zero.certificate, Certificate::UpOptimalByCorollary);
  EXPECT_FALSE(zero.down);
  EXPECT_NEAR(zero.best()->solution.total_cost, full.solution.total_cost, 1e-6);

  const auto high = solve_with_split(p, 1e6, {});
  EXPECT_FALSE(high.up);
  EXPECT_EQ(high.certificate, Certificate::DownOptimal);
  EXPECT_NEAR(high.best()->solution.total_cost, full.solution.total_cost, 1e-6);
  EXPECT_THROW(solve_with_split(p, -1.0, {}), InvariantError);
}

TEST(Split, LemmaOneOnEverySplitValue) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto inst = testutil::random_instance(8, seed, 4, 3000.0);
    const Problem p(inst);
    SolveResult full;
    try {
      full = solve_problem(p, {});
    } catch (const InfeasibleError&) {
      continue;
    }
    const double i_opt = full.solution.i_tot;
    for (double s : {0.0, 0.5 * i_opt, i_opt, i_opt + 0.3, 2.0 * i_opt + 1.0}) {
      const auto o = solve_with_split(p, s, {});
      ASSERT_NE(o.best(), nullptr);
      const double best = std::min(o.up ? o.up->solution.total_cost : kInf, o.down ? o.down->solution.total_cost : kInf);
      EXPECT_NEAR(best, full.solution.total_cost, 1e-6) << "seed " << seed << " split " << s;
      if (o.certificate == Certificate::UpOptimalByCorollary) {
        EXPECT_NEAR(o.up->solution.total_cost, full.solution.total_cost, 1e-6);
      }
      if (o.up) { EXPECT_GE(o.up->solution.i_tot, s - 1e-9); }
      if (o.down) { EXPECT_LE(o.down->solution.i_tot, s + 1e-9); }
    }
    for (auto strat : {SplitStrategy::ilb(), SplitStrategy::heuristic(0.5), SplitStrategy::mini(1.0)}) {
      EXPECT_NEAR(solve_problem(p, with_split(strat)).solution.total_cost, full.solution.total_cost, 1e-6);
    }
  }
}

TEST(Solver, ThreadCountDoesNotChangeResult) {
  for (std::uint64_t seed : {2u, 9u}) {
    const auto inst = testutil::random_instance(10, seed, 4);
    SolverConfig one, four;
    four.threads = 4;
    EXPECT_EQ(solve_qstpi(inst, one).solution, solve_qstpi(inst, four).solution);
    EXPECT_EQ(solve_qstpi_hop(inst, 3, one).solution, solve_qstpi_hop(inst, 3, four).solution);
  }
}

TEST(Solver, InfeasibleAndBudgetErrors) {
  auto inst = line_instance(3, 5.0);
  EXPECT_THROW(solve_qstpi(inst), InfeasibleError);
  EXPECT_THROW(brute_force_oracle(inst), InfeasibleError);
  EXPECT_THROW(brute_force_oracle(testutil::random_instance(13, 1)), BudgetError);
  EXPECT_THROW(solve_qstpi(testutil::random_instance(65, 1)), BudgetError);
  EXPECT_THROW(solve_qstpi_hop(inst, 0), InvariantError);
}

TEST(Oracle, SingletonCoversQuota) {
  const auto inst = testutil::make_instance({{0, 0}}, {{1000, 0}, {3000, 0}}, 5.0, {5, 1});
  const auto s = brute_force_oracle(inst);
  EXPECT_EQ(s.selected, (std::vector<int>{1}));
  EXPECT_TRUE(s.proven_optimal);
}

TEST(Solver, TimeLimitReturnsUnprovenIncumbentOrTimesOut) {
  SolverConfig cfg;
  cfg.time_limit = 1e-4;
  const auto inst = testutil::random_instance(40, 3, 8, 9000.0);
  try {
    const auto r = solve_qstpi(inst, cfg);
    EXPECT_FALSE(r.proven_optimal);
    EXPECT_LE(r.solution.lower_bound, r.solution.total_cost);
    EXPECT_TRUE(verify_solution(inst, r.solution).empty());
  } catch (const TimeLimitError&) {
    SUCCEED();
  }
}
