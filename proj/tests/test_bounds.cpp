#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"

using namespace qstpi;
using testutil::make_instance;

namespace {

// positions spread 5 km apart so that D_min never binds unless requested
std::vector<testutil::Pt> spread(std::size_t n) {
  std::vector<testutil::Pt> p;
  for (std::size_t i = 0; i < n; ++i) p.push_back({5000.0 * static_cast<double>(i + 1), 0.0});
  return p;
}

SiteInstance with_matrix(SiteInstance inst, const std::vector<double>& row_major) {
  inst.interference = InterferenceMatrix(inst.positions.size(), row_major);
  return inst;
}

double brute_mis(const Problem& p, bool distance_only) {
  const std::size_t n = p.size();
  double best = 0.0;
  for (Mask m = 0; m < (Mask{1} << n); ++m) {
    const auto s = mask_to_indices(m);
    bool ok = true;
    for (std::size_t a : s) {
      for (std::size_t b : s) {
        if (a < b && (p.conflict(a, b) || (!distance_only && p.pair_interference(a, b) > 0.0))) ok = false;
      }
    }
    if (ok) best = std::max(best, p.collected(s));
  }
  return best;
}

}  // namespace

TEST(NMin, Examples) {
  EXPECT_EQ(n_min(Problem(make_instance({{0, 0}}, spread(3), 12.0, {9, 8, 5}))), 2u);
  EXPECT_EQ(n_min(Problem(make_instance({{0, 0}}, spread(3), 9.0, {9, 8, 5}))), 1u);
  EXPECT_EQ(n_min(Problem(make_instance({{0, 0}}, spread(3), 22.0, {9, 8, 5}))), 3u);
  EXPECT_THROW(n_min(Problem(make_instance({{0, 0}}, spread(3), 23.0, {9, 8, 5}))), InfeasibleError);
}

TEST(InterferenceLb, RowSumOfSmallestEligible) {
  // position 4 sits 100 m from position 0 and is excluded by D_min
  auto pts = spread(4);
  pts.push_back({pts[0].x + 100.0, 0.0});
  std::vector<double> m(25, 0.0);
  m[0 * 5 + 1] = 0.2;
  m[0 * 5 + 2] = 0.5;
  m[0 * 5 + 3] = 1.0;
  m[0 * 5 + 4] = 0.05;
  const Problem p(with_matrix(make_instance({{0, 0}}, pts, 1.0, {}, {}, 1200.0), m));
  EXPECT_NEAR(interference_row_lb(p, 0, 3), 0.7, 1e-12);
  EXPECT_EQ(interference_row_lb(p, 0, 1), 0.0);
  // only positions 0 and 4 remain once all others are too close
  auto close = make_instance({{0, 0}}, {{0, 0}, {100, 0}, {200, 0}}, 1.0, {}, {}, 1200.0);
  close = with_matrix(close, {0, 1, 1, 1, 0, 1, 1, 1, 0});
  EXPECT_EQ(interference_row_lb(Problem(close), 0, 2), 0.0);
}

TEST(InterferenceLb, TotalIsSumOfSmallestRowBounds) {
  // row minima 0.3, 0.7, 0.9
  const Problem p(with_matrix(make_instance({{0, 0}}, spread(3), 1.0), {0, 0.3, 0.5, 0.7, 0, 0.8, 0.9, 1.0, 0}));
  EXPECT_NEAR(total_interference_lb(p, 2), 1.0, 1e-12);
  EXPECT_EQ(total_interference_lb(p, 1), 0.0);
  EXPECT_EQ(total_interference_lb(Problem(make_instance({{0, 0}}, spread(4), 1.0))), 0.0);
}

TEST(Mis, Examples) {
  const std::vector<double> q{5, 8, 9};
  EXPECT_DOUBLE_EQ(mis_quota(Problem(make_instance({{0, 0}}, spread(3), 1.0, q, {}, 1200.0))), 22.0);
  EXPECT_DOUBLE_EQ(mis_quota(Problem(make_instance({{0, 0}}, {{0, 0}, {100, 0}, {200, 0}}, 1.0, q, {}, 1200.0))), 9.0);
  // path a-b-c
  const Problem path(make_instance({{0, 0}}, {{0, 0}, {1000, 0}, {2000, 0}}, 1.0, q, {}, 1200.0));
  EXPECT_DOUBLE_EQ(mis_quota(path), 14.0);
  const auto set = max_weight_independent_set(conflict_graph(path), path.profits());
  EXPECT_EQ(set.members, (std::vector<std::size_t>{0, 2}));
  EXPECT_THROW(mis_quota(path, 2), BudgetError);
}

TEST(Mis, MatchesEnumerationAndCliqueCoverBoundsIt) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Problem p(testutil::random_instance(10, seed, 3, 3000.0, 900.0));
    for (bool d_only : {false, true}) {
      const auto g = conflict_graph(p, d_only);
      const double w = max_weight_independent_set(g, p.profits()).weight;
      EXPECT_NEAR(w, brute_mis(p, d_only), 1e-9) << "seed " << seed;
      EXPECT_GE(clique_cover_bound(g, p.profits()), w - 1e-9);
    }
  }
}

TEST(KUpperBound, Examples) {
  const std::vector<double> q{5, 8, 9};
  EXPECT_EQ(k_upper_bound(Problem(make_instance({{0, 0}}, spread(3), 12.0, q))), 2u);
  std::vector<double> ones(9, 1.0);
  for (std::size_t i = 0; i < 3; ++i) ones[i * 3 + i] = 0.0;
  EXPECT_EQ(k_upper_bound(Problem(with_matrix(make_instance({{0, 0}}, spread(3), 12.0, q), ones))), 3u);
  // vacuous: interference too large for any k
  std::vector<double> big(9, 50.0);
  for (std::size_t i = 0; i < 3; ++i) big[i * 3 + i] = 0.0;
  EXPECT_EQ(k_upper_bound(Problem(with_matrix(make_instance({{0, 0}}, spread(3), 12.0, q), big))), 3u);
}

TEST(MinInterference, Examples) {
  auto both = with_matrix(make_instance({{0, 0}}, spread(2), 17.0, {10, 10}), {0, 1.0, 2.0, 0});
  const auto r = min_interference(Problem(both));
  EXPECT_TRUE(r.proven_optimal);
  EXPECT_NEAR(r.i_tot, 3.0, 1e-12);
  EXPECT_EQ(r.selection, (std::vector<std::size_t>{0, 1}));

  both.quota = QuotaSpec::mw(10.0);
  EXPECT_EQ(min_interference(Problem(both)).i_tot, 0.0);

  both.quota = QuotaSpec::mw(21.0);
  EXPECT_THROW(min_interference(Problem(both)), InfeasibleError);
}

TEST(MinInterference, TheoremOneAndLowerBound) {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const int turbines = 2 + static_cast<int>(seed % 3);
    const Problem p(testutil::random_instance(9, seed, turbines, 3000.0, 600.0));
    MinIResult r;
    try {
      r = min_interference(p);
    } catch (const InfeasibleError&) {
      continue;
    }
    ASSERT_TRUE(r.proven_optimal);
    ++checked;
    const bool zero = r.i_tot == 0.0;
    EXPECT_EQ(zero, p.quota() - p.quota_tolerance() <= mis_quota(p)) << "seed " << seed;
    EXPECT_LE(total_interference_lb(p), r.i_tot + 1e-9) << "seed " << seed;
    EXPECT_NEAR(p.total_interference(r.selection), r.i_tot, 1e-9);
    EXPECT_TRUE(p.respects_dmin(r.selection));
    EXPECT_TRUE(p.meets_quota(p.collected(r.selection), r.i_tot));
  }
  EXPECT_GE(checked, 20);
}

TEST(RoutingLowerBound, SingleTurbineAndEmpty) {
  const auto inst = make_instance({{0, 0}}, {{1000, 0}, {1200, 0}, {0, 3000}}, 1.0, {}, {700, 800, 900});
  const Problem p(inst);
  EXPECT_EQ(routing_lower_bound(p.graph(), 0, 0), 0.0);
  // cheapest way into position 1 is from position 0, 200 m away
  EXPECT_NEAR(routing_lower_bound(p.graph(), bit(1), 0), 0.2 * 504.0 + 800.0, 1e-9);
  EXPECT_NEAR(routing_lower_bound(p.graph(), bit(2), 0), 3.0 * 504.0 + 900.0, 1e-9);
}

TEST(RoutingLowerBound, NeverExceedsBestCompletion) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = testutil::random_instance(6, 100 + static_cast<std::uint64_t>(trial % 10));
    const Problem p(inst);
    Mask in = 0, out = 0;
    for (std::size_t i = 0; i < 6; ++i) {
      const auto r = rng() % 3;
      if (r == 0) in |= bit(i);
      if (r == 1) out |= bit(i);
    }
    double best = kInf;
    for (Mask m = 0; m < 64; ++m) {
      if ((m & in) != in || (m & out) != 0) continue;
      best = std::min(best, testutil::flat_route_ref(inst, mask_to_indices(m)));
    }
    EXPECT_LE(routing_lower_bound(p.graph(), in, out), best + 1e-9) << "trial " << trial;
  }
}
