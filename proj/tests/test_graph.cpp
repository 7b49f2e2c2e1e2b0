#include <gtest/gtest.h>

#include <random>
#include <set>

#include "test_util.hpp"

using namespace qstpi;

namespace {

// r (spec node 0) and positions 1..4 (spec nodes 1..4)
GraphSpec fig5_spec() {
  GraphSpec s;
  s.substation_ids = {0};
  s.position_ids = {1, 2, 3, 4};
  s.build_costs = {10, 10, 10, 10};
  for (auto [u, v] : std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {0, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}}) {
    s.edges.push_back({u, v, 1.0});
  }
  return s;
}

std::set<std::string> copies(const LayeredGraph& L) {
  std::set<std::string> out;
  for (int h = 1; h <= L.hop_limit(); ++h) {
    for (std::size_t v : L.layer(h)) {
      out.insert(std::to_string(L.base().node_id(L.nodes()[v].flat)) + "_" + std::to_string(h));
    }
  }
  return out;
}

std::size_t count_kind(const LayeredGraph& L, LayeredArcKind k) {
  std::size_t c = 0;
  for (const auto& a : L.arcs()) c += a.kind == k;
  return c;
}

}  // namespace

TEST(TransformedGraph, CostShiftArithmetic) {
  const auto inst = testutil::make_instance({{0, 0}}, {{1000, 0}}, 1.0, {}, {1000.0});
  const auto g = build_transformed_graph(inst);
  const auto into_pos = g.arc(g.cable_arc(g.substation_node(0), g.position_node(0)));
  const auto into_sub = g.arc(g.cable_arc(g.position_node(0), g.substation_node(0)));
  EXPECT_DOUBLE_EQ(into_pos.cost, 1504.0);
  EXPECT_DOUBLE_EQ(into_sub.cost, 504.0);
  EXPECT_EQ(g.arc(g.skip_arc(0)).cost, 0.0);
  EXPECT_EQ(g.arc(g.selection_arc(0)).cost, 0.0);
  EXPECT_EQ(g.arc(g.skip_arc(0)).tail, g.root());
  EXPECT_EQ(g.arc(g.selection_arc(0)).head, g.doubled_node(0));
}

TEST(TransformedGraph, CountsForThreePositions) {
  const auto inst = testutil::make_instance({{0, 0}}, {{1000, 0}, {0, 1000}, {700, 700}}, 1.0);
  const auto g = build_transformed_graph(inst);
  EXPECT_FALSE(g.has_artificial_root());
  EXPECT_EQ(g.node_count(), 1u + 3u + 3u);
  EXPECT_EQ(g.arcs().size(), 2u * 6u + 6u);
}

TEST(TransformedGraph, ArtificialRootForSeveralSubstations) {
  const auto inst = testutil::make_instance({{0, 0}, {5000, 0}}, {{1000, 0}, {4000, 0}}, 1.0);
  const auto g = build_transformed_graph(inst);
  ASSERT_TRUE(g.has_artificial_root());
  EXPECT_EQ(g.node_id(g.root()), -1);
  EXPECT_EQ(g.node_count(), 1u + 2u + 2u + 2u);
  for (std::size_t s = 0; s < 2; ++s) {
    const auto& a = g.arc(g.cable_arc(g.root(), g.substation_node(s)));
    EXPECT_EQ(a.role, ArcRole::RootLink);
    EXPECT_EQ(a.cost, 0.0);
  }
}

TEST(LayeredGraph, Fig5ReachableCopies) {
  const auto g = build_transformed_graph(fig5_spec());
  const auto L = build_layered_graph(g, 3, {}, false);
  const std::set<std::string> expect{"1_1", "2_1", "3_2", "4_2", "1_3", "2_3", "3_3", "4_3"};
  EXPECT_EQ(copies(L), expect);
  // every copy has a selection arc; every position a skip arc
  EXPECT_EQ(count_kind(L, LayeredArcKind::Select), 8u);
  EXPECT_EQ(count_kind(L, LayeredArcKind::Skip), 4u);
  EXPECT_EQ(count_kind(L, LayeredArcKind::Anchor), 2u);
}

TEST(LayeredGraph, HopOneHasOnlyDirectStrings) {
  const auto g = build_transformed_graph(fig5_spec());
  const auto L = build_layered_graph(g, 1, {}, false);
  EXPECT_EQ(copies(L), (std::set<std::string>{"1_1", "2_1"}));
  EXPECT_EQ(count_kind(L, LayeredArcKind::Chain), 0u);
}

TEST(LayeredGraph, RootCostTestRemovesDominatedArcs) {
  // equilateral triangle around the substation: every chord exceeds the radius
  const double R = 2000.0;
  std::vector<testutil::Pt> pts;
  for (int k = 0; k < 3; ++k) pts.push_back({R * std::cos(2.0 * std::numbers::pi * k / 3.0), R * std::sin(2.0 * std::numbers::pi * k / 3.0)});
  const auto g = build_transformed_graph(testutil::make_instance({{0, 0}}, pts, 1.0));
  const auto L = build_layered_graph(g, 3);
  EXPECT_EQ(count_kind(L, LayeredArcKind::Chain), 0u);
  EXPECT_EQ(L.removed_by_root_test(), 6u);
  const auto kept = build_layered_graph(g, 3, {}, false);
  EXPECT_GT(count_kind(kept, LayeredArcKind::Chain), 0u);
  EXPECT_EQ(kept.removed_by_root_test(), 0u);
}

TEST(LayeredGraph, LastLayerCap) {
  const auto g = build_transformed_graph(fig5_spec());
  EXPECT_EQ(build_layered_graph(g, 6, 22).last_layer_cap(), 3u);
  EXPECT_EQ(build_layered_graph(g, 6).last_layer_cap(), npos);
  EXPECT_THROW(build_layered_graph(g, 0), InvariantError);
}

TEST(LayeredGraph, AggregateSelection) {
  const auto g = build_transformed_graph(fig5_spec());
  const auto L = build_layered_graph(g, 4, {}, false);
  std::vector<char> none(L.arcs().size(), 0);
  for (int x : aggregate_selection(L, none)) EXPECT_EQ(x, 0);

  const std::size_t p3 = 2, p4 = 3;
  const std::size_t a2 = L.find_arc(L.copy(p3, 2), L.copy(p4, 3));
  const std::size_t a3 = L.find_arc(L.copy(p3, 3), L.copy(p4, 4));
  ASSERT_NE(a2, npos);
  ASSERT_NE(a3, npos);
  const std::size_t flat = g.cable_arc(g.position_node(p3), g.position_node(p4));
  std::vector<char> one = none;
  one[a2] = 1;
  EXPECT_EQ(aggregate_selection(L, one)[flat], 1);
  one[a3] = 1;
  EXPECT_EQ(aggregate_selection(L, one)[flat], 2);
  EXPECT_THROW(aggregate_selection(L, std::vector<char>(3, 0)), InvariantError);
}

TEST(LayeredGraph, DecodeSimpleString) {
  const auto g = build_transformed_graph(fig5_spec());
  const auto L = build_layered_graph(g, 3, {}, false);
  const std::size_t a = 0, b = 2;  // positions 1 and 3
  std::vector<std::size_t> chosen{
      L.find_arc(L.root(), L.copy(a, 1)),
      L.find_arc(L.copy(a, 1), L.copy(b, 2)),
      L.find_arc(L.copy(a, 1), L.layer0(g.doubled_node(a))),
      L.find_arc(L.copy(b, 2), L.layer0(g.doubled_node(b))),
      L.find_arc(L.root(), L.layer0(g.doubled_node(1))),
      L.find_arc(L.root(), L.layer0(g.doubled_node(3))),
  };
  const auto t = decode_layered_solution(L, chosen);
  EXPECT_EQ(t.selected, (std::vector<std::size_t>{a, b}));
  ASSERT_EQ(t.strings.size(), 1u);
  EXPECT_EQ(t.strings[0], (std::vector<std::size_t>{a, b}));
  std::vector<std::size_t> flat{g.cable_arc(g.root(), g.position_node(a)),
                                g.cable_arc(g.position_node(a), g.position_node(b))};
  std::sort(flat.begin(), flat.end());
  EXPECT_EQ(t.arcs, flat);
}

TEST(LayeredGraph, DecodeOnlySkipsAndRejectsTwoCopies) {
  const auto g = build_transformed_graph(fig5_spec());
  const auto L = build_layered_graph(g, 3, {}, false);
  std::vector<std::size_t> skips;
  for (std::size_t i = 0; i < 4; ++i) skips.push_back(L.find_arc(L.root(), L.layer0(g.doubled_node(i))));
  const auto t = decode_layered_solution(L, skips);
  EXPECT_TRUE(t.selected.empty());
  EXPECT_TRUE(t.arcs.empty());

  // position 1 used in layers 1 and 3
  std::vector<std::size_t> bad{L.find_arc(L.root(), L.copy(0, 1)), L.find_arc(L.copy(0, 1), L.copy(2, 2)),
                               L.find_arc(L.copy(2, 2), L.copy(0, 3))};
  EXPECT_THROW(decode_layered_solution(L, bad), CorrespondenceError);
}

TEST(LayeredGraph, EncodeDecodeRoundTrip) {
  const auto inst = testutil::random_instance(8, 21);
  const auto g = build_transformed_graph(inst);
  const int H = 3;
  const auto L = build_layered_graph(g, H, {}, false);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::size_t> perm(8);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const std::size_t k = rng() % 9;
    FlatTree t;
    std::size_t at = 0;
    while (at < k) {
      const std::size_t len = std::min<std::size_t>(k - at, 1 + rng() % H);
      t.strings.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(at),
                             perm.begin() + static_cast<std::ptrdiff_t>(at + len));
      at += len;
    }
    for (const auto& s : t.strings) {
      t.arcs.push_back(g.cable_arc(g.root(), g.position_node(s[0])));
      for (std::size_t h = 1; h < s.size(); ++h) t.arcs.push_back(g.cable_arc(g.position_node(s[h - 1]), g.position_node(s[h])));
      t.selected.insert(t.selected.end(), s.begin(), s.end());
    }
    std::sort(t.selected.begin(), t.selected.end());
    std::sort(t.arcs.begin(), t.arcs.end());
    std::sort(t.strings.begin(), t.strings.end());
    auto back = decode_layered_solution(L, encode_layered_solution(L, t));
    std::sort(back.strings.begin(), back.strings.end());
    EXPECT_EQ(back, t) << "trial " << trial;
  }
}
