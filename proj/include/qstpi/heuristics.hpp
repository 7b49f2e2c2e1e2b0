#pragma once

// Shortest-path construction heuristics (flat and radial) and cost biasing.

#include <algorithm>
#include <functional>
#include <queue>
#include <vector>

#include "qstpi/graph.hpp"
#include "qstpi/problem.hpp"
#include "qstpi/routing.hpp"
#include "qstpi/solution.hpp"

namespace qstpi {

struct HeuristicResult {
  Solution solution;
  bool feasible = false;
  std::vector<int> trace;  // ids of inserted terminals, in order
};

/// Pointwise (1 - g_a) * c_a.
inline std::vector<double> cost_bias(const std::vector<double>& costs, const std::vector<double>& guidance) {
  if (costs.size() != guidance.size()) throw InvariantError("guidance must have one entry per arc");
  std::vector<double> out(costs.size());
  for (std::size_t a = 0; a < costs.size(); ++a) {
    if (!(guidance[a] >= 0.0 && guidance[a] <= 1.0)) throw InvariantError("guidance entries must lie in [0, 1]");
    out[a] = (1.0 - guidance[a]) * costs[a];
  }
  return out;
}

/// Default guidance: `weight` on the cheapest in-arc of every cable node, 0 elsewhere.
inline std::vector<double> default_guidance(const TransformedGraph& g, double weight = 0.5) {
  std::vector<double> guide(g.arcs().size(), 0.0);
  for (std::size_t v = 0; v < g.cable_node_count(); ++v) {
    std::size_t best = npos;
    for (std::size_t a : g.in_arcs(v)) {
      if (best == npos || g.arc(a).cost < g.arc(best).cost) best = a;
    }
    if (best != npos) guide[best] = weight;
  }
  return guide;
}

/// Grows a tree from the root, repeatedly connecting the terminal closest to the
/// current component (ties by smallest node index). Candidates in D_min conflict
/// with the selection are skipped. Stops once every substation is connected and
/// the net quota is met.
inline HeuristicResult sph(const TransformedGraph& g, const Problem& p, const std::vector<double>& costs) {
  const std::size_t c = g.cable_node_count();
  const std::size_t n = p.size();
  std::vector<char> in_tree(c, 0);
  std::vector<char> selected(n, 0);
  std::vector<char> substation(c, 0);
  for (std::size_t s = 0; s < g.substation_count(); ++s) substation[g.substation_node(s)] = 1;
  in_tree[g.root()] = 1;
  std::vector<std::size_t> tree_arcs;
  std::vector<std::size_t> sel;
  double collected = 0.0;
  double itot = 0.0;
  HeuristicResult res;

  auto substations_done = [&] {
    for (std::size_t s = 0; s < g.substation_count(); ++s) {
      if (!in_tree[g.substation_node(s)]) return false;
    }
    return true;
  };

  while (!(substations_done() && p.meets_quota(collected, itot))) {
    // multi-source Dijkstra from the component
    std::vector<double> dist(c, kInf);
    std::vector<std::size_t> via(c, npos);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (std::size_t v = 0; v < c; ++v) {
      if (in_tree[v]) {
        dist[v] = 0.0;
        pq.emplace(0.0, v);
      }
    }
    while (!pq.empty()) {
      const auto [d, u] = pq.top();
      pq.pop();
      if (d > dist[u]) continue;
      for (std::size_t a : g.out_arcs(u)) {
        const std::size_t h = g.arc(a).head;
        if (h >= c || in_tree[h]) continue;
        const double nd = d + costs[a];
        if (nd < dist[h]) {
          dist[h] = nd;
          via[h] = a;
          pq.emplace(nd, h);
        }
      }
    }
    std::size_t pick = npos;
    for (std::size_t v = 0; v < c; ++v) {
      bool candidate = false;
      if (substation[v] && !in_tree[v]) {
        candidate = true;
      } else if (g.is_position_node(v) && !selected[g.position_of(v)]) {
        const std::size_t i = g.position_of(v);
        candidate = std::none_of(sel.begin(), sel.end(), [&](std::size_t j) { return p.conflict(i, j); });
      }
      if (candidate && dist[v] < kInf && (pick == npos || dist[v] < dist[pick])) pick = v;
    }
    if (pick == npos) break;
    for (std::size_t v = pick; via[v] != npos; v = g.arc(via[v]).tail) {
      tree_arcs.push_back(via[v]);
      in_tree[v] = 1;
    }
    in_tree[pick] = 1;
    if (g.is_position_node(pick)) {
      const std::size_t i = g.position_of(pick);
      for (std::size_t j : sel) itot += p.pair_interference(i, j);
      collected += p.profit(i);
      selected[i] = 1;
      sel.push_back(i);
    }
    res.trace.push_back(g.node_id(pick));
  }
  res.feasible = substations_done() && p.meets_quota(collected, itot);

  std::vector<char> required(g.node_count(), 0);
  for (std::size_t s = 0; s < g.substation_count(); ++s) required[g.substation_node(s)] = 1;
  for (std::size_t i : sel) required[g.position_node(i)] = 1;
  RoutedTree t;
  t.arcs = normalize_arborescence(g, tree_arcs, required);
  res.solution = make_solution(p, sel, t);
  res.solution.proven_optimal = false;
  return res;
}

inline HeuristicResult sph(const Problem& p) { return sph(p.graph(), p, arc_costs(p.graph())); }

/// Radial variant: each new turbine either opens a string at a substation or
/// extends the tail of a string shorter than H, using only arcs of the layered graph.
inline HeuristicResult sph_radial(const LayeredGraph& L, const Problem& p) {
  const auto& g = L.base();
  const std::size_t n = p.size();
  std::vector<std::vector<std::size_t>> strings;
  std::vector<std::size_t> anchor_of;  // flat anchor arc per string
  std::vector<char> selected(n, 0);
  std::vector<std::size_t> sel;
  double collected = 0.0;
  double itot = 0.0;
  HeuristicResult res;

  while (!p.meets_quota(collected, itot)) {
    double best = kInf;
    std::size_t best_pos = npos;
    std::size_t best_string = npos;  // npos: open a new string
    std::size_t best_arc = npos;
    for (std::size_t j = 0; j < n; ++j) {
      if (selected[j]) continue;
      if (std::any_of(sel.begin(), sel.end(), [&](std::size_t i) { return p.conflict(i, j); })) continue;
      const std::size_t first = L.copy(j, 1);
      if (first != npos) {
        for (std::size_t s : g.anchors()) {
          const std::size_t a = L.find_arc(L.layer0(s), first);
          if (a != npos && L.arcs()[a].cost < best) {
            best = L.arcs()[a].cost;
            best_pos = j;
            best_string = npos;
            best_arc = L.arcs()[a].flat_arc;
          }
        }
      }
      for (std::size_t k = 0; k < strings.size(); ++k) {
        const int len = static_cast<int>(strings[k].size());
        if (len >= L.hop_limit()) continue;
        const std::size_t tail = L.copy(strings[k].back(), len);
        const std::size_t head = L.copy(j, len + 1);
        if (tail == npos || head == npos) continue;
        const std::size_t a = L.find_arc(tail, head);
        if (a != npos && L.arcs()[a].cost < best) {
          best = L.arcs()[a].cost;
          best_pos = j;
          best_string = k;
          best_arc = L.arcs()[a].flat_arc;
        }
      }
    }
    if (best_pos == npos) break;
    if (best_string == npos) {
      strings.push_back({best_pos});
      anchor_of.push_back(best_arc);
    } else {
      strings[best_string].push_back(best_pos);
    }
    for (std::size_t i : sel) itot += p.pair_interference(best_pos, i);
    collected += p.profit(best_pos);
    selected[best_pos] = 1;
    sel.push_back(best_pos);
    res.trace.push_back(p.position_id(best_pos));
  }
  res.feasible = p.meets_quota(collected, itot);

  FlatTree t;
  t.selected = sel;
  std::sort(t.selected.begin(), t.selected.end());
  if (g.has_artificial_root()) {
    for (std::size_t s : g.anchors()) t.arcs.push_back(g.cable_arc(g.root(), s));
  }
  for (std::size_t k = 0; k < strings.size(); ++k) {
    t.arcs.push_back(anchor_of[k]);
    for (std::size_t h = 1; h < strings[k].size(); ++h) {
      t.arcs.push_back(g.cable_arc(g.position_node(strings[k][h - 1]), g.position_node(strings[k][h])));
    }
  }
  std::sort(t.arcs.begin(), t.arcs.end());
  t.strings = strings;
  // round trip through the layered encoding as a structural check
  const FlatTree back = decode_layered_solution(L, encode_layered_solution(L, t));
  if (back.selected != t.selected || back.arcs != t.arcs) {
    throw CorrespondenceError("radial heuristic produced a layout the layered graph cannot represent");
  }
  res.solution = make_solution(p, t);
  return res;
}

}  // namespace qstpi
