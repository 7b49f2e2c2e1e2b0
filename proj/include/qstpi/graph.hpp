#pragma once

// Directed cost-shifted graph with the quota doubling gadget, and the layered
// graph used for hop-limited (radial string) layouts.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qstpi/errors.hpp"
#include "qstpi/types.hpp"

namespace qstpi {

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

enum class NodeType : std::uint8_t { Root, Substation, Potential, Doubled, LayerCopy };

struct NodeKind {
  NodeType type = NodeType::Root;
  std::size_t index = npos;  // position or substation index; npos for the artificial root
  int layer = 0;             // only for LayerCopy, in 1..H

  friend bool operator==(const NodeKind&, const NodeKind&) = default;
};

enum class ArcRole : std::uint8_t { RootLink, Cable, Skip, Select };

struct Arc {
  std::size_t tail = 0;
  std::size_t head = 0;
  double cost = 0.0;
  ArcRole role = ArcRole::Cable;
};

/// Undirected candidate cable graph: nodes [0, m) are substations, [m, m+n) positions.
struct GraphSpec {
  struct Edge {
    std::size_t u = 0;
    std::size_t v = 0;
    double cable_cost = 0.0;
  };
  std::vector<int> substation_ids;
  std::vector<int> position_ids;
  std::vector<double> build_costs;
  std::vector<Edge> edges;
};

/// Cost-shifted digraph: arcs into a potential terminal carry edge cost + build cost.
///
/// Node layout: cable nodes first ([artificial root], substations, positions),
/// then one doubled terminal i' per position. With a single substation the
/// substation is the root.
class TransformedGraph {
public:
  [[nodiscard]] std::size_t root() const { return 0; }
  [[nodiscard]] bool has_artificial_root() const { return artificial_root_; }
  [[nodiscard]] std::size_t position_count() const { return position_ids_.size(); }
  [[nodiscard]] std::size_t substation_count() const { return substation_ids_.size(); }
  [[nodiscard]] std::size_t node_count() const { return nodes_.size(); }
  [[nodiscard]] std::size_t cable_node_count() const { return first_position_ + position_count(); }

  [[nodiscard]] std::size_t substation_node(std::size_t s) const { return first_substation_ + s; }
  [[nodiscard]] std::size_t position_node(std::size_t i) const { return first_position_ + i; }
  [[nodiscard]] std::size_t doubled_node(std::size_t i) const { return cable_node_count() + i; }
  [[nodiscard]] std::size_t selection_arc(std::size_t i) const { return selection_arc_[i]; }
  [[nodiscard]] std::size_t skip_arc(std::size_t i) const { return skip_arc_[i]; }

  [[nodiscard]] bool is_position_node(std::size_t v) const {
    return v >= first_position_ && v < cable_node_count();
  }
  [[nodiscard]] std::size_t position_of(std::size_t v) const { return v - first_position_; }

  /// Nodes strings may start from: the substations.
  [[nodiscard]] std::vector<std::size_t> anchors() const {
    std::vector<std::size_t> a;
    for (std::size_t s = 0; s < substation_count(); ++s) a.push_back(substation_node(s));
    return a;
  }

  [[nodiscard]] const std::vector<NodeKind>& nodes() const { return nodes_; }
  [[nodiscard]] const std::vector<Arc>& arcs() const { return arcs_; }
  [[nodiscard]] const Arc& arc(std::size_t a) const { return arcs_[a]; }
  [[nodiscard]] const std::vector<std::size_t>& out_arcs(std::size_t v) const { return out_[v]; }
  [[nodiscard]] const std::vector<std::size_t>& in_arcs(std::size_t v) const { return in_[v]; }
  [[nodiscard]] double build_cost(std::size_t i) const { return build_costs_[i]; }

  /// Arc index between two cable nodes, or npos.
  [[nodiscard]] std::size_t cable_arc(std::size_t u, std::size_t v) const {
    return cable_index_[u * cable_node_count() + v];
  }

  /// External id of a cable node: -1 for the artificial root.
  [[nodiscard]] int node_id(std::size_t v) const {
    const auto& k = nodes_[v];
    switch (k.type) {
      case NodeType::Root: return -1;
      case NodeType::Substation: return substation_ids_[k.index];
      default: return position_ids_[k.index];
    }
  }

  [[nodiscard]] std::string label(std::size_t v) const {
    const auto& k = nodes_[v];
    switch (k.type) {
      case NodeType::Root: return "r";
      case NodeType::Substation: return "s" + std::to_string(substation_ids_[k.index]);
      case NodeType::Potential: return std::to_string(position_ids_[k.index]);
      case NodeType::Doubled: return std::to_string(position_ids_[k.index]) + "p";
      case NodeType::LayerCopy: break;
    }
    return "?";
  }

  friend TransformedGraph build_transformed_graph(const GraphSpec& spec);

private:
  std::size_t add_arc(std::size_t tail, std::size_t head, double cost, ArcRole role) {
    arcs_.push_back({tail, head, cost, role});
    const std::size_t a = arcs_.size() - 1;
    out_[tail].push_back(a);
    in_[head].push_back(a);
    return a;
  }

  bool artificial_root_ = false;
  std::size_t first_substation_ = 0;
  std::size_t first_position_ = 0;
  std::vector<int> substation_ids_;
  std::vector<int> position_ids_;
  std::vector<double> build_costs_;
  std::vector<NodeKind> nodes_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
  std::vector<std::size_t> cable_index_;
  std::vector<std::size_t> selection_arc_;
  std::vector<std::size_t> skip_arc_;
};

inline TransformedGraph build_transformed_graph(const GraphSpec& spec) {
  const std::size_t m = spec.substation_ids.size();
  const std::size_t n = spec.position_ids.size();
  if (m == 0) throw InvariantError("graph needs at least one substation");
  if (spec.build_costs.size() != n) throw InvariantError("one build cost per position required");

  TransformedGraph g;
  g.substation_ids_ = spec.substation_ids;
  g.position_ids_ = spec.position_ids;
  g.build_costs_ = spec.build_costs;
  g.artificial_root_ = m > 1;
  if (g.artificial_root_) {
    g.nodes_.push_back({NodeType::Root, npos, 0});
  }
  g.first_substation_ = g.nodes_.size();
  for (std::size_t s = 0; s < m; ++s) g.nodes_.push_back({NodeType::Substation, s, 0});
  g.first_position_ = g.nodes_.size();
  for (std::size_t i = 0; i < n; ++i) g.nodes_.push_back({NodeType::Potential, i, 0});
  for (std::size_t i = 0; i < n; ++i) g.nodes_.push_back({NodeType::Doubled, i, 0});

  g.out_.assign(g.nodes_.size(), {});
  g.in_.assign(g.nodes_.size(), {});
  const std::size_t c = g.cable_node_count();
  g.cable_index_.assign(c * c, npos);

  if (g.artificial_root_) {
    for (std::size_t s = 0; s < m; ++s) {
      const std::size_t a = g.add_arc(0, g.substation_node(s), 0.0, ArcRole::RootLink);
      g.cable_index_[g.substation_node(s)] = a;
    }
  }
  auto spec_node = [&](std::size_t v) { return v < m ? g.substation_node(v) : g.position_node(v - m); };
  auto head_cost = [&](std::size_t v) { return v < m ? 0.0 : spec.build_costs[v - m]; };
  for (const auto& e : spec.edges) {
    if (e.u >= m + n || e.v >= m + n || e.u == e.v) throw InvariantError("invalid edge in graph spec");
    if (e.cable_cost < 0.0) throw InvariantError("edge costs must be nonnegative");
    const std::size_t u = spec_node(e.u);
    const std::size_t v = spec_node(e.v);
    g.cable_index_[u * c + v] = g.add_arc(u, v, e.cable_cost + head_cost(e.v), ArcRole::Cable);
    g.cable_index_[v * c + u] = g.add_arc(v, u, e.cable_cost + head_cost(e.u), ArcRole::Cable);
  }
  g.skip_arc_.resize(n);
  g.selection_arc_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.skip_arc_[i] = g.add_arc(g.root(), g.doubled_node(i), 0.0, ArcRole::Skip);
    g.selection_arc_[i] = g.add_arc(g.position_node(i), g.doubled_node(i), 0.0, ArcRole::Select);
  }
  return g;
}

inline double euclidean_m(const Position& a, const Position& b) { return std::hypot(a.x_m - b.x_m, a.y_m - b.y_m); }

/// Complete Euclidean candidate graph over substations and positions.
inline GraphSpec complete_graph_spec(const SiteInstance& inst) {
  GraphSpec spec;
  std::vector<const Position*> pts;
  for (const auto& s : inst.substations) {
    spec.substation_ids.push_back(s.id);
    pts.push_back(&s);
  }
  for (const auto& p : inst.positions) {
    spec.position_ids.push_back(p.id);
    spec.build_costs.push_back(p.build_cost);
    pts.push_back(&p);
  }
  for (std::size_t u = 0; u < pts.size(); ++u) {
    for (std::size_t v = u + 1; v < pts.size(); ++v) {
      spec.edges.push_back({u, v, euclidean_m(*pts[u], *pts[v]) / 1000.0 * inst.cable_cost_per_km});
    }
  }
  return spec;
}

inline TransformedGraph build_transformed_graph(const SiteInstance& inst) {
  return build_transformed_graph(complete_graph_spec(inst));
}

// ---------------------------------------------------------------------------
// Layered graph

enum class LayeredArcKind : std::uint8_t { RootLink, Skip, Select, Anchor, Chain };

struct LayeredNode {
  NodeKind kind;
  std::size_t flat = npos;  // node in the transformed graph
};

struct LayeredArc {
  std::size_t tail = 0;
  std::size_t head = 0;
  double cost = 0.0;
  std::size_t flat_arc = npos;
  LayeredArcKind kind = LayeredArcKind::Chain;
};

class LayeredGraph {
public:
  [[nodiscard]] int hop_limit() const { return hop_limit_; }
  [[nodiscard]] const TransformedGraph& base() const { return base_; }
  [[nodiscard]] const std::vector<LayeredNode>& nodes() const { return nodes_; }
  [[nodiscard]] const std::vector<LayeredArc>& arcs() const { return arcs_; }
  [[nodiscard]] std::size_t root() const { return 0; }

  /// Layered node of copy i_h, or npos when that copy is unreachable.
  [[nodiscard]] std::size_t copy(std::size_t position, int layer) const {
    return copies_[static_cast<std::size_t>(layer - 1) * base_.position_count() + position];
  }
  /// Layered node for a layer-0 flat node (root, substation or doubled terminal).
  [[nodiscard]] std::size_t layer0(std::size_t flat) const { return layer0_[flat]; }

  /// Copies present in layer h, in position order.
  [[nodiscard]] std::vector<std::size_t> layer(int h) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < base_.position_count(); ++i) {
      if (copy(i, h) != npos) out.push_back(copy(i, h));
    }
    return out;
  }

  /// Layered arc from `tail` to `head`, or npos.
  [[nodiscard]] std::size_t find_arc(std::size_t tail, std::size_t head) const {
    for (std::size_t a : out_[tail]) {
      if (arcs_[a].head == head) return a;
    }
    return npos;
  }
  [[nodiscard]] const std::vector<std::size_t>& out_arcs(std::size_t v) const { return out_[v]; }
  [[nodiscard]] std::size_t removed_by_root_test() const { return removed_; }

  /// floor(k_ub / H): at most this many strings can reach layer H; npos when no k_ub was given.
  [[nodiscard]] std::size_t last_layer_cap() const { return last_layer_cap_; }

  friend LayeredGraph build_layered_graph(const TransformedGraph& g, int hop_limit, std::optional<int> k_ub,
                                          bool root_cost_test);

private:
  std::size_t add_node(LayeredNode n) {
    nodes_.push_back(n);
    out_.emplace_back();
    return nodes_.size() - 1;
  }
  void add_arc(std::size_t tail, std::size_t head, double cost, std::size_t flat_arc, LayeredArcKind kind) {
    arcs_.push_back({tail, head, cost, flat_arc, kind});
    out_[tail].push_back(arcs_.size() - 1);
  }

  int hop_limit_ = 1;
  TransformedGraph base_;
  std::vector<LayeredNode> nodes_;
  std::vector<LayeredArc> arcs_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::size_t> copies_;
  std::vector<std::size_t> layer0_;
  std::size_t removed_ = 0;
  std::size_t last_layer_cap_ = npos;
};

/// Builds layers 0..H. Layer 0 holds the root, substations and doubled terminals;
/// layer h holds the reachable copies i_h. With `root_cost_test`, a position arc
/// (i, j) is dropped when its cost is no less than the cheapest substation arc into j.
inline LayeredGraph build_layered_graph(const TransformedGraph& g, int hop_limit, std::optional<int> k_ub = {},
                                       bool root_cost_test = true) {
  if (hop_limit < 1) throw InvariantError("hop limit must be at least 1");
  LayeredGraph L;
  L.hop_limit_ = hop_limit;
  if (k_ub) L.last_layer_cap_ = static_cast<std::size_t>(std::max(0, *k_ub) / hop_limit);
  L.base_ = g;
  const std::size_t n = g.position_count();
  L.copies_.assign(static_cast<std::size_t>(hop_limit) * n, npos);
  L.layer0_.assign(g.node_count(), npos);

  L.layer0_[g.root()] = L.add_node({g.nodes()[g.root()], g.root()});
  if (g.has_artificial_root()) {
    for (std::size_t s = 0; s < g.substation_count(); ++s) {
      const std::size_t v = g.substation_node(s);
      L.layer0_[v] = L.add_node({g.nodes()[v], v});
      L.add_arc(L.layer0_[g.root()], L.layer0_[v], 0.0, g.cable_arc(g.root(), v), LayeredArcKind::RootLink);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t d = g.doubled_node(i);
    L.layer0_[d] = L.add_node({g.nodes()[d], d});
    L.add_arc(L.layer0_[g.root()], L.layer0_[d], 0.0, g.skip_arc(i), LayeredArcKind::Skip);
  }

  const auto anchors = g.anchors();
  std::vector<double> anchor_in(n, std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t a : anchors) {
      const std::size_t arc = g.cable_arc(a, g.position_node(j));
      if (arc != npos) anchor_in[j] = std::min(anchor_in[j], g.arc(arc).cost);
    }
  }

  auto ensure_copy = [&](std::size_t j, int h) {
    std::size_t& slot = L.copies_[static_cast<std::size_t>(h - 1) * n + j];
    if (slot == npos) slot = L.add_node({{NodeType::LayerCopy, j, h}, g.position_node(j)});
    return slot;
  };

  for (std::size_t a : anchors) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t arc = g.cable_arc(a, g.position_node(j));
      if (arc == npos) continue;
      L.add_arc(L.layer0_[a], ensure_copy(j, 1), g.arc(arc).cost, arc, LayeredArcKind::Anchor);
    }
  }
  for (int h = 2; h <= hop_limit; ++h) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t from = L.copy(i, h - 1);
      if (from == npos) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const std::size_t arc = g.cable_arc(g.position_node(i), g.position_node(j));
        if (arc == npos) continue;
        if (root_cost_test && g.arc(arc).cost >= anchor_in[j]) {
          if (h == 2) ++L.removed_;
          continue;
        }
        L.add_arc(from, ensure_copy(j, h), g.arc(arc).cost, arc, LayeredArcKind::Chain);
      }
    }
  }
  for (int h = 1; h <= hop_limit; ++h) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t v = L.copy(i, h);
      if (v != npos) L.add_arc(v, L.layer0_[g.doubled_node(i)], 0.0, g.selection_arc(i), LayeredArcKind::Select);
    }
  }
  return L;
}

/// Per-flat-arc multiplicities X of a layered assignment (X_ij and X_ii' aggregate over layers).
inline std::vector<int> aggregate_selection(const LayeredGraph& L, const std::vector<char>& chosen) {
  if (chosen.size() != L.arcs().size()) throw InvariantError("assignment size must match layered arc count");
  std::vector<int> x(L.base().arcs().size(), 0);
  for (std::size_t a = 0; a < chosen.size(); ++a) {
    if (chosen[a]) x[L.arcs()[a].flat_arc] += 1;
  }
  return x;
}

/// A flat arborescence expressed with transformed-graph indices.
struct FlatTree {
  std::vector<std::size_t> selected;              // position indices, ascending
  std::vector<std::size_t> arcs;                  // cable / root-link arc indices
  std::vector<std::vector<std::size_t>> strings;  // position indices from substation outwards

  friend bool operator==(const FlatTree&, const FlatTree&) = default;
};

/// Reads a layered arborescence back as a flat radial tree.
///
/// Requires at most one copy per position and at most one outgoing chain arc per
/// copy. A doubled terminal reached both by its skip arc and a selection arc is
/// normalized to "not selected".
inline FlatTree decode_layered_solution(const LayeredGraph& L, const std::vector<std::size_t>& chosen) {
  const auto& g = L.base();
  const std::size_t n = g.position_count();
  std::vector<int> indeg(L.nodes().size(), 0);
  std::vector<std::size_t> parent_arc(L.nodes().size(), npos);
  std::vector<int> chain_out(L.nodes().size(), 0);
  std::vector<int> copies_of(n, 0);
  std::vector<char> skipped(n, 0);
  std::vector<char> selected(n, 0);

  for (std::size_t a : chosen) {
    if (a >= L.arcs().size()) throw CorrespondenceError("arc index out of range");
    const auto& arc = L.arcs()[a];
    const auto& head = L.nodes()[arc.head];
    if (arc.kind == LayeredArcKind::Skip) {
      skipped[head.kind.index] = 1;
      continue;
    }
    if (arc.kind == LayeredArcKind::Select) {
      selected[head.kind.index] = 1;
      continue;
    }
    if (++indeg[arc.head] > 1) throw CorrespondenceError("layered node has two incoming arcs");
    parent_arc[arc.head] = a;
    if (head.kind.type == NodeType::LayerCopy && ++copies_of[head.kind.index] > 1) {
      throw CorrespondenceError("position " + std::to_string(g.nodes()[g.position_node(head.kind.index)].index) +
                                " appears in two layers");
    }
    if (arc.kind == LayeredArcKind::Chain && ++chain_out[arc.tail] > 1) {
      throw CorrespondenceError("layer copy has two outgoing arcs to the next layer");
    }
  }

  // every used node must hang off the root
  auto reached = [&](std::size_t v) {
    while (v != L.root()) {
      if (parent_arc[v] == npos) return false;
      v = L.arcs()[parent_arc[v]].tail;
    }
    return true;
  };
  FlatTree t;
  for (std::size_t a : chosen) {
    const auto& arc = L.arcs()[a];
    if (arc.kind == LayeredArcKind::Skip) continue;
    if (!reached(arc.tail)) throw CorrespondenceError("chosen arc is not connected to the root");
    if (arc.kind == LayeredArcKind::Select) continue;
    t.arcs.push_back(arc.flat_arc);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!selected[i]) continue;
    if (skipped[i]) continue;
    t.selected.push_back(i);
  }
  std::sort(t.arcs.begin(), t.arcs.end());

  // strings: start at layer-1 copies and follow the unique chain successor
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t v = L.copy(i, 1);
    if (v == npos || indeg[v] == 0) continue;
    std::vector<std::size_t> s;
    while (true) {
      s.push_back(L.nodes()[v].kind.index);
      std::size_t next = npos;
      for (std::size_t a : L.out_arcs(v)) {
        if (L.arcs()[a].kind == LayeredArcKind::Chain && parent_arc[L.arcs()[a].head] == a) next = L.arcs()[a].head;
      }
      if (next == npos) break;
      v = next;
    }
    t.strings.push_back(std::move(s));
  }
  return t;
}

/// Inverse of decode_layered_solution for radial trees; throws CorrespondenceError
/// when a string needs an arc missing from the layered graph.
inline std::vector<std::size_t> encode_layered_solution(const LayeredGraph& L, const FlatTree& t) {
  const auto& g = L.base();
  std::vector<std::size_t> out;
  std::vector<char> selected(g.position_count(), 0);
  for (std::size_t i : t.selected) selected[i] = 1;
  if (g.has_artificial_root()) {
    for (std::size_t a : t.arcs) {
      if (g.arc(a).role == ArcRole::RootLink) {
        out.push_back(L.find_arc(L.root(), L.layer0(g.arc(a).head)));
      }
    }
  }
  for (const auto& s : t.strings) {
    if (s.empty() || static_cast<int>(s.size()) > L.hop_limit()) throw CorrespondenceError("string length exceeds H");
    // anchor: the tail of the flat arc entering the first position
    std::size_t anchor = npos;
    for (std::size_t a : t.arcs) {
      if (g.arc(a).head == g.position_node(s.front())) anchor = g.arc(a).tail;
    }
    if (anchor == npos) throw CorrespondenceError("string head has no anchor arc");
    std::size_t prev = L.layer0(anchor);
    for (std::size_t h = 0; h < s.size(); ++h) {
      const std::size_t cur = L.copy(s[h], static_cast<int>(h) + 1);
      const std::size_t a = cur == npos ? npos : L.find_arc(prev, cur);
      if (a == npos) throw CorrespondenceError("layered graph lacks an arc used by the string");
      out.push_back(a);
      prev = cur;
    }
  }
  for (std::size_t i = 0; i < g.position_count(); ++i) {
    if (selected[i]) {
      std::size_t copy = npos;
      for (const auto& s : t.strings) {
        for (std::size_t h = 0; h < s.size(); ++h) {
          if (s[h] == i) copy = L.copy(i, static_cast<int>(h) + 1);
        }
      }
      if (copy == npos) throw CorrespondenceError("selected position is not on a string");
      out.push_back(L.find_arc(copy, L.layer0(g.doubled_node(i))));
    } else {
      out.push_back(L.find_arc(L.root(), L.layer0(g.doubled_node(i))));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Graphviz rendering for debugging.
inline std::string to_dot(const TransformedGraph& g) {
  std::ostringstream os;
  os << "digraph transformed {\n";
  for (std::size_t v = 0; v < g.node_count(); ++v) os << "  n" << v << " [label=\"" << g.label(v) << "\"];\n";
  for (const auto& a : g.arcs()) os << "  n" << a.tail << " -> n" << a.head << " [label=\"" << a.cost << "\"];\n";
  os << "}\n";
  return os.str();
}

inline std::string to_dot(const LayeredGraph& L) {
  std::ostringstream os;
  os << "digraph layered {\n  rankdir=LR;\n";
  for (std::size_t v = 0; v < L.nodes().size(); ++v) {
    const auto& nd = L.nodes()[v];
    std::string label = L.base().label(nd.flat);
    if (nd.kind.type == NodeType::LayerCopy) label += "_" + std::to_string(nd.kind.layer);
    os << "  n" << v << " [label=\"" << label << "\"];\n";
  }
  for (const auto& a : L.arcs()) os << "  n" << a.tail << " -> n" << a.head << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace qstpi
