#pragma once

// Exact routing of a fixed selection: Steiner arborescence (flat) and
// hop-limited string partition (radial).

#include <algorithm>
#include <bit>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <vector>

#include "qstpi/errors.hpp"
#include "qstpi/graph.hpp"
#include "qstpi/problem.hpp"

namespace qstpi {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct RoutedTree {
  double cost = kInf;
  std::vector<std::size_t> arcs;                  // flat arc indices, ascending
  std::vector<std::vector<std::size_t>> strings;  // radial routing only
};

inline std::vector<double> arc_costs(const TransformedGraph& g) {
  std::vector<double> c;
  c.reserve(g.arcs().size());
  for (const auto& a : g.arcs()) c.push_back(a.cost);
  return c;
}

/// All-pairs shortest paths over cable nodes (Floyd-Warshall with successor pointers).
class ShortestPaths {
public:
  ShortestPaths(const TransformedGraph& g, const std::vector<double>& costs) : n_(g.cable_node_count()) {
    d_.assign(n_ * n_, kInf);
    next_.assign(n_ * n_, npos);
    for (std::size_t v = 0; v < n_; ++v) {
      d_[v * n_ + v] = 0.0;
      next_[v * n_ + v] = v;
    }
    for (std::size_t a = 0; a < g.arcs().size(); ++a) {
      const auto& arc = g.arc(a);
      if (arc.tail >= n_ || arc.head >= n_) continue;
      if (costs[a] < d_[arc.tail * n_ + arc.head]) {
        d_[arc.tail * n_ + arc.head] = costs[a];
        next_[arc.tail * n_ + arc.head] = arc.head;
      }
    }
    for (std::size_t k = 0; k < n_; ++k) {
      for (std::size_t i = 0; i < n_; ++i) {
        const double dik = d_[i * n_ + k];
        if (dik == kInf) continue;
        for (std::size_t j = 0; j < n_; ++j) {
          const double via = dik + d_[k * n_ + j];
          if (via < d_[i * n_ + j]) {
            d_[i * n_ + j] = via;
            next_[i * n_ + j] = next_[i * n_ + k];
          }
        }
      }
    }
  }

  [[nodiscard]] std::size_t size() const { return n_; }
  [[nodiscard]] double operator()(std::size_t u, std::size_t v) const { return d_[u * n_ + v]; }

  /// Node sequence of a shortest u-v path, both ends included.
  [[nodiscard]] std::vector<std::size_t> path(std::size_t u, std::size_t v) const {
    std::vector<std::size_t> p{u};
    if (next_[u * n_ + v] == npos) return {};
    while (u != v) {
      u = next_[u * n_ + v];
      p.push_back(u);
    }
    return p;
  }

private:
  std::size_t n_;
  std::vector<double> d_;
  std::vector<std::size_t> next_;
};

namespace detail {

struct SteinerTable {
  std::size_t k = 0;  // terminal count
  std::size_t c = 0;  // cable nodes
  std::vector<double> dp;
  std::vector<std::size_t> via;    // dp[mask][v] = dist(v, via) + merged[mask][via]
  std::vector<std::uint32_t> split;  // merged[mask][u] = dp[A][u] + dp[mask^A][u]
};

/// Directed Dreyfus-Wagner over `terminals`; dp[mask][v] is the cheapest
/// arborescence rooted at v reaching every terminal in mask.
inline SteinerTable steiner_table(const ShortestPaths& sp, const std::vector<std::size_t>& terminals, bool trace) {
  SteinerTable t;
  t.k = terminals.size();
  t.c = sp.size();
  const std::size_t full = std::size_t{1} << t.k;
  const std::size_t c = t.c;
  t.dp.assign(full * c, kInf);
  if (trace) {
    t.via.assign(full * c, npos);
    t.split.assign(full * c, 0);
  }
  for (std::size_t v = 0; v < c; ++v) t.dp[v] = 0.0;
  for (std::size_t b = 0; b < t.k; ++b) {
    for (std::size_t v = 0; v < c; ++v) {
      t.dp[(std::size_t{1} << b) * c + v] = sp(v, terminals[b]);
      if (trace) t.via[(std::size_t{1} << b) * c + v] = terminals[b];
    }
  }
  std::vector<double> merged(c);
  std::vector<std::uint32_t> arg(c);
  for (std::size_t mask = 1; mask < full; ++mask) {
    if (std::has_single_bit(mask)) continue;
    const std::size_t low = mask & (~mask + 1);
    const std::size_t rest = mask ^ low;
    std::fill(merged.begin(), merged.end(), kInf);
    // A = low | s over proper subsets s of rest
    for (std::size_t s = (rest - 1) & rest;; s = (s - 1) & rest) {
      const std::size_t a = low | s;
      const std::size_t b = mask ^ a;
      const double* da = &t.dp[a * c];
      const double* db = &t.dp[b * c];
      for (std::size_t u = 0; u < c; ++u) {
        const double v = da[u] + db[u];
        if (v < merged[u]) {
          merged[u] = v;
          arg[u] = static_cast<std::uint32_t>(a);
        }
      }
      if (s == 0) break;
    }
    double* out = &t.dp[mask * c];
    for (std::size_t v = 0; v < c; ++v) {
      double best = kInf;
      std::size_t bu = npos;
      for (std::size_t u = 0; u < c; ++u) {
        const double val = sp(v, u) + merged[u];
        if (val < best) {
          best = val;
          bu = u;
        }
      }
      out[v] = best;
      if (trace) {
        t.via[mask * c + v] = bu;
        if (bu != npos) t.split[mask * c + v] = arg[bu];
      }
    }
  }
  return t;
}

}  // namespace detail

/// Turns an arc multiset into an arborescence: BFS from the root keeps the
/// first in-arc per node, then prunes leaves that are not required.
inline std::vector<std::size_t> normalize_arborescence(const TransformedGraph& g, std::vector<std::size_t> arcs,
                                                       const std::vector<char>& required) {
  std::sort(arcs.begin(), arcs.end());
  arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());
  const std::size_t n = g.node_count();
  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t a : arcs) out[g.arc(a).tail].push_back(a);
  std::vector<std::size_t> parent(n, npos);
  std::vector<char> seen(n, 0);
  std::deque<std::size_t> q{g.root()};
  seen[g.root()] = 1;
  while (!q.empty()) {
    const std::size_t v = q.front();
    q.pop_front();
    for (std::size_t a : out[v]) {
      const std::size_t h = g.arc(a).head;
      if (seen[h]) continue;
      seen[h] = 1;
      parent[h] = a;
      q.push_back(h);
    }
  }
  std::vector<int> children(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    if (parent[v] != npos) ++children[g.arc(parent[v]).tail];
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t v = 0; v < n; ++v) {
      if (parent[v] != npos && children[v] == 0 && !required[v]) {
        --children[g.arc(parent[v]).tail];
        parent[v] = npos;
        changed = true;
      }
    }
  }
  std::vector<std::size_t> kept;
  for (std::size_t v = 0; v < n; ++v) {
    if (parent[v] != npos) kept.push_back(parent[v]);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

/// Exact Steiner arborescence routing of selections over the cost-shifted graph.
///
/// Every cable node may serve as an intermediate. With few enough positions the
/// optimal cost of every selection is tabulated once; otherwise each selection
/// is solved on demand and cached (so copies are cheap and per-thread).
class SteinerRouter {
public:
  SteinerRouter(const TransformedGraph& g, const std::vector<double>& costs, std::size_t table_limit = 14,
                std::size_t terminal_budget = 14)
      : g_(std::make_shared<const TransformedGraph>(g)),
        costs_(std::make_shared<const std::vector<double>>(costs)),
        sp_(std::make_shared<const ShortestPaths>(g, costs)),
        budget_(terminal_budget) {
    if (g.has_artificial_root()) {
      for (std::size_t s = 0; s < g.substation_count(); ++s) required_.push_back(g.substation_node(s));
    }
    if (required_.size() + g.position_count() <= table_limit) {
      std::vector<std::size_t> terms = required_;
      for (std::size_t i = 0; i < g.position_count(); ++i) terms.push_back(g.position_node(i));
      auto t = detail::steiner_table(*sp_, terms, false);
      auto col = std::make_shared<std::vector<double>>(std::size_t{1} << terms.size());
      for (std::size_t m = 0; m < col->size(); ++m) (*col)[m] = t.dp[m * t.c + g.root()];
      root_column_ = std::move(col);
    }
  }

  [[nodiscard]] bool tabulated() const { return root_column_ != nullptr; }

  /// Optimal routing cost of a selection (bitmask over positions); kInf if unroutable.
  [[nodiscard]] double cost(Mask selection) const {
    const std::size_t r = required_.size();
    if (root_column_) {
      const std::size_t mask = ((std::size_t{1} << r) - 1) | (static_cast<std::size_t>(selection) << r);
      return (*root_column_)[mask];
    }
    if (auto it = cache_.find(selection); it != cache_.end()) return it->second;
    const double c = solve(mask_to_indices(selection), false).cost;
    cache_.emplace(selection, c);
    return c;
  }

  /// Optimal tree for a selection, normalized to an arborescence.
  [[nodiscard]] RoutedTree route(const std::vector<std::size_t>& selection) const { return solve(selection, true); }

  [[nodiscard]] const TransformedGraph& graph() const { return *g_; }
  [[nodiscard]] const std::vector<double>& costs() const { return *costs_; }

private:
  RoutedTree solve(const std::vector<std::size_t>& selection, bool trace) const {
    const auto& g = *g_;
    std::vector<std::size_t> terms = required_;
    for (std::size_t i : selection) terms.push_back(g.position_node(i));
    if (terms.size() > budget_) {
      throw BudgetError("routing " + std::to_string(terms.size()) + " terminals exceeds the exact budget of " +
                        std::to_string(budget_));
    }
    RoutedTree out;
    if (terms.empty()) {
      out.cost = 0.0;
      return out;
    }
    const auto t = detail::steiner_table(*sp_, terms, trace);
    const std::size_t full = (std::size_t{1} << terms.size()) - 1;
    out.cost = t.dp[full * t.c + g.root()];
    if (!trace || out.cost == kInf) return out;

    std::vector<std::size_t> arcs;
    auto add_path = [&](std::size_t from, std::size_t to) {
      const auto p = sp_->path(from, to);
      for (std::size_t h = 1; h < p.size(); ++h) arcs.push_back(g.cable_arc(p[h - 1], p[h]));
    };
    std::vector<std::pair<std::size_t, std::size_t>> stack{{full, g.root()}};
    while (!stack.empty()) {
      const auto [mask, v] = stack.back();
      stack.pop_back();
      const std::size_t u = t.via[mask * t.c + v];
      add_path(v, u);
      if (std::has_single_bit(mask)) continue;
      const std::size_t a = t.split[mask * t.c + v];
      stack.emplace_back(a, u);
      stack.emplace_back(mask ^ a, u);
    }
    std::vector<char> required(g.node_count(), 0);
    for (std::size_t v : terms) required[v] = 1;
    out.arcs = normalize_arborescence(g, arcs, required);
    out.cost = 0.0;
    for (std::size_t a : out.arcs) out.cost += (*costs_)[a];
    return out;
  }

  std::shared_ptr<const TransformedGraph> g_;
  std::shared_ptr<const std::vector<double>> costs_;
  std::shared_ptr<const ShortestPaths> sp_;
  std::shared_ptr<const std::vector<double>> root_column_;
  std::vector<std::size_t> required_;
  std::size_t budget_;
  mutable std::map<Mask, double> cache_;
};

namespace detail {

struct StringTable {
  std::size_t k = 0;
  std::vector<double> hk;           // hk[mask][last]: cheapest anchored path covering mask, ending at last
  std::vector<std::uint8_t> prev;   // predecessor in that path (k = anchor)
  std::vector<double> part;         // part[mask]: cheapest partition of mask into strings
  std::vector<std::uint32_t> piece;  // string chosen with the lowest bit of mask
};

/// Held-Karp over anchored paths of at most H nodes, then a subset partition DP.
inline StringTable string_table(const std::vector<double>& anchor, const std::vector<double>& chain, std::size_t k,
                                int hop_limit) {
  StringTable t;
  t.k = k;
  const std::size_t full = std::size_t{1} << k;
  const auto H = static_cast<std::size_t>(hop_limit);
  t.hk.assign(full * k, kInf);
  t.prev.assign(full * k, static_cast<std::uint8_t>(k));
  for (std::size_t j = 0; j < k; ++j) t.hk[(std::size_t{1} << j) * k + j] = anchor[j];
  std::vector<double> best(full, kInf);
  for (std::size_t mask = 1; mask < full; ++mask) {
    const auto pc = static_cast<std::size_t>(std::popcount(mask));
    if (pc > H) continue;
    for (std::size_t last = 0; last < k; ++last) {
      const double here = t.hk[mask * k + last];
      if (here == kInf) continue;
      best[mask] = std::min(best[mask], here);
      if (pc == H) continue;
      for (std::size_t nx = 0; nx < k; ++nx) {
        if (mask & (std::size_t{1} << nx)) continue;
        const double v = here + chain[last * k + nx];
        const std::size_t m2 = mask | (std::size_t{1} << nx);
        if (v < t.hk[m2 * k + nx]) {
          t.hk[m2 * k + nx] = v;
          t.prev[m2 * k + nx] = static_cast<std::uint8_t>(last);
        }
      }
    }
  }
  t.part.assign(full, kInf);
  t.piece.assign(full, 0);
  t.part[0] = 0.0;
  for (std::size_t mask = 1; mask < full; ++mask) {
    const std::size_t low = mask & (~mask + 1);
    const std::size_t rest = mask ^ low;
    for (std::size_t s = rest;; s = (s - 1) & rest) {
      const std::size_t a = low | s;
      if (static_cast<std::size_t>(std::popcount(a)) <= H) {
        const double v = best[a] + t.part[mask ^ a];
        if (v < t.part[mask]) {
          t.part[mask] = v;
          t.piece[mask] = static_cast<std::uint32_t>(a);
        }
      }
      if (s == 0) break;
    }
  }
  return t;
}

}  // namespace detail

/// Exact radial routing: partition of the selection into substation-anchored
/// strings of at most H turbines. Only selected positions are used.
class StringRouter {
public:
  StringRouter(const TransformedGraph& g, const std::vector<double>& costs, int hop_limit,
               std::size_t table_limit = 14, std::size_t selection_budget = 12)
      : g_(std::make_shared<const TransformedGraph>(g)),
        costs_(std::make_shared<const std::vector<double>>(costs)),
        hop_(hop_limit),
        budget_(selection_budget) {
    if (hop_limit < 1) throw InvariantError("hop limit must be at least 1");
    const std::size_t n = g.position_count();
    anchor_.assign(n, kInf);
    anchor_arc_.assign(n, npos);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t s : g.anchors()) {
        const std::size_t a = g.cable_arc(s, g.position_node(j));
        if (a != npos && costs[a] < anchor_[j]) {
          anchor_[j] = costs[a];
          anchor_arc_[j] = a;
        }
      }
    }
    if (n <= table_limit) {
      std::vector<double> chain(n * n, kInf);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) chain[i * n + j] = chain_cost(i, j);
      }
      table_ = std::make_shared<const detail::StringTable>(detail::string_table(anchor_, chain, n, hop_limit));
    }
  }

  [[nodiscard]] int hop_limit() const { return hop_; }
  [[nodiscard]] bool tabulated() const { return table_ != nullptr; }

  [[nodiscard]] double cost(Mask selection) const {
    if (table_) return table_->part[static_cast<std::size_t>(selection)];
    if (auto it = cache_.find(selection); it != cache_.end()) return it->second;
    const double c = solve(mask_to_indices(selection), false).cost;
    cache_.emplace(selection, c);
    return c;
  }

  [[nodiscard]] RoutedTree route(const std::vector<std::size_t>& selection) const { return solve(selection, true); }

private:
  [[nodiscard]] double chain_cost(std::size_t i, std::size_t j) const {
    if (i == j) return kInf;
    const std::size_t a = g_->cable_arc(g_->position_node(i), g_->position_node(j));
    return a == npos ? kInf : (*costs_)[a];
  }

  RoutedTree solve(std::vector<std::size_t> sel, bool trace) const {
    std::sort(sel.begin(), sel.end());
    RoutedTree out;
    const std::size_t k = sel.size();
    const auto& g = *g_;
    std::shared_ptr<const detail::StringTable> t;
    std::size_t key = 0;
    if (table_ && trace) {
      t = table_;
      key = static_cast<std::size_t>(indices_to_mask(sel));
    } else {
      if (k > budget_) {
        throw BudgetError("string routing of " + std::to_string(k) + " turbines exceeds the exact budget of " +
                          std::to_string(budget_));
      }
      std::vector<double> anchor(k), chain(k * k);
      for (std::size_t a = 0; a < k; ++a) {
        anchor[a] = anchor_[sel[a]];
        for (std::size_t b = 0; b < k; ++b) chain[a * k + b] = chain_cost(sel[a], sel[b]);
      }
      t = std::make_shared<const detail::StringTable>(detail::string_table(anchor, chain, k, hop_));
      key = (std::size_t{1} << k) - 1;
    }
    // local index -> position index
    auto position = [&](std::size_t local) { return t == table_ ? local : sel[local]; };
    out.cost = t->part[key];
    if (!trace || out.cost == kInf) return out;

    if (g.has_artificial_root()) {
      for (std::size_t s = 0; s < g.substation_count(); ++s) out.arcs.push_back(g.cable_arc(g.root(), g.substation_node(s)));
    }
    std::size_t mask = key;
    while (mask) {
      const std::size_t piece = t->piece[mask];
      // best last node of this piece
      std::size_t last = npos;
      double best = kInf;
      for (std::size_t l = 0; l < t->k; ++l) {
        if ((piece >> l) & 1U) {
          const double v = t->hk[piece * t->k + l];
          if (v < best) {
            best = v;
            last = l;
          }
        }
      }
      std::vector<std::size_t> rev;
      std::size_t m = piece;
      std::size_t cur = last;
      while (cur != t->k) {
        rev.push_back(cur);
        const std::size_t p = t->prev[m * t->k + cur];
        m ^= std::size_t{1} << cur;
        cur = m ? p : t->k;
      }
      std::vector<std::size_t> str;
      for (auto it = rev.rbegin(); it != rev.rend(); ++it) str.push_back(position(*it));
      out.arcs.push_back(anchor_arc_[str.front()]);
      for (std::size_t h = 1; h < str.size(); ++h) {
        out.arcs.push_back(g.cable_arc(g.position_node(str[h - 1]), g.position_node(str[h])));
      }
      out.strings.push_back(std::move(str));
      mask ^= piece;
    }
    std::sort(out.arcs.begin(), out.arcs.end());
    out.cost = 0.0;
    for (std::size_t a : out.arcs) out.cost += (*costs_)[a];
    return out;
  }

  std::shared_ptr<const TransformedGraph> g_;
  std::shared_ptr<const std::vector<double>> costs_;
  int hop_;
  std::size_t budget_;
  std::vector<double> anchor_;
  std::vector<std::size_t> anchor_arc_;
  std::shared_ptr<const detail::StringTable> table_;
  mutable std::map<Mask, double> cache_;
};

/// Turbines per layer (index h-1 holds layer h) for a set of strings.
inline std::vector<std::size_t> layer_occupancy(const std::vector<std::vector<std::size_t>>& strings, int hop_limit) {
  std::vector<std::size_t> occ(static_cast<std::size_t>(std::max(hop_limit, 1)), 0);
  for (const auto& s : strings) {
    for (std::size_t h = 0; h < s.size() && h < occ.size(); ++h) ++occ[h];
  }
  return occ;
}

/// Layer consistency of a string profile: no string longer than H, occupancy
/// nonincreasing across layers, and at most floor(k_ub / H) strings reaching layer H.
inline bool layer_caps_consistent(const std::vector<std::vector<std::size_t>>& strings, int hop_limit,
                                  std::optional<int> k_ub = {}) {
  for (const auto& s : strings) {
    if (s.size() > static_cast<std::size_t>(hop_limit)) return false;
  }
  const auto occ = layer_occupancy(strings, hop_limit);
  for (std::size_t h = 1; h < occ.size(); ++h) {
    if (occ[h] > occ[h - 1]) return false;
  }
  if (k_ub && occ.back() > static_cast<std::size_t>(*k_ub / hop_limit)) return false;
  return true;
}

}  // namespace qstpi
