#pragma once

// Interference and cardinality bounds, conflict-graph MIS quota, the
// minimum-interference subproblem, and routing lower bounds.

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "qstpi/errors.hpp"
#include "qstpi/problem.hpp"
#include "qstpi/routing.hpp"
#include "qstpi/search.hpp"

namespace qstpi {

/// Fewest turbines that can reach the quota, ignoring interference.
inline std::size_t n_min(const Problem& p) {
  std::vector<double> q = p.profits();
  std::sort(q.begin(), q.end(), std::greater<>());
  double sum = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (sum >= p.quota() - p.quota_tolerance()) return std::max<std::size_t>(k, 1);
    sum += q[k];
  }
  if (sum >= p.quota() - p.quota_tolerance()) return std::max<std::size_t>(q.size(), 1);
  throw InfeasibleError("quota unreachable: total profit " + std::to_string(sum) + " MW < quota " +
                        std::to_string(p.quota()) + " MW");
}

/// LB_i: sum of the n_min - 1 smallest I_ij over partners at distance >= D_min.
inline double interference_row_lb(const Problem& p, std::size_t i, std::size_t nmin) {
  if (nmin <= 1) return 0.0;
  std::vector<double> row;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (j != i && !p.conflict(i, j)) row.push_back(p.interference()(i, j));
  }
  if (row.size() < nmin - 1) return 0.0;
  std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(nmin - 1), row.end());
  return std::accumulate(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(nmin - 1), 0.0);
}

/// I_LB: sum of the n_min smallest LB_i.
inline double total_interference_lb(const Problem& p, std::size_t nmin) {
  std::vector<double> lb;
  for (std::size_t i = 0; i < p.size(); ++i) lb.push_back(interference_row_lb(p, i, nmin));
  std::sort(lb.begin(), lb.end());
  const std::size_t k = std::min(nmin, lb.size());
  return std::accumulate(lb.begin(), lb.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
}

inline double total_interference_lb(const Problem& p) { return total_interference_lb(p, n_min(p)); }

struct ConflictGraph {
  std::size_t n = 0;
  std::vector<std::vector<char>> adj;

  [[nodiscard]] bool edge(std::size_t i, std::size_t j) const { return adj[i][j] != 0; }
  [[nodiscard]] std::size_t edge_count() const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) c += adj[i][j] ? 1 : 0;
    }
    return c;
  }
};

/// Edges where two positions interfere in either direction or violate D_min.
/// With `distance_only`, interference is ignored.
inline ConflictGraph conflict_graph(const Problem& p, bool distance_only = false) {
  ConflictGraph g;
  g.n = p.size();
  g.adj.assign(g.n, std::vector<char>(g.n, 0));
  for (std::size_t i = 0; i < g.n; ++i) {
    for (std::size_t j = 0; j < g.n; ++j) {
      if (i == j) continue;
      if (p.conflict(i, j) || (!distance_only && p.pair_interference(i, j) > 0.0)) g.adj[i][j] = 1;
    }
  }
  return g;
}

struct IndependentSet {
  double weight = 0.0;
  std::vector<std::size_t> members;
};

/// Maximum-weight independent set by branch and bound (exact up to `limit` vertices).
inline IndependentSet max_weight_independent_set(const ConflictGraph& g, const std::vector<double>& w,
                                                 std::size_t limit = 30) {
  if (g.n > limit) {
    throw BudgetError("exact MIS limited to " + std::to_string(limit) + " vertices, got " + std::to_string(g.n));
  }
  std::vector<std::size_t> order(g.n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });

  IndependentSet best;
  // greedy start
  for (std::size_t v : order) {
    bool ok = true;
    for (std::size_t u : best.members) ok = ok && !g.edge(u, v);
    if (ok) {
      best.members.push_back(v);
      best.weight += w[v];
    }
  }
  std::vector<double> suffix(g.n + 1, 0.0);
  for (std::size_t k = g.n; k-- > 0;) suffix[k] = suffix[k + 1] + std::max(0.0, w[order[k]]);

  std::vector<std::size_t> cur;
  std::vector<char> blocked(g.n, 0);
  std::function<void(std::size_t, double)> rec = [&](std::size_t k, double weight) {
    if (weight > best.weight) {
      best.weight = weight;
      best.members = cur;
    }
    if (k == g.n || weight + suffix[k] <= best.weight) return;
    const std::size_t v = order[k];
    if (!blocked[v] && w[v] > 0.0) {
      std::vector<std::size_t> newly;
      for (std::size_t u = 0; u < g.n; ++u) {
        if (g.edge(v, u) && !blocked[u]) {
          blocked[u] = 1;
          newly.push_back(u);
        }
      }
      cur.push_back(v);
      rec(k + 1, weight + w[v]);
      cur.pop_back();
      for (std::size_t u : newly) blocked[u] = 0;
    }
    rec(k + 1, weight);
  };
  rec(0, 0.0);
  std::sort(best.members.begin(), best.members.end());
  return best;
}

/// Q*_MIS: largest quota collectable with no interference and no D_min violation.
inline double mis_quota(const Problem& p, std::size_t limit = 30) {
  return max_weight_independent_set(conflict_graph(p), p.profits(), limit).weight;
}

/// Names the requirement that makes an infeasible instance infeasible.
inline std::string infeasibility_reason(const Problem& p, std::size_t limit = 30) {
  double total = 0.0;
  for (double q : p.profits()) total += q;
  const double need = p.quota() - p.quota_tolerance();
  if (total < need) {
    return "quota unreachable: total profit " + std::to_string(total) + " MW < quota " + std::to_string(p.quota()) +
           " MW";
  }
  if (p.size() <= limit) {
    const double best = max_weight_independent_set(conflict_graph(p, true), p.profits(), limit).weight;
    if (best < need) {
      return "D_min: the best selection respecting D_min collects " + std::to_string(best) + " MW < quota " +
             std::to_string(p.quota()) + " MW";
    }
  }
  return "interference: no selection respecting D_min keeps net output at or above the quota " +
         std::to_string(p.quota()) + " MW";
}

/// Upper bound on the independent-set weight from a greedy clique cover.
inline double clique_cover_bound(const ConflictGraph& g, const std::vector<double>& w) {
  std::vector<std::size_t> order(g.n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
  std::vector<std::vector<std::size_t>> cliques;
  double bound = 0.0;
  for (std::size_t v : order) {
    bool placed = false;
    for (auto& c : cliques) {
      bool all = true;
      for (std::size_t u : c) all = all && g.edge(u, v);
      if (all) {
        c.push_back(v);
        placed = true;
        break;
      }
    }
    if (!placed) {
      cliques.push_back({v});
      bound += std::max(0.0, w[v]);  // heaviest member comes first
    }
  }
  return bound;
}

/// k^ub: smallest k such that every k-subset reaches the quota even under the
/// worst interference; |T_p| when no such k exists.
inline std::size_t k_upper_bound(const Problem& p) {
  const std::size_t n = p.size();
  std::vector<double> q = p.profits();
  std::sort(q.begin(), q.end());
  std::vector<std::vector<double>> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) rows[i].push_back(p.interference()(i, j));
    }
    std::sort(rows[i].begin(), rows[i].end(), std::greater<>());
  }
  double qmin = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    qmin += q[k - 1];
    double imax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = std::accumulate(rows[i].begin(), rows[i].begin() + static_cast<std::ptrdiff_t>(k - 1), 0.0);
      imax = std::max(imax, s);
    }
    if (qmin - static_cast<double>(k) * imax >= p.quota() - p.quota_tolerance()) return k;
  }
  return n;
}

/// Admissible routing bound for a partial selection: every selected turbine
/// needs an in-arc, whose shifted cost already includes its build cost.
inline double routing_lower_bound(const TransformedGraph& g, const std::vector<double>& costs, Mask fixed_in,
                                  Mask fixed_out) {
  (void)fixed_out;  // excluded positions may still relay cable, so their arcs stay admissible
  double lb = 0.0;
  for (Mask m = fixed_in; m; m &= m - 1) {
    const auto i = static_cast<std::size_t>(std::countr_zero(m));
    double best = kInf;
    for (std::size_t a : g.in_arcs(g.position_node(i))) {
      if (g.arc(a).tail != g.position_node(i)) best = std::min(best, costs[a]);
    }
    lb += best;
  }
  return lb;
}

inline double routing_lower_bound(const TransformedGraph& g, Mask fixed_in, Mask fixed_out) {
  return routing_lower_bound(g, arc_costs(g), fixed_in, fixed_out);
}

// ---------------------------------------------------------------------------
// MinI

struct MinIResult {
  double i_tot = 0.0;
  std::vector<std::size_t> selection;
  bool proven_optimal = false;
  double lower_bound = 0.0;
};

namespace detail {

struct InterferenceEval {
  const Problem* p;
  double value(Mask in) const { return p->total_interference(mask_to_indices(in)); }
  double lower_bound(Mask in, Mask) const { return value(in); }
};

}  // namespace detail

/// Branching order for MinI: profit per unit interference degree, descending.
inline std::vector<std::size_t> min_interference_order(const Problem& p) {
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> ratio(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (j != i) deg += p.pair_interference(i, j);
    }
    ratio[i] = deg > 0.0 ? p.profit(i) / deg : std::numeric_limits<double>::infinity();
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ratio[a] > ratio[b]; });
  return order;
}

/// Minimizes total interference subject to quota and D_min.
inline MinIResult min_interference(const Problem& p, double time_budget_s = std::numeric_limits<double>::infinity(),
                                   int threads = 1) {
  n_min(p);  // throws when even zero interference cannot reach the quota
  SearchOptions opt;
  opt.time_limit_s = time_budget_s;
  opt.threads = threads;
  opt.max_selected = k_upper_bound(p);
  const std::function<detail::InterferenceEval()> make = [&p] { return detail::InterferenceEval{&p}; };
  const auto r = select_search<detail::InterferenceEval>(p, min_interference_order(p), make, opt);
  if (!r.found) {
    if (r.proven) throw InfeasibleError(infeasibility_reason(p));
    return {std::numeric_limits<double>::infinity(), {}, false, r.lower_bound};
  }
  return {r.cost, mask_to_indices(r.selection), r.proven, r.lower_bound};
}

}  // namespace qstpi
