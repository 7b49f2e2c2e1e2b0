#pragma once

// Selection branch-and-bound shared by every exact solver in the library.
//
// Each position is decided in or out along a fixed branching order. The
// objective must be monotone under inclusion, so an in-set that already
// satisfies the subproblem is never extended. Results are independent of the
// thread count: ties are broken by (cost, lexicographic selection) and nodes are
// pruned only when strictly worse than the incumbent.

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "qstpi/errors.hpp"
#include "qstpi/problem.hpp"

namespace qstpi {

/// True when the sorted index list of `a` precedes that of `b`.
inline bool lex_less(Mask a, Mask b) {
  if (a == b) return false;
  const int d = std::countr_zero(a ^ b);
  const Mask above = ~((bit(static_cast<std::size_t>(d)) << 1) - 1);
  if (a & bit(static_cast<std::size_t>(d))) return (b & above) != 0;  // b continues with a larger element
  return (a & above) == 0;                                            // a ended: prefix of b
}

struct SearchOptions {
  double time_limit_s = std::numeric_limits<double>::infinity();
  int threads = 1;
  std::size_t max_selected = 64;  // k^ub
  double i_min = -std::numeric_limits<double>::infinity();
  double i_max = std::numeric_limits<double>::infinity();
  std::optional<double> cutoff;  // accept only solutions strictly cheaper than this
  std::optional<Mask> initial;   // candidate offered before the search starts
  std::size_t split_depth = 4;
};

struct SearchResult {
  bool found = false;
  Mask selection = 0;
  double cost = std::numeric_limits<double>::infinity();
  double collected = 0.0;
  double i_tot = 0.0;
  bool proven = false;
  double lower_bound = 0.0;
  std::size_t nodes = 0;
};

/// Eval must provide `double value(Mask in)` (monotone objective, +inf if unusable)
/// and `double lower_bound(Mask in, Mask out)` (admissible over completions).
template <class Eval>
SearchResult select_search(const Problem& p, const std::vector<std::size_t>& order,
                           const std::function<Eval()>& make_eval, const SearchOptions& opt) {
  const std::size_t n = p.size();
  if (n > 64) throw BudgetError("exact selection search supports at most 64 positions");
  const auto start = std::chrono::steady_clock::now();
  const double quota = p.quota();
  const double qtol = p.quota_tolerance();
  const double lo_tol = 1e-9 * std::max(1.0, std::abs(opt.i_min));
  const double hi_tol = 1e-9 * std::max(1.0, std::abs(opt.i_max));
  const double inf = std::numeric_limits<double>::infinity();

  struct Node {
    std::size_t depth;
    Mask in;
    Mask out;
    double collected;
    double itot;
  };

  std::mutex mu;
  SearchResult best;
  std::atomic<double> incumbent{inf};
  std::atomic<bool> stop{false};
  std::atomic<std::size_t> nodes{0};

  auto cost_tol = [](double c) { return 1e-9 * std::max(1.0, std::abs(c)); };
  auto feasible = [&](const Node& nd) {
    return nd.collected - nd.itot >= quota - qtol && nd.itot >= opt.i_min - lo_tol && nd.itot <= opt.i_max + hi_tol;
  };
  auto offer = [&](Mask in, double value, double collected, double itot) {
    if (value == inf) return;
    if (opt.cutoff && !(value < *opt.cutoff - cost_tol(*opt.cutoff))) return;
    std::lock_guard lock(mu);
    if (!best.found || value < best.cost || (value == best.cost && lex_less(in, best.selection))) {
      best.found = true;
      best.selection = in;
      best.cost = value;
      best.collected = collected;
      best.i_tot = itot;
      incumbent.store(value);
    }
  };
  auto add = [&](const Node& nd, std::size_t i) {
    Node c = nd;
    double extra = 0.0;
    for (Mask m = nd.in; m; m &= m - 1) extra += p.pair_interference(i, static_cast<std::size_t>(std::countr_zero(m)));
    c.in |= bit(i);
    c.out |= p.conflict_mask(i) & ~c.in;
    c.collected += p.profit(i);
    c.itot += extra;
    return c;
  };
  // prunes that do not depend on the incumbent
  auto viable = [&](const Node& nd) {
    if (nd.itot > opt.i_max + hi_tol) return false;
    if (feasible(nd)) return true;
    if (static_cast<std::size_t>(std::popcount(nd.in)) >= opt.max_selected) return false;
    double reach = nd.collected;
    const Mask undecided = ~(nd.in | nd.out) & (n == 64 ? ~Mask{0} : bit(n) - 1);
    for (Mask m = undecided; m; m &= m - 1) reach += p.profit(static_cast<std::size_t>(std::countr_zero(m)));
    return reach - nd.itot >= quota - qtol;
  };
  auto pruned_by_bound = [&](double lb) {
    if (opt.cutoff && lb >= *opt.cutoff - cost_tol(*opt.cutoff)) return true;
    const double b = incumbent.load();
    return b != inf && lb > b + cost_tol(b);
  };

  // Evaluates a node if it is feasible, else pushes its viable children.
  auto expand = [&](Eval& ev, const Node& nd, std::vector<Node>& stack) {
    nodes.fetch_add(1, std::memory_order_relaxed);
    if (feasible(nd)) {
      offer(nd.in, ev.value(nd.in), nd.collected, nd.itot);
      return;
    }
    if (pruned_by_bound(ev.lower_bound(nd.in, nd.out))) return;
    std::size_t d = nd.depth;
    while (d < order.size() && ((nd.in | nd.out) & bit(order[d]))) ++d;
    if (d == order.size()) return;
    const std::size_t i = order[d];
    Node out_child = nd;
    out_child.depth = d + 1;
    out_child.out |= bit(i);
    Node in_child = add(nd, i);
    in_child.depth = d + 1;
    if (viable(out_child)) stack.push_back(out_child);
    if (viable(in_child)) stack.push_back(in_child);
  };

  auto timed_out = [&] {
    if (opt.time_limit_s == inf) return false;
    const std::chrono::duration<double> el = std::chrono::steady_clock::now() - start;
    return el.count() > opt.time_limit_s;
  };

  Eval root_eval = make_eval();
  if (opt.initial) {
    std::vector<std::size_t> idx = mask_to_indices(*opt.initial);
    Node nd{0, *opt.initial, 0, p.collected(idx), p.total_interference(idx)};
    if (p.respects_dmin(idx) && feasible(nd) && std::popcount(*opt.initial) <= static_cast<int>(opt.max_selected)) {
      offer(nd.in, root_eval.value(nd.in), nd.collected, nd.itot);
    }
  }

  // fixed decomposition into subtrees, in DFS order (in-branch first)
  std::vector<Node> tasks;
  {
    const std::size_t depth = std::min(n, opt.split_depth);
    std::vector<Node> stack;
    const Node root{0, 0, 0, 0.0, 0.0};
    if (viable(root)) stack.push_back(root);
    while (!stack.empty()) {
      Node nd = stack.back();
      stack.pop_back();
      if (nd.depth >= depth) {
        tasks.push_back(nd);
        continue;
      }
      expand(root_eval, nd, stack);
    }
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::vector<Node>> leftovers(static_cast<std::size_t>(std::max(1, opt.threads)));
  auto worker = [&](std::size_t id) {
    Eval ev = id == 0 ? root_eval : make_eval();
    std::vector<Node> stack;
    std::size_t tick = 0;
    while (!stop.load()) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) break;
      stack.push_back(tasks[t]);
      while (!stack.empty()) {
        if ((++tick & 63U) == 0 && timed_out()) stop.store(true);
        if (stop.load()) break;
        Node nd = stack.back();
        stack.pop_back();
        expand(ev, nd, stack);
      }
      if (stop.load()) {
        leftovers[id].insert(leftovers[id].end(), stack.begin(), stack.end());
        break;
      }
    }
  };
  const std::size_t nthreads = static_cast<std::size_t>(std::max(1, opt.threads));
  if (nthreads == 1 || tasks.size() <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }

  best.nodes = nodes.load();
  best.proven = !stop.load();
  if (best.proven) {
    best.lower_bound = best.found ? best.cost : inf;
  } else {
    // frontier bound: unexplored subtrees plus the incumbent
    double lb = best.found ? best.cost : inf;
    Eval ev = make_eval();
    for (const auto& v : leftovers) {
      for (const auto& nd : v) lb = std::min(lb, ev.lower_bound(nd.in, nd.out));
    }
    for (std::size_t t = std::min(next.load(), tasks.size()); t < tasks.size(); ++t) {
      lb = std::min(lb, ev.lower_bound(tasks[t].in, tasks[t].out));
    }
    best.lower_bound = lb;
  }
  return best;
}

}  // namespace qstpi
