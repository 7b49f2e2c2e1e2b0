#pragma once

// Exact desk-scale solvers: flat and hop-limited QSTPI, interference splitting,
// and a brute-force oracle.

#include <algorithm>
#include <chrono>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "qstpi/bounds.hpp"
#include "qstpi/errors.hpp"
#include "qstpi/graph.hpp"
#include "qstpi/heuristics.hpp"
#include "qstpi/problem.hpp"
#include "qstpi/routing.hpp"
#include "qstpi/search.hpp"
#include "qstpi/solution.hpp"

namespace qstpi {

struct SplitStrategy {
  enum class Kind { None, Ilb, Heuristic, MinI };
  Kind kind = Kind::None;
  double param = 0.0;  // alpha for Heuristic, tau (seconds) for MinI

  static SplitStrategy none() { return {}; }
  static SplitStrategy ilb() { return {Kind::Ilb, 0.0}; }
  static SplitStrategy heuristic(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InvariantError("alpha must lie in (0, 1]");
    return {Kind::Heuristic, alpha};
  }
  static SplitStrategy mini(double tau) {
    if (!(tau > 0.0)) throw InvariantError("tau must be positive");
    return {Kind::MinI, tau};
  }
};

struct SolverConfig {
  double time_limit = std::numeric_limits<double>::infinity();  // seconds, per search
  SplitStrategy split;
  std::optional<int> hop;
  std::size_t exact_budget = 12;
  int threads = 1;
};

struct SolveStats {
  std::size_t nodes = 0;
  double seconds = 0.0;
  std::size_t k_ub = 0;
  std::size_t n_min = 0;
};

struct SolveResult {
  Solution solution;
  bool proven_optimal = false;
  SolveStats stats;
};

namespace detail {

template <class Router>
struct RoutingEval {
  const Problem* p;
  Router router;
  std::shared_ptr<const std::vector<double>> costs;
  double value(Mask in) const { return router.cost(in); }
  double lower_bound(Mask in, Mask out) const {
    return std::max(router.cost(in), routing_lower_bound(p->graph(), *costs, in, out));
  }
};

/// Branching order: profit per build cost, descending.
inline std::vector<std::size_t> profit_order(const Problem& p) {
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return p.profit(a) / p.build_cost(a) > p.profit(b) / p.build_cost(b);
  });
  return order;
}

struct Constraints {
  double i_min = -std::numeric_limits<double>::infinity();
  double i_max = std::numeric_limits<double>::infinity();
  std::optional<double> cutoff;
};

/// Runs the selection search with `Router`; nullopt when no solution qualifies.
template <class Router>
std::optional<SolveResult> run_search(const Problem& p, const Router& router, const SolverConfig& cfg,
                                      const Constraints& cons, std::optional<Mask> initial, bool radial) {
  const auto t0 = std::chrono::steady_clock::now();
  SearchOptions opt;
  opt.time_limit_s = cfg.time_limit;
  opt.threads = cfg.threads;
  opt.i_min = cons.i_min;
  opt.i_max = cons.i_max;
  opt.cutoff = cons.cutoff;
  opt.initial = initial;
  const std::size_t kub = k_upper_bound(p);
  opt.max_selected = kub;
  auto costs = std::make_shared<const std::vector<double>>(arc_costs(p.graph()));
  const std::function<RoutingEval<Router>()> make = [&] { return RoutingEval<Router>{&p, router, costs}; };
  const SearchResult r = select_search<RoutingEval<Router>>(p, profit_order(p), make, opt);
  if (!r.found) {
    if (r.proven) return std::nullopt;
    throw TimeLimitError("time limit reached before any feasible selection was found");
  }
  SolveResult out;
  const auto sel = mask_to_indices(r.selection);
  out.solution = make_solution(p, sel, router.route(sel), radial);
  out.solution.proven_optimal = r.proven;
  out.solution.lower_bound = r.proven ? out.solution.total_cost : std::min(r.lower_bound, out.solution.total_cost);
  out.proven_optimal = r.proven;
  out.stats.nodes = r.nodes;
  out.stats.k_ub = kub;
  out.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

inline void require_feasible_quota(const Problem& p) { (void)n_min(p); }

inline std::optional<Mask> sph_start(const Problem& p) {
  const auto h = sph(p);
  if (!h.feasible) return std::nullopt;
  std::vector<std::size_t> idx;
  for (int id : h.solution.selected) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p.position_id(i) == id) idx.push_back(i);
    }
  }
  return indices_to_mask(idx);
}

inline std::optional<SolveResult> solve_flat(const Problem& p, const SolverConfig& cfg, const Constraints& cons) {
  require_feasible_quota(p);
  const SteinerRouter router(p.graph(), arc_costs(p.graph()));
  return run_search(p, router, cfg, cons, sph_start(p), false);
}

inline std::optional<SolveResult> solve_hop(const Problem& p, int H, const SolverConfig& cfg, const Constraints& cons) {
  require_feasible_quota(p);
  const StringRouter router(p.graph(), arc_costs(p.graph()), H);
  std::optional<Mask> start;
  const auto L = build_layered_graph(p.graph(), H, static_cast<int>(k_upper_bound(p)));
  const auto h = sph_radial(L, p);
  if (h.feasible) {
    std::vector<std::size_t> idx;
    for (int id : h.solution.selected) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (p.position_id(i) == id) idx.push_back(i);
      }
    }
    start = indices_to_mask(idx);
  }
  auto r = run_search(p, router, cfg, cons, start, true);
  if (r && r->solution.strings) {
    std::vector<std::vector<std::size_t>> shape;
    for (const auto& s : *r->solution.strings) shape.emplace_back(s.size());
    if (!layer_caps_consistent(shape, H, static_cast<int>(k_upper_bound(p)))) {
      throw InvariantError("optimal string layout violates the layer caps");
    }
  }
  return r;
}

inline std::optional<SolveResult> solve_any(const Problem& p, const SolverConfig& cfg, const Constraints& cons) {
  return cfg.hop ? solve_hop(p, *cfg.hop, cfg, cons) : solve_flat(p, cfg, cons);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Splitting

enum class Certificate { UpOptimalByCutoff, UpOptimalByCorollary, DownOptimal, Infeasible };

inline const char* to_string(Certificate c) {
  switch (c) {
    case Certificate::UpOptimalByCutoff: return "up-optimal-by-cutoff";
    case Certificate::UpOptimalByCorollary: return "up-optimal-by-corollary";
    case Certificate::DownOptimal: return "down-optimal";
    case Certificate::Infeasible: return "infeasible";
  }
  return "?";
}

struct SplitValue {
  double value = 0.0;
  bool proven_lower_bound = false;  // value <= interference of every feasible solution
};

struct SplitOutcome {
  double i_split = 0.0;
  std::optional<SolveResult> up;
  std::optional<SolveResult> down;
  Certificate certificate = Certificate::Infeasible;
  bool up_timed_out = false;
  bool down_timed_out = false;

  [[nodiscard]] const SolveResult* best() const {
    if (down) return &*down;
    if (up) return &*up;
    return nullptr;
  }
};

inline SplitValue choose_split_value(const Problem& p, const SplitStrategy& strategy, int threads = 1) {
  const double ilb = total_interference_lb(p);
  switch (strategy.kind) {
    case SplitStrategy::Kind::None:
    case SplitStrategy::Kind::Ilb: return {ilb, true};
    case SplitStrategy::Kind::Heuristic: {
      const auto h = sph(p);
      if (!h.feasible) throw InfeasibleError("shortest-path heuristic found no feasible solution to derive a split");
      const double v = strategy.param * h.solution.i_tot;
      return {v, v <= ilb};
    }
    case SplitStrategy::Kind::MinI: {
      const auto m = min_interference(p, strategy.param, threads);
      const double v = std::max(ilb, m.i_tot);
      return {v, m.proven_optimal || v <= ilb};
    }
  }
  return {ilb, true};
}

/// Solves P>= (i_tot >= i_split) and, unless i_split is a proven interference
/// lower bound, P<= (i_tot <= i_split) with the up optimum as a strict cutoff.
inline SplitOutcome solve_with_split(const Problem& p, double i_split, const SolverConfig& cfg,
                                     bool known_lower_bound = false) {
  if (i_split < 0.0) throw InvariantError("split value must be nonnegative");
  detail::require_feasible_quota(p);
  SplitOutcome out;
  out.i_split = i_split;
  const bool proven = known_lower_bound || i_split <= total_interference_lb(p);

  detail::Constraints up;
  up.i_min = i_split;
  out.up = detail::solve_any(p, cfg, up);
  out.up_timed_out = out.up && !out.up->proven_optimal;
  if (proven) {
    out.certificate = out.up ? Certificate::UpOptimalByCorollary : Certificate::Infeasible;
    return out;
  }
  detail::Constraints down;
  down.i_max = i_split;
  if (out.up) down.cutoff = out.up->solution.total_cost;
  out.down = detail::solve_any(p, cfg, down);
  out.down_timed_out = out.down && !out.down->proven_optimal;
  if (out.down) {
    out.certificate = Certificate::DownOptimal;
  } else if (out.up) {
    out.certificate = Certificate::UpOptimalByCutoff;
  } else {
    out.certificate = Certificate::Infeasible;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Entry points

inline SolveResult solve_problem(const Problem& p, const SolverConfig& cfg) {
  if (cfg.split.kind == SplitStrategy::Kind::None) {
    auto r = detail::solve_any(p, cfg, {});
    if (!r) throw InfeasibleError(infeasibility_reason(p));
    return *r;
  }
  const auto sv = choose_split_value(p, cfg.split, cfg.threads);
  const auto o = solve_with_split(p, sv.value, cfg, sv.proven_lower_bound);
  const SolveResult* b = o.best();
  if (!b) throw InfeasibleError(infeasibility_reason(p));
  SolveResult r = *b;
  r.proven_optimal = !o.up_timed_out && !o.down_timed_out && (!o.up || o.up->proven_optimal) &&
                     (!o.down || o.down->proven_optimal);
  r.solution.proven_optimal = r.proven_optimal;
  if (!r.proven_optimal) {
    double lb = r.solution.total_cost;
    if (o.up) lb = std::min(lb, o.up->solution.lower_bound);
    if (o.down) lb = std::min(lb, o.down->solution.lower_bound);
    r.solution.lower_bound = lb;
  }
  if (o.up) r.stats.nodes = o.up->stats.nodes + (o.down ? o.down->stats.nodes : 0);
  return r;
}

inline SolveResult solve_qstpi(const SiteInstance& inst, SolverConfig cfg = {}) {
  cfg.hop.reset();
  return solve_problem(Problem(inst), cfg);
}

inline SolveResult solve_qstpi_hop(const SiteInstance& inst, int H, SolverConfig cfg = {}) {
  if (H < 1) throw InvariantError("hop limit must be at least 1");
  cfg.hop = H;
  return solve_problem(Problem(inst), cfg);
}

/// Enumerates every selection and routes each exactly.
inline Solution brute_force_oracle(const Problem& p, std::optional<int> hop = {}, std::size_t budget = 12) {
  const std::size_t n = p.size();
  if (n > budget) {
    throw BudgetError("oracle limited to " + std::to_string(budget) + " positions, got " + std::to_string(n));
  }
  const auto costs = arc_costs(p.graph());
  std::optional<SteinerRouter> flat;
  std::optional<StringRouter> radial;
  if (hop) {
    radial.emplace(p.graph(), costs, *hop);
  } else {
    flat.emplace(p.graph(), costs);
  }
  bool found = false;
  Mask best = 0;
  double best_cost = kInf;
  for (Mask m = 0; m < bit(n); ++m) {
    const auto idx = mask_to_indices(m);
    if (!p.respects_dmin(idx) || !p.meets_quota(p.collected(idx), p.total_interference(idx))) continue;
    const double c = hop ? radial->cost(m) : flat->cost(m);
    if (c == kInf) continue;
    if (!found || c < best_cost || (c == best_cost && lex_less(m, best))) {
      found = true;
      best = m;
      best_cost = c;
    }
  }
  if (!found) throw InfeasibleError(infeasibility_reason(p));
  const auto sel = mask_to_indices(best);
  Solution s = hop ? make_solution(p, sel, radial->route(sel), true) : make_solution(p, sel, flat->route(sel));
  s.proven_optimal = true;
  s.lower_bound = s.total_cost;
  return s;
}

inline Solution brute_force_oracle(const SiteInstance& inst, std::optional<int> hop = {}, std::size_t budget = 12) {
  return brute_force_oracle(Problem(inst), hop, budget);
}

}  // namespace qstpi
