#pragma once

#include <string>
#include <vector>

#include "qstpi/bounds.hpp"
#include "qstpi/instance.hpp"
#include "qstpi/problem.hpp"

namespace qstpi {

/// Invariant violations plus the trivial-infeasibility screen: whether any
/// D_min-respecting subset can reach the quota when interference is ignored.
inline std::vector<std::string> validate(const SiteInstance& inst, std::size_t exact_limit = 30) {
  std::vector<std::string> out;
  auto guard = [&](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      out.emplace_back(e.what());
    }
  };
  guard([&] { check_turbine(inst.turbine); });
  guard([&] { check_wind_rose(inst.wind_rose); });
  if (!out.empty()) return out;
  guard([&] { check_invariants(inst); });
  if (!out.empty()) return out;

  const Problem p(inst);
  double total = 0.0;
  for (double q : p.profits()) total += q;
  if (total < p.quota() - p.quota_tolerance()) {
    out.push_back("quota unreachable: total profit " + std::to_string(total) + " MW < quota " +
                  std::to_string(p.quota()) + " MW");
    return out;
  }
  const auto g = conflict_graph(p, true);
  if (p.size() <= exact_limit) {
    const double best = max_weight_independent_set(g, p.profits(), exact_limit).weight;
    if (best < p.quota() - p.quota_tolerance()) {
      out.push_back("trivially infeasible: best D_min-respecting selection collects " + std::to_string(best) +
                    " MW < quota " + std::to_string(p.quota()) + " MW");
    }
  } else {
    const double ub = clique_cover_bound(g, p.profits());
    if (ub < p.quota() - p.quota_tolerance()) {
      out.push_back("trivially infeasible: clique-cover bound " + std::to_string(ub) + " MW < quota " +
                    std::to_string(p.quota()) + " MW");
    }
  }
  return out;
}

}  // namespace qstpi
