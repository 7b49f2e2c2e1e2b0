#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qstpi/errors.hpp"
#include "qstpi/graph.hpp"
#include "qstpi/instance.hpp"
#include "qstpi/problem.hpp"
#include "qstpi/routing.hpp"
#include "qstpi/wake.hpp"

namespace qstpi {

/// Ids refer to instance substations/positions; -1 is the artificial root.
struct Solution {
  std::vector<int> selected;                            // ascending ids
  std::vector<std::pair<int, int>> arcs;                // (tail, head)
  std::optional<std::vector<std::vector<int>>> strings;  // hop variant, substation outwards
  double total_cost = 0.0;                              // k€
  double quota_collected = 0.0;                         // MW
  double i_tot = 0.0;                                   // MW
  bool proven_optimal = false;
  double lower_bound = 0.0;  // k€

  friend bool operator==(const Solution&, const Solution&) = default;
};

/// Builds a Solution from position indices and a routed tree, pricing arcs at true costs.
inline Solution make_solution(const Problem& p, const std::vector<std::size_t>& selection, const RoutedTree& tree,
                              bool radial = false) {
  const auto& g = p.graph();
  Solution s;
  std::vector<std::size_t> sel = selection;
  std::sort(sel.begin(), sel.end());
  for (std::size_t i : sel) s.selected.push_back(p.position_id(i));
  std::sort(s.selected.begin(), s.selected.end());
  for (std::size_t a : tree.arcs) {
    s.arcs.emplace_back(g.node_id(g.arc(a).tail), g.node_id(g.arc(a).head));
    s.total_cost += g.arc(a).cost;
  }
  if (radial) {
    std::vector<std::vector<int>> str;
    for (const auto& t : tree.strings) {
      std::vector<int> ids;
      for (std::size_t i : t) ids.push_back(p.position_id(i));
      str.push_back(std::move(ids));
    }
    s.strings = std::move(str);
  }
  s.quota_collected = p.collected(sel);
  s.i_tot = p.total_interference(sel);
  s.lower_bound = s.total_cost;
  return s;
}

inline Solution make_solution(const Problem& p, const FlatTree& t) {
  RoutedTree r;
  r.arcs = t.arcs;
  r.strings = t.strings;
  return make_solution(p, t.selected, r, true);
}

/// Independent feasibility check; returns one message per violation.
inline std::vector<std::string> verify_solution(const SiteInstance& inst, const Solution& s,
                                                std::optional<int> hop = {}) {
  std::vector<std::string> v;
  std::map<int, const Position*> subs;
  std::map<int, std::size_t> pos;
  for (const auto& x : inst.substations) subs[x.id] = &x;
  for (std::size_t i = 0; i < inst.positions.size(); ++i) pos[inst.positions[i].id] = i;
  const bool artificial = inst.substations.size() > 1;
  const int root = artificial ? -1 : inst.substations.front().id;

  std::set<int> selected;
  for (int id : s.selected) {
    if (!pos.count(id)) {
      v.push_back("selected id " + std::to_string(id) + " is not a position");
      continue;
    }
    if (!selected.insert(id).second) v.push_back("position " + std::to_string(id) + " selected twice");
  }

  auto point = [&](int id) -> const Position* {
    if (auto it = subs.find(id); it != subs.end()) return it->second;
    if (auto it = pos.find(id); it != pos.end()) return &inst.positions[it->second];
    return nullptr;
  };

  // tree structure
  double cost = 0.0;
  std::map<int, int> parent;
  std::map<int, std::vector<int>> children;
  bool arcs_ok = true;
  for (const auto& [t, h] : s.arcs) {
    const bool root_link = artificial && t == -1;
    if (root_link ? !subs.count(h) : (!point(t) || !point(h) || t == h)) {
      v.push_back("arc (" + std::to_string(t) + "," + std::to_string(h) + ") is not in the candidate graph");
      arcs_ok = false;
      continue;
    }
    if (parent.count(h) || h == root) {
      v.push_back("node " + std::to_string(h) + " has more than one incoming arc");
      arcs_ok = false;
      continue;
    }
    parent[h] = t;
    children[t].push_back(h);
    if (!root_link) {
      const Position* a = point(t);
      const Position* b = point(h);
      cost += std::hypot(a->x_m - b->x_m, a->y_m - b->y_m) / 1000.0 * inst.cable_cost_per_km;
      if (pos.count(h)) cost += b->build_cost;
    }
  }
  std::map<int, int> depth;  // hops from the substation
  if (arcs_ok) {
    std::vector<int> todo{root};
    depth[root] = artificial ? -1 : 0;
    while (!todo.empty()) {
      const int u = todo.back();
      todo.pop_back();
      for (int c : children[u]) {
        if (depth.count(c)) continue;
        depth[c] = depth[u] + 1;
        todo.push_back(c);
      }
    }
    for (const auto& [h, t] : parent) {
      if (!depth.count(h)) v.push_back("node " + std::to_string(h) + " is not connected to the root");
    }
  }
  for (const auto& x : inst.substations) {
    if (x.id != root && !parent.count(x.id)) v.push_back("substation " + std::to_string(x.id) + " is not connected");
  }
  for (int id : selected) {
    if (!parent.count(id)) v.push_back("selected position " + std::to_string(id) + " is not connected");
  }

  // quota, interference, distances
  std::vector<std::size_t> idx;
  for (int id : selected) idx.push_back(pos[id]);
  const InterferenceMatrix I = inst.interference ? *inst.interference : build_interference_matrix(inst);
  double collected = 0.0;
  double itot = 0.0;
  for (std::size_t a : idx) {
    collected += position_profit(inst, a);
    for (std::size_t b : idx) {
      if (a != b) itot += I(a, b);
    }
  }
  const double quota = resolved_quota_mw(inst);
  if (collected - itot < quota - 1e-9 * std::max(1.0, quota)) {
    v.push_back("net quota " + std::to_string(collected - itot) + " MW below required " + std::to_string(quota) +
                " MW");
  }
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      const auto& pa = inst.positions[idx[a]];
      const auto& pb = inst.positions[idx[b]];
      if (std::hypot(pa.x_m - pb.x_m, pa.y_m - pb.y_m) < inst.d_min) {
        v.push_back("positions " + std::to_string(pa.id) + " and " + std::to_string(pb.id) + " closer than D_min");
      }
    }
  }
  if (std::abs(cost - s.total_cost) > 1e-6 * std::max(1.0, std::abs(cost))) {
    v.push_back("cost mismatch: reported " + std::to_string(s.total_cost) + " k€, recomputed " +
                std::to_string(cost) + " k€");
  }
  if (std::abs(collected - s.quota_collected) > 1e-6 * std::max(1.0, collected)) {
    v.push_back("collected quota mismatch");
  }
  if (std::abs(itot - s.i_tot) > 1e-6 * std::max(1.0, itot)) v.push_back("interference total mismatch");

  if (hop) {
    for (const auto& [t, kids] : children) {
      if (pos.count(t) && kids.size() > 1) v.push_back("turbine " + std::to_string(t) + " has out-degree > 1");
    }
    for (const auto& [id, d] : depth) {
      if (pos.count(id) && d > *hop) {
        v.push_back("position " + std::to_string(id) + " is " + std::to_string(d) + " hops from the substation");
      }
    }
    if (!s.strings) {
      v.push_back("hop solution lacks strings");
    } else {
      std::set<int> on_strings;
      for (const auto& str : *s.strings) {
        if (str.empty() || static_cast<int>(str.size()) > *hop) v.push_back("string length outside [1, H]");
        for (std::size_t h = 0; h < str.size(); ++h) {
          on_strings.insert(str[h]);
          const auto it = parent.find(str[h]);
          const bool ok = it != parent.end() && (h == 0 ? subs.count(it->second) > 0 : it->second == str[h - 1]);
          if (!ok) v.push_back("string arc into " + std::to_string(str[h]) + " missing from the tree");
        }
      }
      if (on_strings != selected) v.push_back("strings do not cover exactly the selection");
    }
  }
  return v;
}

inline ordered_json solution_to_json(const Solution& s) {
  ordered_json j;
  j["selected"] = s.selected;
  ordered_json arcs = ordered_json::array();
  for (const auto& [t, h] : s.arcs) arcs.push_back({t, h});
  j["arcs"] = arcs;
  if (s.strings) j["strings"] = *s.strings;
  j["total_cost_keur"] = s.total_cost;
  j["quota_mw"] = s.quota_collected;
  j["i_tot_mw"] = s.i_tot;
  j["proven_optimal"] = s.proven_optimal;
  j["lower_bound_keur"] = s.lower_bound;
  return j;
}

inline Solution solution_from_json(const ordered_json& j) {
  try {
    detail::expect_keys(j, {"selected", "arcs", "total_cost_keur", "quota_mw", "i_tot_mw", "proven_optimal",
                            "lower_bound_keur"},
                        {"strings"}, "solution");
    Solution s;
    s.selected = j.at("selected").get<std::vector<int>>();
    for (const auto& a : j.at("arcs")) {
      if (!a.is_array() || a.size() != 2) throw SchemaError("solution: arcs must be [tail, head] pairs");
      s.arcs.emplace_back(a[0].get<int>(), a[1].get<int>());
    }
    if (j.contains("strings")) s.strings = j.at("strings").get<std::vector<std::vector<int>>>();
    s.total_cost = j.at("total_cost_keur").get<double>();
    s.quota_collected = j.at("quota_mw").get<double>();
    s.i_tot = j.at("i_tot_mw").get<double>();
    s.proven_optimal = j.at("proven_optimal").get<bool>();
    s.lower_bound = j.at("lower_bound_keur").get<double>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("solution: ") + e.what());
  }
}

inline void save_solution(const Solution& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << solution_to_json(s).dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

inline Solution load_solution(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return solution_from_json(j);
}

}  // namespace qstpi
