#pragma once

// Sequential vs integrated pipelines, cost-reduction reporting, SVG rendering.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "qstpi/bounds.hpp"
#include "qstpi/solver.hpp"

namespace qstpi {

namespace detail {

struct BuildCostEval {
  const Problem* p;
  double value(Mask in) const {
    double s = 0.0;
    for (Mask m = in; m; m &= m - 1) s += p->build_cost(static_cast<std::size_t>(std::countr_zero(m)));
    return s;
  }
  double lower_bound(Mask in, Mask) const { return value(in); }
};

inline SolveResult route_as_strings(const Problem& p, const std::vector<std::size_t>& sel, int H, bool proven) {
  const StringRouter router(p.graph(), arc_costs(p.graph()), H, 0);
  const auto tree = router.route(sel);
  if (tree.cost == kInf) throw InfeasibleError("selection cannot be routed as strings of length <= H");
  SolveResult r;
  r.solution = make_solution(p, sel, tree, true);
  r.proven_optimal = proven;
  r.solution.proven_optimal = proven;
  r.solution.lower_bound = r.solution.total_cost;
  return r;
}

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

/// SEQ: cheapest-to-build feasible layout first, then exact string routing of it.
inline SolveResult run_seq(const Problem& p, int H, const SolverConfig& cfg = {}) {
  detail::require_feasible_quota(p);
  SearchOptions opt;
  opt.time_limit_s = cfg.time_limit;
  opt.threads = cfg.threads;
  opt.max_selected = k_upper_bound(p);
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return p.profit(a) / p.build_cost(a) > p.profit(b) / p.build_cost(b);
  });
  const std::function<detail::BuildCostEval()> make = [&p] { return detail::BuildCostEval{&p}; };
  const auto r = select_search<detail::BuildCostEval>(p, order, make, opt);
  if (!r.found) {
    if (!r.proven) throw TimeLimitError("time limit reached before any feasible selection was found");
    throw InfeasibleError(infeasibility_reason(p));
  }
  auto out = detail::route_as_strings(p, mask_to_indices(r.selection), H, r.proven);
  out.stats.nodes = r.nodes;
  return out;
}

/// QSTPI-SEQ: flat integrated optimum, then exact string routing of its selection.
inline SolveResult run_qstpi_seq(const Problem& p, int H, SolverConfig cfg = {}) {
  cfg.hop.reset();
  const auto flat = solve_problem(p, cfg);
  std::vector<std::size_t> sel;
  for (int id : flat.solution.selected) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p.position_id(i) == id) sel.push_back(i);
    }
  }
  auto out = detail::route_as_strings(p, sel, H, flat.proven_optimal);
  out.stats = flat.stats;
  return out;
}

inline SolveResult run_seq(const SiteInstance& inst, int H, const SolverConfig& cfg = {}) {
  return run_seq(Problem(inst), H, cfg);
}
inline SolveResult run_qstpi_seq(const SiteInstance& inst, int H, const SolverConfig& cfg = {}) {
  return run_qstpi_seq(Problem(inst), H, cfg);
}

/// Percent saved by `c_new` relative to `c_base`; positive when cheaper.
inline double cost_reduction(double c_base, double c_new) {
  if (!(c_base > 0.0) || !(c_new > 0.0)) throw InvariantError("cost_reduction needs positive costs");
  return (1.0 - c_new / c_base) * 100.0;
}

struct ComparisonRow {
  std::string instance;
  std::optional<double> c_seq;
  std::optional<double> c_qstpi_seq;
  std::optional<double> c_qstpi_hop;
  std::optional<double> reduction_seq_vs_hop;
  std::optional<double> reduction_seq_vs_qstpi_seq;
  std::string status_seq;
  std::string status_qstpi_seq;
  std::string status_qstpi_hop;

  friend bool operator==(const ComparisonRow&, const ComparisonRow&) = default;
};

struct BatchSummary {
  std::size_t rows = 0;
  std::size_t compared = 0;  // rows with a defined SEQ vs HOP reduction
  std::size_t improved = 0;
  std::size_t ties = 0;
  std::size_t worse = 0;
  double mean_reduction_seq_vs_hop = 0.0;
  double mean_reduction_seq_vs_qstpi_seq = 0.0;
  std::vector<ComparisonRow> table;
};

inline const std::vector<std::string>& comparison_columns() {
  static const std::vector<std::string> cols{"instance",
                                             "c_seq_keur",
                                             "c_qstpi_seq_keur",
                                             "c_qstpi_hop_keur",
                                             "reduction_seq_vs_hop_pct",
                                             "reduction_seq_vs_qstpi_seq_pct",
                                             "status_seq",
                                             "status_qstpi_seq",
                                             "status_qstpi_hop"};
  return cols;
}

inline std::string to_csv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream os;
  const auto& cols = comparison_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
  os << '\n';
  auto num = [](const std::optional<double>& v) { return v ? detail::format_double(*v) : std::string(); };
  for (const auto& r : rows) {
    os << r.instance << ',' << num(r.c_seq) << ',' << num(r.c_qstpi_seq) << ',' << num(r.c_qstpi_hop) << ','
       << num(r.reduction_seq_vs_hop) << ',' << num(r.reduction_seq_vs_qstpi_seq) << ',' << r.status_seq << ','
       << r.status_qstpi_seq << ',' << r.status_qstpi_hop << '\n';
  }
  return os.str();
}

inline std::vector<ComparisonRow> parse_comparison_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<ComparisonRow> rows;
  if (!std::getline(in, line)) throw ParseError("empty comparison CSV");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != comparison_columns().size()) throw ParseError("comparison CSV line " + std::to_string(lineno));
    auto num = [](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      double v = 0.0;
      std::from_chars(s.data(), s.data() + s.size(), v);
      return v;
    };
    rows.push_back({f[0], num(f[1]), num(f[2]), num(f[3]), num(f[4]), num(f[5]), f[6], f[7], f[8]});
  }
  return rows;
}

/// One comparison row; failures are recorded in the status columns.
inline ComparisonRow compare_pipelines(const std::string& name, const SiteInstance& inst, int H,
                                       const SolverConfig& cfg = {}) {
  ComparisonRow row;
  row.instance = name;
  std::optional<Problem> p;
  try {
    p.emplace(inst);
  } catch (const Error&) {
    row.status_seq = row.status_qstpi_seq = row.status_qstpi_hop = "error";
    return row;
  }
  auto run = [&](auto&& fn, std::optional<double>& cost, std::string& status) {
    try {
      const SolveResult r = fn();
      cost = r.solution.total_cost;
      status = r.proven_optimal ? "optimal" : "heuristic";
    } catch (const InfeasibleError&) {
      status = "infeasible";
    } catch (const Error&) {
      status = "error";
    }
  };
  run([&] { return run_seq(*p, H, cfg); }, row.c_seq, row.status_seq);
  run([&] { return run_qstpi_seq(*p, H, cfg); }, row.c_qstpi_seq, row.status_qstpi_seq);
  run(
      [&] {
        SolverConfig c = cfg;
        c.hop = H;
        return solve_problem(*p, c);
      },
      row.c_qstpi_hop, row.status_qstpi_hop);
  auto comparable = [](const std::string& a, const std::string& b) {
    return (a == "optimal" && b == "optimal") || (a == "heuristic" && b == "heuristic");
  };
  if (row.c_seq && row.c_qstpi_hop && comparable(row.status_seq, row.status_qstpi_hop)) {
    row.reduction_seq_vs_hop = cost_reduction(*row.c_seq, *row.c_qstpi_hop);
  }
  if (row.c_seq && row.c_qstpi_seq && comparable(row.status_seq, row.status_qstpi_seq)) {
    row.reduction_seq_vs_qstpi_seq = cost_reduction(*row.c_seq, *row.c_qstpi_seq);
  }
  return row;
}

inline BatchSummary summarize(std::vector<ComparisonRow> rows) {
  BatchSummary s;
  s.rows = rows.size();
  double sum_hop = 0.0;
  double sum_qseq = 0.0;
  std::size_t n_qseq = 0;
  for (const auto& r : rows) {
    if (r.reduction_seq_vs_hop) {
      ++s.compared;
      sum_hop += *r.reduction_seq_vs_hop;
      const double tol = 1e-9 * std::max(1.0, *r.c_seq);
      if (*r.c_qstpi_hop < *r.c_seq - tol) {
        ++s.improved;
      } else if (*r.c_qstpi_hop > *r.c_seq + tol) {
        ++s.worse;
      } else {
        ++s.ties;
      }
    }
    if (r.reduction_seq_vs_qstpi_seq) {
      ++n_qseq;
      sum_qseq += *r.reduction_seq_vs_qstpi_seq;
    }
  }
  if (s.compared) s.mean_reduction_seq_vs_hop = sum_hop / static_cast<double>(s.compared);
  if (n_qseq) s.mean_reduction_seq_vs_qstpi_seq = sum_qseq / static_cast<double>(n_qseq);
  s.table = std::move(rows);
  return s;
}

/// Runs all three pipelines per instance, writing comparison.csv and summary.json to out_dir.
inline BatchSummary batch_report(const std::vector<std::pair<std::string, SiteInstance>>& instances, int H,
                                 const std::string& out_dir, const SolverConfig& cfg = {}) {
  std::vector<ComparisonRow> rows;
  for (const auto& [name, inst] : instances) rows.push_back(compare_pipelines(name, inst, H, cfg));
  BatchSummary s = summarize(std::move(rows));

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  const std::string csv = (std::filesystem::path(out_dir) / "comparison.csv").string();
  std::ofstream out(csv, std::ios::binary);
  if (!out) throw IoError("cannot open " + csv + " for writing");
  out << to_csv(s.table);
  ordered_json j;
  j["rows"] = s.rows;
  j["compared"] = s.compared;
  j["improved"] = s.improved;
  j["ties"] = s.ties;
  j["worse"] = s.worse;
  j["mean_reduction_seq_vs_hop_pct"] = s.mean_reduction_seq_vs_hop;
  j["mean_reduction_seq_vs_qstpi_seq_pct"] = s.mean_reduction_seq_vs_qstpi_seq;
  const std::string sum = (std::filesystem::path(out_dir) / "summary.json").string();
  std::ofstream js(sum, std::ios::binary);
  if (!js) throw IoError("cannot open " + sum + " for writing");
  js << j.dump(2) << '\n';
  return s;
}

// ---------------------------------------------------------------------------
// SVG

inline std::string render_solution_svg(const SiteInstance& inst, const Solution& s, bool dmin_circles = false) {
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
  std::map<int, const Position*> at;
  for (const auto* group : {&inst.substations, &inst.positions}) {
    for (const auto& q : *group) {
      at[q.id] = &q;
      x0 = std::min(x0, q.x_m);
      x1 = std::max(x1, q.x_m);
      y0 = std::min(y0, q.y_m);
      y1 = std::max(y1, q.y_m);
    }
  }
  const double pad = std::max({x1 - x0, y1 - y0, 1.0}) * 0.05 + (dmin_circles ? inst.d_min / 2.0 : 0.0);
  x0 -= pad;
  y0 -= pad;
  x1 += pad;
  y1 += pad;
  const double width = 800.0;
  const double scale = width / std::max(x1 - x0, 1.0);
  const double height = std::max((y1 - y0) * scale, 1.0);
  char buf[256];
  std::ostringstream os;
  auto px = [&](double x) { return (x - x0) * scale; };
  auto py = [&](double y) { return height - (y - y0) * scale; };  // north up
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"%.0f\" height=\"%.0f\" "
                "viewBox=\"0 0 %.2f %.2f\">\n",
                width, height, width, height);
  os << buf;
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  std::vector<std::pair<int, int>> segments;
  if (s.strings) {
    std::map<int, int> parent;
    for (const auto& [t, h] : s.arcs) parent[h] = t;
    for (const auto& str : *s.strings) {
      for (int id : str) {
        if (auto it = parent.find(id); it != parent.end()) segments.emplace_back(it->second, id);
      }
    }
  } else {
    segments = s.arcs;
  }
  os << "<g stroke=\"#1f4e79\" stroke-width=\"2\">\n";
  for (const auto& [t, h] : segments) {
    if (!at.count(t) || !at.count(h)) continue;  // root links have no geometry
    std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\"/>\n", px(at[t]->x_m),
                  py(at[t]->y_m), px(at[h]->x_m), py(at[h]->y_m));
    os << buf;
  }
  os << "</g>\n";

  std::vector<char> chosen(inst.positions.size(), 0);
  for (std::size_t i = 0; i < inst.positions.size(); ++i) {
    chosen[i] = std::find(s.selected.begin(), s.selected.end(), inst.positions[i].id) != s.selected.end();
  }
  if (dmin_circles) {
    os << "<g fill=\"none\" stroke=\"#999999\" stroke-dasharray=\"4 3\">\n";
    for (std::size_t i = 0; i < inst.positions.size(); ++i) {
      if (!chosen[i]) continue;
      std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\"/>\n", px(inst.positions[i].x_m),
                    py(inst.positions[i].y_m), inst.d_min / 2.0 * scale);
      os << buf;
    }
    os << "</g>\n";
  }
  for (std::size_t i = 0; i < inst.positions.size(); ++i) {
    const auto& q = inst.positions[i];
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%d\" fill=\"%s\"><title>%d</title></circle>\n",
                  px(q.x_m), py(q.y_m), chosen[i] ? 6 : 3, chosen[i] ? "#2e8b57" : "#bbbbbb", q.id);
    os << buf;
  }
  for (const auto& q : inst.substations) {
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.2f\" y=\"%.2f\" width=\"14\" height=\"14\" fill=\"#c0392b\"><title>%d</title></rect>\n",
                  px(q.x_m) - 7.0, py(q.y_m) - 7.0, q.id);
    os << buf;
  }
  os << "</svg>\n";
  return os.str();
}

inline void render_solution_svg(const SiteInstance& inst, const Solution& s, const std::string& path,
                                bool dmin_circles = false) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << render_solution_svg(inst, s, dmin_circles);
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace qstpi
