#pragma once

// MILP export in CPLEX LP text format, plus a small reader used to check the
// emitted files and to evaluate assignments against them.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qstpi/bounds.hpp"
#include "qstpi/errors.hpp"
#include "qstpi/graph.hpp"
#include "qstpi/instance.hpp"
#include "qstpi/problem.hpp"

namespace qstpi {

enum class LpModel { Flow, FlowCapa, MinI, TransMcCormick };

struct ExportSpec {
  LpModel model = LpModel::Flow;
  int hop = 0;  // FlowCapa only: flow capacity per arc
  bool include_ilb_cut = false;

  static ExportSpec flow(bool ilb = false) { return {LpModel::Flow, 0, ilb}; }
  static ExportSpec flow_capa(int h, bool ilb = false) { return {LpModel::FlowCapa, h, ilb}; }
  static ExportSpec mini(bool ilb = false) { return {LpModel::MinI, 0, ilb}; }
  static ExportSpec trans(bool ilb = false) { return {LpModel::TransMcCormick, 0, ilb}; }
};

inline const char* to_string(LpModel m) {
  switch (m) {
    case LpModel::Flow: return "FLOW";
    case LpModel::FlowCapa: return "FLOW_CAPA";
    case LpModel::MinI: return "MINI";
    case LpModel::TransMcCormick: return "TRANS";
  }
  return "?";
}

/// Parsed LP file.
struct LpRow {
  std::string name;
  std::vector<std::pair<std::string, double>> linear;
  std::vector<std::tuple<std::string, std::string, double>> quadratic;
  std::string sense;  // "<=", ">=", "="
  double rhs = 0.0;
};

struct LpBound {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
};

struct LpProblem {
  bool minimize = true;
  std::vector<std::pair<std::string, double>> objective;
  std::vector<LpRow> rows;
  std::map<std::string, LpBound> bounds;  // explicit entries only
  std::set<std::string> binaries;
  std::vector<std::string> variables;  // first-appearance order

  [[nodiscard]] std::size_t quadratic_rows() const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const LpRow& r) { return !r.quadratic.empty(); }));
  }
  [[nodiscard]] const LpRow* row(const std::string& name) const {
    for (const auto& r : rows) {
      if (r.name == name) return &r;
    }
    return nullptr;
  }
};

namespace detail {

inline std::string fmt17(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Accumulates one model and renders it; rows are wrapped below 255 characters.
class LpWriter {
public:
  void comment(const std::string& text) { header_ += "\\ " + text + "\n"; }

  void objective(std::vector<std::pair<std::string, double>> terms) { objective_ = std::move(terms); }

  void row(LpRow r) { rows_.push_back(std::move(r)); }

  void continuous(const std::string& v) { continuous_.push_back(v); }
  void binary(const std::string& v) { binaries_.push_back(v); }

  [[nodiscard]] std::size_t variable_count() const { return continuous_.size() + binaries_.size(); }
  [[nodiscard]] std::size_t binary_count() const { return binaries_.size(); }
  [[nodiscard]] std::size_t row_count() const { return rows_.size(); }
  [[nodiscard]] std::size_t quadratic_row_count() const {
    return static_cast<std::size_t>(
        std::count_if(rows_.begin(), rows_.end(), [](const LpRow& r) { return !r.quadratic.empty(); }));
  }

  [[nodiscard]] std::string render(bool minimize) const {
    std::string out = header_;
    out += minimize ? "Minimize\n" : "Maximize\n";
    Line obj(out, " obj:");
    for (const auto& [v, c] : objective_) obj.term(c, v);
    if (objective_.empty()) obj.word("0");
    obj.end();
    out += "Subject To\n";
    for (const auto& r : rows_) {
      Line l(out, " " + r.name + ":");
      for (const auto& [v, c] : r.linear) l.term(c, v);
      if (!r.quadratic.empty()) {
        l.word(r.linear.empty() ? "[" : "+ [");
        bool first = true;
        for (const auto& [a, b, c] : r.quadratic) {
          l.term(c, a + " * " + b, first);
          first = false;
        }
        l.word("]");
      }
      if (r.linear.empty() && r.quadratic.empty()) l.word("0");
      l.word(r.sense);
      l.word(fmt17(r.rhs));
      l.end();
    }
    out += "Bounds\n";
    for (const auto& v : continuous_) out += " " + v + " >= 0\n";
    out += "Binaries\n";
    {
      Line l(out, " ");
      for (const auto& v : binaries_) l.word(v);
      l.end();
    }
    out += "End\n";
    return out;
  }

private:
  class Line {
  public:
    Line(std::string& out, std::string start) : out_(out), cur_(std::move(start)) {}
    void word(const std::string& w) {
      if (cur_.size() + w.size() + 1 > 200) {
        out_ += cur_ + "\n";
        cur_ = "  ";
      }
      if (!cur_.empty() && cur_.back() != ' ') cur_ += ' ';
      cur_ += w;
    }
    void term(double c, const std::string& v, bool first_in_group = false) {
      const bool neg = c < 0.0;
      const std::string coef = std::abs(c) == 1.0 ? "" : fmt17(std::abs(c)) + " ";
      if (cur_.back() == ':' || first_in_group) {
        word((neg ? "- " : "") + coef + v);
      } else {
        word((neg ? "- " : "+ ") + coef + v);
      }
    }
    void end() {
      if (cur_.find_first_not_of(' ') != std::string::npos) out_ += cur_ + "\n";
    }

  private:
    std::string& out_;
    std::string cur_;
  };

  std::string header_;
  std::vector<std::pair<std::string, double>> objective_;
  std::vector<LpRow> rows_;
  std::vector<std::string> continuous_;
  std::vector<std::string> binaries_;
};

inline std::string node_name(const TransformedGraph& g, std::size_t v) {
  if (v >= g.cable_node_count()) return std::to_string(g.node_id(g.position_node(v - g.cable_node_count()))) + "p";
  const int id = g.node_id(v);
  return id < 0 && g.has_artificial_root() && v == g.root() ? "r" : std::to_string(id);
}

inline std::string arc_var(const char* prefix, const TransformedGraph& g, const Arc& a) {
  return std::string(prefix) + "_" + node_name(g, a.tail) + "_" + node_name(g, a.head);
}

inline std::string y_var(const Problem& p, std::size_t i) { return "y_" + std::to_string(p.position_id(i)); }

inline std::string m_var(const Problem& p, std::size_t i, std::size_t j) {
  return "m_" + std::to_string(p.position_id(i)) + "_" + std::to_string(p.position_id(j));
}

inline bool is_cable(const Arc& a) { return a.role == ArcRole::Cable || a.role == ArcRole::RootLink; }

/// Single-commodity flow linking: f_a <= M x_a and per-node balance in - out = demand(v).
template <class Demand>
void flow_rows(LpWriter& w, const TransformedGraph& g, const std::vector<std::size_t>& arcs, double big_m,
               std::size_t nodes, Demand demand) {
  std::vector<std::vector<std::size_t>> in(nodes), out(nodes);
  for (std::size_t a : arcs) {
    in[g.arc(a).head].push_back(a);
    out[g.arc(a).tail].push_back(a);
  }
  for (std::size_t v = 0; v < nodes; ++v) {
    if (v == g.root()) continue;
    LpRow r;
    r.name = "bal_" + node_name(g, v);
    for (std::size_t a : in[v]) r.linear.emplace_back(arc_var("f", g, g.arc(a)), 1.0);
    for (std::size_t a : out[v]) r.linear.emplace_back(arc_var("f", g, g.arc(a)), -1.0);
    r.sense = "=";
    demand(v, r);
    w.row(std::move(r));
  }
  for (std::size_t a : arcs) {
    LpRow r;
    r.name = "cap_" + node_name(g, g.arc(a).tail) + "_" + node_name(g, g.arc(a).head);
    r.linear = {{arc_var("f", g, g.arc(a)), 1.0}, {arc_var("x", g, g.arc(a)), -big_m}};
    r.sense = "<=";
    w.row(std::move(r));
  }
}

/// Itot >= sum_{i<j} (I_ij + I_ji) m_ij with m_ij >= s_i + s_j - 1.
template <class Sel>
void mccormick_rows(LpWriter& w, const Problem& p, Sel sel) {
  LpRow itot;
  itot.name = "interference";
  itot.linear.emplace_back("Itot", 1.0);
  std::vector<LpRow> links;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      const double c = p.pair_interference(i, j);
      if (c == 0.0) continue;
      const std::string m = m_var(p, i, j);
      itot.linear.emplace_back(m, -c);
      LpRow r;
      r.name = "mc_" + std::to_string(p.position_id(i)) + "_" + std::to_string(p.position_id(j));
      r.linear = {{m, 1.0}, {sel(i), -1.0}, {sel(j), -1.0}};
      r.sense = ">=";
      r.rhs = -1.0;
      links.push_back(std::move(r));
      w.continuous(m);
    }
  }
  itot.sense = ">=";
  w.row(std::move(itot));
  for (auto& r : links) w.row(std::move(r));
}

template <class Sel>
void dmin_rows(LpWriter& w, const Problem& p, Sel sel) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      if (!p.conflict(i, j)) continue;
      LpRow r;
      r.name = "dmin_" + std::to_string(p.position_id(i)) + "_" + std::to_string(p.position_id(j));
      r.linear = {{sel(i), 1.0}, {sel(j), 1.0}};
      r.sense = "<=";
      r.rhs = 1.0;
      w.row(std::move(r));
    }
  }
}

inline void ilb_row(LpWriter& w, const Problem& p) {
  LpRow r;
  r.name = "ilb";
  r.linear = {{"Itot", 1.0}};
  r.sense = ">=";
  r.rhs = total_interference_lb(p);
  w.row(std::move(r));
}

inline LpWriter build_model(const Problem& p, const ExportSpec& spec) {
  const auto& g = p.graph();
  const std::size_t n = p.size();
  const double terminals = static_cast<double>(g.substation_count() + n);
  LpWriter w;
  w.comment("model " + std::string(to_string(spec.model)) + ", " + std::to_string(n) + " positions, " +
            std::to_string(g.substation_count()) + " substations");

  std::vector<std::size_t> cable;
  for (std::size_t a = 0; a < g.arcs().size(); ++a) {
    if (is_cable(g.arc(a))) cable.push_back(a);
  }
  auto y = [&](std::size_t i) { return y_var(p, i); };

  switch (spec.model) {
    case LpModel::Flow:
    case LpModel::FlowCapa: {
      const double big_m = spec.model == LpModel::Flow ? terminals : static_cast<double>(spec.hop);
      w.comment("big-M " + fmt17(big_m));
      if (g.has_artificial_root()) w.comment("r is an artificial root joined to every substation at zero cost");
      std::vector<std::pair<std::string, double>> obj;
      for (std::size_t a : cable) obj.emplace_back(arc_var("x", g, g.arc(a)), g.arc(a).cost);
      w.objective(std::move(obj));

      LpRow quota;
      quota.name = "quota";
      for (std::size_t i = 0; i < n; ++i) quota.linear.emplace_back(y(i), p.profit(i));
      quota.linear.emplace_back("Itot", -1.0);
      quota.sense = ">=";
      quota.rhs = p.quota();
      w.row(std::move(quota));

      LpRow itot;
      itot.name = "interference";
      itot.linear.emplace_back("Itot", 1.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const double c = i == j ? 0.0 : p.interference()(j, i);
          if (c != 0.0) itot.quadratic.emplace_back(y(j), y(i), -c);
        }
      }
      itot.sense = ">=";
      w.row(std::move(itot));

      flow_rows(w, g, cable, big_m, g.cable_node_count(), [&](std::size_t v, LpRow& r) {
        if (g.is_position_node(v)) {
          r.linear.emplace_back(y(g.position_of(v)), -1.0);
        } else {
          r.rhs = 1.0;
        }
      });
      dmin_rows(w, p, y);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a : g.in_arcs(g.position_node(i))) {
          if (!is_cable(g.arc(a))) continue;
          LpRow r;
          r.name = "act_" + node_name(g, g.arc(a).tail) + "_" + node_name(g, g.arc(a).head);
          r.linear = {{arc_var("x", g, g.arc(a)), 1.0}, {y(i), -1.0}};
          r.sense = "<=";
          w.row(std::move(r));
        }
      }
      if (spec.include_ilb_cut) ilb_row(w, p);
      for (std::size_t a : cable) w.binary(arc_var("x", g, g.arc(a)));
      for (std::size_t i = 0; i < n; ++i) w.binary(y(i));
      for (std::size_t a : cable) w.continuous(arc_var("f", g, g.arc(a)));
      w.continuous("Itot");
      break;
    }
    case LpModel::MinI: {
      w.objective({{"Itot", 1.0}});
      LpRow quota;
      quota.name = "quota";
      for (std::size_t i = 0; i < n; ++i) quota.linear.emplace_back(y(i), p.profit(i));
      quota.linear.emplace_back("Itot", -1.0);
      quota.sense = ">=";
      quota.rhs = p.quota();
      w.row(std::move(quota));
      mccormick_rows(w, p, y);
      dmin_rows(w, p, y);
      if (spec.include_ilb_cut) ilb_row(w, p);
      for (std::size_t i = 0; i < n; ++i) w.binary(y(i));
      w.continuous("Itot");
      break;
    }
    case LpModel::TransMcCormick: {
      w.comment("directed cut family replaced by its single-commodity flow equivalent:");
      w.comment("one unit of flow from r to every fixed terminal (substations and doubled i'),");
      w.comment("f_a <= M x_a with M = number of fixed and potential terminals");
      std::vector<std::size_t> all(g.arcs().size());
      for (std::size_t a = 0; a < all.size(); ++a) all[a] = a;
      auto sel = [&](std::size_t i) { return arc_var("x", g, g.arc(g.selection_arc(i))); };
      auto skip = [&](std::size_t i) { return arc_var("x", g, g.arc(g.skip_arc(i))); };
      std::vector<std::pair<std::string, double>> obj;
      for (std::size_t a : all) {
        if (g.arc(a).cost != 0.0) obj.emplace_back(arc_var("x", g, g.arc(a)), g.arc(a).cost);
      }
      w.objective(std::move(obj));

      double total = 0.0;
      LpRow quota;
      quota.name = "quota";
      for (std::size_t i = 0; i < n; ++i) {
        quota.linear.emplace_back(skip(i), p.profit(i));
        total += p.profit(i);
      }
      quota.linear.emplace_back("Itot", 1.0);
      quota.sense = "<=";
      quota.rhs = total - p.quota();
      w.row(std::move(quota));
      mccormick_rows(w, p, sel);
      flow_rows(w, g, all, terminals, g.node_count(), [&](std::size_t v, LpRow& r) {
        if (!g.is_position_node(v)) r.rhs = 1.0;
      });
      dmin_rows(w, p, sel);
      if (spec.include_ilb_cut) ilb_row(w, p);
      for (std::size_t a : all) w.binary(arc_var("x", g, g.arc(a)));
      for (std::size_t a : all) w.continuous(arc_var("f", g, g.arc(a)));
      w.continuous("Itot");
      break;
    }
  }
  return w;
}

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline bool parse_number(const std::string& tok, double& v) {
  if (tok == "inf" || tok == "+inf" || tok == "infinity") {
    v = std::numeric_limits<double>::infinity();
    return true;
  }
  if (tok == "-inf" || tok == "-infinity") {
    v = -std::numeric_limits<double>::infinity();
    return true;
  }
  const char* b = tok.data();
  const char* e = b + tok.size();
  if (b != e && *b == '+') ++b;
  const auto r = std::from_chars(b, e, v);
  return r.ec == std::errc{} && r.ptr == e;
}

struct Token {
  std::string text;
  std::size_t line;
};

}  // namespace detail

struct LpSummary {
  std::string model;
  std::string sense;
  std::size_t variables = 0;
  std::size_t binaries = 0;
  std::size_t constraints = 0;
  std::size_t quadratic_constraints = 0;
  std::string hash;

  friend bool operator==(const LpSummary&, const LpSummary&) = default;
};

inline std::string manifest_path(const std::string& lp_path) { return lp_path + ".manifest.json"; }

/// Writes the model to `path` and its manifest next to it.
inline LpSummary export_lp(const SiteInstance& inst, const ExportSpec& spec, const std::string& path) {
  if (spec.model == LpModel::FlowCapa && spec.hop < 1) throw UnsupportedModel("FLOW_CAPA requires H >= 1");
  const Problem p(inst);
  const auto w = detail::build_model(p, spec);
  const std::string text = w.render(true);

  LpSummary s;
  s.model = to_string(spec.model);
  s.sense = "min";
  s.variables = w.variable_count();
  s.binaries = w.binary_count();
  s.constraints = w.row_count();
  s.quadratic_constraints = w.quadratic_row_count();
  s.hash = detail::hex64(detail::fnv1a64(text));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path);
  out.close();

  ordered_json m;
  m["model"] = s.model;
  if (spec.model == LpModel::FlowCapa) m["hop"] = spec.hop;
  m["include_ilb_cut"] = spec.include_ilb_cut;
  m["sense"] = s.sense;
  m["variables"] = s.variables;
  m["binaries"] = s.binaries;
  m["constraints"] = s.constraints;
  m["quadratic_constraints"] = s.quadratic_constraints;
  m["fnv1a64"] = s.hash;
  std::ofstream mf(manifest_path(path), std::ios::binary);
  if (!mf) throw IoError("cannot open " + manifest_path(path) + " for writing");
  mf << m.dump(2) << '\n';
  if (!mf) throw IoError("failed writing " + manifest_path(path));
  return s;
}

/// Reads an LP file in the subset of CPLEX LP syntax that export_lp emits.
inline LpProblem read_lp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  LpProblem lp;
  std::set<std::string> seen;
  auto note = [&](const std::string& v) {
    if (seen.insert(v).second) lp.variables.push_back(v);
  };

  enum class Sec { None, Objective, Rows, Bounds, Binaries, Done } sec = Sec::None;
  std::vector<detail::Token> body;  // tokens of the objective or rows section
  std::string line;
  std::size_t lineno = 0;

  auto err = [&](std::size_t at, const std::string& what) {
    return ParseError(path + ":" + std::to_string(at) + ": " + what);
  };
  auto is_var = [](const std::string& t) {
    return !t.empty() && (std::isalpha(static_cast<unsigned char>(t[0])) || t[0] == '_');
  };

  // Parses "[+|-] [coef] var" sequences, optionally with one [ ... ] quadratic group.
  auto parse_terms = [&](std::vector<detail::Token>& toks, std::size_t& k, LpRow& row, bool allow_quad) {
    double sign = 1.0;
    bool in_quad = false;
    double coef = 1.0;
    bool have_coef = false;
    std::string pending;  // first factor of a product
    while (k < toks.size()) {
      const auto& t = toks[k];
      if (t.text == "<=" || t.text == ">=" || t.text == "=" || t.text == "=<" || t.text == "=>") break;
      ++k;
      if (t.text == "+") continue;
      if (t.text == "-") {
        sign = -sign;
        continue;
      }
      if (t.text == "[") {
        if (!allow_quad || in_quad) throw err(t.line, "unexpected '['");
        if (sign != 1.0 || have_coef) throw err(t.line, "scaled quadratic group is not supported");
        in_quad = true;
        continue;
      }
      if (t.text == "]") {
        if (!in_quad) throw err(t.line, "unexpected ']'");
        in_quad = false;
        continue;
      }
      if (t.text == "*") {
        if (!in_quad || pending.empty()) throw err(t.line, "unexpected '*'");
        continue;
      }
      double v = 0.0;
      if (detail::parse_number(t.text, v)) {
        if (have_coef) throw err(t.line, "two consecutive coefficients");
        coef = v;
        have_coef = true;
        continue;
      }
      if (!is_var(t.text)) throw err(t.line, "unexpected token '" + t.text + "'");
      note(t.text);
      if (in_quad) {
        if (pending.empty()) {
          pending = t.text;
          if (k < toks.size() && toks[k].text == "*") continue;
          throw err(t.line, "quadratic term must be a product");
        }
        row.quadratic.emplace_back(pending, t.text, sign * coef);
        pending.clear();
      } else {
        row.linear.emplace_back(t.text, sign * coef);
      }
      sign = 1.0;
      coef = 1.0;
      have_coef = false;
    }
    if (in_quad) throw err(toks.empty() ? lineno : toks.back().line, "unterminated '['");
    if (have_coef) return coef * sign;  // a bare constant (only valid as "0")
    return 0.0;
  };

  auto flush = [&]() {
    if (sec == Sec::Objective) {
      std::size_t k = 0;
      if (!body.empty() && body[0].text.back() == ':') ++k;
      LpRow row;
      parse_terms(body, k, row, false);
      if (k != body.size()) throw err(body[k].line, "comparison in objective");
      lp.objective = row.linear;
    } else if (sec == Sec::Rows) {
      std::size_t k = 0;
      while (k < body.size()) {
        LpRow row;
        if (body[k].text.size() < 2 || body[k].text.back() != ':') throw err(body[k].line, "row without a name");
        row.name = body[k].text.substr(0, body[k].text.size() - 1);
        const std::size_t start = body[k].line;
        ++k;
        parse_terms(body, k, row, true);
        if (k + 1 >= body.size()) throw err(start, "row '" + row.name + "' lacks a right-hand side");
        std::string s = body[k].text;
        if (s == "=<") s = "<=";
        if (s == "=>") s = ">=";
        row.sense = s;
        if (!detail::parse_number(body[k + 1].text, row.rhs)) {
          throw err(body[k + 1].line, "bad right-hand side '" + body[k + 1].text + "'");
        }
        k += 2;
        lp.rows.push_back(std::move(row));
      }
    }
    body.clear();
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (const auto c = line.find('\\'); c != std::string::npos) line.erase(c);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const std::string key = detail::lower(t);
    const bool indented = line[0] == ' ' || line[0] == '\t';
    if (!indented) {
      Sec next;
      if (key == "minimize" || key == "minimum" || key == "min" || key == "maximize" || key == "maximum" ||
          key == "max") {
        if (sec != Sec::None) throw err(lineno, "objective section must come first");
        lp.minimize = key.rfind("min", 0) == 0;
        next = Sec::Objective;
      } else if (key == "subject to" || key == "such that" || key == "st" || key == "s.t.") {
        next = Sec::Rows;
      } else if (key == "bounds") {
        next = Sec::Bounds;
      } else if (key == "binaries" || key == "binary" || key == "bin") {
        next = Sec::Binaries;
      } else if (key == "end") {
        next = Sec::Done;
      } else {
        throw err(lineno, "unknown section '" + t + "'");
      }
      if (sec == Sec::Done) throw err(lineno, "content after End");
      flush();
      sec = next;
      continue;
    }
    std::istringstream ss(t);
    std::string tok;
    switch (sec) {
      case Sec::None: throw err(lineno, "content before the objective section");
      case Sec::Done: throw err(lineno, "content after End");
      case Sec::Objective:
      case Sec::Rows:
        while (ss >> tok) body.push_back({tok, lineno});
        break;
      case Sec::Bounds: {
        std::vector<std::string> parts;
        while (ss >> tok) parts.push_back(tok);
        LpBound b;
        if (parts.size() == 3 && is_var(parts[0]) && (parts[1] == ">=" || parts[1] == "<=") &&
            detail::parse_number(parts[2], parts[1] == ">=" ? b.lower : b.upper)) {
          if (parts[1] == "<=") b.lower = 0.0;
          note(parts[0]);
          lp.bounds[parts[0]] = b;
        } else if (parts.size() == 5 && parts[1] == "<=" && parts[3] == "<=" && detail::parse_number(parts[0], b.lower) &&
                   detail::parse_number(parts[4], b.upper) && is_var(parts[2])) {
          note(parts[2]);
          lp.bounds[parts[2]] = b;
        } else {
          throw err(lineno, "unsupported bound '" + t + "'");
        }
        break;
      }
      case Sec::Binaries:
        while (ss >> tok) {
          if (!is_var(tok)) throw err(lineno, "bad binary name '" + tok + "'");
          note(tok);
          lp.binaries.insert(tok);
        }
        break;
    }
  }
  if (sec != Sec::Done) throw ParseError(path + ":" + std::to_string(lineno) + ": truncated file (no End)");
  return lp;
}

inline std::uint64_t file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return detail::fnv1a64(ss.str());
}

/// Re-parses an exported file and checks it against its manifest.
inline LpSummary check_lp_roundtrip(const std::string& path) {
  const LpProblem lp = read_lp(path);
  LpSummary s;
  s.sense = lp.minimize ? "min" : "max";
  s.variables = lp.variables.size();
  s.binaries = lp.binaries.size();
  s.constraints = lp.rows.size();
  s.quadratic_constraints = lp.quadratic_rows();
  s.hash = detail::hex64(file_hash(path));

  std::ifstream mf(manifest_path(path), std::ios::binary);
  if (!mf) throw IoError("cannot open " + manifest_path(path));
  ordered_json m;
  try {
    m = ordered_json::parse(mf);
    s.model = m.at("model").get<std::string>();
    auto check = [&](const char* key, auto got) {
      if (m.at(key).get<decltype(got)>() != got) {
        throw ParseError(path + ": manifest field '" + key + "' does not match the file");
      }
    };
    check("sense", s.sense);
    check("variables", s.variables);
    check("binaries", s.binaries);
    check("constraints", s.constraints);
    check("quadratic_constraints", s.quadratic_constraints);
    check("fnv1a64", s.hash);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(manifest_path(path) + ": " + e.what());
  }
  return s;
}

/// Row activity (linear plus quadratic part) under an assignment; missing variables read as 0.
inline double row_activity(const LpRow& r, const std::map<std::string, double>& x) {
  auto val = [&](const std::string& v) {
    const auto it = x.find(v);
    return it == x.end() ? 0.0 : it->second;
  };
  double s = 0.0;
  for (const auto& [v, c] : r.linear) s += c * val(v);
  for (const auto& [a, b, c] : r.quadratic) s += c * val(a) * val(b);
  return s;
}

/// Names of the rows and bounds violated by an assignment.
inline std::vector<std::string> lp_violations(const LpProblem& lp, const std::map<std::string, double>& x,
                                              double tol = 1e-9) {
  std::vector<std::string> out;
  for (const auto& r : lp.rows) {
    const double a = row_activity(r, x);
    const double t = tol * std::max(1.0, std::abs(r.rhs));
    const bool ok = r.sense == "<=" ? a <= r.rhs + t : r.sense == ">=" ? a >= r.rhs - t : std::abs(a - r.rhs) <= t;
    if (!ok) out.push_back(r.name);
  }
  for (const auto& v : lp.variables) {
    const auto it = x.find(v);
    const double val = it == x.end() ? 0.0 : it->second;
    LpBound b;
    if (const auto bi = lp.bounds.find(v); bi != lp.bounds.end()) b = bi->second;
    if (lp.binaries.count(v)) b = {0.0, 1.0};
    if (val < b.lower - tol || val > b.upper + tol) out.push_back("bound " + v);
    if (lp.binaries.count(v) && val != 0.0 && val != 1.0) out.push_back("integrality " + v);
  }
  return out;
}

inline double lp_objective(const LpProblem& lp, const std::map<std::string, double>& x) {
  LpRow r;
  r.linear = lp.objective;
  return row_activity(r, x);
}

}  // namespace qstpi
