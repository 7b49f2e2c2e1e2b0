// Command-line front end.
//
// Exit codes: 0 success, 1 usage or I/O error, 2 infeasible (or a solution that
// fails verification), 3 time limit reached.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qstpi/qstpi.hpp"

namespace fs = std::filesystem;
using namespace qstpi;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kInfeasible = 2;
constexpr int kTimeLimit = 3;

std::string out_dir() {
  const char* env = std::getenv("QSTPI_OUT_DIR");
  return env && *env ? env : ".";
}

/// Explicit path if given, else <QSTPI_OUT_DIR>/<stem><suffix>.
std::string output_path(const std::string& explicit_path, const std::string& input, const std::string& suffix) {
  if (!explicit_path.empty()) return explicit_path;
  fs::create_directories(out_dir());
  return (fs::path(out_dir()) / (fs::path(input).stem().string() + suffix)).string();
}

SplitStrategy parse_split(const std::string& s) {
  if (s == "none") return SplitStrategy::none();
  if (s == "ilb") return SplitStrategy::ilb();
  auto param = [&](std::size_t at) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s.substr(at), &used);
      if (used != s.size() - at) throw std::invalid_argument(s);
      return v;
    } catch (const std::logic_error&) {
      throw CLI::ValidationError("--split", "bad number in '" + s + "'");
    }
  };
  if (s.rfind("heur:", 0) == 0) return SplitStrategy::heuristic(param(5));
  if (s.rfind("mini:", 0) == 0) return SplitStrategy::mini(param(5));
  throw CLI::ValidationError("--split", "expected none, ilb, heur:ALPHA or mini:TAU, got '" + s + "'");
}

void report(const Solution& s) {
  std::fprintf(stderr, "cost %.6f k€, %zu turbines, net %.6f MW, I_tot %.6f MW%s\n", s.total_cost, s.selected.size(),
               s.quota_collected - s.i_tot, s.i_tot, s.proven_optimal ? ", optimal" : "");
}

int finish(const SolveResult& r, const std::string& path, bool limited) {
  save_solution(r.solution, path);
  report(r.solution);
  std::fprintf(stderr, "wrote %s\n", path.c_str());
  if (!r.proven_optimal && limited) {
    std::fprintf(stderr, "time limit reached; best lower bound %.6f k€\n", r.solution.lower_bound);
    return kTimeLimit;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Integrated wind farm layout and cable routing"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "solver threads")->check(CLI::Range(1, 256));

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic instance");
  int g_n = 10;
  std::uint64_t g_seed = 1;
  int g_quota = 3;
  double g_dmin = 1200.0;
  double g_side = 8000.0;
  double g_cable = 504.0;
  bool g_embed = false;
  std::string g_name = "synthetic", g_out;
  gen->add_option("-n,--positions", g_n, "number of candidate positions")->check(CLI::Range(1, 64));
  gen->add_option("--seed", g_seed, "random seed");
  gen->add_option("--quota-turbines", g_quota, "quota as the output of this many turbines")->check(CLI::PositiveNumber);
  gen->add_option("--d-min", g_dmin, "minimum turbine distance (m)")->check(CLI::NonNegativeNumber);
  gen->add_option("--side", g_side, "side length of the square region (m)")->check(CLI::PositiveNumber);
  gen->add_option("--cable-cost", g_cable, "cable cost (k€/km)")->check(CLI::NonNegativeNumber);
  gen->add_flag("--embed-interference", g_embed, "store the interference matrix in the instance");
  gen->add_option("--name", g_name, "instance name");
  gen->add_option("-o,--out", g_out, "output instance path");

  // interference
  auto* itf = app.add_subcommand("interference", "build the interference matrix");
  std::string i_in, i_csv, i_embed;
  itf->add_option("instance", i_in, "instance JSON")->required()->check(CLI::ExistingFile);
  itf->add_option("--csv", i_csv, "write the matrix as CSV (row i = loss inflicted by i)");
  itf->add_option("--embed", i_embed, "write a copy of the instance with the matrix embedded");

  // solve / solve-hop
  std::string s_in, s_out, s_split = "none";
  double s_time = 0.0;
  int s_hop = 6;
  auto* solve = app.add_subcommand("solve", "solve the flat problem exactly");
  auto* solve_hop = app.add_subcommand("solve-hop", "solve with radial strings of at most H turbines");
  for (auto* sc : {solve, solve_hop}) {
    sc->add_option("instance", s_in, "instance JSON")->required()->check(CLI::ExistingFile);
    sc->add_option("-o,--out", s_out, "output solution path");
    sc->add_option("--split", s_split, "none | ilb | heur:ALPHA | mini:TAU");
    sc->add_option("--time-limit", s_time, "seconds per search; 0 = unlimited")->check(CLI::NonNegativeNumber);
  }
  solve_hop->add_option("--hop", s_hop, "maximum turbines per string")->check(CLI::Range(1, 64));

  // oracle
  auto* oracle = app.add_subcommand("oracle", "exhaustive enumeration (small instances only)");
  std::string o_in, o_out;
  int o_hop = 0;
  oracle->add_option("instance", o_in, "instance JSON")->required()->check(CLI::ExistingFile);
  oracle->add_option("--hop", o_hop, "hop limit; 0 = flat")->check(CLI::Range(0, 64));
  oracle->add_option("-o,--out", o_out, "output solution path");

  // export-lp
  auto* lp = app.add_subcommand("export-lp", "write a MILP model in LP format");
  std::string l_in, l_out, l_model = "flow";
  int l_hop = 6;
  bool l_ilb = false;
  lp->add_option("instance", l_in, "instance JSON")->required()->check(CLI::ExistingFile);
  lp->add_option("--model", l_model, "flow | flow-capa | mini | trans")
      ->check(CLI::IsMember({"flow", "flow-capa", "mini", "trans"}));
  lp->add_option("--hop", l_hop, "arc capacity for flow-capa")->check(CLI::Range(1, 64));
  lp->add_flag("--ilb", l_ilb, "add the interference lower-bound cut");
  lp->add_option("-o,--out", l_out, "output LP path");

  // compare-seq
  auto* cmp = app.add_subcommand("compare-seq", "compare SEQ, QSTPI-SEQ and QSTPI-HOP");
  std::vector<std::string> c_in;
  std::string c_dir;
  int c_hop = 6;
  double c_time = 0.0;
  cmp->add_option("instances", c_in, "instance JSON files")->required()->check(CLI::ExistingFile);
  cmp->add_option("--hop", c_hop, "hop limit")->check(CLI::Range(1, 64));
  cmp->add_option("--time-limit", c_time, "seconds per search; 0 = unlimited")->check(CLI::NonNegativeNumber);
  cmp->add_option("--out-dir", c_dir, "directory for comparison.csv and summary.json");

  // render
  auto* render = app.add_subcommand("render", "draw a solution as SVG");
  std::string r_in, r_sol, r_out;
  bool r_circles = false;
  render->add_option("instance", r_in, "instance JSON")->required()->check(CLI::ExistingFile);
  render->add_option("solution", r_sol, "solution JSON")->required()->check(CLI::ExistingFile);
  render->add_flag("--dmin", r_circles, "draw D_min/2 circles around selected turbines");
  render->add_option("-o,--out", r_out, "output SVG path");

  // verify
  auto* verify = app.add_subcommand("verify", "check a solution against an instance");
  std::string v_in, v_sol;
  int v_hop = 0;
  verify->add_option("instance", v_in, "instance JSON")->required()->check(CLI::ExistingFile);
  verify->add_option("solution", v_sol, "solution JSON")->required()->check(CLI::ExistingFile);
  verify->add_option("--hop", v_hop, "also check radial strings of at most H; 0 = flat")->check(CLI::Range(0, 64));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) {
      GeneratorOptions opt;
      opt.name = g_name;
      opt.quota = QuotaSpec::equivalent_turbines(g_quota);
      opt.d_min = g_dmin;
      opt.cable_cost_per_km = g_cable;
      opt.embed_interference = g_embed;
      const auto inst = generate_synthetic_site(g_n, Region{0.0, 0.0, g_side, g_side}, CostField{}, g_seed, opt);
      const std::string path = output_path(g_out, g_name, ".json");
      save_instance(inst, path);
      std::fprintf(stderr, "wrote %s\n", path.c_str());
      return kOk;
    }
    if (itf->parsed()) {
      auto inst = load_instance(i_in);
      const auto m = build_interference_matrix(inst);
      if (i_csv.empty() && i_embed.empty()) i_csv = output_path("", i_in, ".interference.csv");
      if (!i_csv.empty()) {
        write_interference_csv(m, i_csv);
        std::fprintf(stderr, "wrote %s\n", i_csv.c_str());
      }
      if (!i_embed.empty()) {
        inst.interference = m;
        save_instance(inst, i_embed);
        std::fprintf(stderr, "wrote %s\n", i_embed.c_str());
      }
      return kOk;
    }
    if (solve->parsed() || solve_hop->parsed()) {
      SolverConfig cfg;
      cfg.split = parse_split(s_split);
      cfg.threads = threads;
      if (s_time > 0.0) cfg.time_limit = s_time;
      const auto inst = load_instance(s_in);
      const bool hop = solve_hop->parsed();
      const auto r = hop ? solve_qstpi_hop(inst, s_hop, cfg) : solve_qstpi(inst, cfg);
      return finish(r, output_path(s_out, s_in, hop ? ".hop.solution.json" : ".solution.json"), s_time > 0.0);
    }
    if (oracle->parsed()) {
      const auto inst = load_instance(o_in);
      std::optional<int> hop;
      if (o_hop > 0) hop = o_hop;
      const auto s = brute_force_oracle(inst, hop);
      const std::string path = output_path(o_out, o_in, ".oracle.json");
      save_solution(s, path);
      report(s);
      std::fprintf(stderr, "wrote %s\n", path.c_str());
      return kOk;
    }
    if (lp->parsed()) {
      const auto inst = load_instance(l_in);
      ExportSpec spec;
      if (l_model == "flow") spec = ExportSpec::flow(l_ilb);
      if (l_model == "flow-capa") spec = ExportSpec::flow_capa(l_hop, l_ilb);
      if (l_model == "mini") spec = ExportSpec::mini(l_ilb);
      if (l_model == "trans") spec = ExportSpec::trans(l_ilb);
      const std::string path = output_path(l_out, l_in, "." + l_model + ".lp");
      const auto s = export_lp(inst, spec, path);
      std::fprintf(stderr, "wrote %s (%zu variables, %zu constraints)\n", path.c_str(), s.variables, s.constraints);
      return kOk;
    }
    if (cmp->parsed()) {
      std::vector<std::pair<std::string, SiteInstance>> batch;
      for (const auto& f : c_in) batch.emplace_back(fs::path(f).stem().string(), load_instance(f));
      SolverConfig cfg;
      cfg.threads = threads;
      if (c_time > 0.0) cfg.time_limit = c_time;
      const std::string dir = c_dir.empty() ? out_dir() : c_dir;
      const auto s = batch_report(batch, c_hop, dir, cfg);
      std::cout << to_csv(s.table);
      std::fprintf(stderr, "mean reduction SEQ -> QSTPI-HOP %.4f%% over %zu instances (%zu improved)\n",
                   s.mean_reduction_seq_vs_hop, s.compared, s.improved);
      return kOk;
    }
    if (render->parsed()) {
      const auto inst = load_instance(r_in);
      const auto sol = load_solution(r_sol);
      const std::string path = output_path(r_out, r_sol, ".svg");
      render_solution_svg(inst, sol, path, r_circles);
      std::fprintf(stderr, "wrote %s\n", path.c_str());
      return kOk;
    }
    if (verify->parsed()) {
      const auto inst = load_instance(v_in);
      const auto sol = load_solution(v_sol);
      std::optional<int> hop;
      if (v_hop > 0) hop = v_hop;
      const auto issues = verify_solution(inst, sol, hop);
      for (const auto& m : issues) std::fprintf(stderr, "%s\n", m.c_str());
      if (!issues.empty()) return kInfeasible;
      std::fprintf(stderr, "ok\n");
      return kOk;
    }
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const InfeasibleError& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kInfeasible;
  } catch (const TimeLimitError& e) {
    std::fprintf(stderr, "time limit: %s\n", e.what());
    return kTimeLimit;
  } catch (const InvariantError& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kUsage;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  return kUsage;
}
