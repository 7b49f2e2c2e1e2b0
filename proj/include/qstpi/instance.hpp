#pragma once

// Site instance JSON format, invariant checks and the synthetic generator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"
#include "qstpi/errors.hpp"
#include "qstpi/types.hpp"
#include "qstpi/wake.hpp"

namespace qstpi {

using ordered_json = nlohmann::ordered_json;

/// Rounds to 9 significant digits, the precision of every serialized number.
inline double round_sig9(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

/// Twelve 30-degree sectors with prevailing south-westerlies.
inline WindRose default_wind_rose() {
  static constexpr double speeds[12] = {8.0, 8.5, 9.0, 9.5, 9.5, 10.0, 10.5, 11.0, 11.0, 10.5, 9.5, 8.5};
  static constexpr double probs[12] = {0.05, 0.05, 0.06, 0.07, 0.07, 0.08, 0.10, 0.14, 0.15, 0.12, 0.07, 0.04};
  WindRose rose;
  for (int s = 0; s < 12; ++s) rose.bins.push_back({30.0 * s, speeds[s], probs[s]});
  return rose;
}

inline double quota_for_equivalent_turbines(int n, const WindRose& rose, const TurbineSpec& turbine) {
  return static_cast<double>(n) * expected_output(rose, turbine);
}

inline double resolved_quota_mw(const SiteInstance& inst) {
  return inst.quota.is_absolute() ? inst.quota.absolute_mw()
                                  : quota_for_equivalent_turbines(inst.quota.turbines(), inst.wind_rose, inst.turbine);
}

/// Quota profit of position i: explicit override, else expected free-stream output.
inline double position_profit(const SiteInstance& inst, std::size_t i) {
  const auto& p = inst.positions[i];
  return p.profit_mw ? *p.profit_mw : expected_output(inst.wind_rose, inst.turbine);
}

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvariantError(what);
}

}  // namespace detail

inline void check_turbine(const TurbineSpec& t) {
  using detail::require;
  require(t.rated_power > 0.0, "turbine rated_power must be positive");
  require(t.rotor_diameter > 0.0, "turbine rotor_diameter must be positive");
  require(0.0 < t.cut_in && t.cut_in < t.rated_speed && t.rated_speed < t.cut_out,
          "turbine speeds must satisfy 0 < cut_in < rated_speed < cut_out");
  require(t.thrust_coefficient > 0.0 && t.thrust_coefficient < 1.0, "thrust_coefficient must lie in (0,1)");
}

inline void check_wind_rose(const WindRose& rose) {
  using detail::require;
  double total = 0.0;
  for (const auto& b : rose.bins) {
    require(b.direction_deg >= 0.0 && b.direction_deg < 360.0, "wind direction must lie in [0,360)");
    require(b.speed >= 0.0 && std::isfinite(b.speed), "wind speed must be finite and nonnegative");
    require(b.probability >= 0.0, "wind probabilities must be nonnegative");
    total += b.probability;
  }
  require(std::abs(total - 1.0) <= 1e-9, "wind probabilities sum to " + std::to_string(total) + ", expected 1");
}

/// Throws InvariantError on the first violated type invariant.
inline void check_invariants(const SiteInstance& inst) {
  using detail::require;
  require(!inst.substations.empty(), "instance needs at least one substation");
  require(!inst.positions.empty(), "instance needs at least one position");
  std::set<int> ids;
  for (const auto& s : inst.substations) {
    require(std::isfinite(s.x_m) && std::isfinite(s.y_m), "substation coordinates must be finite");
    require(ids.insert(s.id).second, "duplicate id " + std::to_string(s.id));
  }
  for (const auto& p : inst.positions) {
    require(std::isfinite(p.x_m) && std::isfinite(p.y_m), "position coordinates must be finite");
    require(p.build_cost > 0.0 && std::isfinite(p.build_cost), "build cost of position " + std::to_string(p.id) +
                                                                     " must be positive");
    require(!p.profit_mw || (*p.profit_mw > 0.0 && std::isfinite(*p.profit_mw)),
            "profit of position " + std::to_string(p.id) + " must be positive");
    require(ids.insert(p.id).second, "duplicate id " + std::to_string(p.id));
  }
  require(inst.cable_cost_per_km >= 0.0, "cable cost must be nonnegative");
  require(inst.d_min >= 0.0, "d_min must be nonnegative");
  if (inst.quota.is_absolute()) {
    require(inst.quota.absolute_mw() >= 0.0 && std::isfinite(inst.quota.absolute_mw()), "quota must be nonnegative");
  } else {
    require(inst.quota.turbines() >= 1, "equivalent_turbines must be positive");
  }
  require(!inst.wake_decay_k || (*inst.wake_decay_k > 0.0 && *inst.wake_decay_k < 1.0),
          "wake_decay_k must lie in (0,1)");
  check_turbine(inst.turbine);
  check_wind_rose(inst.wind_rose);
  if (inst.interference) {
    require(inst.interference->size() == inst.positions.size(), "interference matrix size must equal position count");
    inst.interference->check();
  }
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline void expect_keys(const ordered_json& obj, std::initializer_list<const char*> required,
                        std::initializer_list<const char*> optional, const std::string& where) {
  if (!obj.is_object()) throw SchemaError(where + ": expected an object");
  for (const char* k : required) {
    if (!obj.contains(k)) throw SchemaError(where + ": missing field '" + k + "'");
  }
  for (const auto& [key, _] : obj.items()) {
    const bool known = std::any_of(required.begin(), required.end(), [&](const char* k) { return key == k; }) ||
                       std::any_of(optional.begin(), optional.end(), [&](const char* k) { return key == k; });
    if (!known) throw SchemaError(where + ": unexpected field '" + key + "'");
  }
}

inline double number(const ordered_json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw SchemaError(where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

inline int integer(const ordered_json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw SchemaError(where + ": field '" + key + "' must be an integer");
  return v.get<int>();
}

inline const ordered_json& array(const ordered_json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_array()) throw SchemaError(where + ": field '" + key + "' must be an array");
  return v;
}

inline Position parse_site_point(const ordered_json& j, bool is_position, const std::string& where) {
  if (is_position) {
    expect_keys(j, {"id", "x_m", "y_m", "build_cost_keur"}, {"profit_mw"}, where);
  } else {
    expect_keys(j, {"id", "x_m", "y_m"}, {}, where);
  }
  Position p;
  p.id = integer(j, "id", where);
  p.x_m = number(j, "x_m", where);
  p.y_m = number(j, "y_m", where);
  if (is_position) {
    p.build_cost = number(j, "build_cost_keur", where);
    if (j.contains("profit_mw")) p.profit_mw = number(j, "profit_mw", where);
  }
  return p;
}

}  // namespace detail

inline SiteInstance instance_from_json(const ordered_json& doc) {
  using namespace detail;
  expect_keys(doc,
              {"site", "substations", "positions", "cable_cost_keur_per_km", "d_min_m", "quota", "turbine",
               "wind_rose"},
              {"interference_mw"}, "instance");
  SiteInstance inst;

  const auto& site = doc.at("site");
  expect_keys(site, {"name"}, {"wake_decay_k"}, "site");
  if (!site.at("name").is_string()) throw SchemaError("site: field 'name' must be a string");
  inst.name = site.at("name").get<std::string>();
  if (site.contains("wake_decay_k")) inst.wake_decay_k = number(site, "wake_decay_k", "site");

  for (const auto& s : array(doc, "substations", "instance")) {
    inst.substations.push_back(parse_site_point(s, false, "substation"));
  }
  for (const auto& p : array(doc, "positions", "instance")) {
    inst.positions.push_back(parse_site_point(p, true, "position"));
  }
  inst.cable_cost_per_km = number(doc, "cable_cost_keur_per_km", "instance");
  inst.d_min = number(doc, "d_min_m", "instance");

  const auto& quota = doc.at("quota");
  if (!quota.is_object() || quota.size() != 1) {
    throw SchemaError("quota: expected exactly one of 'mw' or 'equivalent_turbines'");
  }
  if (quota.contains("mw")) {
    inst.quota = QuotaSpec::mw(number(quota, "mw", "quota"));
  } else if (quota.contains("equivalent_turbines")) {
    inst.quota = QuotaSpec::equivalent_turbines(integer(quota, "equivalent_turbines", "quota"));
  } else {
    throw SchemaError("quota: expected exactly one of 'mw' or 'equivalent_turbines'");
  }

  const auto& t = doc.at("turbine");
  expect_keys(t, {"rated_power_mw", "rotor_diameter_m", "cut_in_ms", "rated_speed_ms", "cut_out_ms",
                  "thrust_coefficient"},
              {}, "turbine");
  inst.turbine.rated_power = number(t, "rated_power_mw", "turbine");
  inst.turbine.rotor_diameter = number(t, "rotor_diameter_m", "turbine");
  inst.turbine.cut_in = number(t, "cut_in_ms", "turbine");
  inst.turbine.rated_speed = number(t, "rated_speed_ms", "turbine");
  inst.turbine.cut_out = number(t, "cut_out_ms", "turbine");
  inst.turbine.thrust_coefficient = number(t, "thrust_coefficient", "turbine");

  for (const auto& b : array(doc, "wind_rose", "instance")) {
    expect_keys(b, {"direction_deg", "speed_ms", "probability"}, {}, "wind_rose bin");
    inst.wind_rose.bins.push_back({number(b, "direction_deg", "wind_rose bin"), number(b, "speed_ms", "wind_rose bin"),
                                   number(b, "probability", "wind_rose bin")});
  }

  if (doc.contains("interference_mw")) {
    const auto& arr = array(doc, "interference_mw", "instance");
    std::vector<double> values;
    values.reserve(arr.size());
    for (const auto& v : arr) {
      if (!v.is_number()) throw SchemaError("interference_mw: entries must be numbers");
      values.push_back(v.get<double>());
    }
    const std::size_t n = inst.positions.size();
    if (values.size() != n * n) {
      throw InvariantError("interference_mw has " + std::to_string(values.size()) + " entries, expected " +
                           std::to_string(n * n));
    }
    inst.interference = InterferenceMatrix(n, std::move(values));
  }

  check_invariants(inst);
  return inst;
}

inline ordered_json instance_to_json(const SiteInstance& inst) {
  ordered_json doc;
  ordered_json site;
  site["name"] = inst.name;
  if (inst.wake_decay_k) site["wake_decay_k"] = round_sig9(*inst.wake_decay_k);
  doc["site"] = site;

  doc["substations"] = ordered_json::array();
  for (const auto& s : inst.substations) {
    ordered_json j;
    j["id"] = s.id;
    j["x_m"] = round_sig9(s.x_m);
    j["y_m"] = round_sig9(s.y_m);
    doc["substations"].push_back(j);
  }
  doc["positions"] = ordered_json::array();
  for (const auto& p : inst.positions) {
    ordered_json j;
    j["id"] = p.id;
    j["x_m"] = round_sig9(p.x_m);
    j["y_m"] = round_sig9(p.y_m);
    j["build_cost_keur"] = round_sig9(p.build_cost);
    if (p.profit_mw) j["profit_mw"] = round_sig9(*p.profit_mw);
    doc["positions"].push_back(j);
  }
  doc["cable_cost_keur_per_km"] = round_sig9(inst.cable_cost_per_km);
  doc["d_min_m"] = round_sig9(inst.d_min);
  ordered_json quota;
  if (inst.quota.is_absolute()) {
    quota["mw"] = round_sig9(inst.quota.absolute_mw());
  } else {
    quota["equivalent_turbines"] = inst.quota.turbines();
  }
  doc["quota"] = quota;

  ordered_json t;
  t["rated_power_mw"] = round_sig9(inst.turbine.rated_power);
  t["rotor_diameter_m"] = round_sig9(inst.turbine.rotor_diameter);
  t["cut_in_ms"] = round_sig9(inst.turbine.cut_in);
  t["rated_speed_ms"] = round_sig9(inst.turbine.rated_speed);
  t["cut_out_ms"] = round_sig9(inst.turbine.cut_out);
  t["thrust_coefficient"] = round_sig9(inst.turbine.thrust_coefficient);
  doc["turbine"] = t;

  doc["wind_rose"] = ordered_json::array();
  for (const auto& b : inst.wind_rose.bins) {
    ordered_json j;
    j["direction_deg"] = round_sig9(b.direction_deg);
    j["speed_ms"] = round_sig9(b.speed);
    j["probability"] = round_sig9(b.probability);
    doc["wind_rose"].push_back(j);
  }
  if (inst.interference) {
    ordered_json arr = ordered_json::array();
    for (double v : inst.interference->row_major()) arr.push_back(round_sig9(v));
    doc["interference_mw"] = arr;
  }
  return doc;
}

inline SiteInstance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  try {
    return instance_from_json(doc);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

inline void save_instance(const SiteInstance& instance, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << instance_to_json(instance).dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

// ---------------------------------------------------------------------------
// Synthetic generation

struct Region {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 8000.0;
  double y_max = 8000.0;
};

/// Linear build-cost gradient: base * (1 + relative_range * t), t in [0,1] along `angle_deg`.
struct CostField {
  double base_keur = 3000.0;
  double relative_range = 0.5;
  double angle_deg = 0.0;
};

struct GeneratorOptions {
  std::string name = "synthetic";
  TurbineSpec turbine;
  WindRose rose = default_wind_rose();
  QuotaSpec quota = QuotaSpec::equivalent_turbines(3);
  double d_min = 1200.0;
  double cable_cost_per_km = 504.0;
  bool embed_interference = false;
};

inline SiteInstance generate_synthetic_site(int n_positions, const Region& region, const CostField& cost_field,
                                            std::uint64_t seed, const GeneratorOptions& options = {}) {
  if (n_positions < 1) throw InvariantError("n_positions must be at least 1");
  if (!(region.x_max > region.x_min) || !(region.y_max > region.y_min)) {
    throw InvariantError("region must have positive width and height");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(region.x_min, region.x_max);
  std::uniform_real_distribution<double> uy(region.y_min, region.y_max);

  const double a = cost_field.angle_deg * std::numbers::pi / 180.0;
  const double ca = std::cos(a);
  const double sa = std::sin(a);
  // projections of the region corners bound t to [0,1]
  double pmin = 1e300;
  double pmax = -1e300;
  for (double cx : {region.x_min, region.x_max}) {
    for (double cy : {region.y_min, region.y_max}) {
      pmin = std::min(pmin, cx * ca + cy * sa);
      pmax = std::max(pmax, cx * ca + cy * sa);
    }
  }

  SiteInstance inst;
  inst.name = options.name;
  inst.turbine = options.turbine;
  inst.wind_rose = options.rose;
  inst.quota = options.quota;
  inst.d_min = options.d_min;
  inst.cable_cost_per_km = options.cable_cost_per_km;

  double sx = 0.0;
  double sy = 0.0;
  for (int i = 0; i < n_positions; ++i) {
    Position p;
    p.id = i + 1;
    p.x_m = round_sig9(ux(rng));
    p.y_m = round_sig9(uy(rng));
    const double t = pmax > pmin ? (p.x_m * ca + p.y_m * sa - pmin) / (pmax - pmin) : 0.0;
    p.build_cost = round_sig9(cost_field.base_keur * (1.0 + cost_field.relative_range * t));
    sx += p.x_m;
    sy += p.y_m;
    inst.positions.push_back(p);
  }
  inst.substations.push_back(Position{0, round_sig9(sx / n_positions), round_sig9(sy / n_positions), 0.0, {}});

  if (options.embed_interference) {
    auto m = build_interference_matrix(inst);
    std::vector<double> v = m.row_major();
    for (double& x : v) x = round_sig9(x);
    inst.interference = InterferenceMatrix(m.size(), std::move(v));
  }
  return inst;
}

}  // namespace qstpi
