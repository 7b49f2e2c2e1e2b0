#pragma once

// Jensen (top-hat) wake model and the pairwise interference matrix built on it.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>

#include "qstpi/errors.hpp"
#include "qstpi/types.hpp"

namespace qstpi {

/// Piecewise power curve: zero outside [cut_in, cut_out), cubic ramp up to rated_speed, flat after.
inline double power_output(double speed, const TurbineSpec& t) {
  if (speed < t.cut_in || speed >= t.cut_out) return 0.0;
  if (speed >= t.rated_speed) return t.rated_power;
  const double lo = t.cut_in * t.cut_in * t.cut_in;
  const double hi = t.rated_speed * t.rated_speed * t.rated_speed;
  return t.rated_power * (speed * speed * speed - lo) / (hi - lo);
}

/// Expected interference-free output of one turbine under the rose (MW).
inline double expected_output(const WindRose& rose, const TurbineSpec& t) {
  double sum = 0.0;
  for (const auto& b : rose.bins) sum += b.probability * power_output(b.speed, t);
  return sum;
}

/// Unit vector pointing downwind for a wind coming from `direction_deg`.
inline std::pair<double, double> downwind_unit(double direction_deg) {
  const double theta = direction_deg * std::numbers::pi / 180.0;
  return {-std::sin(theta), -std::cos(theta)};
}

/// Fractional speed deficit at `downstream` caused by `upstream`'s wake.
///
/// Zero unless the downstream hub lies strictly downwind (x > 0) and within the
/// cone radius D/2 + k x. Hubs are treated as points.
inline double wake_deficit(const Position& upstream, const Position& downstream, double direction_deg,
                           const WakeParams& params, const TurbineSpec& turbine) {
  const auto [ux, uy] = downwind_unit(direction_deg);
  const double dx = downstream.x_m - upstream.x_m;
  const double dy = downstream.y_m - upstream.y_m;
  const double x = dx * ux + dy * uy;
  if (!(x > 0.0)) return 0.0;
  const double cross = std::abs(dx * uy - dy * ux);
  const double d = turbine.rotor_diameter;
  const double k = params.decay_k;
  if (cross > d / 2.0 + k * x) return 0.0;
  const double ct = params.thrust_coefficient.value_or(turbine.thrust_coefficient);
  const double ratio = d / (d + 2.0 * k * x);
  return (1.0 - std::sqrt(1.0 - ct)) * ratio * ratio;
}

/// Expected power lost at j because i is built (MW).
inline double pairwise_interference(const Position& i, const Position& j, const WindRose& rose,
                                    const WakeParams& params, const TurbineSpec& turbine) {
  double loss = 0.0;
  for (const auto& bin : rose.bins) {
    const double delta = wake_deficit(i, j, bin.direction_deg, params, turbine);
    if (delta == 0.0) continue;
    loss += bin.probability *
            (power_output(bin.speed, turbine) - power_output(bin.speed * (1.0 - delta), turbine));
  }
  return loss < 0.0 ? 0.0 : loss;
}

inline InterferenceMatrix build_interference_matrix(const SiteInstance& instance, const WakeParams& params) {
  const auto& pos = instance.positions;
  InterferenceMatrix m(pos.size());
  for (std::size_t i = 0; i < pos.size(); ++i) {
    for (std::size_t j = 0; j < pos.size(); ++j) {
      if (i != j) m.at(i, j) = pairwise_interference(pos[i], pos[j], instance.wind_rose, params, instance.turbine);
    }
  }
  return m;
}

inline InterferenceMatrix build_interference_matrix(const SiteInstance& instance) {
  return build_interference_matrix(instance, instance.wake_params());
}

/// Row-major CSV, 9 significant digits.
inline void write_interference_csv(const InterferenceMatrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  char buf[64];
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.9g", m(i, j));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace qstpi
