#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qstpi/errors.hpp"

namespace qstpi {

/// A substation or potential turbine site. Units: meters and k€.
struct Position {
  int id = 0;
  double x_m = 0.0;
  double y_m = 0.0;
  double build_cost = 0.0;
  /// Overrides the wind-rose expected output as this site's quota profit (MW).
  std::optional<double> profit_mw;

  friend bool operator==(const Position&, const Position&) = default;
};

struct TurbineSpec {
  double rated_power = 15.0;      // MW
  double rotor_diameter = 240.0;  // m
  double cut_in = 3.0;            // m/s
  double rated_speed = 10.59;     // m/s
  double cut_out = 25.0;          // m/s
  double thrust_coefficient = 0.8;

  friend bool operator==(const TurbineSpec&, const TurbineSpec&) = default;
};

struct WindBin {
  double direction_deg = 0.0;  // direction the wind comes from, clockwise from north
  double speed = 0.0;          // m/s
  double probability = 0.0;

  friend bool operator==(const WindBin&, const WindBin&) = default;
};

struct WindRose {
  std::vector<WindBin> bins;

  friend bool operator==(const WindRose&, const WindRose&) = default;
};

/// Quota either in MW or as the interference-free output of n turbines.
struct QuotaSpec {
  std::variant<double, int> value = 0.0;

  static QuotaSpec mw(double v) { return QuotaSpec{v}; }
  static QuotaSpec equivalent_turbines(int n) { return QuotaSpec{n}; }

  [[nodiscard]] bool is_absolute() const { return std::holds_alternative<double>(value); }
  [[nodiscard]] double absolute_mw() const { return std::get<double>(value); }
  [[nodiscard]] int turbines() const { return std::get<int>(value); }

  friend bool operator==(const QuotaSpec&, const QuotaSpec&) = default;
};

/// Dense pairwise interference in MW; entry (i, j) is the loss inflicted by i on j.
class InterferenceMatrix {
public:
  InterferenceMatrix() = default;
  explicit InterferenceMatrix(std::size_t n) : n_(n), values_(n * n, 0.0) {}
  InterferenceMatrix(std::size_t n, std::vector<double> row_major) : n_(n), values_(std::move(row_major)) {
    if (values_.size() != n_ * n_) {
      throw InvariantError("interference matrix has " + std::to_string(values_.size()) +
                           " entries, expected " + std::to_string(n_ * n_));
    }
  }

  [[nodiscard]] std::size_t size() const { return n_; }
  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  double& at(std::size_t i, std::size_t j) { return values_[i * n_ + j]; }
  [[nodiscard]] const std::vector<double>& row_major() const { return values_; }

  /// Throws InvariantError unless all entries are finite, nonnegative, with a zero diagonal.
  void check() const {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        const double v = (*this)(i, j);
        if (!std::isfinite(v) || v < 0.0) {
          throw InvariantError("interference entry (" + std::to_string(i) + "," + std::to_string(j) +
                               ") must be finite and nonnegative");
        }
        if (i == j && v != 0.0) {
          throw InvariantError("interference diagonal entry " + std::to_string(i) + " must be 0");
        }
      }
    }
  }

  friend bool operator==(const InterferenceMatrix&, const InterferenceMatrix&) = default;

private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

struct WakeParams {
  double decay_k = 0.05;
  std::optional<double> thrust_coefficient;

  friend bool operator==(const WakeParams&, const WakeParams&) = default;
};

struct SiteInstance {
  std::string name = "site";
  std::optional<double> wake_decay_k;
  std::vector<Position> substations;
  std::vector<Position> positions;
  double cable_cost_per_km = 504.0;
  double d_min = 1200.0;
  QuotaSpec quota;
  TurbineSpec turbine;
  WindRose wind_rose;
  std::optional<InterferenceMatrix> interference;

  [[nodiscard]] WakeParams wake_params() const {
    WakeParams p;
    if (wake_decay_k) p.decay_k = *wake_decay_k;
    return p;
  }

  friend bool operator==(const SiteInstance&, const SiteInstance&) = default;
};

}  // namespace qstpi
