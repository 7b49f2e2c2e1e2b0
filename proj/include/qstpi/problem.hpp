#pragma once

// Resolved numeric view of an instance shared by bounds, heuristics and solvers.

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "qstpi/graph.hpp"
#include "qstpi/instance.hpp"
#include "qstpi/wake.hpp"

namespace qstpi {

using Mask = std::uint64_t;

inline constexpr Mask bit(std::size_t i) { return Mask{1} << i; }

inline std::vector<std::size_t> mask_to_indices(Mask m) {
  std::vector<std::size_t> out;
  while (m) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(m)));
    m &= m - 1;
  }
  return out;
}

inline Mask indices_to_mask(const std::vector<std::size_t>& idx) {
  Mask m = 0;
  for (std::size_t i : idx) m |= bit(i);
  return m;
}

class Problem {
public:
  explicit Problem(SiteInstance inst) : inst_(std::move(inst)) {
    check_invariants(inst_);
    n_ = inst_.positions.size();
    interference_ = inst_.interference ? *inst_.interference : build_interference_matrix(inst_);
    quota_ = resolved_quota_mw(inst_);
    tol_ = 1e-9 * std::max(1.0, quota_);
    profit_.resize(n_);
    build_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      profit_[i] = position_profit(inst_, i);
      build_[i] = inst_.positions[i].build_cost;
    }
    dist_.assign(n_ * n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) dist_[i * n_ + j] = euclidean_m(inst_.positions[i], inst_.positions[j]);
    }
    if (n_ <= 64) {
      conflicts_.assign(n_, 0);
      for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j < n_; ++j) {
          if (i != j && conflict(i, j)) conflicts_[i] |= bit(j);
        }
      }
    }
    graph_ = build_transformed_graph(inst_);
  }

  [[nodiscard]] const SiteInstance& instance() const { return inst_; }
  [[nodiscard]] std::size_t size() const { return n_; }
  [[nodiscard]] double profit(std::size_t i) const { return profit_[i]; }
  [[nodiscard]] const std::vector<double>& profits() const { return profit_; }
  [[nodiscard]] double build_cost(std::size_t i) const { return build_[i]; }
  [[nodiscard]] double quota() const { return quota_; }
  [[nodiscard]] double quota_tolerance() const { return tol_; }
  [[nodiscard]] const InterferenceMatrix& interference() const { return interference_; }
  [[nodiscard]] double pair_interference(std::size_t i, std::size_t j) const {
    return interference_(i, j) + interference_(j, i);
  }
  [[nodiscard]] double distance(std::size_t i, std::size_t j) const { return dist_[i * n_ + j]; }
  [[nodiscard]] bool conflict(std::size_t i, std::size_t j) const { return distance(i, j) < inst_.d_min; }
  /// Positions closer than D_min to i (only for |T_p| <= 64).
  [[nodiscard]] Mask conflict_mask(std::size_t i) const { return conflicts_[i]; }
  [[nodiscard]] const TransformedGraph& graph() const { return graph_; }
  [[nodiscard]] int position_id(std::size_t i) const { return inst_.positions[i].id; }

  [[nodiscard]] bool meets_quota(double collected, double i_tot) const { return collected - i_tot >= quota_ - tol_; }

  [[nodiscard]] double collected(const std::vector<std::size_t>& sel) const {
    double s = 0.0;
    for (std::size_t i : sel) s += profit_[i];
    return s;
  }
  [[nodiscard]] double total_interference(const std::vector<std::size_t>& sel) const {
    double s = 0.0;
    for (std::size_t a = 0; a < sel.size(); ++a) {
      for (std::size_t b = a + 1; b < sel.size(); ++b) s += pair_interference(sel[a], sel[b]);
    }
    return s;
  }
  [[nodiscard]] bool respects_dmin(const std::vector<std::size_t>& sel) const {
    for (std::size_t a = 0; a < sel.size(); ++a) {
      for (std::size_t b = a + 1; b < sel.size(); ++b) {
        if (conflict(sel[a], sel[b])) return false;
      }
    }
    return true;
  }

private:
  SiteInstance inst_;
  std::size_t n_ = 0;
  InterferenceMatrix interference_;
  double quota_ = 0.0;
  double tol_ = 1e-9;
  std::vector<double> profit_;
  std::vector<double> build_;
  std::vector<double> dist_;
  std::vector<Mask> conflicts_;
  TransformedGraph graph_;
};

}  // namespace qstpi
