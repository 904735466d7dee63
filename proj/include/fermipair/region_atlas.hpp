#pragma once

// Partition of the (lambda, mu) plane into the components C_k^- and C_k^+
// cut out by the curves C^-(lambda, mu) = 0 and C^+(lambda, mu) = 0.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "determinant_core.hpp"

namespace fermipair {

struct RegionLabel {
  int minus_component = 0;
  int plus_component = 0;
  int expected_n_below = 0;
  int expected_n_above = 0;
  bool on_boundary = false;

  /// "C21" for C_2^- intersected with C_1^+.
  std::string name() const {
    return "C" + std::to_string(minus_component) + std::to_string(plus_component);
  }
  /// "4|2"
  std::string tag() const {
    return std::to_string(expected_n_below) + "|" + std::to_string(expected_n_above);
  }
};

class BoundaryPointError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The curve C^-(lambda, mu) = 0 (side below) or C^+ = 0 (side above) as a
/// function lambda(mu). Infinite on the asymptotes.
inline double boundary_lambda(Side side, double mu) {
  static const ThresholdConstants k = constants();
  const double s = side == Side::below ? -1.0 : 1.0;
  const double num = 8.0 * (mu + s * k.mu0_plus) * (mu + s * k.mu0_minus);
  const double den = (mu + s * k.mu1_plus) * (mu + s * k.mu1_minus);
  return s * num / den;
}

/// Asymptotes of the side's curve, ascending in mu.
inline std::array<double, 2> asymptotes(Side side) {
  static const ThresholdConstants k = constants();
  if (side == Side::below) return {k.mu1_minus, k.mu1_plus};
  return {-k.mu1_plus, -k.mu1_minus};
}

namespace detail {

inline int minus_component(double lambda, double mu) {
  static const ThresholdConstants k = constants();
  if (mu == k.mu1_plus) return 1;
  if (mu == k.mu1_minus) return 2;
  const bool above_curve = lambda > boundary_lambda(Side::below, mu);
  if (mu > k.mu1_plus) return above_curve ? 0 : 1;
  if (mu > k.mu1_minus) return above_curve ? 1 : 2;
  return above_curve ? 2 : 3;
}

inline int plus_component(double lambda, double mu) {
  static const ThresholdConstants k = constants();
  if (mu == -k.mu1_plus) return 1;
  if (mu == -k.mu1_minus) return 2;
  const bool below_curve = lambda < boundary_lambda(Side::above, mu);
  if (mu < -k.mu1_plus) return below_curve ? 0 : 1;
  if (mu < -k.mu1_minus) return below_curve ? 1 : 2;
  return below_curve ? 2 : 3;
}

}  // namespace detail

inline constexpr double kBoundaryTolerance = 1e-9;

inline bool near_boundary(Side side, const CouplingPair& g, double tol = kBoundaryTolerance) {
  const double l = g.lambda(), m = g.mu();
  if (std::abs(c_constant(side, g)) < tol * (1.0 + std::abs(l) + m * m)) return true;
  for (double a : asymptotes(side))
    if (std::abs(m - a) < tol) return true;
  return false;
}

/// Points on a curve itself are assigned to the component on the larger-lambda
/// side (below) or smaller-lambda side (above) and flagged on_boundary.
inline RegionLabel classify(const CouplingPair& g) {
  RegionLabel r;
  r.minus_component = detail::minus_component(g.lambda(), g.mu());
  r.plus_component = detail::plus_component(g.lambda(), g.mu());
  r.expected_n_below = 2 * r.minus_component;
  r.expected_n_above = 2 * r.plus_component;
  r.on_boundary = near_boundary(Side::below, g) || near_boundary(Side::above, g);
  return r;
}

/// Eigenvalue counts (with multiplicity) below and above the band at K = 0.
inline std::pair<int, int> expected_counts(const RegionLabel& label) {
  if (label.on_boundary)
    throw BoundaryPointError("eigenvalue counts are undefined on a phase boundary");
  return {label.expected_n_below, label.expected_n_above};
}

/// The ten components that occur and their count tags.
inline const std::array<std::pair<int, int>, 10>& known_regions() {
  static const std::array<std::pair<int, int>, 10> r{
      {{3, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 0}, {0, 0}, {0, 1}, {0, 2}, {1, 2}, {0, 3}}};
  return r;
}

struct CurvePoint {
  double lambda;
  double mu;
};

/// The three smooth branches of the side's curve on [mu_lo, mu_hi], split at
/// the asymptotes. Samples within 1e-6 of an asymptote are dropped.
inline std::array<std::vector<CurvePoint>, 3> boundary_curves(Side side, double mu_lo, double mu_hi,
                                                              std::size_t samples) {
  if (samples < 2) throw std::invalid_argument("boundary_curves needs at least two samples");
  if (!(mu_hi > mu_lo)) throw std::invalid_argument("empty mu range");
  const auto asym = asymptotes(side);
  std::array<std::vector<CurvePoint>, 3> branches;
  for (std::size_t i = 0; i < samples; ++i) {
    const double mu =
        mu_lo + (mu_hi - mu_lo) * static_cast<double>(i) / static_cast<double>(samples - 1);
    if (std::abs(mu - asym[0]) < 1e-6 || std::abs(mu - asym[1]) < 1e-6) continue;
    const std::size_t b = mu < asym[0] ? 0 : (mu < asym[1] ? 1 : 2);
    branches[b].push_back({boundary_lambda(side, mu), mu});
  }
  return branches;
}

}  // namespace fermipair
