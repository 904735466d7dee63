#pragma once

// Quadrature on the two-dimensional torus [-pi, pi)^2: the pair dispersion,
// its band edges, the six threshold integrals a(z)..f(z) and the resolvent
// moments of the rank-six interaction basis at arbitrary quasimomentum.

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace fermipair {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Raised when an energy falls inside (or on) the essential spectrum.
class OutOfBandError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised for K = (pi, pi), where the band collapses to the single point 4.
class DegenerateBandError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Reduces an angle to [-pi, pi).
inline double wrap_angle(double x) {
  double r = std::fmod(x + pi, two_pi);
  if (r < 0.0) r += two_pi;
  r -= pi;
  return r >= pi ? -pi : r;
}

/// Total quasimomentum of the pair. Components are normalized on construction.
class Quasimomentum {
 public:
  Quasimomentum() = default;
  Quasimomentum(double k1, double k2) : k1_(wrap_angle(k1)), k2_(wrap_angle(k2)) {
    if (!std::isfinite(k1) || !std::isfinite(k2))
      throw std::invalid_argument("quasimomentum components must be finite");
  }

  double k1() const { return k1_; }
  double k2() const { return k2_; }

  /// cos(K_i / 2); the hopping modulation of the fiber operator.
  double hopping1() const { return std::cos(0.5 * k1_); }
  double hopping2() const { return std::cos(0.5 * k2_); }

  bool is_zero() const { return k1_ == 0.0 && k2_ == 0.0; }
  /// K = (pi, pi) up to rounding: both hoppings vanish and the band is a point.
  bool is_degenerate() const { return std::abs(hopping1()) + std::abs(hopping2()) < 1e-12; }

  friend bool operator==(const Quasimomentum&, const Quasimomentum&) = default;

 private:
  double k1_ = 0.0;
  double k2_ = 0.0;
};

/// Uniform periodic grid with n points per axis.
class GridSpec {
 public:
  static constexpr std::size_t kMaxPoints = 4096;

  explicit GridSpec(std::size_t n = 512) : n_(n) {
    if (n < 8 || n % 2 != 0)
      throw std::invalid_argument("grid size must be an even integer >= 8, got " +
                                  std::to_string(n));
  }

  std::size_t n() const { return n_; }
  double step() const { return two_pi / static_cast<double>(n_); }
  double node(std::size_t k) const { return -pi + step() * static_cast<double>(k); }
  double weight() const { return step() * step(); }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  std::size_t n_;
};

/// E_K(p) = 2 sum_i (1 - cos(K_i/2) cos p_i).
inline double dispersion(const Quasimomentum& k, double p1, double p2) {
  return 2.0 * ((1.0 - k.hopping1() * std::cos(p1)) + (1.0 - k.hopping2() * std::cos(p2)));
}

struct BandEdges {
  double min;
  double max;

  double width() const { return max - min; }
  bool contains(double z) const { return z >= min && z <= max; }
  /// Signed distance outside the band; non-positive inside it.
  double distance(double z) const { return z < min ? min - z : (z > max ? z - max : 0.0); }
};

inline BandEdges band_edges(const Quasimomentum& k) {
  const double c1 = std::abs(k.hopping1());
  const double c2 = std::abs(k.hopping2());
  return {2.0 * ((1.0 - c1) + (1.0 - c2)), 2.0 * ((1.0 + c1) + (1.0 + c2))};
}

inline void require_outside_band(const BandEdges& band, double z) {
  if (!std::isfinite(z) || band.contains(z))
    throw OutOfBandError("energy " + std::to_string(z) + " is not outside the band [" +
                         std::to_string(band.min) + ", " + std::to_string(band.max) + "]");
}

/// Tensor-product trapezoid rule for a 2*pi-periodic integrand; approximates
/// the integral over the torus (not the mean).
template <typename Integrand>
double periodic_integrate(Integrand&& f, const GridSpec& grid) {
  const std::size_t n = grid.n();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p1 = grid.node(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double v = f(p1, grid.node(j));
      if (!std::isfinite(v))
        throw OutOfBandError("non-finite integrand sample; singular integrand");
      sum += v;
    }
  }
  return sum * grid.weight();
}

/// The six threshold integrals at K = 0, each with its conventional prefactor.
struct ThresholdValues {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
  double e = 0.0;
  double f = 0.0;

  std::array<double, 6> as_array() const { return {a, b, c, d, e, f}; }
};

namespace detail {

/// Per-axis trigonometric tables for one grid.
struct AxisTables {
  std::vector<double> sin1, sin2, cos1;

  explicit AxisTables(const GridSpec& grid) {
    const std::size_t n = grid.n();
    sin1.resize(n);
    sin2.resize(n);
    cos1.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double p = grid.node(k);
      sin1[k] = std::sin(p);
      sin2[k] = std::sin(2.0 * p);
      cos1[k] = std::cos(p);
    }
    // Exact zeros at p = 0 and p = -pi keep the odd parity of the sampled
    // basis functions exact.
    sin1[0] = sin2[0] = 0.0;
    sin1[n / 2] = sin2[n / 2] = 0.0;
    cos1[0] = -1.0;
    cos1[n / 2] = 1.0;
  }
};

}  // namespace detail

/// Index of a rank-six interaction basis function; the order is part of the
/// contract: three odd-symmetric then three odd-antisymmetric functions.
enum class BasisIndex : std::size_t { os1 = 0, os2, os3, oa1, oa2, oa3 };

inline constexpr std::size_t kBasisSize = 6;

/// Orthonormal basis of the interaction range, evaluated at p.
inline std::array<double, kBasisSize> basis_values(double p1, double p2) {
  const double s1 = std::sin(p1), s2 = std::sin(p2);
  const double ss1 = std::sin(2.0 * p1), ss2 = std::sin(2.0 * p2);
  const double m1 = s1 * std::cos(p2), m2 = s2 * std::cos(p1);
  const double h = 1.0 / two_pi;
  const double r = 1.0 / (std::numbers::sqrt2 * pi);
  return {h * (s1 + s2), h * (ss1 + ss2), r * (m1 + m2),
          h * (s1 - s2), h * (ss1 - ss2), r * (m1 - m2)};
}

/// Symmetric 6x6 matrix of resolvent moments, row-major.
using MomentMatrix = std::array<std::array<double, kBasisSize>, kBasisSize>;

/// All moments  int alpha_i(p) alpha_j(p) / (E_K(p) - z) dp  in one pass.
inline MomentMatrix resolvent_moments(const Quasimomentum& k, double z, const GridSpec& grid) {
  const BandEdges band = band_edges(k);
  require_outside_band(band, z);
  const detail::AxisTables t(grid);
  const std::size_t n = grid.n();
  const std::size_t half = n / 2;
  const double h1 = k.hopping1(), h2 = k.hopping2();

  // Raw functions x = (sin p1, sin 2p1, sin p1 cos p2) are odd in p1 and even
  // in p2; y = (sin p2, sin 2p2, sin p2 cos p1) the other way round. Mixed
  // x-y integrals vanish and the rest are even in both variables, so a
  // quarter of the grid suffices.
  std::array<double, 6> xx{}, yy{};
  std::vector<double> disp2(half + 1);
  for (std::size_t j = 0; j <= half; ++j) disp2[j] = 2.0 - 2.0 * h2 * t.cos1[j];

  for (std::size_t i = 0; i <= half; ++i) {
    const double wi = (i == 0 || i == half) ? 1.0 : 2.0;
    const double s1 = t.sin1[i], ss1 = t.sin2[i], c1 = t.cos1[i];
    const double shift = 2.0 - 2.0 * h1 * c1 - z;
    std::array<double, 6> rx{}, ry{};
    for (std::size_t j = 0; j <= half; ++j) {
      const double wj = (j == 0 || j == half) ? 1.0 : 2.0;
      const double s2 = t.sin1[j], ss2 = t.sin2[j], c2 = t.cos1[j];
      const double inv = wj / (shift + disp2[j]);
      const double x3 = s1 * c2, y3 = s2 * c1;
      rx[0] += s1 * s1 * inv;
      rx[1] += s1 * ss1 * inv;
      rx[2] += s1 * x3 * inv;
      rx[3] += ss1 * ss1 * inv;
      rx[4] += ss1 * x3 * inv;
      rx[5] += x3 * x3 * inv;
      ry[0] += s2 * s2 * inv;
      ry[1] += s2 * ss2 * inv;
      ry[2] += s2 * y3 * inv;
      ry[3] += ss2 * ss2 * inv;
      ry[4] += ss2 * y3 * inv;
      ry[5] += y3 * y3 * inv;
    }
    for (std::size_t q = 0; q < 6; ++q) {
      xx[q] += wi * rx[q];
      yy[q] += wi * ry[q];
    }
  }

  const std::array<double, 3> scale{1.0 / two_pi, 1.0 / two_pi, 1.0 / (std::numbers::sqrt2 * pi)};
  const std::array<std::array<std::size_t, 3>, 3> slot{{{0, 1, 2}, {1, 3, 4}, {2, 4, 5}}};
  MomentMatrix m{};
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) {
      const double f = scale[r] * scale[c] * grid.weight();
      const double sum = f * (xx[slot[r][c]] + yy[slot[r][c]]);
      const double diff = f * (xx[slot[r][c]] - yy[slot[r][c]]);
      if (!std::isfinite(sum) || !std::isfinite(diff)) throw OutOfBandError("non-finite resolvent moment");
      m[r][c] = m[r + 3][c + 3] = sum;
      m[r][c + 3] = m[r + 3][c] = diff;
    }
  return m;
}

/// Threshold integrals on a fixed grid. z must be real and outside [0, 8].
/// They are the K = 0 moments of the odd-symmetric block: a, b, c, d, e are
/// half the corresponding moment (the prefactors absorb the basis norms), f
/// equals its moment.
inline ThresholdValues threshold_functions(double z, const GridSpec& grid) {
  require_outside_band({0.0, 8.0}, z);
  const MomentMatrix m = resolvent_moments(Quasimomentum(0.0, 0.0), z, grid);
  return {0.5 * m[0][0], 0.5 * m[1][1], 0.5 * m[0][1], 0.5 * m[0][2], 0.5 * m[1][2], m[2][2]};
}

/// Grid size adequate for an energy at the given distance from the band:
/// the trapezoid error decays like exp(-n * sqrt(distance)).
inline std::size_t grid_size_for_distance(double distance, std::size_t floor_n = 512) {
  std::size_t n = floor_n;
  const double needed = 40.0 / std::sqrt(std::max(distance, 1e-300));
  while (n < GridSpec::kMaxPoints && static_cast<double>(n) < needed) n *= 2;
  return std::min(n, GridSpec::kMaxPoints);
}

struct AdaptiveThreshold {
  ThresholdValues values;
  std::size_t n = 0;
  double change = 0.0;  ///< max component change over the final doubling
};

/// Doubles the grid from 64 until two successive results agree to `tolerance`
/// (max norm), or n reaches 4096.
inline AdaptiveThreshold threshold_functions_adaptive(double z, double tolerance = 1e-11) {
  std::size_t n = 64;
  ThresholdValues prev = threshold_functions(z, GridSpec(n));
  double change = 0.0;
  while (n < GridSpec::kMaxPoints) {
    n *= 2;
    const ThresholdValues next = threshold_functions(z, GridSpec(n));
    change = 0.0;
    const auto x = prev.as_array(), y = next.as_array();
    for (std::size_t i = 0; i < 6; ++i) change = std::max(change, std::abs(x[i] - y[i]));
    prev = next;
    if (change <= tolerance) break;
  }
  return {prev, n, change};
}

/// Single moment for basis indices i, j in 1..6.
inline double resolvent_moment(const Quasimomentum& k, int i, int j, double z,
                               const GridSpec& grid) {
  if (i < 1 || i > 6 || j < 1 || j > 6)
    throw std::invalid_argument("basis indices must lie in 1..6");
  return resolvent_moments(k, z, grid)[static_cast<std::size_t>(i - 1)]
                                      [static_cast<std::size_t>(j - 1)];
}

}  // namespace fermipair
