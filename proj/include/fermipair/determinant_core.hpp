#pragma once

// Fredholm determinant of the fiber operator: the closed form at K = 0, its
// band-edge limits C^-(lambda, mu) and C^+(lambda, mu), and the 6x6 determinant
// built from resolvent moments at general K.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>

#include "torus_quadrature.hpp"

namespace fermipair {

/// Interaction magnitudes: lambda on nearest neighbours, mu on next-nearest.
class CouplingPair {
 public:
  CouplingPair() = default;
  CouplingPair(double lambda, double mu) : lambda_(lambda), mu_(mu) {
    if (!std::isfinite(lambda) || !std::isfinite(mu))
      throw std::invalid_argument("coupling constants must be finite");
  }

  double lambda() const { return lambda_; }
  double mu() const { return mu_; }

  friend bool operator==(const CouplingPair&, const CouplingPair&) = default;

 private:
  double lambda_ = 0.0;
  double mu_ = 0.0;
};

/// Coupling of each basis channel in the rank-six interaction, in the basis
/// order (os1, os2, os3, oa1, oa2, oa3). The sin/cos mixed channel carries
/// the full mu; this is the weighting under which the closed-form
/// determinant below is exact.
inline std::array<double, kBasisSize> channel_couplings(const CouplingPair& g) {
  const double l = 0.5 * g.lambda(), m = 0.5 * g.mu();
  return {l, m, g.mu(), l, m, g.mu()};
}

/// Operator norm of the negative (resp. positive) part of the interaction.
inline double attractive_norm(const CouplingPair& g) {
  double r = 0.0;
  for (double c : channel_couplings(g)) r = std::max(r, -c);
  return r;
}
inline double repulsive_norm(const CouplingPair& g) {
  double r = 0.0;
  for (double c : channel_couplings(g)) r = std::max(r, c);
  return r;
}

struct ThresholdConstants {
  double mu0_minus;
  double mu0_plus;
  double mu1_minus;
  double mu1_plus;
  /// Common prefactor (30 pi - 3 pi^2 - 64) / (6 pi^2) of C^+-.
  double prefactor;
};

/// Closed forms of the four threshold constants.
inline ThresholdConstants constants() {
  constexpr double p = pi;
  const double r0 = std::sqrt(1044.0 * p * p - 6720.0 * p + 10816.0);
  const double d0 = 240.0 * p - 24.0 * p * p - 512.0;
  const double r1 = std::sqrt(225.0 * p * p * p * p - 1440.0 * p * p * p + 3904.0 * p * p -
                              10240.0 * p + 16384.0);
  const double d1 = 120.0 * p - 12.0 * p * p - 256.0;
  return {(88.0 - 30.0 * p - r0) / d0 * p,
          (88.0 - 30.0 * p + r0) / d0 * p,
          (128.0 - 16.0 * p - 9.0 * p * p - r1) / d1,
          (128.0 - 16.0 * p - 9.0 * p * p + r1) / d1,
          (30.0 * p - 3.0 * p * p - 64.0) / (6.0 * p * p)};
}

enum class Side { below, above };

inline const char* to_string(Side s) { return s == Side::below ? "below" : "above"; }

/// Band-edge limit of the determinant: C^- below the band, C^+ above.
inline double c_constant(Side side, const CouplingPair& g) {
  static const ThresholdConstants k = constants();
  const double l = g.lambda(), m = g.mu();
  if (side == Side::below)
    return k.prefactor * (8.0 * (m - k.mu0_plus) * (m - k.mu0_minus) +
                          l * (m - k.mu1_plus) * (m - k.mu1_minus));
  return k.prefactor * (8.0 * (m + k.mu0_plus) * (m + k.mu0_minus) -
                        l * (m + k.mu1_plus) * (m + k.mu1_minus));
}

struct DeterminantBreakdown {
  double delta_lambda0;
  double delta_0mu;
  double delta_12;
  double total;
};

/// Closed-form determinant from precomputed threshold values.
inline DeterminantBreakdown delta(const CouplingPair& g, const ThresholdValues& t) {
  const double l = g.lambda(), m = g.mu();
  const double dl = 1.0 + l * t.a;
  const double dm = (1.0 + m * t.b) * (1.0 + m * t.f) - 2.0 * m * m * t.e * t.e;
  const double d12 = 4.0 * l * m * m * t.c * t.d * t.e - l * m * t.c * t.c * (1.0 + m * t.f) -
                     2.0 * l * m * t.d * t.d * (1.0 + m * t.b);
  return {dl, dm, d12, dl * dm + d12};
}

inline DeterminantBreakdown delta(const CouplingPair& g, double z, const GridSpec& grid) {
  return delta(g, threshold_functions(z, grid));
}

/// The 3x3 matrix of the linear system for the expansion coefficients of a
/// Lippmann-Schwinger eigenvector; its determinant is delta(...).total.
inline Eigen::Matrix3d system_matrix(const CouplingPair& g, const ThresholdValues& t) {
  const double l = g.lambda(), m = g.mu();
  Eigen::Matrix3d s;
  s << 1.0 + l * t.a, l * t.c, l * t.d,
       m * t.c, 1.0 + m * t.b, m * t.e,
       2.0 * m * t.d, 2.0 * m * t.e, 1.0 + m * t.f;
  return s;
}

/// I + G A for the six channels.
inline Eigen::Matrix<double, 6, 6> general_k_matrix(const CouplingPair& g,
                                                     const MomentMatrix& moments) {
  const auto gc = channel_couplings(g);
  Eigen::Matrix<double, 6, 6> m;
  for (std::size_t r = 0; r < 6; ++r)
    for (std::size_t c = 0; c < 6; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          (r == c ? 1.0 : 0.0) + gc[r] * moments[r][c];
  return m;
}

/// det(I + G A(K, z)); at K = 0 this equals delta(...).total squared.
inline double delta_general_k(const CouplingPair& g, const Quasimomentum& k, double z,
                              const GridSpec& grid) {
  if (g.lambda() == 0.0 && g.mu() == 0.0) {
    require_outside_band(band_edges(k), z);
    return 1.0;
  }
  return general_k_matrix(g, resolvent_moments(k, z, grid)).determinant();
}

/// Number of eigenvalues of H(K) strictly below z (side == below, z under the
/// band) or strictly above z (side == above, z over the band), counted with
/// multiplicity. Uses the inertia of G^{-1} + A(z) restricted to the active
/// channels (Haynsworth additivity on the bordered operator).
inline int count_beyond(const CouplingPair& g, const MomentMatrix& moments, Side side) {
  const auto gc = channel_couplings(g);
  std::array<std::size_t, 6> active{};
  int na = 0, positive_g = 0, negative_g = 0;
  for (std::size_t i = 0; i < 6; ++i)
    if (gc[i] != 0.0) {
      active[static_cast<std::size_t>(na++)] = i;
      (gc[i] > 0.0 ? positive_g : negative_g)++;
    }
  if (na == 0) return 0;
  Eigen::MatrixXd b(na, na);
  for (int r = 0; r < na; ++r)
    for (int c = 0; c < na; ++c) {
      const std::size_t ir = active[static_cast<std::size_t>(r)];
      const std::size_t ic = active[static_cast<std::size_t>(c)];
      b(r, c) = moments[ir][ic] + (r == c ? 1.0 / gc[ir] : 0.0);
    }
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(b, Eigen::EigenvaluesOnly)
                                 .eigenvalues();
  int pos = 0, neg = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) (ev(i) > 0.0 ? pos : neg)++;
  return side == Side::below ? pos - positive_g : neg - negative_g;
}

}  // namespace fermipair
