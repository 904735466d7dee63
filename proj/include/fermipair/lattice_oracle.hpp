#pragma once

// Brute-force reference spectra: the fiber operator discretized on a uniform
// momentum grid restricted to odd functions, and the same operator in
// relative position space truncated to a box.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "block_lanczos.hpp"
#include "determinant_core.hpp"
#include "torus_quadrature.hpp"

namespace fermipair {

struct OracleEigenvalue {
  double z;
  Side side;
};

/// H(K) on odd grid functions. Each unknown is a pair {q, -q}; the four
/// self-paired nodes (q_i in {0, -pi}) carry no odd function.
struct MomentumGridOperator {
  GridSpec grid;
  Quasimomentum k;
  CouplingPair coupling;
  BandEdges band{};
  Eigen::VectorXd diagonal;              ///< E_K at the representative nodes
  Eigen::Matrix<double, Eigen::Dynamic, 6> channels;  ///< sqrt(2 w) u_c(q)
  std::array<double, 6> strengths{};     ///< kernel prefactor of each channel

  Eigen::Index dim() const { return diagonal.size(); }

  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd h = channels * Eigen::Map<const Eigen::Matrix<double, 6, 1>>(strengths.data())
                                       .asDiagonal() *
                        channels.transpose();
    h.diagonal() += diagonal;
    return h;
  }

  void apply(const Eigen::MatrixXd& x, Eigen::MatrixXd& y) const {
    const Eigen::Matrix<double, 6, Eigen::Dynamic> c = channels.transpose() * x;
    Eigen::Matrix<double, 6, Eigen::Dynamic> s = c;
    for (Eigen::Index i = 0; i < 6; ++i) s.row(i) *= strengths[static_cast<std::size_t>(i)];
    y = diagonal.asDiagonal() * x;
    y.noalias() += channels * s;
  }
};

/// Kernel of the interaction in momentum space:
///   lambda/(4 pi^2) sum_i sin p_i sin q_i
/// + mu/(4 pi^2)     sum_i sin 2p_i sin 2q_i
/// + mu/pi^2         (sin p1 cos p2 sin q1 cos q2 + sin p2 cos p1 sin q2 cos q1)
inline MomentumGridOperator build_momentum_operator(const CouplingPair& g,
                                                    const Quasimomentum& k,
                                                    const GridSpec& grid) {
  if (k.is_degenerate())
    throw DegenerateBandError("K = (pi, pi): the band collapses to the point 4");
  MomentumGridOperator op{grid, k, g, band_edges(k), {}, {}, {}};
  const std::size_t n = grid.n();
  const double four_pi2 = 4.0 * pi * pi;
  op.strengths = {g.lambda() / four_pi2, g.lambda() / four_pi2, g.mu() / four_pi2,
                  g.mu() / four_pi2, g.mu() / (pi * pi), g.mu() / (pi * pi)};

  std::vector<std::array<std::size_t, 2>> reps;
  reps.reserve((n * n - 4) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t mi = (n - i) % n, mj = (n - j) % n;
      if (mi == i && mj == j) continue;
      if (i < mi || (i == mi && j < mj)) reps.push_back({i, j});
    }

  const auto dim = static_cast<Eigen::Index>(reps.size());
  op.diagonal.resize(dim);
  op.channels.resize(dim, 6);
  const double amp = std::sqrt(2.0 * grid.weight());
  for (Eigen::Index r = 0; r < dim; ++r) {
    const auto [i, j] = reps[static_cast<std::size_t>(r)];
    const double p1 = grid.node(i), p2 = grid.node(j);
    op.diagonal(r) = dispersion(k, p1, p2);
    const double s1 = std::sin(p1), s2 = std::sin(p2), c1 = std::cos(p1), c2 = std::cos(p2);
    op.channels.row(r) << s1, s2, 2.0 * s1 * c1, 2.0 * s2 * c2, s1 * c2, s2 * c1;
    op.channels.row(r) *= amp;
  }
  return op;
}

inline double default_margin(const MomentumGridOperator& op) {
  return 5.0 * op.band.width() / static_cast<double>(op.grid.n());
}

inline std::vector<OracleEigenvalue> split_by_band(const Eigen::VectorXd& values,
                                                   const BandEdges& band, double margin) {
  std::vector<OracleEigenvalue> out;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double z = values(i);
    if (z < band.min - margin) out.push_back({z, Side::below});
    else if (z > band.max + margin) out.push_back({z, Side::above});
  }
  std::sort(out.begin(), out.end(),
            [](const OracleEigenvalue& a, const OracleEigenvalue& b) { return a.z < b.z; });
  return out;
}

/// Full diagonalization; eigenvalues farther than margin from the band.
inline std::vector<OracleEigenvalue> discrete_eigenvalues(const MomentumGridOperator& op,
                                                          double margin) {
  if (!(margin > 0.0)) throw std::invalid_argument("margin must be positive");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.dense(), Eigen::EigenvaluesOnly);
  return split_by_band(es.eigenvalues(), op.band, margin);
}

inline std::vector<OracleEigenvalue> discrete_eigenvalues(const MomentumGridOperator& op) {
  return discrete_eigenvalues(op, default_margin(op));
}

/// Same selection by block Lanczos, for grids too large to diagonalize densely.
inline std::vector<OracleEigenvalue> discrete_eigenvalues_lanczos(const MomentumGridOperator& op,
                                                                  double margin,
                                                                  const LanczosOptions& opts = {}) {
  if (!(margin > 0.0)) throw std::invalid_argument("margin must be positive");
  const BandEdges band = op.band;
  const auto res = block_lanczos(
      op.dim(), [&op](const Eigen::MatrixXd& x, Eigen::MatrixXd& y) { op.apply(x, y); },
      [band, margin](double z) { return z < band.min - margin || z > band.max + margin; }, opts);
  return split_by_band(res.values, band, margin);
}

/// H(K) on odd functions of the relative coordinate in the box [-L, L]^2
/// with open boundary. One unknown per pair {s, -s}.
struct PositionBoxOperator {
  int radius;
  Quasimomentum k;
  CouplingPair coupling;
  BandEdges band{};
  std::vector<std::array<int, 2>> sites;  ///< representatives
  Eigen::VectorXd diagonal;               ///< 4 + v(s)
  /// Per site: four neighbours as (index, sign); index -1 for none.
  std::vector<std::array<std::pair<int, double>, 4>> neighbours;

  Eigen::Index dim() const { return diagonal.size(); }

  void apply(const Eigen::MatrixXd& x, Eigen::MatrixXd& y) const {
    y = diagonal.asDiagonal() * x;
    const double h[2] = {k.hopping1(), k.hopping2()};
    for (Eigen::Index r = 0; r < dim(); ++r)
      for (std::size_t d = 0; d < 4; ++d) {
        const auto [idx, sign] = neighbours[static_cast<std::size_t>(r)][d];
        if (idx < 0) continue;
        y.row(r) -= (h[d / 2] * sign) * x.row(idx);
      }
  }
};

/// Interaction in position space: lambda/2 on the nearest neighbours,
/// mu/2 on (+-2, 0) and (0, +-2), mu on the diagonal neighbours (+-1, +-1).
inline double position_potential(const CouplingPair& g, int s1, int s2) {
  const int a1 = std::abs(s1), a2 = std::abs(s2);
  if (a1 + a2 == 1) return 0.5 * g.lambda();
  if ((a1 == 2 && a2 == 0) || (a1 == 0 && a2 == 2)) return 0.5 * g.mu();
  if (a1 == 1 && a2 == 1) return g.mu();
  return 0.0;
}

inline PositionBoxOperator build_position_operator(const CouplingPair& g, const Quasimomentum& k,
                                                   int radius) {
  if (radius < 10) throw std::invalid_argument("box radius must be at least 10");
  PositionBoxOperator op{radius, k, g, band_edges(k), {}, {}, {}};
  const int w = 2 * radius + 1;
  std::vector<int> index(static_cast<std::size_t>(w * w), -1);
  auto slot = [radius, w](int s1, int s2) {
    return static_cast<std::size_t>((s1 + radius) * w + (s2 + radius));
  };
  auto is_rep = [](int s1, int s2) { return s1 > 0 || (s1 == 0 && s2 > 0); };
  for (int s1 = -radius; s1 <= radius; ++s1)
    for (int s2 = -radius; s2 <= radius; ++s2)
      if (is_rep(s1, s2)) {
        index[slot(s1, s2)] = static_cast<int>(op.sites.size());
        op.sites.push_back({s1, s2});
      }
  const auto dim = static_cast<Eigen::Index>(op.sites.size());
  op.diagonal.resize(dim);
  op.neighbours.resize(op.sites.size());
  const int step[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (std::size_t r = 0; r < op.sites.size(); ++r) {
    const auto [s1, s2] = op.sites[r];
    op.diagonal(static_cast<Eigen::Index>(r)) = 4.0 + position_potential(g, s1, s2);
    for (std::size_t d = 0; d < 4; ++d) {
      const int t1 = s1 + step[d][0], t2 = s2 + step[d][1];
      auto& nb = op.neighbours[r][d];
      nb = {-1, 0.0};
      if (std::abs(t1) > radius || std::abs(t2) > radius || (t1 == 0 && t2 == 0)) continue;
      if (is_rep(t1, t2)) nb = {index[slot(t1, t2)], 1.0};
      else nb = {index[slot(-t1, -t2)], -1.0};
    }
  }
  return op;
}

struct PositionSpectrum {
  std::vector<OracleEigenvalue> eigenvalues;
  /// max |psi| on the box boundary over max |psi|, for the state farthest
  /// from the band; 0 when there is no discrete eigenvalue.
  double boundary_ratio = 0.0;
  bool converged = false;
};

/// Eigenvalues of the box operator farther than margin from the band.
inline PositionSpectrum position_extreme_eigenvalues(const PositionBoxOperator& op, double margin,
                                                     LanczosOptions opts = {}) {
  const BandEdges band = op.band;
  opts.want_vectors = true;
  const auto res = block_lanczos(
      op.dim(), [&op](const Eigen::MatrixXd& x, Eigen::MatrixXd& y) { op.apply(x, y); },
      [band, margin](double z) { return z < band.min - margin || z > band.max + margin; }, opts);
  PositionSpectrum out;
  out.converged = res.converged;
  out.eigenvalues = split_by_band(res.values, band, margin);
  if (res.values.size() > 0) {
    Eigen::Index deepest = 0;
    for (Eigen::Index i = 1; i < res.values.size(); ++i)
      if (band.distance(res.values(i)) > band.distance(res.values(deepest))) deepest = i;
    const Eigen::VectorXd psi = res.vectors.col(deepest);
    double edge = 0.0;
    for (std::size_t r = 0; r < op.sites.size(); ++r) {
      const auto [s1, s2] = op.sites[r];
      if (std::max(std::abs(s1), std::abs(s2)) == op.radius)
        edge = std::max(edge, std::abs(psi(static_cast<Eigen::Index>(r))));
    }
    out.boundary_ratio = edge / psi.cwiseAbs().maxCoeff();
  }
  return out;
}

}  // namespace fermipair
