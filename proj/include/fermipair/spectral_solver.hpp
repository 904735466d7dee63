#pragma once

// Discrete eigenvalues of the fiber operator outside its band. At K = 0 the
// roots of the closed-form determinant are bracketed on a two-scale mesh;
// at general K eigenvalues are isolated with the inertia count of the
// Birman-Schwinger matrix and polished on the 6x6 determinant.

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "determinant_core.hpp"
#include "torus_quadrature.hpp"

namespace fermipair {

struct Eigenvalue {
  double z;
  Side side;
  int multiplicity;
};

struct SpectralReport {
  CouplingPair coupling;
  Quasimomentum k;
  BandEdges band{};
  std::vector<Eigenvalue> eigenvalues;  ///< ascending
  int n_below = 0;                      ///< with multiplicity
  int n_above = 0;
  /// Set when an eigenvalue may sit closer to a band edge than the search
  /// resolves (the point lies on or next to a phase boundary).
  bool boundary_uncertain = false;
};

struct RootSearchOptions {
  double edge_offset = 1e-8;   ///< closest approach to the band edge
  double near_span = 1e-1;     ///< end of the geometric part of the mesh
  int near_points = 64;
  int far_points = 256;
  double tolerance = 1e-12;    ///< bracket width after polishing
  double boundary_tolerance = 1e-6;
};

/// Process-wide memo of threshold integrals keyed by (z, n). Internally
/// synchronized; the near-edge mesh is shared by every coupling.
class ThresholdCache {
 public:
  static ThresholdCache& instance() {
    static ThresholdCache cache;
    return cache;
  }

  ThresholdValues get(double z, std::size_t n) {
    const Key key{std::bit_cast<std::uint64_t>(z), n};
    {
      std::lock_guard lock(mutex_);
      if (auto it = values_.find(key); it != values_.end()) return it->second;
    }
    const ThresholdValues v = threshold_functions(z, GridSpec(n));
    std::lock_guard lock(mutex_);
    if (values_.size() > kMaxEntries) values_.clear();
    values_.emplace(key, v);
    return v;
  }

 private:
  using Key = std::pair<std::uint64_t, std::size_t>;
  static constexpr std::size_t kMaxEntries = 200000;
  std::mutex mutex_;
  std::map<Key, ThresholdValues> values_;
};

/// Threshold integrals at K = 0 on a grid refined for the distance to the band.
inline ThresholdValues threshold_at(double z, const GridSpec& base) {
  const double dist = BandEdges{0.0, 8.0}.distance(z);
  return ThresholdCache::instance().get(z, grid_size_for_distance(dist, base.n()));
}

/// The K = 0 moment matrix: two identical 3x3 blocks assembled from a..f.
inline MomentMatrix moments_from_threshold(const ThresholdValues& t) {
  MomentMatrix m{};
  const std::array<std::array<double, 3>, 3> block{{{2.0 * t.a, 2.0 * t.c, 2.0 * t.d},
                                                    {2.0 * t.c, 2.0 * t.b, 2.0 * t.e},
                                                    {2.0 * t.d, 2.0 * t.e, t.f}}};
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) m[r][c] = m[r + 3][c + 3] = block[r][c];
  return m;
}

namespace detail {

/// One evaluation of the secular function and the eigenvalue count beyond z.
struct Probe {
  double z;
  double value;
  int count;
};

/// Eigenvalues strictly between the two probes.
inline int enclosed(const Probe& a, const Probe& b) { return std::abs(a.count - b.count); }

template <typename Eval>
class RootLocator {
 public:
  RootLocator(Eval eval, Side side, double edge, int unit, const RootSearchOptions& opts)
      : eval_(std::move(eval)), side_(side), edge_(edge), unit_(unit), opts_(opts) {}

  /// Probes are ordered by increasing z.
  void scan(const std::vector<Probe>& probes) {
    for (std::size_t i = 0; i + 1 < probes.size(); ++i) isolate(probes[i], probes[i + 1], 0);
    std::sort(found_.begin(), found_.end(),
              [](const Eigenvalue& x, const Eigenvalue& y) { return x.z < y.z; });
  }

  const std::vector<Eigenvalue>& found() const { return found_; }
  Probe probe(double z) { return eval_(z); }

 private:
  double distance(double z) const { return std::abs(z - edge_); }

  double split_point(double a, double b) const {
    const double da = distance(a), db = distance(b);
    const double lo = std::min(da, db), hi = std::max(da, db);
    if (lo > 0.0 && hi / lo > 8.0) {
      const double dm = std::sqrt(lo * hi);
      return side_ == Side::below ? edge_ - dm : edge_ + dm;
    }
    return 0.5 * (a + b);
  }

  void isolate(const Probe& a, const Probe& b, int depth) {
    const int k = enclosed(a, b);
    if (k == 0) return;
    const bool sign_change = (a.value < 0.0) != (b.value < 0.0);
    if (k == unit_ && sign_change) {
      found_.push_back({polish(a, b), side_, unit_});
      return;
    }
    const double mid = split_point(a.z, b.z);
    if (b.z - a.z <= opts_.tolerance || mid <= a.z || mid >= b.z || depth > 200) {
      found_.push_back({0.5 * (a.z + b.z), side_, k});
      return;
    }
    const Probe m = eval_(mid);
    isolate(a, m, depth + 1);
    isolate(m, b, depth + 1);
  }

  double polish(const Probe& a, const Probe& b) {
    auto f = [this](double z) { return eval_(z).value; };
    std::uintmax_t max_iter = 200;
    const double tol = opts_.tolerance;
    auto stop = [tol](double x, double y) { return std::abs(y - x) <= tol; };
    const auto [lo, hi] =
        boost::math::tools::toms748_solve(f, a.z, b.z, a.value, b.value, stop, max_iter);
    return 0.5 * (lo + hi);
  }

  Eval eval_;
  Side side_;
  double edge_;
  int unit_;
  RootSearchOptions opts_;
  std::vector<Eigenvalue> found_;
};

/// Two-scale mesh of energies outside the band edge, ascending in z: 64
/// geometric distances in [edge_offset, near_span], then uniform out to the
/// horizon distance.
inline std::vector<double> search_mesh(double edge, Side side, double horizon,
                                       const RootSearchOptions& opts) {
  std::vector<double> dist;
  const double near_end = std::min(opts.near_span, horizon);
  const double ratio = near_end / opts.edge_offset;
  for (int i = 0; i < opts.near_points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(opts.near_points - 1);
    dist.push_back(opts.edge_offset * std::pow(ratio, t));
  }
  if (horizon > opts.near_span) {
    for (int i = 1; i <= opts.far_points; ++i)
      dist.push_back(opts.near_span +
                     (horizon - opts.near_span) * static_cast<double>(i) / opts.far_points);
  }
  std::vector<double> z;
  z.reserve(dist.size());
  for (double d : dist) z.push_back(side == Side::below ? edge - d : edge + d);
  std::sort(z.begin(), z.end());
  z.erase(std::unique(z.begin(), z.end()), z.end());
  return z;
}

/// Distance beyond which no eigenvalue can lie: the operator norm of the
/// attractive (below) or repulsive (above) part of the interaction.
inline double search_horizon(const CouplingPair& g, Side side) {
  const double norm = side == Side::below ? attractive_norm(g) : repulsive_norm(g);
  return norm * (1.0 + 1e-9) + 1e-9;
}

template <typename Eval>
std::vector<Eigenvalue> mesh_search(Eval eval, Side side, double edge, double horizon, int unit,
                                    const RootSearchOptions& opts) {
  RootLocator<Eval> locator(std::move(eval), side, edge, unit, opts);
  std::vector<Probe> probes;
  for (double z : search_mesh(edge, side, horizon, opts)) probes.push_back(locator.probe(z));
  locator.scan(probes);
  return locator.found();
}

template <typename Eval>
std::vector<Eigenvalue> bisection_search(Eval eval, Side side, double edge, double horizon,
                                         int unit, const RootSearchOptions& opts) {
  RootLocator<Eval> locator(std::move(eval), side, edge, unit, opts);
  const double z_edge = side == Side::below ? edge - opts.edge_offset : edge + opts.edge_offset;
  const double z_far = side == Side::below ? edge - horizon : edge + horizon;
  std::vector<Probe> probes{locator.probe(std::min(z_edge, z_far)),
                            locator.probe(std::max(z_edge, z_far))};
  locator.scan(probes);
  return locator.found();
}

/// Eigenvalue count for a subset of channels with explicit couplings.
inline int channel_count(const std::vector<double>& couplings,
                         const std::vector<std::vector<double>>& moments, Side side) {
  const Eigen::Index n = static_cast<Eigen::Index>(couplings.size());
  Eigen::MatrixXd b(n, n);
  int positive_g = 0, negative_g = 0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto ur = static_cast<std::size_t>(r);
    (couplings[ur] > 0.0 ? positive_g : negative_g)++;
    for (Eigen::Index c = 0; c < n; ++c)
      b(r, c) = moments[ur][static_cast<std::size_t>(c)] + (r == c ? 1.0 / couplings[ur] : 0.0);
  }
  const Eigen::VectorXd ev =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(b, Eigen::EigenvaluesOnly).eigenvalues();
  int pos = 0, neg = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) (ev(i) > 0.0 ? pos : neg)++;
  return side == Side::below ? pos - positive_g : neg - negative_g;
}

}  // namespace detail

/// All roots of the closed-form determinant on one side of [0, 8], ascending.
/// Each root is a doubly degenerate eigenvalue of H(0).
inline std::vector<double> find_roots_k0(const CouplingPair& g, Side side,
                                         const GridSpec& grid = GridSpec(512),
                                         const RootSearchOptions& opts = {}) {
  const double horizon = detail::search_horizon(g, side);
  if (horizon <= 1e-9 * 2.0) return {};
  const double edge = side == Side::below ? 0.0 : 8.0;
  auto eval = [&g, &grid, side](double z) {
    const ThresholdValues t = threshold_at(z, grid);
    return detail::Probe{z, delta(g, t).total, count_beyond(g, moments_from_threshold(t), side)};
  };
  std::vector<double> roots;
  for (const Eigenvalue& e : detail::mesh_search(eval, side, edge, horizon, 2, opts))
    for (int i = 0; i < e.multiplicity / 2; ++i) roots.push_back(e.z);
  return roots;
}

/// Full discrete spectrum of H(K) outside its band.
inline SpectralReport spectrum(const CouplingPair& g, const Quasimomentum& k,
                               const GridSpec& grid = GridSpec(512),
                               const RootSearchOptions& opts = {}) {
  if (k.is_degenerate())
    throw DegenerateBandError("K = (pi, pi): the band collapses to the point 4");
  SpectralReport report{g, k, band_edges(k), {}, 0, 0, false};

  for (Side side : {Side::below, Side::above}) {
    const double horizon = detail::search_horizon(g, side);
    if (horizon <= 2e-9) continue;
    std::vector<Eigenvalue> found;
    if (k.is_zero()) {
      for (double z : find_roots_k0(g, side, grid, opts)) found.push_back({z, side, 2});
      if (std::abs(c_constant(side, g)) < opts.boundary_tolerance) report.boundary_uncertain = true;
    } else {
      const double edge = side == Side::below ? report.band.min : report.band.max;
      std::map<double, detail::Probe> memo;
      auto eval = [&g, &k, &grid, &memo, side, band = report.band](double z) {
        if (auto it = memo.find(z); it != memo.end()) return it->second;
        const GridSpec local(grid_size_for_distance(band.distance(z), grid.n()));
        const MomentMatrix m = resolvent_moments(k, z, local);
        const detail::Probe p{z, general_k_matrix(g, m).determinant(), count_beyond(g, m, side)};
        memo.emplace(z, p);
        return p;
      };
      found = detail::bisection_search(eval, side, edge, horizon, 1, opts);
      const double z_edge = side == Side::below ? edge - opts.edge_offset : edge + opts.edge_offset;
      if (std::abs(eval(z_edge).value) < opts.boundary_tolerance) report.boundary_uncertain = true;
    }
    for (const Eigenvalue& e : found) {
      (side == Side::below ? report.n_below : report.n_above) += e.multiplicity;
      report.eigenvalues.push_back(e);
    }
  }
  std::sort(report.eigenvalues.begin(), report.eigenvalues.end(),
            [](const Eigenvalue& x, const Eigenvalue& y) { return x.z < y.z; });
  return report;
}

/// Which item of the single-channel classification applies to lambda.
enum class LambdaCase { root_below, no_root, root_above };
/// Which item of the two-channel (mu only) classification applies.
enum class MuCase { two_below, one_below, no_root, one_above, two_above };

/// Roots of the factors of the determinant: 1 + lambda a, 1 + mu b,
/// 1 + mu f and the mu-only determinant, each side separately (ascending).
struct FactorRoots {
  LambdaCase lambda_case;
  MuCase mu_case;
  std::vector<double> zeta_lambda_below, zeta_lambda_above;  ///< 1 + lambda a
  std::vector<double> eta_b_below, eta_b_above;              ///< 1 + mu b
  std::vector<double> eta_f_below, eta_f_above;              ///< 1 + mu f
  std::vector<double> zeta_mu_below, zeta_mu_above;          ///< mu-only determinant
};

inline LambdaCase lambda_case(double lambda) {
  const double lower = two_pi / (2.0 - pi), upper = two_pi / (pi - 2.0);
  if (lambda < lower) return LambdaCase::root_below;
  if (lambda > upper) return LambdaCase::root_above;
  return LambdaCase::no_root;
}

inline MuCase mu_case(double mu) {
  static const ThresholdConstants k = constants();
  if (mu < k.mu0_minus) return MuCase::two_below;
  if (mu < k.mu0_plus) return MuCase::one_below;
  if (mu <= -k.mu0_plus) return MuCase::no_root;
  if (mu <= -k.mu0_minus) return MuCase::one_above;
  return MuCase::two_above;
}

inline FactorRoots factor_roots(const CouplingPair& g, const GridSpec& grid = GridSpec(512),
                                const RootSearchOptions& opts = {}) {
  const double l = g.lambda(), m = g.mu();
  FactorRoots out{lambda_case(l), mu_case(m), {}, {}, {}, {}, {}, {}, {}, {}};

  // Channel groups in os-block indices: 0 <-> 2a with coupling lambda/2,
  // 1 <-> 2b with mu/2, 2 <-> f with mu.
  struct Factor {
    std::vector<std::size_t> channels;
    std::vector<double>* below;
    std::vector<double>* above;
  };
  const std::array<double, 3> gc{0.5 * l, 0.5 * m, m};
  const std::array<Factor, 4> factors{{{{0}, &out.zeta_lambda_below, &out.zeta_lambda_above},
                                       {{1}, &out.eta_b_below, &out.eta_b_above},
                                       {{2}, &out.eta_f_below, &out.eta_f_above},
                                       {{1, 2}, &out.zeta_mu_below, &out.zeta_mu_above}}};

  for (const Factor& fac : factors) {
    std::vector<double> cpl;
    for (std::size_t ch : fac.channels) cpl.push_back(gc[ch]);
    if (std::all_of(cpl.begin(), cpl.end(), [](double x) { return x == 0.0; })) continue;
    for (Side side : {Side::below, Side::above}) {
      double norm = 0.0;
      for (double x : cpl) norm = std::max(norm, side == Side::below ? -x : x);
      if (norm == 0.0) continue;
      const double horizon = norm * (1.0 + 1e-9) + 1e-9;
      const double edge = side == Side::below ? 0.0 : 8.0;
      auto eval = [&](double z) {
        const ThresholdValues t = threshold_at(z, grid);
        const std::array<std::array<double, 3>, 3> block{{{2.0 * t.a, 2.0 * t.c, 2.0 * t.d},
                                                          {2.0 * t.c, 2.0 * t.b, 2.0 * t.e},
                                                          {2.0 * t.d, 2.0 * t.e, t.f}}};
        std::vector<std::vector<double>> sub;
        for (std::size_t r : fac.channels) {
          std::vector<double> row;
          for (std::size_t c : fac.channels) row.push_back(block[r][c]);
          sub.push_back(std::move(row));
        }
        // det(I + G A) on the channel subset.
        const Eigen::Index n = static_cast<Eigen::Index>(cpl.size());
        Eigen::MatrixXd mat(n, n);
        for (Eigen::Index r = 0; r < n; ++r)
          for (Eigen::Index c = 0; c < n; ++c)
            mat(r, c) = (r == c ? 1.0 : 0.0) +
                        cpl[static_cast<std::size_t>(r)] *
                            sub[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
        return detail::Probe{z, mat.determinant(), detail::channel_count(cpl, sub, side)};
      };
      std::vector<double>& target = side == Side::below ? *fac.below : *fac.above;
      for (const Eigenvalue& e : detail::mesh_search(eval, side, edge, horizon, 1, opts))
        for (int i = 0; i < e.multiplicity; ++i) target.push_back(e.z);
    }
  }
  return out;
}

}  // namespace fermipair
