#pragma once

// The end-to-end verification suite, shared by the `verify` command and the
// acceptance test binary. Each criterion returns one Outcome.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "determinant_core.hpp"
#include "lattice_oracle.hpp"
#include "region_atlas.hpp"
#include "spectral_solver.hpp"
#include "torus_quadrature.hpp"

namespace fermipair::acceptance {

struct Outcome {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct Settings {
  std::uint64_t seed = 0;
};

namespace detail {

inline std::string fmt(double x, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

/// Far enough from both phase boundaries that every eigenvalue sits well
/// away from the band edge.
inline bool interior(const CouplingPair& g) {
  const ThresholdConstants k = constants();
  const double l = g.lambda(), m = g.mu();
  const double scale = k.prefactor * (8.0 + std::abs(l)) * (1.0 + m * m);
  for (Side s : {Side::below, Side::above}) {
    if (std::abs(c_constant(s, g)) < 2e-3 * scale) return false;
    for (double a : asymptotes(s))
      if (std::abs(m - a) < 0.05) return false;
  }
  return true;
}

using Rng = std::mt19937_64;

inline CouplingPair sample_region(int alpha, int beta, Rng& rng) {
  std::uniform_real_distribution<double> lam(-60.0, 60.0), mu(-30.0, 30.0);
  for (;;) {
    const CouplingPair g(lam(rng), mu(rng));
    const RegionLabel r = classify(g);
    if (r.minus_component == alpha && r.plus_component == beta && !r.on_boundary && interior(g))
      return g;
  }
}

inline Quasimomentum sample_k(Rng& rng) {
  std::uniform_real_distribution<double> u(-pi, pi);
  for (;;) {
    const Quasimomentum k(u(rng), u(rng));
    if (band_edges(k).width() > 0.2) return k;
  }
}

/// Eigenvalues on one side, expanded by multiplicity, deepest first.
inline std::vector<double> deepest_first(const SpectralReport& r, Side side) {
  std::vector<double> z;
  for (const Eigenvalue& e : r.eigenvalues)
    if (e.side == side)
      for (int i = 0; i < e.multiplicity; ++i) z.push_back(e.z);
  if (side == Side::below) std::sort(z.begin(), z.end());
  else std::sort(z.rbegin(), z.rend());
  return z;
}

inline std::vector<double> deepest_first(const std::vector<OracleEigenvalue>& v, Side side) {
  std::vector<double> z;
  for (const OracleEigenvalue& e : v)
    if (e.side == side) z.push_back(e.z);
  if (side == Side::below) std::sort(z.begin(), z.end());
  else std::sort(z.rbegin(), z.rend());
  return z;
}

inline int count_beyond_margin(const std::vector<double>& z, const BandEdges& band, double margin) {
  return static_cast<int>(
      std::count_if(z.begin(), z.end(), [&](double x) { return band.distance(x) > margin; }));
}

/// Largest deviation between the reference states at least min_distance from
/// the band and the deepest states of the candidate list; infinity when the
/// candidate has too few.
inline double match_deviation(const std::vector<double>& reference, const std::vector<double>& candidate,
                              const BandEdges& band, double min_distance) {
  double worst = 0.0;
  std::size_t i = 0;
  for (double z : reference) {
    if (band.distance(z) < min_distance) break;
    if (i >= candidate.size()) return INFINITY;
    worst = std::max(worst, std::abs(z - candidate[i++]));
  }
  return worst;
}

inline const char* region_name(int a, int b) {
  static thread_local std::string s;
  s = "C" + std::to_string(a) + std::to_string(b);
  return s.c_str();
}

}  // namespace detail

// 1. The four threshold constants against their quoted decimals.
inline Outcome constants_check(const Settings&) {
  Outcome o{1, "threshold constants", true, "", 0.0};
  const ThresholdConstants k = constants();
  const std::array<double, 4> got{k.mu0_minus, k.mu0_plus, k.mu1_minus, k.mu1_plus};
  const std::array<double, 4> quoted{-5.6172, -2.0623, -5.7523, -2.9272};
  const std::array<const char*, 4> names{"mu0-", "mu0+", "mu1-", "mu1+"};
  std::ostringstream os;
  for (std::size_t i = 0; i < 4; ++i) {
    const double dev = std::abs(got[i] - quoted[i]);
    if (dev > 5e-4) o.pass = false;
    os << names[i] << "=" << detail::fmt(got[i], 8) << " ";
  }
  const bool ordered = k.mu1_minus < k.mu0_minus && k.mu0_minus < k.mu1_plus &&
                       k.mu1_plus < k.mu0_plus && k.mu0_plus < 0.0;
  if (!ordered) o.pass = false;
  os << (ordered ? "ordering ok" : "ordering violated");
  o.detail = os.str();
  return o;
}

/// The band-edge limits of a..f as quoted: {0-} then {8+}.
inline std::array<std::array<double, 6>, 2> quoted_threshold_limits() {
  const double s2 = std::numbers::sqrt2;
  const std::array<double, 6> below{(pi - 2.0) / (2.0 * pi),       (30.0 * pi - 92.0) / (3.0 * pi),
                                    (2.0 * pi - 6.0) / pi,         (4.0 - pi) / (2.0 * s2 * pi),
                                    (20.0 - 6.0 * pi) / (3.0 * s2 * pi), 4.0 / (3.0 * pi)};
  const std::array<double, 6> above{(2.0 - pi) / (2.0 * pi),       (92.0 - 30.0 * pi) / (3.0 * pi),
                                    (6.0 - 2.0 * pi) / pi,         (pi - 4.0) / (2.0 * s2 * pi),
                                    (6.0 * pi - 20.0) / (3.0 * s2 * pi), -4.0 / (3.0 * pi)};
  return {below, above};
}

// 2. Quadrature at 1e-6 from each band edge against the quoted limits.
inline Outcome threshold_limits_check(const Settings&) {
  Outcome o{2, "threshold limits", true, "", 0.0};
  const GridSpec grid(GridSpec::kMaxPoints);
  const double delta = 1e-6;
  const auto lo = threshold_functions(-delta, grid).as_array();
  const auto hi = threshold_functions(8.0 + delta, grid).as_array();
  const auto quoted = quoted_threshold_limits();
  const char* names = "abcdef";
  std::ostringstream bad, good;
  double worst = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    const double d0 = std::abs(lo[i] - quoted[0][i]);
    const double d8 = std::abs(hi[i] - quoted[1][i]);
    const double reflect = std::abs(hi[i] + lo[i]);
    worst = std::max(worst, d0);
    if (d0 > 1e-5) bad << names[i] << "(0-)=" << detail::fmt(lo[i]) << " quoted " << detail::fmt(quoted[0][i]) << "; ";
    if (d8 > 1e-5) bad << names[i] << "(8+)=" << detail::fmt(hi[i]) << " quoted " << detail::fmt(quoted[1][i]) << "; ";
    else worst = std::max(worst, d8);
    if (reflect > 1e-8) bad << names[i] << "(8+)+" << names[i] << "(0-)=" << detail::fmt(hi[i] + lo[i]) << "; ";
  }
  o.pass = bad.str().empty();
  o.detail = o.pass ? "max deviation " + detail::fmt(worst, 3) : bad.str();
  return o;
}

/// pi * integral over T of sqrt((2 - cos q)^2 - 1).
inline double sqrt_dispersion_integral() {
  auto f = [](double q) {
    const double c = 2.0 - std::cos(q);
    return std::sqrt(std::max(0.0, c * c - 1.0));
  };
  // The integrand has a kink at q = 0, so integrate each half separately.
  const double half = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, pi, 20, 1e-15);
  return pi * 2.0 * half;
}

// 3. The one-dimensional integral identity behind the limit of a at 0-.
inline Outcome integral_identity_check(const Settings&) {
  Outcome o{3, "integral identity behind a(0-)", false, "", 0.0};
  const double got = sqrt_dispersion_integral();
  const double want = 2.0 * pi * pi + 4.0 * pi;
  o.pass = std::abs(got - want) <= 1e-10;
  o.detail = "I=" + detail::fmt(got, 15) + " closed form " + detail::fmt(want, 15) +
             " diff " + detail::fmt(got - want, 3);
  return o;
}

/// Residuals of the three linear relations among a..f, as quoted.
inline std::array<double, 3> rabcd_residuals(double z, const ThresholdValues& t) {
  const double s2 = std::numbers::sqrt2;
  return {t.b + s2 * t.e - (4.0 - z) * t.c,
          s2 * t.e + t.f - s2 * (4.0 - z) * t.d,
          t.c + s2 * t.d - ((4.0 - z) * t.a + 0.5)};
}

// 4. The three linear relations at eight energies.
inline Outcome rabcd_check(const Settings&) {
  Outcome o{4, "linear relations among a..f", true, "", 0.0};
  const std::array<double, 8> zs{-50.0, -10.0, -1.0, -0.01, 8.01, 9.0, 20.0, 60.0};
  std::array<double, 3> worst{};
  for (double z : zs) {
    const auto r = rabcd_residuals(z, threshold_functions(z, GridSpec(512)));
    for (std::size_t i = 0; i < 3; ++i) worst[i] = std::max(worst[i], std::abs(r[i]));
  }
  std::ostringstream os;
  for (std::size_t i = 0; i < 3; ++i) {
    const bool ok = worst[i] <= 1e-10;
    if (!ok) o.pass = false;
    os << "identity " << i + 1 << " max residual " << detail::fmt(worst[i], 3) << (ok ? "" : " FAIL")
       << (i < 2 ? "; " : "");
  }
  o.detail = os.str();
  return o;
}

// 5. Eigenvalue counts at K = 0 equal the region table.
inline Outcome region_counts_check(const Settings& s) {
  Outcome o{5, "region eigenvalue counts", true, "", 0.0};
  detail::Rng rng(s.seed);
  std::ostringstream bad;
  int checked = 0;
  for (const auto& [a, b] : known_regions()) {
    for (int i = 0; i < 5; ++i) {
      const CouplingPair g = detail::sample_region(a, b, rng);
      const SpectralReport r = spectrum(g, Quasimomentum(0.0, 0.0));
      ++checked;
      if (r.n_below != 2 * a || r.n_above != 2 * b || r.boundary_uncertain)
        bad << detail::region_name(a, b) << "(" << detail::fmt(g.lambda()) << "," << detail::fmt(g.mu())
            << ") got " << r.n_below << "|" << r.n_above << "; ";
    }
  }
  o.pass = bad.str().empty();
  o.detail = o.pass ? std::to_string(checked) + " points in 10 regions match" : bad.str();
  return o;
}

// 6. Strict ordering of the roots and interlacing of the factor roots.
inline Outcome ordering_check(const Settings& s) {
  Outcome o{6, "root ordering and interlacing", true, "", 0.0};
  detail::Rng rng(s.seed + 1);
  std::ostringstream bad;
  for (int i = 0; i < 5; ++i) {
    const CouplingPair g = detail::sample_region(3, 0, rng);
    const auto z = find_roots_k0(g, Side::below);
    if (!(z.size() == 3 && z[0] < z[1] && z[1] < z[2] && z[2] < 0.0))
      bad << "C30 (" << detail::fmt(g.lambda()) << "," << detail::fmt(g.mu()) << ") " << z.size() << " roots; ";
  }
  for (int i = 0; i < 5; ++i) {
    const CouplingPair g = detail::sample_region(0, 2, rng);
    auto z = find_roots_k0(g, Side::above);
    std::sort(z.rbegin(), z.rend());  // z1 > z2
    if (!(z.size() == 2 && 8.0 < z[1] && z[1] < z[0]))
      bad << "C02 (" << detail::fmt(g.lambda()) << "," << detail::fmt(g.mu()) << ") " << z.size() << " roots; ";
  }
  for (double mu : {-5.8, -6.5, -10.0, -20.0, -35.0}) {
    const FactorRoots f = factor_roots(CouplingPair(0.0, mu));
    const bool shape = f.zeta_mu_below.size() == 2 && f.eta_b_below.size() == 1 && f.eta_f_below.size() == 1;
    if (!shape) {
      bad << "mu=" << mu << " wrong root count; ";
      continue;
    }
    const double lo = std::min(f.eta_b_below[0], f.eta_f_below[0]);
    const double hi = std::max(f.eta_b_below[0], f.eta_f_below[0]);
    if (!(f.zeta_mu_below[0] < lo && lo <= hi && hi < f.zeta_mu_below[1] && f.zeta_mu_below[1] < 0.0))
      bad << "mu=" << mu << " not interlaced; ";
  }
  for (double mu : {5.8, 6.5, 10.0, 20.0, 35.0}) {
    const FactorRoots f = factor_roots(CouplingPair(0.0, mu));
    const bool shape = f.zeta_mu_above.size() == 2 && f.eta_b_above.size() == 1 && f.eta_f_above.size() == 1;
    if (!shape) {
      bad << "mu=" << mu << " wrong root count; ";
      continue;
    }
    const double lo = std::min(f.eta_b_above[0], f.eta_f_above[0]);
    const double hi = std::max(f.eta_b_above[0], f.eta_f_above[0]);
    // zeta_2 is the smaller of the two roots above.
    if (!(8.0 < f.zeta_mu_above[0] && f.zeta_mu_above[0] < lo && lo <= hi && hi < f.zeta_mu_above[1]))
      bad << "mu=" << mu << " not interlaced; ";
  }
  o.pass = bad.str().empty();
  o.detail = o.pass ? "5 C30, 5 C02 samples and 10 interlacing cases ordered" : bad.str();
  return o;
}

/// Determinant and momentum-grid oracle on one case: counts beyond the
/// oracle's margin and deviations of the states at least 0.1 from the band.
struct OracleComparison {
  int det_below = 0, det_above = 0;
  int oracle_below = 0, oracle_above = 0;
  double deviation = 0.0;
  bool ambiguous = false;  ///< a root sits within the margin's uncertainty window
};

inline OracleComparison compare_with_oracle(const SpectralReport& r, std::size_t n, bool dense) {
  OracleComparison c;
  const MomentumGridOperator op = build_momentum_operator(r.coupling, r.k, GridSpec(n));
  const double margin = default_margin(op);
  const double select = 0.05;
  const auto oracle = dense ? discrete_eigenvalues(op, std::min(select, margin))
                            : discrete_eigenvalues_lanczos(op, select);
  for (Side side : {Side::below, Side::above}) {
    const auto det = detail::deepest_first(r, side);
    const auto orc = detail::deepest_first(oracle, side);
    for (double z : det)
      if (std::abs(r.band.distance(z) - margin) < 0.02) c.ambiguous = true;
    (side == Side::below ? c.det_below : c.det_above) = detail::count_beyond_margin(det, r.band, margin);
    (side == Side::below ? c.oracle_below : c.oracle_above) = detail::count_beyond_margin(orc, r.band, margin);
    c.deviation = std::max(c.deviation, detail::match_deviation(det, orc, r.band, 0.1));
  }
  return c;
}

// 7. Momentum-grid oracle against the determinant.
inline Outcome oracle_equivalence_check(const Settings& s) {
  Outcome o{7, "oracle equivalence", true, "", 0.0};
  detail::Rng rng(s.seed + 2);
  std::uniform_int_distribution<int> coarse(-4, 3);
  std::ostringstream bad;
  double dev64 = 0.0, dev128 = 0.0;
  int cases = 0;
  for (const auto& [a, b] : known_regions()) {
    for (int i = 0; i < 2;) {
      const CouplingPair g = detail::sample_region(a, b, rng);
      const Quasimomentum k(coarse(rng) * pi / 4.0, coarse(rng) * pi / 4.0);
      if (k.is_degenerate()) continue;
      const SpectralReport r = spectrum(g, k);
      const OracleComparison c64 = compare_with_oracle(r, 64, true);
      if (c64.ambiguous) continue;
      const OracleComparison c128 = compare_with_oracle(r, 128, false);
      ++i;
      ++cases;
      dev64 = std::max(dev64, c64.deviation);
      dev128 = std::max(dev128, c128.deviation);
      const bool ok = c64.det_below == c64.oracle_below && c64.det_above == c64.oracle_above &&
                      c64.deviation <= 1e-2 && c128.deviation <= 1e-3;
      if (!ok)
        bad << detail::region_name(a, b) << " K=(" << detail::fmt(k.k1(), 3) << "," << detail::fmt(k.k2(), 3)
            << ") det " << c64.det_below << "|" << c64.det_above << " oracle " << c64.oracle_below << "|"
            << c64.oracle_above << " dev64 " << detail::fmt(c64.deviation, 3) << " dev128 "
            << detail::fmt(c128.deviation, 3) << "; ";
    }
  }
  o.pass = bad.str().empty();
  o.detail = std::to_string(cases) + " cases, max deviation n=64 " + detail::fmt(dev64, 3) +
             ", n=128 " + detail::fmt(dev128, 3) + (o.pass ? "" : "; " + bad.str());
  return o;
}

// 8. Counts never decrease when K leaves the origin.
inline Outcome k_monotonicity_check(const Settings& s) {
  Outcome o{8, "counts grow away from K = 0", true, "", 0.0};
  detail::Rng rng(s.seed + 3);
  std::ostringstream bad;
  int pairs = 0, oracle_cases = 0;
  for (const auto& [a, b] : known_regions()) {
    for (int i = 0; i < 2; ++i) {
      const CouplingPair g = detail::sample_region(a, b, rng);
      const SpectralReport r0 = spectrum(g, Quasimomentum(0.0, 0.0));
      for (int j = 0; j < 10; ++j) {
        const Quasimomentum k = detail::sample_k(rng);
        const SpectralReport rk = spectrum(g, k);
        ++pairs;
        if (rk.n_below < r0.n_below || rk.n_above < r0.n_above)
          bad << "(" << detail::fmt(g.lambda()) << "," << detail::fmt(g.mu()) << ") K=(" << detail::fmt(k.k1(), 3)
              << "," << detail::fmt(k.k2(), 3) << ") " << rk.n_below << "|" << rk.n_above << " < " << r0.n_below
              << "|" << r0.n_above << "; ";
        if (oracle_cases < 5 && i == 0 && j == 0) {
          const OracleComparison c = compare_with_oracle(rk, 64, true);
          if (c.ambiguous) continue;
          ++oracle_cases;
          if (c.det_below != c.oracle_below || c.det_above != c.oracle_above)
            bad << "oracle disagrees at (" << detail::fmt(g.lambda()) << "," << detail::fmt(g.mu()) << "): det "
                << c.det_below << "|" << c.det_above << " oracle " << c.oracle_below << "|" << c.oracle_above << "; ";
        }
      }
    }
  }
  if (oracle_cases < 5) {
    o.pass = false;
    bad << "only " << oracle_cases << " oracle cross-checks; ";
  }
  o.pass = o.pass && bad.str().empty();
  o.detail = o.pass ? std::to_string(pairs) + " (coupling, K) pairs, " + std::to_string(oracle_cases) +
                          " oracle cross-checks"
                    : bad.str();
  return o;
}

// 9. Counts are constant along paths that stay inside one region.
inline Outcome path_invariance_check(const Settings& s) {
  Outcome o{9, "path invariance", true, "", 0.0};
  detail::Rng rng(s.seed + 4);
  std::normal_distribution<double> step(0.0, 1.0);
  std::ostringstream bad;
  int vertices = 0;
  for (const auto& [a, b] : known_regions()) {
    std::vector<CouplingPair> path{detail::sample_region(a, b, rng)};
    while (path.size() < 6) {
      const CouplingPair& p = path.back();
      const double dl = 4.0 * step(rng), dm = 1.5 * step(rng);
      bool inside = true;
      for (int t = 1; t <= 16 && inside; ++t) {
        const CouplingPair q(p.lambda() + dl * t / 16.0, p.mu() + dm * t / 16.0);
        const RegionLabel r = classify(q);
        inside = r.minus_component == a && r.plus_component == b && !r.on_boundary;
      }
      const CouplingPair next(p.lambda() + dl, p.mu() + dm);
      if (inside && detail::interior(next)) path.push_back(next);
    }
    std::vector<std::pair<int, int>> counts;
    for (const CouplingPair& g : path) {
      const SpectralReport r = spectrum(g, Quasimomentum(0.0, 0.0));
      counts.emplace_back(r.n_below, r.n_above);
      ++vertices;
    }
    if (std::any_of(counts.begin(), counts.end(), [&](const auto& c) { return c != counts.front(); }))
      bad << detail::region_name(a, b) << " path changes count; ";
  }
  o.pass = bad.str().empty();
  o.detail = o.pass ? "10 paths, " + std::to_string(vertices) + " vertices, counts constant" : bad.str();
  return o;
}

// 10. Momentum grid against the position box.
inline Outcome two_oracle_check(const Settings&) {
  Outcome o{10, "momentum and position oracles agree", true, "", 0.0};
  struct Case {
    double lambda, mu, k1, k2;
  };
  const std::array<Case, 5> cases{{{-30.0, -20.0, 0.0, 0.0},
                                   {20.0, 10.0, 0.0, 0.0},
                                   {-40.0, 10.0, 0.0, 0.0},
                                   {10.0, -18.0, 0.6, -0.3},
                                   {-35.0, 3.0, 1.0, 0.5}}};
  std::ostringstream bad;
  double worst = 0.0, decay = 0.0;
  int states = 0;
  for (const Case& c : cases) {
    const CouplingPair g(c.lambda, c.mu);
    const Quasimomentum k(c.k1, c.k2);
    const auto mom = discrete_eigenvalues_lanczos(build_momentum_operator(g, k, GridSpec(128)), 0.05);
    const PositionSpectrum pos = position_extreme_eigenvalues(build_position_operator(g, k, 60), 0.05);
    decay = std::max(decay, pos.boundary_ratio);
    const BandEdges band = band_edges(k);
    double dev = 0.0;
    for (Side side : {Side::below, Side::above}) {
      const auto m = detail::deepest_first(mom, side);
      const auto p = detail::deepest_first(pos.eigenvalues, side);
      states += detail::count_beyond_margin(m, band, 0.1);
      dev = std::max(dev, detail::match_deviation(m, p, band, 0.1));
      dev = std::max(dev, detail::match_deviation(p, m, band, 0.1));
    }
    worst = std::max(worst, dev);
    if (!(dev <= 1e-3) || !pos.converged)
      bad << "(" << c.lambda << "," << c.mu << ") deviation " << detail::fmt(dev, 3) << "; ";
  }
  o.pass = bad.str().empty();
  o.detail = std::to_string(states) + " states, max deviation " + detail::fmt(worst, 3) +
             ", boundary amplitude ratio " + detail::fmt(decay, 3) + (o.pass ? "" : "; " + bad.str());
  return o;
}

inline const std::vector<std::function<Outcome(const Settings&)>>& criteria() {
  static const std::vector<std::function<Outcome(const Settings&)>> all{
      constants_check,      threshold_limits_check, integral_identity_check, rabcd_check,
      region_counts_check,  ordering_check,         oracle_equivalence_check, k_monotonicity_check,
      path_invariance_check, two_oracle_check};
  return all;
}

inline Outcome run(int id, const Settings& s = {}) {
  if (id < 1 || id > static_cast<int>(criteria().size()))
    throw std::out_of_range("no acceptance criterion " + std::to_string(id));
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = criteria()[static_cast<std::size_t>(id - 1)](s);
  } catch (const std::exception& e) {
    o = {id, "criterion " + std::to_string(id), false, std::string("exception: ") + e.what(), 0.0};
  }
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return o;
}

inline std::string format(const Outcome& o) {
  std::ostringstream os;
  os << (o.pass ? "PASS" : "FAIL") << "  [" << o.id << "] " << o.title << " (" << detail::fmt(o.seconds, 3)
     << " s): " << o.detail;
  return os.str();
}

}  // namespace fermipair::acceptance
