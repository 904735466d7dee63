#include <fermipair/torus_quadrature.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace fermipair;

namespace {

// Trapezoid values on a 1024 grid from an independent NumPy script.
constexpr std::array<double, 6> kAtMinusOne{0.11715649357362, 0.12600773912464, 0.03068887687043,
                                            0.03895705179439, 0.01940063789336, 0.24803130976099};
constexpr std::array<double, 6> kAtNine{-0.11715649357362, -0.12600773912464, 0.03068887687043,
                                        0.03895705179439,  -0.01940063789336, -0.24803130976099};

std::array<double, 6> limits_below() {
  const double s2 = std::numbers::sqrt2;
  return {(pi - 2.0) / (2.0 * pi),         (30.0 * pi - 92.0) / (3.0 * pi), (2.0 * pi - 6.0) / pi,
          (4.0 - pi) / (2.0 * s2 * pi), (20.0 - 6.0 * pi) / (3.0 * s2 * pi), 4.0 / (3.0 * pi)};
}

}  // namespace

TEST(Quasimomentum, WrapsIntoFundamentalDomain) {
  const Quasimomentum k(1.5 * pi, -1.5 * pi);
  EXPECT_NEAR(k.k1(), -0.5 * pi, 1e-15);
  EXPECT_NEAR(k.k2(), 0.5 * pi, 1e-15);
  const Quasimomentum edge(pi, pi);
  EXPECT_DOUBLE_EQ(edge.k1(), -pi);
  EXPECT_TRUE(edge.is_degenerate());
  EXPECT_FALSE(Quasimomentum(pi, 0.0).is_degenerate());
  EXPECT_THROW(Quasimomentum(NAN, 0.0), std::invalid_argument);
}

TEST(GridSpec, RejectsOddOrTinyGrids) {
  EXPECT_THROW(GridSpec(7), std::invalid_argument);
  EXPECT_THROW(GridSpec(6), std::invalid_argument);
  EXPECT_THROW(GridSpec(33), std::invalid_argument);
  EXPECT_NO_THROW(GridSpec(8));
}

TEST(Dispersion, Examples) {
  const Quasimomentum zero(0.0, 0.0);
  EXPECT_DOUBLE_EQ(dispersion(zero, 0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(dispersion(zero, pi, pi), 8.0);
  const Quasimomentum corner(pi, pi);
  for (double p : {-3.0, -1.0, 0.2, 2.5}) EXPECT_NEAR(dispersion(corner, p, 0.7 * p), 4.0, 1e-14);
}

TEST(BandEdges, Examples) {
  auto b = band_edges(Quasimomentum(0.0, 0.0));
  EXPECT_DOUBLE_EQ(b.min, 0.0);
  EXPECT_DOUBLE_EQ(b.max, 8.0);
  b = band_edges(Quasimomentum(pi, pi));
  EXPECT_NEAR(b.min, 4.0, 1e-14);
  EXPECT_NEAR(b.max, 4.0, 1e-14);
  b = band_edges(Quasimomentum(pi, 0.0));
  EXPECT_NEAR(b.min, 2.0, 1e-14);
  EXPECT_NEAR(b.max, 6.0, 1e-14);
}

TEST(BandEdges, BoundsHoldForAnyK) {
  for (double k1 = -3.1; k1 < 3.2; k1 += 0.37)
    for (double k2 = -3.1; k2 < 3.2; k2 += 0.41) {
      const auto b = band_edges(Quasimomentum(k1, k2));
      EXPECT_LE(b.min, b.max);
      EXPECT_GE(b.min, 0.0);
      EXPECT_LE(b.max, 8.0);
    }
}

TEST(PeriodicIntegrate, Examples) {
  const GridSpec g(64);
  EXPECT_NEAR(periodic_integrate([](double, double) { return 1.0; }, g), 4.0 * pi * pi, 1e-12);
  EXPECT_NEAR(periodic_integrate([](double p1, double) { return std::cos(p1); }, g), 0.0, 1e-13);
  const Quasimomentum zero(0.0, 0.0);
  const double v = periodic_integrate(
      [&](double p1, double p2) { return std::sin(p1) * std::sin(p1) / (dispersion(zero, p1, p2) + 1.0); },
      GridSpec(512));
  EXPECT_NEAR(v, threshold_functions(-1.0, GridSpec(512)).a * 4.0 * pi * pi, 1e-12);
}

TEST(PeriodicIntegrate, RejectsNonFiniteSamples) {
  const Quasimomentum zero(0.0, 0.0);
  EXPECT_THROW(periodic_integrate([&](double p1, double p2) { return 1.0 / dispersion(zero, p1, p2); }, GridSpec(16)),
               OutOfBandError);
}

TEST(ThresholdFunctions, MatchIndependentReference) {
  const auto lo = threshold_functions(-1.0, GridSpec(512)).as_array();
  const auto hi = threshold_functions(9.0, GridSpec(512)).as_array();
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_NEAR(lo[i], kAtMinusOne[i], 1e-13) << i;
    EXPECT_NEAR(hi[i], kAtNine[i], 1e-13) << i;
  }
}

TEST(ThresholdFunctions, RejectBandEnergies) {
  for (double z : {0.0, 4.0, 8.0, std::nan("")}) EXPECT_THROW(threshold_functions(z, GridSpec(64)), OutOfBandError);
}

TEST(ThresholdFunctions, LimitsBelowBand) {
  const auto v = threshold_functions(-1e-6, GridSpec(GridSpec::kMaxPoints)).as_array();
  const auto want = limits_below();
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(v[i], want[i], 1e-5) << "abcdef"[i];
  EXPECT_NEAR(v[0], 0.18169011, 1e-5);
  EXPECT_NEAR(v[5], 0.42441318, 1e-5);
}

// E_0(p + (pi, pi)) = 8 - E_0(p): a, b, e, f are odd under z -> 8 - z while
// c and d are even. On an even grid the shift is exact.
TEST(ThresholdFunctions, ReflectionAcrossBandCentre) {
  for (double d : {1e-6, 0.01, 1.0, 30.0}) {
    const auto lo = threshold_functions(-d, GridSpec(1024)).as_array();
    const auto hi = threshold_functions(8.0 + d, GridSpec(1024)).as_array();
    for (std::size_t i : {0u, 1u, 4u, 5u}) EXPECT_NEAR(hi[i], -lo[i], 1e-13) << "abcdef"[i];
    for (std::size_t i : {2u, 3u}) EXPECT_NEAR(hi[i], lo[i], 1e-13) << "abcdef"[i];
  }
}

TEST(ThresholdFunctions, LimitsAboveBand) {
  const auto v = threshold_functions(8.0 + 1e-6, GridSpec(GridSpec::kMaxPoints)).as_array();
  const auto below = limits_below();
  for (std::size_t i : {0u, 1u, 4u, 5u}) EXPECT_NEAR(v[i], -below[i], 1e-5) << "abcdef"[i];
  // c and d keep their sign across the band.
  for (std::size_t i : {2u, 3u}) EXPECT_NEAR(v[i], below[i], 1e-5) << "abcdef"[i];
}

TEST(ThresholdFunctions, DecayFarFromBand) {
  const auto t = threshold_functions(-1e3, GridSpec(64));
  EXPECT_GT(t.a, 0.0);
  for (double x : t.as_array()) EXPECT_LT(std::abs(x), 2.0 / 1e3);
}

TEST(ThresholdFunctions, SignsOutsideBand) {
  for (double z : {-50.0, -3.0, -0.2}) {
    const auto t = threshold_functions(z, GridSpec(256));
    EXPECT_GT(t.a, 0.0);
    EXPECT_GT(t.b, 0.0);
    EXPECT_GT(t.f, 0.0);
  }
  for (double z : {8.2, 11.0, 58.0}) {
    const auto t = threshold_functions(z, GridSpec(256));
    EXPECT_LT(t.a, 0.0);
    EXPECT_LT(t.b, 0.0);
    EXPECT_LT(t.f, 0.0);
  }
}

TEST(ThresholdFunctions, MonotoneOnLogSample) {
  std::vector<double> d;
  for (double x = 1e-3; x < 1e3; x *= 1.9) d.push_back(x);
  // below the band: z = -d increases as d shrinks
  for (std::size_t k = 0; k + 1 < d.size(); ++k) {
    const auto far = threshold_functions(-d[k + 1], GridSpec(GridSpec::kMaxPoints / 2)).as_array();
    const auto near = threshold_functions(-d[k], GridSpec(GridSpec::kMaxPoints / 2)).as_array();
    for (std::size_t i = 0; i < 6; ++i) EXPECT_LT(far[i], near[i]) << "abcdef"[i] << " d=" << d[k];
  }
  // above the band a, b, e, f increase while the even functions c, d decrease
  for (std::size_t k = 0; k + 1 < d.size(); ++k) {
    const auto near = threshold_functions(8.0 + d[k], GridSpec(GridSpec::kMaxPoints / 2)).as_array();
    const auto far = threshold_functions(8.0 + d[k + 1], GridSpec(GridSpec::kMaxPoints / 2)).as_array();
    for (std::size_t i : {0u, 1u, 4u, 5u}) EXPECT_LT(near[i], far[i]) << "abcdef"[i] << " d=" << d[k];
    for (std::size_t i : {2u, 3u}) EXPECT_GT(near[i], far[i]) << "abcdef"[i] << " d=" << d[k];
  }
}

TEST(ThresholdFunctions, LinearRelations) {
  const double s2 = std::numbers::sqrt2;
  for (double z : {-50.0, -10.0, -1.0, -0.01, 8.01, 9.0, 20.0, 60.0}) {
    const auto t = threshold_functions(z, GridSpec(512));
    EXPECT_NEAR(t.b + s2 * t.e, (4.0 - z) * t.c, 1e-10) << z;
    EXPECT_NEAR(s2 * t.e + t.f, s2 * (4.0 - z) * t.d, 1e-10) << z;
    EXPECT_NEAR(t.c + s2 * t.d, (4.0 - z) * t.a - 0.5, 1e-10) << z;
  }
}

TEST(ThresholdFunctions, GridDoublingStable) {
  for (double z : {-0.01, -1.0, -20.0, 8.01, 9.0}) {
    const auto x = threshold_functions(z, GridSpec(512)).as_array();
    const auto y = threshold_functions(z, GridSpec(1024)).as_array();
    for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(x[i], y[i], 1e-12) << z;
  }
}

TEST(ThresholdFunctions, AdaptiveRefinement) {
  const auto r = threshold_functions_adaptive(-1.0);
  EXPECT_LE(r.change, 1e-11);
  EXPECT_LE(r.n, 512u);
  EXPECT_NEAR(r.values.a, kAtMinusOne[0], 1e-12);
  const auto near = threshold_functions_adaptive(-1e-6);
  EXPECT_EQ(near.n, GridSpec::kMaxPoints);
}

TEST(ThresholdFunctions, GridSizeGrowsTowardsBand) {
  EXPECT_EQ(grid_size_for_distance(1.0), 512u);
  EXPECT_EQ(grid_size_for_distance(1e-3, 64), 2048u);
  EXPECT_EQ(grid_size_for_distance(1e-9), GridSpec::kMaxPoints);
  EXPECT_EQ(grid_size_for_distance(10.0, 64), 64u);
}

TEST(ResolventMoment, ReducesToThresholdFunctionsAtZero) {
  const Quasimomentum zero(0.0, 0.0);
  const GridSpec g(256);
  for (double z : {-2.0, 9.5}) {
    const auto t = threshold_functions(z, g);
    EXPECT_NEAR(resolvent_moment(zero, 1, 1, z, g), 2.0 * t.a, 1e-14);
    EXPECT_NEAR(resolvent_moment(zero, 2, 2, z, g), 2.0 * t.b, 1e-14);
    EXPECT_NEAR(resolvent_moment(zero, 3, 3, z, g), t.f, 1e-14);
    // os and oa blocks coincide
    for (int i = 1; i <= 3; ++i)
      for (int j = 1; j <= 3; ++j)
        EXPECT_NEAR(resolvent_moment(zero, i, j, z, g), resolvent_moment(zero, i + 3, j + 3, z, g), 1e-14);
    for (int i = 1; i <= 3; ++i)
      for (int j = 4; j <= 6; ++j) EXPECT_NEAR(resolvent_moment(zero, i, j, z, g), 0.0, 1e-15);
  }
}

TEST(ResolventMoment, MatchesBruteForceSum) {
  const Quasimomentum k(1.0, 0.3);
  const double z = -0.7;
  const GridSpec g(128);
  const auto m = resolvent_moments(k, z, g);
  for (std::size_t r = 0; r < 6; ++r)
    for (std::size_t c = 0; c < 6; ++c) {
      const double ref = periodic_integrate(
          [&](double p1, double p2) {
            const auto a = basis_values(p1, p2);
            return a[r] * a[c] / (dispersion(k, p1, p2) - z);
          },
          g);
      EXPECT_NEAR(m[r][c], ref, 1e-14);
      EXPECT_DOUBLE_EQ(m[r][c], m[c][r]);
    }
}

TEST(ResolventMoment, GeneralKReference) {
  // NumPy value on a 1024 grid.
  EXPECT_NEAR(resolvent_moment(Quasimomentum(1.0, 1.0), 1, 1, -1.0, GridSpec(512)), 0.22379103251235205, 1e-8);
}

TEST(ResolventMoment, RejectsBandAndBadIndices) {
  const Quasimomentum k(pi, 0.0);
  EXPECT_THROW(resolvent_moment(k, 1, 1, 3.0, GridSpec(64)), OutOfBandError);
  EXPECT_THROW(resolvent_moment(k, 0, 1, -1.0, GridSpec(64)), std::invalid_argument);
  EXPECT_THROW(resolvent_moment(k, 1, 7, -1.0, GridSpec(64)), std::invalid_argument);
}
