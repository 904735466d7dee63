#include <fermipair/lattice_oracle.hpp>
#include <fermipair/region_atlas.hpp>
#include <fermipair/spectral_solver.hpp>

#include <gtest/gtest.h>

using namespace fermipair;

TEST(MomentumGrid, DimensionAndFreeSpectrum) {
  const auto op = build_momentum_operator(CouplingPair(0.0, 0.0), Quasimomentum(0.0, 0.0), GridSpec(16));
  EXPECT_EQ(op.dim(), (16 * 16 - 4) / 2);
  EXPECT_TRUE(discrete_eigenvalues(op).empty());
}

TEST(MomentumGrid, InteractionHasRankSix) {
  const auto g = CouplingPair(-7.0, 3.0);
  const auto op = build_momentum_operator(g, Quasimomentum(0.4, -0.9), GridSpec(24));
  Eigen::MatrixXd v = op.dense();
  v.diagonal() -= op.diagonal;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(v, Eigen::EigenvaluesOnly);
  int nonzero = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()(i)) > 1e-10) ++nonzero;
  EXPECT_EQ(nonzero, 6);
}

TEST(MomentumGrid, ApplyMatchesDense) {
  const auto op = build_momentum_operator(CouplingPair(-12.0, 5.0), Quasimomentum(1.1, 0.2), GridSpec(20));
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(op.dim(), 3), y;
  op.apply(x, y);
  EXPECT_LT((y - op.dense() * x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MomentumGrid, MatchesSolverAtZero) {
  const CouplingPair g(-30.0, -20.0);
  const auto ev = discrete_eigenvalues(build_momentum_operator(g, Quasimomentum(0.0, 0.0), GridSpec(48)));
  const auto r = spectrum(g, Quasimomentum(0.0, 0.0));
  ASSERT_EQ(ev.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(ev[i].side, Side::below);
    EXPECT_NEAR(ev[i].z, r.eigenvalues[i / 2].z, 1e-10);
  }
}

TEST(MomentumGrid, MixedRegionCountsAtSmallGrid) {
  // A C11 point whose above-band state sits beyond the n = 64 margin.
  const CouplingPair g(-48.69, 5.46);
  ASSERT_EQ(classify(g).name(), "C11");
  const auto op = build_momentum_operator(g, Quasimomentum(0.0, 0.0), GridSpec(64));
  const auto ev = discrete_eigenvalues(op);
  int below = 0, above = 0;
  for (const auto& e : ev) (e.side == Side::below ? below : above)++;
  EXPECT_EQ(below, 2);
  EXPECT_EQ(above, 2);
}

TEST(MomentumGrid, LanczosMatchesDense) {
  const CouplingPair g(-8.0, -3.0);
  const auto op = build_momentum_operator(g, Quasimomentum(0.7, -1.2), GridSpec(40));
  const double margin = default_margin(op);
  const auto dense = discrete_eigenvalues(op, margin);
  const auto lanczos = discrete_eigenvalues_lanczos(op, margin);
  ASSERT_EQ(dense.size(), lanczos.size());
  for (std::size_t i = 0; i < dense.size(); ++i) EXPECT_NEAR(dense[i].z, lanczos[i].z, 1e-9);
}

TEST(MomentumGrid, RejectsDegenerateBand) {
  EXPECT_THROW(build_momentum_operator(CouplingPair(1.0, 1.0), Quasimomentum(pi, pi), GridSpec(16)),
               DegenerateBandError);
  const auto op = build_momentum_operator(CouplingPair(1.0, 1.0), Quasimomentum(0.0, 0.0), GridSpec(16));
  EXPECT_THROW(discrete_eigenvalues(op, 0.0), std::invalid_argument);
}

// Bottom of the band minus the lowest eigenvalue is smallest
// at K1 = 0 and symmetric in K1.
TEST(MomentumGrid, GapGrowsAwayFromZero) {
  const CouplingPair g(-30.0, -20.0);
  for (double k2 : {0.0, 1.0}) {
    auto gap = [&](double k1) {
      const auto op = build_momentum_operator(g, Quasimomentum(k1, k2), GridSpec(32));
      const auto ev = discrete_eigenvalues(op);
      return op.band.min - ev.front().z;
    };
    const double g0 = gap(0.0), g1 = gap(0.8), g2 = gap(1.6), gm = gap(-0.8);
    EXPECT_LT(g0, g1);
    EXPECT_LT(g1, g2);
    EXPECT_NEAR(g1, gm, 1e-10);
  }
}

TEST(PositionBox, FreeSpectrumInsideBand) {
  const auto op = build_position_operator(CouplingPair(0.0, 0.0), Quasimomentum(0.0, 0.0), 40);
  const auto s = position_extreme_eigenvalues(op, 1e-3);
  EXPECT_TRUE(s.eigenvalues.empty());
  LanczosOptions opts;
  const auto lo = block_lanczos(
      op.dim(), [&op](const Eigen::MatrixXd& x, Eigen::MatrixXd& y) { op.apply(x, y); },
      [](double z) { return z < 0.1 || z > 7.9; }, opts);
  ASSERT_GT(lo.values.size(), 0);
  EXPECT_GT(lo.values.minCoeff(), 0.0);
  EXPECT_LT(lo.values.maxCoeff(), 8.0);
}

TEST(PositionBox, AgreesWithSolver) {
  const CouplingPair g(-20.0, 0.0);
  const Quasimomentum k(1.0, 0.5);
  const auto s = position_extreme_eigenvalues(build_position_operator(g, k, 20), 0.05);
  const auto r = spectrum(g, k);
  ASSERT_EQ(s.eigenvalues.size(), r.eigenvalues.size());
  for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) EXPECT_NEAR(s.eigenvalues[i].z, r.eigenvalues[i].z, 1e-9);
  EXPECT_LT(s.boundary_ratio, 1e-8);
}

TEST(PositionBox, PotentialShape) {
  const CouplingPair g(-4.0, 6.0);
  EXPECT_DOUBLE_EQ(position_potential(g, 1, 0), -2.0);
  EXPECT_DOUBLE_EQ(position_potential(g, 0, -1), -2.0);
  EXPECT_DOUBLE_EQ(position_potential(g, 2, 0), 3.0);
  EXPECT_DOUBLE_EQ(position_potential(g, -1, 1), 6.0);
  EXPECT_DOUBLE_EQ(position_potential(g, 2, 1), 0.0);
  EXPECT_THROW(build_position_operator(g, Quasimomentum(0.0, 0.0), 5), std::invalid_argument);
}

TEST(Lanczos, DiagonalOperator) {
  const Eigen::Index n = 300;
  Eigen::VectorXd d = Eigen::VectorXd::LinSpaced(n, 0.0, 1.0);
  d(0) = -2.0;
  d(n - 1) = 3.0;
  const auto r = block_lanczos(
      n, [&d](const Eigen::MatrixXd& x, Eigen::MatrixXd& y) { y = d.asDiagonal() * x; },
      [](double z) { return z < -1.0 || z > 2.0; });
  ASSERT_EQ(r.values.size(), 2);
  EXPECT_NEAR(r.values(0), -2.0, 1e-12);
  EXPECT_NEAR(r.values(1), 3.0, 1e-12);
  EXPECT_TRUE(r.converged);
}
