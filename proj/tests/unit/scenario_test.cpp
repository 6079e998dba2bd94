#include <gtest/gtest.h>

#include <cmath>

#include "mimosim/scenario.hpp"
#include "test_util.hpp"

using namespace mimosim;

namespace {

ScenarioConfig cf(int M, int K) {
  ScenarioConfig c = ScenarioConfig::cell_free(M, K);
  return c;
}

}  // namespace

TEST(Placement, CellFreePointsInsideSquare) {
  ScenarioConfig c = cf(64, 16);
  RandomStream rng(42);
  const Geometry g = place_cf_topology(c, rng);
  ASSERT_EQ(g.transmitters.size(), 64u);
  ASSERT_EQ(g.users.size(), 16u);
  for (const auto& pts : {g.transmitters, g.users}) {
    for (const auto& p : pts) {
      EXPECT_GE(p.x, 0.0);
      EXPECT_LE(p.x, 1000.0);
      EXPECT_GE(p.y, 0.0);
      EXPECT_LE(p.y, 1000.0);
    }
  }
}

TEST(Placement, SingleApSingleUser) {
  RandomStream rng(1);
  const Geometry g = place_cf_topology(cf(1, 1), rng);
  EXPECT_EQ(g.transmitters.size(), 1u);
  EXPECT_EQ(g.users.size(), 1u);
}

TEST(Placement, FixedSeedIsReproducible) {
  RandomStream a(42), b(42);
  const Geometry ga = place_cf_topology(cf(8, 4), a);
  const Geometry gb = place_cf_topology(cf(8, 4), b);
  for (std::size_t i = 0; i < ga.users.size(); ++i) {
    EXPECT_EQ(ga.users[i].x, gb.users[i].x);
    EXPECT_EQ(ga.users[i].y, gb.users[i].y);
  }
  for (std::size_t i = 0; i < ga.transmitters.size(); ++i) EXPECT_EQ(ga.transmitters[i].x, gb.transmitters[i].x);
}

TEST(Placement, MultiCellFourCells) {
  ScenarioConfig c = ScenarioConfig::multi_cell(4, 16, 4, 1);
  c.cell_radius_m = 500.0;
  RandomStream rng(3);
  const Geometry g = place_mc_topology(c, rng);
  ASSERT_EQ(g.transmitters.size(), 4u);
  ASSERT_EQ(g.users.size(), 16u);
  for (int cell = 0; cell < 4; ++cell)
    EXPECT_EQ(std::count(g.user_cell.begin(), g.user_cell.end(), cell), 4);
}

TEST(Placement, SingleCellAtOrigin) {
  ScenarioConfig c = ScenarioConfig::multi_cell(1, 4, 2);
  RandomStream rng(3);
  const Geometry g = place_mc_topology(c, rng);
  ASSERT_EQ(g.transmitters.size(), 1u);
  EXPECT_EQ(g.transmitters[0].x, 0.0);
  EXPECT_EQ(g.transmitters[0].y, 0.0);
}

TEST(Placement, UsersWithinOwnCellDistanceBounds) {
  ScenarioConfig c = ScenarioConfig::multi_cell(7, 8, 4);
  RandomStream rng(11);
  int placed = 0;
  while (placed < 10000) {
    const Geometry g = place_mc_topology(c, rng);
    for (std::size_t u = 0; u < g.users.size(); ++u) {
      const double d = distance(g.users[u], g.transmitters[static_cast<std::size_t>(g.user_cell[u])]);
      ASSERT_GE(d, c.d_min_m);
      ASSERT_LE(d, c.cell_radius_m);
      ++placed;
    }
  }
}

TEST(Placement, HexCentersAreNeighbours) {
  // The first ring sits at distance sqrt(3) R from the origin and cells do
  // not overlap.
  const double R = 100.0;
  for (int i = 1; i <= 6; ++i) {
    const Point p = hex_cell_center(i, R);
    EXPECT_NEAR(std::hypot(p.x, p.y), std::sqrt(3.0) * R, 1e-9);
  }
  for (int i = 0; i < 19; ++i)
    for (int j = 0; j < i; ++j)
      EXPECT_GT(distance(hex_cell_center(i, R), hex_cell_center(j, R)), std::sqrt(3.0) * R - 1e-9);
}

TEST(LargeScale, ReferenceDistanceIsUnity) {
  EXPECT_DOUBLE_EQ(path_gain(1.0, 1.0, 3.5, 0.0), 1.0);
  // Closer than d_min is clamped.
  EXPECT_DOUBLE_EQ(path_gain(0.2, 1.0, 3.5, 0.0), 1.0);
}

TEST(LargeScale, TenTimesReferenceDistance) {
  EXPECT_NEAR(path_gain(10.0, 1.0, 3.5, 0.0), std::pow(10.0, -3.5), 1e-18);
  EXPECT_NEAR(path_gain(350.0, 35.0, 3.5, 0.0), std::pow(10.0, -3.5), 1e-18);
}

TEST(LargeScale, ShadowingIsAdditiveInDb) {
  EXPECT_NEAR(path_gain(1.0, 1.0, 3.5, 10.0), 10.0, 1e-12);
}

TEST(LargeScale, IidModeIsAllOnes) {
  ScenarioConfig c = cf(16, 4);
  c.fading_mode = FadingMode::IidUnit;
  RandomStream rng(1);
  const Geometry g = place_topology(c, rng);
  const LinkGains gains = large_scale_coefficients(g, c, rng);
  EXPECT_TRUE(gains.block(0, 0).isOnes());
  EXPECT_EQ(gains.block(0, 0).rows(), 4);
  EXPECT_EQ(gains.block(0, 0).cols(), 16);
}

TEST(LargeScale, MultiCellBlocksMatchSiteGains) {
  ScenarioConfig c = ScenarioConfig::multi_cell(3, 8, 4, 2);
  c.shadowing_sigma_db = 0.0;
  RandomStream rng(1);
  const Geometry g = place_topology(c, rng);
  RandomStream sh(2);
  const LinkGains gains = large_scale_coefficients(g, c, sh);
  for (int rx = 0; rx < 3; ++rx) {
    for (int tx = 0; tx < 3; ++tx) {
      const RMatrix& b = gains.block(rx, tx);
      ASSERT_EQ(b.rows(), 4);
      ASSERT_EQ(b.cols(), 8);
      for (int u = 0; u < 2; ++u) {
        const double d = distance(g.users[static_cast<std::size_t>(rx * 2 + u)], g.transmitters[static_cast<std::size_t>(tx)]);
        const double expect = path_gain(d, c.d_min_m, c.path_loss_exponent, 0.0);
        EXPECT_NEAR(b(2 * u, 0), expect, 1e-15 * expect);
        EXPECT_NEAR(b(2 * u + 1, 7), expect, 1e-15 * expect);
      }
    }
  }
}

TEST(LargeScale, MeanDbNormalizationCentersServingLinks) {
  ScenarioConfig c = ScenarioConfig::multi_cell(4, 4, 2);
  RandomStream rng(8);
  const Geometry g = place_topology(c, rng);
  LinkGains gains = large_scale_coefficients(g, c, rng);
  const RMatrix cross_before = gains.block(0, 1);
  const double div = normalize_mean_db(gains);
  double sum_db = 0.0;
  long count = 0;
  for (int cell = 0; cell < 4; ++cell) {
    sum_db += (10.0 * gains.block(cell, cell).array().log10()).sum();
    count += gains.block(cell, cell).size();
  }
  EXPECT_NEAR(sum_db / count, 0.0, 1e-9);
  EXPECT_TRUE(gains.block(0, 1).isApprox(cross_before / div));
}

TEST(Channel, PerfectCsitHasNoError) {
  RandomStream rng(3);
  const ChannelBlock b = draw_channel(RMatrix::Ones(4, 16), 0.0, rng);
  EXPECT_EQ(b.H_tilde.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((b.H - b.H_hat).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Channel, SumResidualIsTiny) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RandomStream rng(seed);
    RandomStream brng(seed + 100);
    RMatrix beta(6, 9);
    for (Eigen::Index i = 0; i < beta.size(); ++i) beta(i) = brng.uniform(0.01, 5.0);
    const ChannelBlock b = draw_channel(beta, 0.3, rng);
    EXPECT_LT((b.H - b.H_hat - b.H_tilde).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Channel, ErrorVarianceMatches) {
  RandomStream rng(4);
  mimosim::testing::Stats s;
  for (int i = 0; i < 100000; ++i) {
    const ChannelBlock b = draw_channel(RMatrix::Ones(1, 1), 0.1, rng);
    s.add(std::norm(b.H_tilde(0, 0)));
  }
  EXPECT_NEAR(s.mean(), 0.1, 0.005);
  EXPECT_NEAR(s.mean(), 0.1, 3 * s.sem());
}

TEST(Channel, TrueChannelVarianceMatchesBeta) {
  RMatrix beta(2, 2);
  beta << 1.0, 0.25, 3.0, 0.04;
  RandomStream rng(5);
  mimosim::testing::Stats s[4];
  for (int i = 0; i < 100000; ++i) {
    const ChannelBlock b = draw_channel(beta, 0.2, rng);
    for (int e = 0; e < 4; ++e) s[e].add(std::norm(b.H(e)));
  }
  for (int e = 0; e < 4; ++e) EXPECT_NEAR(s[e].mean(), beta(e), 3 * s[e].sem()) << "entry " << e;
}

TEST(Channel, RejectsVarianceAboveOne) {
  RandomStream rng(1);
  EXPECT_THROW(draw_channel(RMatrix::Ones(2, 2), 1.0 + 1e-9, rng), std::invalid_argument);
  EXPECT_THROW(draw_channel(RMatrix::Ones(2, 2), -0.1, rng), std::invalid_argument);
  EXPECT_NO_THROW(draw_channel(RMatrix::Ones(2, 2), 1.0, rng));
}

TEST(Channel, DrawsArePureInSeed) {
  LinkGains gains(2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) gains.block(a, b) = RMatrix::Constant(3, 5, 0.5 + a + b);
  const ChannelRealization x = draw_channels(gains, 0.1, RandomStream(77));
  const ChannelRealization y = draw_channels(gains, 0.1, RandomStream(77));
  for (std::size_t i = 0; i < x.blocks.size(); ++i) EXPECT_EQ(x.blocks[i].H, y.blocks[i].H);
  EXPECT_NE(x.block(0, 1).H, x.block(1, 0).H);
}

TEST(GTilde, UnitBetaGivesReceiveDimTimesVariance) {
  const RVector g = g_tilde(RMatrix::Ones(4, 16), 0.01);
  ASSERT_EQ(g.size(), 16);
  for (Eigen::Index j = 0; j < g.size(); ++j) EXPECT_NEAR(g(j), 0.04, 1e-15);
}

TEST(GTilde, ZeroVarianceIsZero) {
  EXPECT_TRUE(g_tilde(RMatrix::Constant(3, 3, 2.0), 0.0).isZero(0.0));
  CsitErrorModel m;
  EXPECT_TRUE(m.g_tilde(RMatrix::Ones(2, 2)).isZero(0.0));
}

TEST(GTilde, WeightedColumn) {
  RMatrix beta(2, 1);
  beta << 1.0, 3.0;
  EXPECT_DOUBLE_EQ(g_tilde(beta, 0.5)(0), 2.0);
}

TEST(GTilde, MatchesEmpiricalErrorGram) {
  RMatrix beta(3, 2);
  beta << 1.0, 0.5, 2.0, 1.5, 0.25, 1.0;
  const double s = 0.2;
  const RVector expect = g_tilde(beta, s);
  RandomStream rng(6);
  mimosim::testing::Stats diag[2], off_re, off_im;
  for (int i = 0; i < 100000; ++i) {
    const ChannelBlock b = draw_channel(beta, s, rng);
    const CMatrix G = b.H_tilde.adjoint() * b.H_tilde;
    diag[0].add(G(0, 0).real());
    diag[1].add(G(1, 1).real());
    off_re.add(G(0, 1).real());
    off_im.add(G(0, 1).imag());
  }
  EXPECT_NEAR(diag[0].mean(), expect(0), 3 * diag[0].sem());
  EXPECT_NEAR(diag[1].mean(), expect(1), 3 * diag[1].sem());
  EXPECT_NEAR(off_re.mean(), 0.0, 3 * off_re.sem());
  EXPECT_NEAR(off_im.mean(), 0.0, 3 * off_im.sem());
}

TEST(ScenarioConfig, ValidationNamesField) {
  ScenarioConfig c = cf(4, 8);
  try {
    c.validate();
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("scenario.M"), std::string::npos);
  }
  ScenarioConfig m = ScenarioConfig::multi_cell(4, 16, 5, 2);
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m.N_r = 4;
  EXPECT_NO_THROW(m.validate());
  m.d_min_m = 600.0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  ScenarioConfig t = ScenarioConfig::multi_cell(4, 2, 4);
  EXPECT_THROW(t.validate(), std::invalid_argument);
}
