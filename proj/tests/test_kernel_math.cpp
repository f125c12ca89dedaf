#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bfnet/kernel_math.hpp"

using namespace bfnet;

TEST(Chebyshev, PointsDecreasingOnHalfInterval) {
  const auto g = cheb_points(4);
  ASSERT_EQ(g.points.size(), 4u);
  // cos((2i+1) pi / 8) / 2, high-precision values
  EXPECT_NEAR(g[0], 0.461939766255643378, 1e-15);
  EXPECT_NEAR(g[1], 0.191341716182544886, 1e-15);
  EXPECT_NEAR(g[2], -0.191341716182544886, 1e-15);
  EXPECT_NEAR(g[3], -0.461939766255643378, 1e-15);
  for (int i = 1; i < 4; ++i) EXPECT_LT(g[i], g[i - 1]);
}

TEST(Chebyshev, RejectsNonPositiveOrder) {
  EXPECT_THROW(cheb_points(0), InvalidArgument);
  EXPECT_THROW(cheb_points(-3), InvalidArgument);
}

TEST(Lagrange, CardinalAtNodes) {
  for (int r = 1; r <= 8; ++r) {
    const auto g = cheb_points(r);
    for (int k = 0; k < r; ++k)
      for (int j = 0; j < r; ++j) EXPECT_NEAR(lagrange_eval(g, k, g[j]), k == j ? 1.0 : 0.0, 1e-12);
  }
}

TEST(Lagrange, SymmetricPairAtOrigin) {
  const auto g = cheb_points(2);
  EXPECT_DOUBLE_EQ(lagrange_eval(g, 0, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(lagrange2d_eval(g, 0, 0, 0.0, 0.0), 0.25);
}

TEST(Lagrange, TensorCardinal) {
  const auto g = cheb_points(4);
  EXPECT_NEAR(lagrange2d_eval(g, 1, 1, g[1], g[1]), 1.0, 1e-14);
  EXPECT_NEAR(lagrange2d_eval(g, 0, 1, g[1], g[1]), 0.0, 1e-14);
}

TEST(Lagrange, PartitionOfUnity) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int r = 1; r <= 8; ++r) {
    const auto g = cheb_points(r);
    for (int s = 0; s < 200; ++s) {
      const double x = u(rng);
      double sum = 0.0;
      for (double v : lagrange_all(g, x)) sum += v;
      EXPECT_NEAR(sum, 1.0, 1e-12) << "r=" << r << " x=" << x;
    }
  }
}

TEST(Lagrange, ReproducesPolynomialsBelowOrder) {
  const auto g = cheb_points(5);
  auto p = [](double x) { return 3.0 - x + 2.0 * x * x * x - x * x * x * x; };
  for (double x : {-0.5, -0.1, 0.2, 0.45}) {
    double s = 0.0;
    for (int k = 0; k < 5; ++k) s += p(g[k]) * lagrange_eval(g, k, x);
    EXPECT_NEAR(s, p(x), 1e-13);
  }
}

TEST(Lagrange, IndexOutOfRange) {
  const auto g = cheb_points(3);
  EXPECT_THROW(lagrange_eval(g, 3, 0.0), InvalidArgument);
  EXPECT_THROW(lagrange_eval(g, -1, 0.0), InvalidArgument);
}

TEST(Domain, FrequencyRootQuarter) {
  const auto b = subdomain({0, 0, 0, Side::A}, 64.0, 6);
  EXPECT_DOUBLE_EQ(b.lo[0], 0.0);
  EXPECT_DOUBLE_EQ(b.side[0], 32.0);
  EXPECT_DOUBLE_EQ(b.side[1], 32.0);
}

TEST(Domain, FinestTimeBox) {
  const auto b = subdomain({6, 0, 0, Side::B}, 64.0, 6);
  EXPECT_DOUBLE_EQ(b.side[0], 1.0 / 32);
  EXPECT_DOUBLE_EQ(b.side[1], 1.0 / 32);
  const auto c = subdomain({6, 5, 3, Side::B}, 64.0, 6);
  EXPECT_DOUBLE_EQ(c.lo[0], 5.0 / 32);
  EXPECT_DOUBLE_EQ(c.lo[1], 3.0 / 32);
}

TEST(Domain, TimeRootAtLevelZero) {
  const auto b = subdomain({0, 0, 0, Side::B}, 64.0, 6);
  EXPECT_DOUBLE_EQ(b.lo[0], 0.0);
  EXPECT_DOUBLE_EQ(b.side[0], 1.0);
  EXPECT_DOUBLE_EQ(b.side[1], 1.0);
}

TEST(Domain, OutOfRangeIndex) {
  EXPECT_THROW(subdomain({0, 2, 0, Side::A}, 64.0, 6), InvalidArgument);
  EXPECT_THROW(subdomain({7, 0, 0, Side::A}, 64.0, 6), InvalidArgument);
  EXPECT_THROW(subdomain({2, 0, 2, Side::B}, 64.0, 6), InvalidArgument);
}

TEST(Domain, ChildrenOfRootQuarter) {
  const auto ch = children({0, 0, 0, Side::A}, 4);
  const DomainIndex expected[4] = {{1, 0, 0, Side::A}, {1, 0, 1, Side::A}, {1, 1, 0, Side::A}, {1, 1, 1, Side::A}};
  for (int k = 0; k < 4; ++k) EXPECT_EQ(ch[static_cast<std::size_t>(k)], expected[k]);
}

TEST(Domain, ParentHalvesIndices) {
  EXPECT_EQ(parent({3, 3, 1, Side::B}, 6), (DomainIndex{2, 1, 0, Side::B}));
  EXPECT_EQ(parent({2, 5, 6, Side::A}, 6), (DomainIndex{1, 2, 3, Side::A}));
  EXPECT_THROW(parent({0, 0, 0, Side::A}, 6), InvalidArgument);
  EXPECT_THROW(parent({1, 0, 0, Side::B}, 6), InvalidArgument);
}

// Powers of two keep every box corner exact in binary floating point.
TEST(Domain, ChildrenTileParentExactly) {
  const int L = 6;
  for (Side side : {Side::A, Side::B}) {
    const int first = side == Side::A ? 0 : 1;
    for (int level = first; level < L; ++level) {
      const int n = boxes_per_axis(side, level);
      for (int ix = 0; ix < n; ++ix)
        for (int iy = 0; iy < n; ++iy) {
          const DomainIndex idx{level, ix, iy, side};
          const auto pb = subdomain(idx, 64.0, L);
          double area = 0.0;
          for (const auto& c : children(idx, L)) {
            EXPECT_EQ(parent(c, L), idx);
            const auto cb = subdomain(c, 64.0, L);
            area += cb.side[0] * cb.side[1];
            EXPECT_EQ(cb.side[0] * 2, pb.side[0]);
            const double ox = cb.lo[0] - pb.lo[0], oy = cb.lo[1] - pb.lo[1];
            EXPECT_TRUE(ox == 0.0 || ox == cb.side[0]);
            EXPECT_TRUE(oy == 0.0 || oy == cb.side[1]);
          }
          EXPECT_EQ(area, pb.side[0] * pb.side[1]);
        }
    }
  }
}

TEST(Domain, EveryPointInExactlyOneLeaf) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < 200; ++s) {
    const double x = u(rng), y = u(rng);
    int hits = 0;
    for (int ix = 0; ix < 8; ++ix)
      for (int iy = 0; iy < 8; ++iy) hits += subdomain({4, ix, iy, Side::B}, 32.0, 4).contains(x, y);
    EXPECT_EQ(hits, 1);
  }
}

TEST(Domain, ReferenceFrameRoundTrip) {
  const DomainBox b{{0.25, 0.5}, {0.125, 0.25}};
  const auto z = b.to_reference(0.3, 0.6);
  const auto p = b.from_reference(z[0], z[1]);
  EXPECT_NEAR(p[0], 0.3, 1e-15);
  EXPECT_NEAR(p[1], 0.6, 1e-15);
  const auto lo = b.to_reference(b.lo[0], b.lo[1]);
  EXPECT_DOUBLE_EQ(lo[0], -0.5);
  EXPECT_DOUBLE_EQ(lo[1], -0.5);
}

TEST(LowRankBound, UnitBoxesOrderSix) {
  // gamma = e pi / 36 and gamma^36 / (1 - gamma), evaluated at 30 digits
  EXPECT_NEAR(lowrank_error_bound(1.0, 1.0, 6), 4.1947347357049211742e-23, 1e-35);
}

TEST(LowRankBound, VanishesWithSmallBoxes) {
  EXPECT_LT(lowrank_error_bound(1e-3, 1e-3, 4), 1e-90);
  EXPECT_EQ(lowrank_error_bound(0.0, 1.0, 4), 0.0);
}

TEST(LowRankBound, InapplicableWhenGammaAtLeastOne) {
  EXPECT_THROW(lowrank_error_bound(2.0, 1.0, 2), BoundInapplicable);
}

TEST(LowRankBound, MonotoneInProductAndOrder) {
  double prev = 0.0;
  for (double p : {0.1, 0.5, 1.0, 2.0, 3.0}) {
    const double b = lowrank_error_bound(p, 1.0, 6);
    EXPECT_GT(b, prev);
    prev = b;
  }
  EXPECT_GT(lowrank_error_bound(1.0, 1.0, 4), lowrank_error_bound(1.0, 1.0, 5));
  EXPECT_GT(lowrank_error_bound(1.0, 1.0, 5), lowrank_error_bound(1.0, 1.0, 6));
}
