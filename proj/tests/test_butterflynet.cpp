#include <gtest/gtest.h>

#include "bfnet/butterfly_reference.hpp"
#include "bfnet/butterflynet.hpp"
#include "support.hpp"

using namespace bfnet;
using bfnet::testing::random_grid;
using bfnet::testing::rel_l2;

namespace {

ButterflyNet2D fourier_net(int L, int r, int n, Direction d) {
  auto net = build(NetConfig::for_sizes(L, r, n, n, n, n, d,
                                        d == Direction::forward ? InputKind::real : InputKind::complex));
  init_fourier(net);
  return net;
}

}  // namespace

TEST(Morton, RoundTripAndChildContiguity) {
  for (int code = 0; code < 64; ++code) {
    const auto [x, y] = morton_decode(code, 3);
    EXPECT_EQ(morton_encode(x, y, 3), code);
  }
  // children of box (1, 2) at 2 bits are 4 * parent + q
  const int parent = morton_encode(1, 2, 2);
  for (int q = 0; q < 4; ++q) EXPECT_EQ(morton_encode(2 + q / 2, 4 + q % 2, 3), 4 * parent + q);
}

TEST(ChannelIndex, FlattenRoundTrip) {
  for (int c = 0; c < 16 * 9; ++c) EXPECT_EQ(ChannelIndex::unflatten(c, 1, 3).flatten(1, 3), c);
  EXPECT_EQ((ChannelIndex{0, 0, 1, 2}.flatten(0, 3)), 5);
}

TEST(Build, LayerShapes) {
  const auto net = build(NetConfig::for_sizes(4, 2, 16, 16, 16, 16, Direction::forward, InputKind::real));
  ASSERT_EQ(net.layers.size(), 5u);
  EXPECT_EQ(net.layers[0].groups, 1);
  EXPECT_EQ(net.layers[0].kernel_h, 2);
  EXPECT_EQ(net.layers[0].out_per_group, 16);
  for (int l = 1; l < 4; ++l) {
    EXPECT_EQ(net.layers[static_cast<std::size_t>(l)].groups, 1 << (2 * l));
    EXPECT_EQ(net.layers[static_cast<std::size_t>(l)].stride_h, 2);
  }
  EXPECT_EQ(net.layers[4].groups, 256);
  EXPECT_EQ(net.layers[4].out_per_group, 1);
}

TEST(Build, ChannelCountLaw) {
  // complex channels after layer l < L: 4^(l+1) r^2; after layer L: 4^L m_x m_y
  const auto net = build(NetConfig::for_sizes(5, 3, 32, 32, 64, 64, Direction::forward, InputKind::real));
  const auto c = channel_counts(net);
  ASSERT_EQ(c.size(), 7u);
  EXPECT_EQ(c[0], 1);
  for (int l = 0; l < 5; ++l) EXPECT_EQ(c[static_cast<std::size_t>(l) + 1], (1L << (2 * (l + 1))) * 9);
  EXPECT_EQ(c[6], 1024L * 4);
}

TEST(Build, RejectsBadConfigs) {
  EXPECT_THROW(build(NetConfig{1, 2}), InvalidArgument);
  EXPECT_THROW(build(NetConfig{3, 0}), InvalidArgument);
  EXPECT_THROW(NetConfig::for_sizes(4, 2, 12, 12, 16, 16, Direction::forward, InputKind::real), InvalidArgument);
}

TEST(Forward, OutputShapeAndInputCheck) {
  const auto net = fourier_net(3, 2, 8, Direction::forward);
  const auto y = forward(net, encode_grid(random_grid(8, 8, 1)));
  EXPECT_EQ(y.channels, 1);
  EXPECT_EQ(y.height, 8);
  EXPECT_EQ(y.width, 8);
  EXPECT_THROW(forward(net, encode_grid(random_grid(16, 8, 1))), InvalidArgument);
}

TEST(Forward, FourierInitMatchesReference) {
  struct Case { int L, r, n; };
  for (const Case c : {Case{4, 2, 16}, Case{5, 4, 32}, Case{3, 3, 16}})
    for (Direction d : {Direction::forward, Direction::inverse}) {
      const auto net = fourier_net(c.L, c.r, c.n, d);
      for (std::uint64_t s = 0; s < 5; ++s) {
        const auto x = random_grid(c.n, c.n, 100 + s, d == Direction::forward);
        EXPECT_LT(rel_l2(apply(net, x), butterfly_forward(x, c.L, c.r, d)), 1e-12)
            << "L=" << c.L << " r=" << c.r << " " << to_string(d);
      }
    }
}

TEST(Forward, RectangularFourierMatchesReference) {
  auto net = build(NetConfig::for_sizes(3, 3, 8, 16, 16, 32, Direction::forward, InputKind::real));
  init_fourier(net);
  const auto x = random_grid(8, 16, 7, true);
  EXPECT_LT(rel_l2(apply(net, x), butterfly_forward(x, 3, 3, Direction::forward, 16, 32)), 1e-12);
}

TEST(Forward, PositiveHomogeneity) {
  auto net = build(NetConfig::for_sizes(3, 2, 8, 8, 8, 8, Direction::forward, InputKind::real));
  init_random(net, InitScheme::kaiming_normal, 3);
  const auto x = random_grid(8, 8, 4);
  ComplexGrid x3 = x;
  for (auto& v : x3.values) v *= 3.0;
  const auto y = apply(net, x), y3 = apply(net, x3);
  for (std::size_t k = 0; k < y.values.size(); ++k)
    EXPECT_NEAR(std::abs(y3.values[k] - 3.0 * y.values[k]), 0.0, 1e-11 * (1.0 + std::abs(y.values[k])));
}

TEST(Forward, BatchMatchesSingle) {
  auto net = build(NetConfig::for_sizes(3, 2, 8, 8, 8, 8, Direction::forward, InputKind::real));
  init_random(net, InitScheme::kaiming_uniform, 5);
  std::vector<EncodedTensor> batch{encode_grid(random_grid(8, 8, 1)), encode_grid(random_grid(8, 8, 2))};
  const auto out = forward(net, batch);
  for (std::size_t b = 0; b < 2; ++b) EXPECT_EQ(out[b].data, forward(net, batch[b]).data);
}

TEST(Materialize, ColumnsReproduceForward) {
  const auto net = fourier_net(3, 3, 8, Direction::forward);
  const auto m = materialize_matrix(net);
  ASSERT_EQ(m.rows, 64);
  ASSERT_EQ(m.cols, 64);
  const auto x = random_grid(8, 8, 9);
  EXPECT_LT(relative_l2(m.multiply(x.values), apply(net, x).values), 1e-12);
  const auto ref = butterfly_matrix(net.config.geometry(), 3);
  EXPECT_LT(relative_l2(m.data, ref.data), 1e-12);
}

TEST(Materialize, DensePathWithBiases) {
  auto net = fourier_net(3, 2, 8, Direction::forward);
  const auto sparse = materialize_matrix(net);
  net.layers[1].bias[0] = 1e-300;  // forces the dense path without changing values
  const auto dense = materialize_matrix(net);
  EXPECT_LT(relative_l2(dense.data, sparse.data), 1e-14);
}

TEST(InitRandom, BoundsAndDeterminism) {
  const auto cfg = NetConfig::for_sizes(3, 2, 8, 8, 8, 8, Direction::forward, InputKind::real);
  auto a = build(cfg), b = build(cfg), c = build(cfg);
  init_random(a, InitScheme::kaiming_uniform, 42);
  init_random(b, InitScheme::kaiming_uniform, 42);
  init_random(c, InitScheme::kaiming_uniform, 43);
  EXPECT_EQ(a.layers[1].weight, b.layers[1].weight);
  EXPECT_NE(a.layers[1].weight, c.layers[1].weight);
  for (const auto& layer : a.layers) {
    const double bound = std::sqrt(6.0 / layer.fan_in());
    for (double w : layer.weight) EXPECT_LE(std::abs(w), bound);
    for (double v : layer.bias) EXPECT_EQ(v, 0.0);
  }
}

TEST(InitRandom, KaimingNormalVariance) {
  auto net = build(NetConfig::for_sizes(4, 2, 16, 16, 16, 16, Direction::forward, InputKind::real));
  init_random(net, InitScheme::kaiming_normal, 1);
  const auto& layer = net.layers[3];
  double s2 = 0.0;
  for (double w : layer.weight) s2 += w * w;
  const double var = s2 / static_cast<double>(layer.weight.size());
  EXPECT_NEAR(var / (2.0 / layer.fan_in()), 1.0, 0.05);
}

TEST(InitRandom, OrthogonalBlocks) {
  auto net = build(NetConfig::for_sizes(3, 1, 8, 8, 8, 8, Direction::forward, InputKind::real));
  init_random(net, InitScheme::orthogonal, 2);
  // recursion layer: out_real 16 = fan_in 16, so each group block is orthogonal
  const auto& layer = net.layers[1];
  for (int g = 0; g < layer.groups; ++g) {
    const auto w = detail::group_weight(layer, g);
    const Eigen::MatrixXd gram = w.transpose() * w;
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).norm(), 1e-12);
  }
  EXPECT_THROW(parse_init_scheme("xavier"), InvalidArgument);
}

TEST(ParamCount, ClosedFormsPerLayer) {
  for (int L = 3; L <= 6; ++L)
    for (int r : {2, 4, 6}) {
      const int n = 1 << L;
      const auto rep = param_count(NetConfig::for_sizes(L, r, n, n, n, n, Direction::forward, InputKind::real));
      for (int l = 0; l < L; ++l) {
        EXPECT_EQ(rep.layers[static_cast<std::size_t>(l)].weights, rep.layers[static_cast<std::size_t>(l)].formula_weights);
        EXPECT_EQ(rep.layers[static_cast<std::size_t>(l)].biases, rep.layers[static_cast<std::size_t>(l)].formula_biases);
      }
      EXPECT_EQ(rep.recursion_weight_sum, rep.recursion_weight_closed_form);
      EXPECT_EQ(rep.recursion_bias_sum, rep.recursion_bias_closed_form);
    }
}

TEST(ParamCount, KnownValues) {
  const auto small = param_count(NetConfig::for_sizes(3, 2, 8, 8, 8, 8, Direction::forward, InputKind::real));
  EXPECT_EQ(small.layers[0].weights, 1024);  // 64 r^2 omega^2 with omega = 2
  EXPECT_EQ(small.layers[0].biases, 64);     // 16 r^2
  EXPECT_EQ(small.layers[1].weights, 16384);  // 4^5 r^4
  const auto big = param_count(NetConfig::for_sizes(6, 6, 64, 64, 64, 64, Direction::forward, InputKind::real));
  EXPECT_EQ(big.recursion_weight_closed_form, 452542464L);
  EXPECT_EQ(big.recursion_weight_sum, 452542464L);
}

TEST(ParamCount, AllocatedArraysMatchShapes) {
  const auto cfg = NetConfig::for_sizes(4, 2, 16, 16, 16, 16, Direction::forward, InputKind::real);
  EXPECT_EQ(param_count(build(cfg)).total, param_count(cfg).total);
}

TEST(ParamCount, DenseRatioGrowsLinearly) {
  double prev = 0.0;
  for (int L = 3; L <= 6; ++L) {
    const int n = 1 << L;
    const double ratio =
        param_count(NetConfig::for_sizes(L, 2, n, n, n, n, Direction::forward, InputKind::real)).dense_ratio();
    if (prev > 0.0) {
      EXPECT_GT(ratio / prev, 1.0);
      EXPECT_LT(ratio / prev, 4.0);
    }
    prev = ratio;
  }
}
