#include <gtest/gtest.h>

#include "bfnet/training.hpp"
#include "support.hpp"

using namespace bfnet;
using bfnet::testing::random_grid;

namespace {

NetConfig small_config(Direction d = Direction::forward) {
  return NetConfig::for_sizes(3, 2, 8, 8, 8, 8, d, d == Direction::forward ? InputKind::real : InputKind::complex);
}

}  // namespace

TEST(Loss, ZeroForExactPrediction) {
  const auto t = random_grid(4, 4, 1);
  EXPECT_EQ(loss_rel_l2({t}, {t}), 0.0);
}

TEST(Loss, KnownValues) {
  ComplexGrid t(1, 2), p(1, 2);
  t(0, 0) = 3.0;
  t(0, 1) = {0.0, 4.0};  // norm 5
  p(0, 0) = 3.0;
  p(0, 1) = {1.0, 4.0};  // error norm 1
  EXPECT_DOUBLE_EQ(loss_rel_l2({p}, {t}), 0.2);
  EXPECT_DOUBLE_EQ(loss_rel_l2({p, t}, {t, t}), 0.2);  // summed over the batch
  EXPECT_DOUBLE_EQ(loss_rel_l2({ComplexGrid(1, 2)}, {t}), 1.0);
}

TEST(Loss, RejectsZeroTargetAndMismatch) {
  EXPECT_THROW(loss_rel_l2({ComplexGrid(2, 2)}, {ComplexGrid(2, 2)}), InvalidArgument);
  EXPECT_THROW(loss_rel_l2({ComplexGrid(2, 2)}, {ComplexGrid(2, 3)}), InvalidArgument);
  EXPECT_THROW(loss_rel_l2({}, {ComplexGrid(2, 2)}), InvalidArgument);
}

TEST(Loss, GradientMatchesFiniteDifferences) {
  const auto t = random_grid(3, 3, 2);
  EncodedTensor p = encode_grid(random_grid(3, 3, 3));
  const auto lg = loss_rel_l2_grad({p}, {t});
  const double h = 1e-6;
  for (std::size_t k = 0; k < p.data.size(); ++k) {
    EncodedTensor a = p, b = p;
    a.data[k] += h;
    b.data[k] -= h;
    const double fd = (loss_rel_l2({decode_grid(a)}, {t}) - loss_rel_l2({decode_grid(b)}, {t})) / (2 * h);
    EXPECT_NEAR(lg.grad[0].data[k], fd, 1e-8);
  }
}

TEST(Backward, NeedsTrace) {
  auto net = build(small_config());
  ForwardTrace empty;
  GradientBuffers g;
  EXPECT_THROW(backward(net, empty, {}, g), InvalidState);
}

TEST(Backward, InputGradientMatchesFiniteDifferences) {
  auto net = build(small_config());
  init_random(net, InitScheme::kaiming_normal, 4);
  perturb(net, 0.05, 5);
  const auto x = random_grid(8, 8, 6, true);
  const auto t = dft2d_exact(x, 8, 8);
  ASSERT_EQ(push_from_kinks(net, {encode_grid(x)}, 1e-3), 0);
  ForwardTrace trace;
  const auto lg = loss_rel_l2_grad(forward_traced(net, {encode_grid(x)}, trace), {t});
  GradientBuffers g;
  std::vector<EncodedTensor> dx;
  backward(net, trace, lg.grad, g, &dx);
  ASSERT_EQ(dx.size(), 1u);
  EncodedTensor e = encode_grid(x);
  const double h = 1e-6;
  for (std::size_t k = 0; k < e.data.size(); k += 7) {
    EncodedTensor a = e, b = e;
    a.data[k] += h;
    b.data[k] -= h;
    const double fd = (loss_rel_l2({decode_grid(forward(net, a))}, {t}) -
                       loss_rel_l2({decode_grid(forward(net, b))}, {t})) / (2 * h);
    EXPECT_NEAR(dx[0].data[k], fd, 1e-7 * std::max(1.0, std::abs(fd)));
  }
}

TEST(Backward, ParameterGradientAtJitteredInit) {
  for (Direction d : {Direction::forward, Direction::inverse}) {
    auto net = build(small_config(d));
    init_fourier(net);
    perturb(net, 1e-2, 7);
    std::mt19937_64 rng(8);
    const auto xs = random_inputs(net.config, 3, rng);
    std::vector<ComplexGrid> ts;
    std::vector<EncodedTensor> enc;
    for (const auto& x : xs) ts.push_back(exact_target(net.config, x)), enc.push_back(encode_grid(x));
    EXPECT_EQ(push_from_kinks(net, enc, 1e-4), 0);
    const auto res = gradient_check(net, xs, ts, 200, 1e-5, 9);
    EXPECT_LE(res.max_rel_error, 1e-5) << to_string(d) << " abs " << res.max_abs_error;
  }
}

TEST(Backward, AccumulatesAcrossCalls) {
  auto net = build(small_config());
  init_random(net, InitScheme::kaiming_uniform, 1);
  const auto x = random_grid(8, 8, 2, true);
  ForwardTrace trace;
  const auto lg = loss_rel_l2_grad(forward_traced(net, {encode_grid(x)}, trace), {dft2d_exact(x, 8, 8)});
  GradientBuffers once = GradientBuffers::zeros_like(net), twice = GradientBuffers::zeros_like(net);
  backward(net, trace, lg.grad, once);
  backward(net, trace, lg.grad, twice);
  backward(net, trace, lg.grad, twice);
  for (std::size_t l = 0; l < net.layers.size(); ++l)
    for (std::size_t k = 0; k < once.weight[l].size(); ++k)
      EXPECT_DOUBLE_EQ(twice.weight[l][k], 2.0 * once.weight[l][k]);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  auto net = build(small_config());
  auto adam = make_adam(net, 0.01);
  auto g = GradientBuffers::zeros_like(net);
  g.weight[1][0] = 3.0;
  g.weight[1][1] = -1e-3;
  adam_step(adam, net, g);
  // bias-corrected m/sqrt(v) = sign(g) on the first step
  EXPECT_NEAR(net.layers[1].weight[0], -0.01, 1e-10);
  EXPECT_NEAR(net.layers[1].weight[1], 0.01 * 1e-3 / (1e-3 + 1e-8), 1e-12);
  EXPECT_EQ(net.layers[1].weight[2], 0.0);
}

TEST(Adam, SecondStepClosedForm) {
  auto net = build(small_config());
  auto adam = make_adam(net, 0.1);
  auto g = GradientBuffers::zeros_like(net);
  g.bias[0][0] = 1.0;
  adam_step(adam, net, g);
  g.bias[0][0] = -1.0;
  adam_step(adam, net, g);
  const double m = (0.9 * 0.1 - 0.1) / (1 - 0.81);
  const double v = (0.999 * 0.001 + 0.001) / (1 - 0.999 * 0.999);
  EXPECT_NEAR(net.layers[0].bias[0], -0.1 / (1 + 1e-8) - 0.1 * m / (std::sqrt(v) + 1e-8), 1e-15);
}

TEST(Adam, RejectsNonPositiveRate) { EXPECT_THROW(make_adam(build(small_config()), 0.0), InvalidArgument); }

TEST(Plateau, ReducesAfterPatience) {
  PlateauScheduler s{0.5, 3};
  double lr = 1.0;
  EXPECT_FALSE(s.observe(1.0, lr));
  EXPECT_FALSE(s.observe(1.0, lr));  // equal is not an improvement
  EXPECT_FALSE(s.observe(2.0, lr));
  EXPECT_TRUE(s.observe(1.5, lr));
  EXPECT_DOUBLE_EQ(lr, 0.5);
  EXPECT_FALSE(s.observe(0.9, lr));  // improvement resets the counter
  EXPECT_DOUBLE_EQ(lr, 0.5);
}

TEST(Plateau, DefaultFactorAndPatience) {
  PlateauScheduler s;
  double lr = 1e-3;
  s.observe(1.0, lr);
  for (int k = 0; k < 99; ++k) EXPECT_FALSE(s.observe(1.0, lr));
  EXPECT_TRUE(s.observe(1.0, lr));
  EXPECT_DOUBLE_EQ(lr, 0.98e-3);
}

TEST(Train, ZeroEpochsLeavesNetUntouched) {
  auto net = build(small_config());
  init_fourier(net);
  const auto before = net.layers[1].weight;
  TrainOptions opt;
  opt.epochs = 0;
  EXPECT_TRUE(train_transform(net, opt).empty());
  EXPECT_EQ(net.layers[1].weight, before);
}

TEST(Train, RandomInitLossDecreases) {
  auto net = build(small_config());
  init_random(net, InitScheme::kaiming_normal, 3);
  TrainOptions opt;
  opt.epochs = 20;
  opt.pool = 40;
  opt.lr = 1e-3;
  const auto hist = train_transform(net, opt);
  ASSERT_EQ(hist.size(), 40u);
  EXPECT_LT(hist.back().loss, hist.front().loss);
  EXPECT_EQ(hist.back().step, 40);
}

TEST(Train, Deterministic) {
  TrainOptions opt;
  opt.epochs = 2;
  opt.pool = 20;
  opt.batch = 10;
  auto a = build(small_config()), b = build(small_config());
  init_random(a, InitScheme::kaiming_uniform, 1);
  init_random(b, InitScheme::kaiming_uniform, 1);
  const auto ha = train_transform(a, opt), hb = train_transform(b, opt);
  ASSERT_EQ(ha.size(), hb.size());
  for (std::size_t k = 0; k < ha.size(); ++k) EXPECT_EQ(ha[k].loss, hb[k].loss);
}

TEST(Epsilon, FourierInitMatchesReferenceMatrix) {
  auto net = build(small_config());
  init_fourier(net);
  const auto e = transform_epsilon(net);
  const auto ref = epsilon_metrics(butterfly_matrix(net.config.geometry(), 2),
                                   exact_transform_matrix(8, 8, 8, 8, Direction::forward));
  EXPECT_NEAR(e.eps1, ref.eps1, 1e-12);
  EXPECT_NEAR(e.eps_inf, ref.eps_inf, 1e-12);
  EXPECT_NEAR(e.eps2, ref.eps2, 1e-6);
}

TEST(Epsilon, FittedMatrixRecoversLinearNetwork) {
  auto net = build(small_config());
  init_fourier(net);
  const ComplexMatrix fit = fitted_matrix(net, 200, 3);
  const ComplexMatrix m = materialize_matrix(net);
  double worst = 0.0;
  for (std::size_t k = 0; k < m.data.size(); ++k) worst = std::max(worst, std::abs(fit.data[k] - m.data[k]));
  EXPECT_LT(worst, 1e-9);
}

TEST(Epsilon, FittedMatrixRecoversComplexInputNetwork) {
  auto net = build(small_config(Direction::inverse));
  init_fourier(net);
  const ComplexMatrix fit = fitted_matrix(net, 200, 4);
  const ComplexMatrix m = materialize_matrix(net);
  double worst = 0.0;
  for (std::size_t k = 0; k < m.data.size(); ++k) worst = std::max(worst, std::abs(fit.data[k] - m.data[k]));
  EXPECT_LT(worst, 1e-9);
}

TEST(Epsilon, FittedMatrixRejects) {
  auto net = build(small_config());
  init_fourier(net);
  EXPECT_THROW(fitted_matrix(net, 64, 0), InvalidArgument);
  auto big = build(NetConfig::for_sizes(5, 1, 64, 64, 64, 64, Direction::forward, InputKind::real));
  EXPECT_THROW(fitted_matrix(big, 5000, 0), ResourceLimit);
}
