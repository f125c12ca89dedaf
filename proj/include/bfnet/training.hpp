#pragma once
// Reverse-mode gradients for ButterflyNet2D, relative l2 loss, Adam with a
// plateau learning-rate schedule, and the transform-approximation trainer.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bfnet/butterfly_reference.hpp"
#include "bfnet/butterflynet.hpp"
#include "bfnet/error.hpp"
#include "bfnet/matrix.hpp"

namespace bfnet {

/// Largest input count fitted_matrix accepts (a 32 x 32 grid).
inline constexpr int kMaxFitInputs = 1024;

/// Activations of one batch: activations[0] is the input, activations[l + 1]
/// the (post-ReLU) output of layer l in channel form.
struct ForwardTrace {
  std::vector<std::vector<EncodedTensor>> activations;

  [[nodiscard]] bool empty() const { return activations.empty(); }
  [[nodiscard]] std::size_t batch() const { return empty() ? 0 : activations.front().size(); }
};

struct GradientBuffers {
  std::vector<std::vector<double>> weight;
  std::vector<std::vector<double>> bias;

  static GradientBuffers zeros_like(const ButterflyNet2D& net) {
    GradientBuffers g;
    for (const auto& l : net.layers) {
      g.weight.emplace_back(l.weight.size(), 0.0);
      g.bias.emplace_back(l.bias.size(), 0.0);
    }
    return g;
  }

  [[nodiscard]] double max_abs() const {
    double m = 0.0;
    for (const auto* set : {&weight, &bias})
      for (const auto& a : *set)
        for (double v : a) m = std::max(m, std::abs(v));
    return m;
  }
};

/// Forward pass that keeps every layer's activations for backward().
/// Returns the encoded output grids.
inline std::vector<EncodedTensor> forward_traced(const ButterflyNet2D& net, std::vector<EncodedTensor> batch,
                                                 ForwardTrace& trace) {
  for (const auto& t : batch) check_input(net, t);
  trace.activations.clear();
  trace.activations.push_back(std::move(batch));
  for (const auto& layer : net.layers) trace.activations.push_back(conv_forward(layer, trace.activations.back()));
  std::vector<EncodedTensor> out;
  for (const auto& t : trace.activations.back())
    out.push_back(unreshape_output(t, net.config.L, net.config.m_x, net.config.m_y));
  return out;
}

namespace detail {

/// Scatter-add of patch rows back into the input layout (inverse of im2col).
inline void col2im_add(const SparseConvLayer& layer, const RowMatrix& dx, int g, int oh, int ow,
                       std::vector<EncodedTensor>& din) {
  const int cin = layer.in_real(), kh = layer.kernel_h, kw = layer.kernel_w;
  const int h = din.front().height, w = din.front().width;
  const Eigen::Index positions = static_cast<Eigen::Index>(oh) * ow;
  for (std::size_t b = 0; b < din.size(); ++b)
    for (int ci = 0; ci < cin; ++ci) {
      double* plane = din[b].data.data() + static_cast<std::size_t>(g * cin + ci) * h * w;
      for (int i = 0; i < oh; ++i)
        for (int j = 0; j < ow; ++j) {
          const double* row = dx.row(static_cast<Eigen::Index>(b) * positions + i * ow + j).data() +
                              static_cast<std::size_t>(ci) * kh * kw;
          for (int a = 0; a < kh; ++a) {
            double* dst = plane + static_cast<std::size_t>(i * layer.stride_h + a) * w + j * layer.stride_w;
            for (int bb = 0; bb < kw; ++bb) dst[bb] += row[a * kw + bb];
          }
        }
    }
}

/// Accumulates weight and bias gradients of one layer; optionally returns
/// the gradient w.r.t. the layer input.  ReLU subgradient at 0 is 0, and
/// out > 0 exactly when the pre-activation is > 0.
inline void layer_backward(const SparseConvLayer& layer, const std::vector<EncodedTensor>& in,
                           const std::vector<EncodedTensor>& out, const std::vector<EncodedTensor>& dout,
                           std::vector<double>& dweight, std::vector<double>& dbias,
                           std::vector<EncodedTensor>* din) {
  const int cout = layer.out_real();
  const int oh = out.front().height, ow = out.front().width;
  const std::size_t positions = static_cast<std::size_t>(oh) * ow;
  const auto rows = static_cast<Eigen::Index>(in.size() * positions);
  if (din) {
    din->clear();
    for (const auto& t : in) din->emplace_back(t.channels, t.height, t.width);
  }
  RowMatrix x, dz(rows, cout), dx;
  for (int g = 0; g < layer.groups; ++g) {
    for (std::size_t b = 0; b < in.size(); ++b)
      for (int co = 0; co < cout; ++co) {
        const std::size_t off = (static_cast<std::size_t>(g) * cout + co) * positions;
        const double* o = out[b].data.data() + off;
        const double* d = dout[b].data.data() + off;
        for (std::size_t p = 0; p < positions; ++p)
          dz(static_cast<Eigen::Index>(b * positions + p), co) = o[p] > 0.0 ? d[p] : 0.0;
      }
    Eigen::Map<Eigen::VectorXd> db(dbias.data() + static_cast<std::size_t>(g) * cout, cout);
    db += dz.colwise().sum().transpose();
    im2col(layer, in, g, oh, ow, x);
    const Eigen::Index k = layer.fan_in();
    Eigen::Map<RowMatrix> dw(dweight.data() + static_cast<std::size_t>(g) * k * cout, k, cout);
    dw.noalias() += x.transpose() * dz;
    if (din) {
      dx.noalias() = dz * group_weight(layer, g).transpose();
      col2im_add(layer, dx, g, oh, ow, *din);
    }
  }
}

}  // namespace detail

/// Gradients of sum_b <upstream_b, output_b> w.r.t. all parameters, where
/// upstream holds one encoded output grid per sample.  Adds into `grads`.
/// If `input_grad` is given it receives the gradient w.r.t. the input.
inline void backward(const ButterflyNet2D& net, const ForwardTrace& trace, const std::vector<EncodedTensor>& upstream,
                     GradientBuffers& grads, std::vector<EncodedTensor>* input_grad = nullptr) {
  if (trace.activations.size() != net.layers.size() + 1)
    throw InvalidState("backward: no cached activations for this network (run forward_traced first)");
  if (upstream.size() != trace.batch()) throw InvalidArgument("backward: upstream batch size does not match trace");
  if (grads.weight.size() != net.layers.size()) grads = GradientBuffers::zeros_like(net);
  std::vector<EncodedTensor> d;
  for (const auto& u : upstream) d.push_back(reshape_output(u, net.config.L, net.config.m_x, net.config.m_y));
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    std::vector<EncodedTensor> din;
    const bool need_input = l > 0 || input_grad != nullptr;
    detail::layer_backward(net.layers[l], trace.activations[l], trace.activations[l + 1], d, grads.weight[l],
                           grads.bias[l], need_input ? &din : nullptr);
    d = std::move(din);
  }
  if (input_grad) *input_grad = std::move(d);
}

// ---------------------------------------------------------------------------
// Gradient-check helpers

/// Adds U(-scale, scale) noise to every weight and bias.
inline void perturb(ButterflyNet2D& net, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto& l : net.layers) {
    for (auto& w : l.weight) w += u(rng);
    for (auto& b : l.bias) b += u(rng);
  }
}

/// Shifts biases, layer by layer, so that no pre-activation produced by
/// `batch` lies closer than `margin` to the ReLU kink.  Returns the number of
/// real channels for which no shift within +-1 was found.
inline int push_from_kinks(ButterflyNet2D& net, std::vector<EncodedTensor> batch, double margin) {
  int failed = 0;
  for (auto& layer : net.layers) {
    const auto pre = conv_preactivation(layer, batch);
    const std::size_t positions = pre.front().plane();
    for (int ch = 0; ch < pre.front().real_channels(); ++ch) {
      auto clear = [&](double delta) {
        for (const auto& t : pre)
          for (std::size_t p = 0; p < positions; ++p)
            if (std::abs(t.data[static_cast<std::size_t>(ch) * positions + p] + delta) < margin) return false;
        return true;
      };
      const double step = margin / 4;
      const int limit = static_cast<int>(1.0 / step);
      bool ok = false;
      for (int k = 0; k <= limit && !ok; ++k)
        for (double delta : {k * step, -k * step})
          if (clear(delta)) {
            layer.bias[static_cast<std::size_t>(ch)] += delta;
            ok = true;
            break;
          }
      if (!ok) ++failed;
    }
    batch = conv_forward(layer, batch);
  }
  return failed;
}

// ---------------------------------------------------------------------------
// Loss

/// Sum over the batch of ||pred_i - target_i|| / ||target_i||.
inline double loss_rel_l2(const std::vector<ComplexGrid>& pred, const std::vector<ComplexGrid>& target) {
  if (pred.size() != target.size()) throw InvalidArgument("loss_rel_l2: batch sizes differ");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].nx != target[i].nx || pred[i].ny != target[i].ny) throw InvalidArgument("loss_rel_l2: shapes differ");
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < pred[i].values.size(); ++k) {
      num += std::norm(pred[i].values[k] - target[i].values[k]);
      den += std::norm(target[i].values[k]);
    }
    if (den == 0.0) throw InvalidArgument("loss_rel_l2: target " + std::to_string(i) + " has zero norm");
    total += std::sqrt(num) / std::sqrt(den);
  }
  return total;
}

struct LossAndGrad {
  double loss = 0.0;
  std::vector<EncodedTensor> grad;  // w.r.t. the encoded output grids
};

/// Relative l2 loss of decoded outputs plus its gradient w.r.t. the encoded
/// outputs.  Decoding is z = (c0 - c2) + i (c1 - c3), so the gradient of the
/// four channels is (g_re, g_im, -g_re, -g_im).
inline LossAndGrad loss_rel_l2_grad(const std::vector<EncodedTensor>& pred, const std::vector<ComplexGrid>& target) {
  LossAndGrad res;
  std::vector<ComplexGrid> decoded;
  for (const auto& p : pred) decoded.push_back(decode_grid(p));
  res.loss = loss_rel_l2(decoded, target);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < decoded[i].values.size(); ++k) {
      num += std::norm(decoded[i].values[k] - target[i].values[k]);
      den += std::norm(target[i].values[k]);
    }
    EncodedTensor g(1, pred[i].height, pred[i].width);
    if (num > 0.0) {
      const double scale = 1.0 / (std::sqrt(num) * std::sqrt(den));
      const std::size_t plane = g.plane();
      for (std::size_t k = 0; k < plane; ++k) {
        const Complex e = (decoded[i].values[k] - target[i].values[k]) * scale;
        g.data[k] = e.real();
        g.data[plane + k] = e.imag();
        g.data[2 * plane + k] = -e.real();
        g.data[3 * plane + k] = -e.imag();
      }
    }
    res.grad.push_back(std::move(g));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Optimizer

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  GradientBuffers m;
  GradientBuffers v;
};

inline AdamState make_adam(const ButterflyNet2D& net, double lr) {
  if (!(lr > 0.0)) throw InvalidArgument("adam: learning rate must be > 0");
  AdamState s;
  s.lr = lr;
  s.m = GradientBuffers::zeros_like(net);
  s.v = GradientBuffers::zeros_like(net);
  return s;
}

inline void adam_step(AdamState& s, ButterflyNet2D& net, const GradientBuffers& grads) {
  if (grads.weight.size() != net.layers.size() || s.m.weight.size() != net.layers.size())
    throw InvalidArgument("adam_step: state or gradients do not match the network");
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  auto update = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                    std::vector<double>& v) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
      v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
      p[i] -= s.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + s.eps);
    }
  };
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    update(net.layers[l].weight, grads.weight[l], s.m.weight[l], s.v.weight[l]);
    update(net.layers[l].bias, grads.bias[l], s.m.bias[l], s.v.bias[l]);
  }
}

/// Multiplies the learning rate by `factor` once `patience` consecutive
/// observations fail to improve strictly on the best loss seen.
struct PlateauScheduler {
  double factor = 0.98;
  int patience = 100;
  double best = std::numeric_limits<double>::infinity();
  int bad = 0;

  /// Returns true when lr was reduced.
  bool observe(double loss, double& lr) {
    if (loss < best) {
      best = loss;
      bad = 0;
      return false;
    }
    if (++bad >= patience) {
      lr *= factor;
      bad = 0;
      return true;
    }
    return false;
  }
};

// ---------------------------------------------------------------------------
// Transform training

struct TrainRecord {
  long step = 0;
  double loss = 0.0;
  double lr = 0.0;
};

struct TrainOptions {
  int epochs = 200;
  int batch = 20;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  int pool = 400;
  bool plateau = false;
};

/// Uniform [0, 1) inputs; real for the forward transform, complex for the
/// inverse one.
inline std::vector<ComplexGrid> random_inputs(const NetConfig& c, int count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ComplexGrid> xs;
  for (int s = 0; s < count; ++s) {
    ComplexGrid x(c.input_height(), c.input_width());
    for (auto& v : x.values) {
      const double re = u(rng);
      v = {re, c.direction == Direction::inverse ? u(rng) : 0.0};
    }
    xs.push_back(std::move(x));
  }
  return xs;
}

inline ComplexGrid exact_target(const NetConfig& c, const ComplexGrid& x) {
  return c.direction == Direction::forward ? dft2d_exact(x, c.output_height(), c.output_width())
                                           : idft2d_exact(x, c.output_height(), c.output_width());
}

/// Adam on the relative l2 loss against exact transforms of a fixed pool of
/// random inputs, reshuffled every epoch.  One record per update.
inline std::vector<TrainRecord> train_transform(ButterflyNet2D& net, const TrainOptions& opt) {
  if (opt.epochs < 0 || opt.batch < 1 || opt.pool < 1) throw InvalidArgument("train_transform: bad options");
  std::vector<TrainRecord> history;
  if (opt.epochs == 0) return history;
  std::mt19937_64 rng(opt.seed);
  const auto inputs = random_inputs(net.config, opt.pool, rng);
  std::vector<ComplexGrid> targets;
  for (const auto& x : inputs) targets.push_back(exact_target(net.config, x));
  AdamState adam = make_adam(net, opt.lr);
  PlateauScheduler sched;
  std::vector<int> order(static_cast<std::size_t>(opt.pool));
  std::iota(order.begin(), order.end(), 0);
  ForwardTrace trace;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (int start = 0; start < opt.pool; start += opt.batch) {
      const int end = std::min(opt.pool, start + opt.batch);
      std::vector<EncodedTensor> batch;
      std::vector<ComplexGrid> tgt;
      for (int k = start; k < end; ++k) {
        batch.push_back(encode_grid(inputs[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])]));
        tgt.push_back(targets[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])]);
      }
      const auto out = forward_traced(net, std::move(batch), trace);
      const auto lg = loss_rel_l2_grad(out, tgt);
      GradientBuffers grads = GradientBuffers::zeros_like(net);
      backward(net, trace, lg.grad, grads);
      adam_step(adam, net, grads);
      history.push_back({adam.step, lg.loss, adam.lr});
      if (opt.plateau) sched.observe(lg.loss, adam.lr);
    }
  }
  return history;
}

namespace detail {

/// Plain-loop forward pass and relative l2 loss in long double.  Only used
/// to take finite differences: at h = 1e-5 the rounding noise of a double
/// loss (about 1e-16 |loss| / h) would swamp small gradients.
inline long double loss_extended(const ButterflyNet2D& net, const std::vector<ComplexGrid>& inputs,
                                 const std::vector<ComplexGrid>& targets) {
  using ld = long double;
  long double total = 0.0L;
  for (std::size_t s = 0; s < inputs.size(); ++s) {
    const EncodedTensor enc = encode_grid(inputs[s]);
    int h = enc.height, w = enc.width;
    std::vector<ld> act(enc.data.begin(), enc.data.end());
    for (const auto& layer : net.layers) {
      const int oh = (h - layer.kernel_h) / layer.stride_h + 1, ow = (w - layer.kernel_w) / layer.stride_w + 1;
      const int cin = layer.in_real(), cout = layer.out_real();
      std::vector<ld> out(static_cast<std::size_t>(layer.groups) * cout * oh * ow);
      for (int g = 0; g < layer.groups; ++g)
        for (int co = 0; co < cout; ++co)
          for (int i = 0; i < oh; ++i)
            for (int j = 0; j < ow; ++j) {
              ld acc = layer.bias[static_cast<std::size_t>(g) * cout + co];
              for (int ci = 0; ci < cin; ++ci)
                for (int a = 0; a < layer.kernel_h; ++a)
                  for (int b = 0; b < layer.kernel_w; ++b)
                    acc += static_cast<ld>(layer.w(g, ci, a, b, co)) *
                           act[(static_cast<std::size_t>(g * cin + ci) * h + i * layer.stride_h + a) * w +
                               j * layer.stride_w + b];
              out[(static_cast<std::size_t>(g * cout + co) * oh + i) * ow + j] = acc > 0 ? acc : 0.0L;
            }
      act = std::move(out);
      h = oh, w = ow;
    }
    // Last layer: channel a * m_x m_y + px * m_y + py at 1x1.
    const NetConfig& c = net.config;
    const std::size_t mm = static_cast<std::size_t>(c.m_x) * c.m_y;
    ld num = 0.0L, den = 0.0L;
    for (std::size_t ch = 0; ch < act.size() / 4; ++ch) {
      const auto [ax, ay] = morton_decode(static_cast<int>(ch / mm), c.L);
      const int px = static_cast<int>(ch % mm) / c.m_y, py = static_cast<int>(ch % mm) % c.m_y;
      const Complex t = targets[s](ax * c.m_x + px, ay * c.m_y + py);
      const ld re = act[4 * ch] - act[4 * ch + 2] - t.real();
      const ld im = act[4 * ch + 1] - act[4 * ch + 3] - t.imag();
      num += re * re + im * im;
      den += static_cast<ld>(std::norm(t));
    }
    total += std::sqrt(num) / std::sqrt(den);
  }
  return total;
}

}  // namespace detail

struct GradientCheck {
  int samples = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
};

/// Central finite differences of the relative l2 loss on `samples` randomly
/// chosen parameters, compared with backward().  The differences are taken
/// in long double.  Relative error is |fd - an| / max(|fd|, |an|, floor); the
/// floor keeps parameters whose true gradient is zero (dead ReLU paths) from
/// dividing rounding noise by zero.
inline GradientCheck gradient_check(ButterflyNet2D& net, const std::vector<ComplexGrid>& inputs,
                                    const std::vector<ComplexGrid>& targets, int samples, double h,
                                    std::uint64_t seed, double floor = 1e-6) {
  std::vector<EncodedTensor> batch;
  for (const auto& x : inputs) batch.push_back(encode_grid(x));
  ForwardTrace trace;
  const auto lg = loss_rel_l2_grad(forward_traced(net, batch, trace), targets);
  GradientBuffers grads = GradientBuffers::zeros_like(net);
  backward(net, trace, lg.grad, grads);

  std::size_t total = 0;
  for (const auto& l : net.layers) total += l.weight.size() + l.bias.size();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, total - 1);
  GradientCheck res;
  res.samples = samples;
  for (int s = 0; s < samples; ++s) {
    std::size_t k = pick(rng);
    double* p = nullptr;
    double an = 0.0;
    for (std::size_t l = 0; l < net.layers.size() && !p; ++l) {
      auto& layer = net.layers[l];
      if (k < layer.weight.size()) {
        p = &layer.weight[k], an = grads.weight[l][k];
      } else if ((k -= layer.weight.size()) < layer.bias.size()) {
        p = &layer.bias[k], an = grads.bias[l][k];
      } else {
        k -= layer.bias.size();
      }
    }
    const double saved = *p;
    *p = saved + h;
    const long double up = detail::loss_extended(net, inputs, targets);
    *p = saved - h;
    const long double down = detail::loss_extended(net, inputs, targets);
    *p = saved;
    // the perturbed parameter values are exact doubles, so their actual
    // spacing is used as the step
    const double step = (saved + h) - (saved - h);
    const double fd = static_cast<double>((up - down) / step);
    const double err = std::abs(fd - an);
    res.max_abs_error = std::max(res.max_abs_error, err);
    res.max_rel_error = std::max(res.max_rel_error, err / std::max({std::abs(fd), std::abs(an), floor}));
  }
  return res;
}

/// Linear part of the network on its input distribution: the least-squares
/// affine fit f(x) ~ B x + c over `samples` inputs drawn like the training
/// data, returning B.  Exact for linear and affine networks.  Unit-vector
/// responses are not used because they fold the bias response f(0) into
/// every column and sit far from the inputs a trained net has seen.
inline ComplexMatrix fitted_matrix(const ButterflyNet2D& net, int samples, std::uint64_t seed) {
  const NetConfig& c = net.config;
  const int n = c.input_height() * c.input_width(), m = c.output_height() * c.output_width();
  if (n > kMaxFitInputs)
    throw ResourceLimit("fitted_matrix: " + std::to_string(n) + " inputs exceed the fit limit of " +
                        std::to_string(kMaxFitInputs));
  if (samples <= n) throw InvalidArgument("fitted_matrix: need more samples than inputs");
  std::mt19937_64 rng(seed);
  const auto xs = random_inputs(c, samples, rng);
  Eigen::MatrixXcd X(samples, n), Y(samples, m);
  constexpr int chunk = 64;
  for (int start = 0; start < samples; start += chunk) {
    const int end = std::min(samples, start + chunk);
    std::vector<EncodedTensor> batch;
    for (int k = start; k < end; ++k) batch.push_back(encode_grid(xs[static_cast<std::size_t>(k)]));
    const auto out = forward(net, std::move(batch));
    for (int k = start; k < end; ++k) {
      const ComplexGrid y = decode_grid(out[static_cast<std::size_t>(k - start)]);
      for (int i = 0; i < n; ++i) X(k, i) = xs[static_cast<std::size_t>(k)].values[static_cast<std::size_t>(i)];
      for (int j = 0; j < m; ++j) Y(k, j) = y.values[static_cast<std::size_t>(j)];
    }
  }
  X.rowwise() -= X.colwise().mean().eval();
  Y.rowwise() -= Y.colwise().mean().eval();
  const Eigen::MatrixXcd bt = X.colPivHouseholderQr().solve(Y);
  ComplexMatrix b(m, n);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) b(j, i) = bt(i, j);
  return b;
}

/// Relative matrix-norm errors of the network's linear part (fitted_matrix
/// with 8 samples per input) against the exact transform.
inline EpsilonMetrics transform_epsilon(const ButterflyNet2D& net, const PowerIterationOptions& opt = {},
                                        std::uint64_t seed = 0x5eed) {
  const NetConfig& c = net.config;
  const int n = c.input_height() * c.input_width();
  ComplexMatrix m = fitted_matrix(net, 8 * n, seed);
  const ComplexMatrix exact = exact_transform_matrix(c.input_height(), c.input_width(), c.output_height(),
                                                     c.output_width(), c.direction);
  return epsilon_metrics(std::move(m), exact, opt);
}

}  // namespace bfnet
