#pragma once
// ButterflyNet2D: a CNN whose channels are sparsely connected following the
// butterfly domain-pair structure.  Every layer is a grouped convolution over
// 4-real encoded complex channels, followed by bias and ReLU:
//
//   layer 0      interpolation   kernel = stride = (omega_x, omega_y), 1 group
//   layer 1..L-1 recursion       kernel = stride = (2, 2), 4^l groups
//   layer L      kernel applied  kernel = stride = (1, 1), 4^L groups
//
// Channel layout.  A complex channel c at the output of layer l < L is the
// pair (A box, Chebyshev node) flattened as c = (a * r + kx) * r + ky, where a
// is the quadtree (Morton) index of the A box: a = 4 * parent + 2 * bx + by
// for child bits (bx, by).  This keeps the four children of an A box
// contiguous, so recursion group g reads exactly input channels
// [g r^2, (g+1) r^2).  At the last layer c = a * m_x m_y + px * m_y + py for
// the output sample (px, py) inside the finest A box a.

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bfnet/complex_encoding.hpp"
#include "bfnet/geometry.hpp"
#include "bfnet/kernel_math.hpp"
#include "bfnet/matrix.hpp"
#include "bfnet/parallel.hpp"

namespace bfnet {

enum class InputKind { real, complex };

inline const char* to_string(InputKind k) { return k == InputKind::real ? "real" : "complex"; }

struct NetConfig {
  int L = 2;
  int r = 1;
  int omega_x = 1;
  int omega_y = 1;
  int m_x = 1;
  int m_y = 1;
  Direction direction = Direction::forward;
  InputKind input_kind = InputKind::real;

  [[nodiscard]] int input_height() const { return omega_x << (L - 1); }
  [[nodiscard]] int input_width() const { return omega_y << (L - 1); }
  [[nodiscard]] int output_height() const { return m_x << L; }
  [[nodiscard]] int output_width() const { return m_y << L; }

  void validate() const {
    if (L < 2 || L > 10) throw InvalidArgument("NetConfig: L must be in [2, 10]");
    if (r < 1) throw InvalidArgument("NetConfig: r must be >= 1");
    if (omega_x < 1 || omega_y < 1) throw InvalidArgument("NetConfig: omega must be >= 1");
    if (m_x < 1 || m_y < 1) throw InvalidArgument("NetConfig: m must be >= 1");
  }

  [[nodiscard]] TransformGeometry geometry() const {
    return make_geometry(L, input_height(), input_width(), output_height(), output_width(), direction);
  }

  /// Config for an n_in -> n_out transform with L layers.
  static NetConfig for_sizes(int L, int r, int n_in_x, int n_in_y, int n_out_x, int n_out_y,
                             Direction d, InputKind kind) {
    if (L < 2) throw InvalidArgument("NetConfig: L must be >= 2");
    const TransformGeometry g = make_geometry(L, n_in_x, n_in_y, n_out_x, n_out_y, d);
    NetConfig c{L, r, g.x.omega, g.y.omega, g.x.m, g.y.m, d, kind};
    c.validate();
    return c;
  }

  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

/// Grouped convolution with kernel == stride.  Weights are stored as
/// (groups, in_real, kernel_h, kernel_w, out_real) with out_real fastest;
/// entries connecting different groups are not stored at all.
struct SparseConvLayer {
  int groups = 1;
  int in_per_group = 1;   // complex channels
  int out_per_group = 1;  // complex channels
  int kernel_h = 1;
  int kernel_w = 1;
  int stride_h = 1;
  int stride_w = 1;
  std::vector<double> weight;
  std::vector<double> bias;  // (groups, out_real)

  SparseConvLayer() = default;
  SparseConvLayer(int g, int in_c, int out_c, int kh, int kw)
      : groups(g), in_per_group(in_c), out_per_group(out_c), kernel_h(kh), kernel_w(kw),
        stride_h(kh), stride_w(kw),
        weight(static_cast<std::size_t>(g) * 4 * in_c * kh * kw * 4 * out_c, 0.0),
        bias(static_cast<std::size_t>(g) * 4 * out_c, 0.0) {}

  [[nodiscard]] int in_real() const { return 4 * in_per_group; }
  [[nodiscard]] int out_real() const { return 4 * out_per_group; }
  [[nodiscard]] int fan_in() const { return in_real() * kernel_h * kernel_w; }

  [[nodiscard]] std::size_t weight_index(int g, int ci, int a, int b, int co) const {
    return ((((static_cast<std::size_t>(g) * in_real() + ci) * kernel_h + a) * kernel_w + b) *
            out_real()) + co;
  }
  double& w(int g, int ci, int a, int b, int co) { return weight[weight_index(g, ci, a, b, co)]; }
  [[nodiscard]] double w(int g, int ci, int a, int b, int co) const {
    return weight[weight_index(g, ci, a, b, co)];
  }

  /// Writes the 4x4 real block of complex weight `value` between complex
  /// channels ci -> co (group-local) at tap (a, b).
  void set_complex(int g, int ci, int co, int a, int b, Complex value) {
    const Matrix4 m = weight_matrix(value);
    for (int i = 0; i < 4; ++i)
      for (int o = 0; o < 4; ++o) w(g, 4 * ci + i, a, b, 4 * co + o) = m[o][i];
  }
};

struct ButterflyNet2D {
  NetConfig config;
  std::vector<SparseConvLayer> layers;  // L + 1 layers
};

// ---------------------------------------------------------------------------
// Channel indexing

inline int morton_encode(int ax, int ay, int bits) {
  int code = 0;
  for (int b = bits - 1; b >= 0; --b) code = code * 4 + ((ax >> b) & 1) * 2 + ((ay >> b) & 1);
  return code;
}

inline std::pair<int, int> morton_decode(int code, int bits) {
  int ax = 0, ay = 0;
  for (int b = 0; b < bits; ++b) {
    ay |= (code & 1) << b;
    ax |= ((code >> 1) & 1) << b;
    code >>= 2;
  }
  return {ax, ay};
}

/// Complex channel (A box (ix, iy) at A-level `level`, Chebyshev node (kx, ky)).
struct ChannelIndex {
  int ix = 0;
  int iy = 0;
  int kx = 0;
  int ky = 0;

  [[nodiscard]] int flatten(int level, int r) const {
    return (morton_encode(ix, iy, level + 1) * r + kx) * r + ky;
  }
  static ChannelIndex unflatten(int c, int level, int r) {
    const int k = c % (r * r);
    const auto [ix, iy] = morton_decode(c / (r * r), level + 1);
    return {ix, iy, k / r, k % r};
  }
  friend bool operator==(const ChannelIndex&, const ChannelIndex&) = default;
};

// ---------------------------------------------------------------------------
// Construction

inline ButterflyNet2D build(const NetConfig& config) {
  config.validate();
  const int r2 = config.r * config.r;
  ButterflyNet2D net{config, {}};
  net.layers.reserve(static_cast<std::size_t>(config.L) + 1);
  net.layers.emplace_back(1, 1, 4 * r2, config.omega_x, config.omega_y);
  for (int l = 1; l < config.L; ++l) net.layers.emplace_back(1 << (2 * l), r2, 4 * r2, 2, 2);
  net.layers.emplace_back(1 << (2 * config.L), r2, config.m_x * config.m_y, 1, 1);
  return net;
}

/// Complex channel count after each layer (index 0 is the input).
inline std::vector<long> channel_counts(const ButterflyNet2D& net) {
  std::vector<long> out{1};
  for (const auto& layer : net.layers) out.push_back(static_cast<long>(layer.groups) * layer.out_per_group);
  return out;
}

// ---------------------------------------------------------------------------
// Fourier initialization

namespace detail {

inline Complex expi(double sign, double x) { return std::polar(1.0, sign * 2.0 * std::numbers::pi * x); }

/// Layer-0 factor along one axis: A^0 child bit `a`, Chebyshev node k,
/// uniform tap s inside the first finest B box.
inline Complex interp_factor(const AxisGeometry& g, int L, double sign, const ChebGrid& cheb, int a, int k, int s) {
  const double side = 1.0 / (1 << (L - 1));
  const double center = g.source_origin() + 0.5 * side;
  const double xi0 = (a + 0.5) * g.extent / 2.0;
  const double u = g.source(s);
  const double t = center + side * cheb[k];
  return expi(sign, xi0 * (u - t)) * lagrange_eval(cheb, k, (u - center) / side);
}

/// Recursion-layer factor along one axis: child A coordinate `ca` at level l,
/// input node k_in in child B box `s` (0 or 1), output node k_out in the parent.
inline Complex recursion_factor(const AxisGeometry& g, int L, int l, double sign, const ChebGrid& cheb,
                                int ca, int k_in, int k_out, int s) {
  const double h = 1.0 / (1 << (L - l));
  const double xi0 = (ca + 0.5) * g.extent / (1 << (l + 1));
  const double t_in = s * h + 0.5 * h + h * cheb[k_in];
  const double t_out = h + 2.0 * h * cheb[k_out];
  return expi(sign, xi0 * (t_in - t_out)) * lagrange_eval(cheb, k_out, (t_in - h) / (2.0 * h));
}

/// Kernel-application factor along one axis: output sample j, root node k.
inline Complex kernel_factor(const AxisGeometry& g, double sign, const ChebGrid& cheb, int j, int k) {
  return expi(sign, g.target(j) * (g.source_origin() + 0.5 + cheb[k]));
}

}  // namespace detail

/// Sets every weight to the butterfly transfer coefficients for the configured
/// direction and all biases to zero.  The forward pass then reproduces the
/// butterfly algorithm exactly (up to rounding).
inline ButterflyNet2D& init_fourier(ButterflyNet2D& net) {
  const NetConfig& cfg = net.config;
  const TransformGeometry geo = cfg.geometry();
  const ChebGrid cheb = cheb_points(cfg.r);
  const double sign = geo.sign();
  const int r = cfg.r, L = cfg.L;

  for (auto& layer : net.layers) {
    std::fill(layer.weight.begin(), layer.weight.end(), 0.0);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  }

  {  // interpolation
    SparseConvLayer& layer = net.layers[0];
    for (int ax = 0; ax < 2; ++ax)
      for (int ay = 0; ay < 2; ++ay)
        for (int kx = 0; kx < r; ++kx)
          for (int ky = 0; ky < r; ++ky) {
            const int co = ChannelIndex{ax, ay, kx, ky}.flatten(0, r);
            for (int sx = 0; sx < cfg.omega_x; ++sx)
              for (int sy = 0; sy < cfg.omega_y; ++sy)
                layer.set_complex(0, 0, co, sx, sy,
                                  detail::interp_factor(geo.x, L, sign, cheb, ax, kx, sx) *
                                      detail::interp_factor(geo.y, L, sign, cheb, ay, ky, sy));
          }
  }

  for (int l = 1; l < L; ++l) {  // recursion
    SparseConvLayer& layer = net.layers[static_cast<std::size_t>(l)];
    // Per-axis tables indexed [ca][k_in][k_out][s].
    const int na = 1 << (l + 1);
    auto table = [&](const AxisGeometry& g) {
      std::vector<Complex> t(static_cast<std::size_t>(na) * r * r * 2);
      for (int ca = 0; ca < na; ++ca)
        for (int ki = 0; ki < r; ++ki)
          for (int ko = 0; ko < r; ++ko)
            for (int s = 0; s < 2; ++s)
              t[((static_cast<std::size_t>(ca) * r + ki) * r + ko) * 2 + s] =
                  detail::recursion_factor(g, L, l, sign, cheb, ca, ki, ko, s);
      return t;
    };
    const auto tx = table(geo.x), ty = table(geo.y);
    auto at = [r](const std::vector<Complex>& t, int ca, int ki, int ko, int s) {
      return t[((static_cast<std::size_t>(ca) * r + ki) * r + ko) * 2 + s];
    };
    for (int g = 0; g < layer.groups; ++g) {
      const auto [px, py] = morton_decode(g, l);
      for (int q = 0; q < 4; ++q) {
        const int cx = 2 * px + q / 2, cy = 2 * py + q % 2;
        for (int kix = 0; kix < r; ++kix)
          for (int kiy = 0; kiy < r; ++kiy)
            for (int kox = 0; kox < r; ++kox)
              for (int koy = 0; koy < r; ++koy)
                for (int sx = 0; sx < 2; ++sx)
                  for (int sy = 0; sy < 2; ++sy)
                    layer.set_complex(g, kix * r + kiy, (q * r + kox) * r + koy, sx, sy,
                                      at(tx, cx, kix, kox, sx) * at(ty, cy, kiy, koy, sy));
      }
    }
  }

  {  // kernel application
    SparseConvLayer& layer = net.layers[static_cast<std::size_t>(L)];
    const double scale = geo.scale();
    for (int g = 0; g < layer.groups; ++g) {
      const auto [ax, ay] = morton_decode(g, L);
      for (int px = 0; px < cfg.m_x; ++px)
        for (int py = 0; py < cfg.m_y; ++py)
          for (int kx = 0; kx < r; ++kx)
            for (int ky = 0; ky < r; ++ky)
              layer.set_complex(g, kx * r + ky, px * cfg.m_y + py, 0, 0,
                                scale * detail::kernel_factor(geo.x, sign, cheb, ax * cfg.m_x + px, kx) *
                                    detail::kernel_factor(geo.y, sign, cheb, ay * cfg.m_y + py, ky));
    }
  }
  return net;
}

inline ButterflyNet2D& init_fourier(ButterflyNet2D& net, Direction direction) {
  net.config.direction = direction;
  return init_fourier(net);
}

// ---------------------------------------------------------------------------
// Random initialization

enum class InitScheme { kaiming_uniform, kaiming_normal, orthogonal };

inline InitScheme parse_init_scheme(const std::string& name) {
  if (name == "kaiming_uniform") return InitScheme::kaiming_uniform;
  if (name == "kaiming_normal") return InitScheme::kaiming_normal;
  if (name == "orthogonal") return InitScheme::orthogonal;
  throw InvalidArgument("unknown init scheme '" + name + "'");
}

inline const char* to_string(InitScheme s) {
  switch (s) {
    case InitScheme::kaiming_uniform: return "kaiming_uniform";
    case InitScheme::kaiming_normal: return "kaiming_normal";
    case InitScheme::orthogonal: return "orthogonal";
  }
  return "?";
}

/// Random weights with fan-in taken from one group's dense block
/// (4 * in_per_group * kernel_h * kernel_w); biases zero.
inline ButterflyNet2D& init_random(ButterflyNet2D& net, InitScheme scheme, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto& layer : net.layers) {
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
    const double fan_in = layer.fan_in();
    switch (scheme) {
      case InitScheme::kaiming_uniform: {
        const double bound = std::sqrt(6.0 / fan_in);
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (double& w : layer.weight) w = dist(rng);
        break;
      }
      case InitScheme::kaiming_normal: {
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
        for (double& w : layer.weight) w = dist(rng);
        break;
      }
      case InitScheme::orthogonal: {
        // Each group's block, viewed as (out_real) x (fan_in), gets orthonormal
        // rows or columns, whichever is the shorter side.
        std::normal_distribution<double> dist(0.0, 1.0);
        const int rows = layer.out_real(), cols = layer.fan_in();
        const bool transpose = rows < cols;
        const int tall = transpose ? cols : rows, wide = transpose ? rows : cols;
        for (int g = 0; g < layer.groups; ++g) {
          Eigen::MatrixXd a(tall, wide);
          for (int i = 0; i < tall; ++i)
            for (int j = 0; j < wide; ++j) a(i, j) = dist(rng);
          Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
          Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(tall, wide);
          const Eigen::MatrixXd rmat = qr.matrixQR();
          for (int j = 0; j < wide; ++j)
            if (rmat(j, j) < 0) q.col(j) *= -1.0;
          for (int co = 0; co < rows; ++co)
            for (int f = 0; f < cols; ++f) {
              const int ci = f / (layer.kernel_h * layer.kernel_w);
              const int a_ = (f / layer.kernel_w) % layer.kernel_h;
              const int b_ = f % layer.kernel_w;
              layer.w(g, ci, a_, b_, co) = transpose ? q(f, co) : q(co, f);
            }
        }
        break;
      }
    }
  }
  return net;
}

// ---------------------------------------------------------------------------
// Forward pass

namespace detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Group g's weights as a (fan_in x out_real) row-major matrix; rows are
/// ordered (ci, a, b), matching the im2col columns below.
inline Eigen::Map<const RowMatrix> group_weight(const SparseConvLayer& l, int g) {
  const Eigen::Index k = l.fan_in(), n = l.out_real();
  return {l.weight.data() + static_cast<std::size_t>(g) * k * n, k, n};
}

inline void check_batch(const SparseConvLayer& layer, const std::vector<EncodedTensor>& in) {
  const EncodedTensor& first = in.front();
  for (const auto& t : in) {
    if (t.real_channels() != layer.groups * layer.in_real())
      throw InvalidArgument("conv_forward: expected " + std::to_string(layer.groups * layer.in_real()) +
                            " real input channels, got " + std::to_string(t.real_channels()));
    if (t.height != first.height || t.width != first.width)
      throw InvalidArgument("conv_forward: batch entries differ in shape");
  }
  if (first.height < layer.kernel_h || first.width < layer.kernel_w)
    throw InvalidArgument("conv_forward: input smaller than kernel");
}

/// Patches of group g as rows (sample, out_i, out_j).
inline void im2col(const SparseConvLayer& layer, const std::vector<EncodedTensor>& in, int g, int oh, int ow,
                   RowMatrix& x) {
  const int cin = layer.in_real(), kh = layer.kernel_h, kw = layer.kernel_w;
  const int h = in.front().height, w = in.front().width;
  const Eigen::Index positions = static_cast<Eigen::Index>(oh) * ow;
  x.resize(static_cast<Eigen::Index>(in.size()) * positions, layer.fan_in());
  for (std::size_t b = 0; b < in.size(); ++b)
    for (int ci = 0; ci < cin; ++ci) {
      const double* plane = in[b].data.data() + static_cast<std::size_t>(g * cin + ci) * h * w;
      for (int i = 0; i < oh; ++i)
        for (int j = 0; j < ow; ++j) {
          double* row = x.row(static_cast<Eigen::Index>(b) * positions + i * ow + j).data() +
                        static_cast<std::size_t>(ci) * kh * kw;
          for (int a = 0; a < kh; ++a) {
            const double* src = plane + static_cast<std::size_t>(i * layer.stride_h + a) * w + j * layer.stride_w;
            std::copy(src, src + kw, row + a * kw);
          }
        }
    }
}

inline std::vector<EncodedTensor> conv(const SparseConvLayer& layer, const std::vector<EncodedTensor>& in,
                                       bool rectify) {
  if (in.empty()) return {};
  check_batch(layer, in);
  const int cout = layer.out_real();
  const int oh = (in.front().height - layer.kernel_h) / layer.stride_h + 1;
  const int ow = (in.front().width - layer.kernel_w) / layer.stride_w + 1;
  const std::size_t positions = static_cast<std::size_t>(oh) * ow;
  std::vector<EncodedTensor> out(in.size(), EncodedTensor(layer.groups * layer.out_per_group, oh, ow));
  RowMatrix x, y;
  for (int g = 0; g < layer.groups; ++g) {
    im2col(layer, in, g, oh, ow, x);
    y.noalias() = x * group_weight(layer, g);
    const double* bias = &layer.bias[static_cast<std::size_t>(g) * cout];
    for (std::size_t b = 0; b < in.size(); ++b)
      for (int co = 0; co < cout; ++co) {
        double* dst = out[b].data.data() + (static_cast<std::size_t>(g) * cout + co) * positions;
        for (std::size_t p = 0; p < positions; ++p)
          dst[p] = rectify ? relu(y(static_cast<Eigen::Index>(b * positions + p), co) + bias[co])
                           : y(static_cast<Eigen::Index>(b * positions + p), co) + bias[co];
      }
  }
  return out;
}

}  // namespace detail

/// One grouped convolution + bias + ReLU over a batch of equally shaped
/// inputs, as one GEMM per group.
inline std::vector<EncodedTensor> conv_forward(const SparseConvLayer& layer, const std::vector<EncodedTensor>& in) {
  return detail::conv(layer, in, true);
}

/// Same without the ReLU.
inline std::vector<EncodedTensor> conv_preactivation(const SparseConvLayer& layer,
                                                     const std::vector<EncodedTensor>& in) {
  return detail::conv(layer, in, false);
}

inline EncodedTensor conv_forward(const SparseConvLayer& layer, const EncodedTensor& in) {
  return std::move(conv_forward(layer, std::vector<EncodedTensor>{in}).front());
}

/// Maps the last layer's 1x1 output channels onto the output grid: channel
/// a * m_x m_y + px * m_y + py lands at (ax * m_x + px, ay * m_y + py), with
/// (ax, ay) the Morton-decoded finest A box a.
inline EncodedTensor unreshape_output(const EncodedTensor& channels, int L, int m_x, int m_y) {
  const long expected = (1L << (2 * L)) * m_x * m_y;
  if (channels.height != 1 || channels.width != 1 || channels.channels != expected)
    throw InvalidArgument("unreshape_output: expected " + std::to_string(expected) +
                          " complex channels at 1x1, got " + std::to_string(channels.channels) + " at " +
                          std::to_string(channels.height) + "x" + std::to_string(channels.width));
  EncodedTensor grid(1, m_x << L, m_y << L);
  const int per_box = m_x * m_y;
  for (int c = 0; c < channels.channels; ++c) {
    const auto [ax, ay] = morton_decode(c / per_box, L);
    const int local = c % per_box;
    const int x = ax * m_x + local / m_y, y = ay * m_y + local % m_y;
    for (int k = 0; k < 4; ++k) grid.at(k, x, y) = channels.at(4 * c + k, 0, 0);
  }
  return grid;
}

/// Inverse of unreshape_output.
inline EncodedTensor reshape_output(const EncodedTensor& grid, int L, int m_x, int m_y) {
  if (grid.channels != 1 || grid.height != (m_x << L) || grid.width != (m_y << L))
    throw InvalidArgument("reshape_output: grid shape does not match (L, m)");
  EncodedTensor channels(static_cast<int>((1L << (2 * L)) * m_x * m_y), 1, 1);
  const int per_box = m_x * m_y;
  for (int c = 0; c < channels.channels; ++c) {
    const auto [ax, ay] = morton_decode(c / per_box, L);
    const int local = c % per_box;
    const int x = ax * m_x + local / m_y, y = ay * m_y + local % m_y;
    for (int k = 0; k < 4; ++k) channels.at(4 * c + k, 0, 0) = grid.at(k, x, y);
  }
  return channels;
}

inline void check_input(const ButterflyNet2D& net, const EncodedTensor& input) {
  const NetConfig& c = net.config;
  if (input.channels != 1 || input.height != c.input_height() || input.width != c.input_width())
    throw InvalidArgument("forward: expected 1 complex channel of " + std::to_string(c.input_height()) + "x" +
                          std::to_string(c.input_width()) + ", got " + std::to_string(input.channels) +
                          " channel(s) of " + std::to_string(input.height) + "x" + std::to_string(input.width));
}

/// Network output on the (m_x 2^L) x (m_y 2^L) grid, still 4-real encoded.
inline std::vector<EncodedTensor> forward(const ButterflyNet2D& net, std::vector<EncodedTensor> batch) {
  for (const auto& t : batch) check_input(net, t);
  for (const auto& layer : net.layers) batch = conv_forward(layer, batch);
  for (auto& t : batch) t = unreshape_output(t, net.config.L, net.config.m_x, net.config.m_y);
  return batch;
}

inline EncodedTensor forward(const ButterflyNet2D& net, const EncodedTensor& input) {
  return std::move(forward(net, std::vector<EncodedTensor>{input}).front());
}

/// Convenience: encode, run, decode.
inline ComplexGrid apply(const ButterflyNet2D& net, const ComplexGrid& x) {
  return decode_grid(forward(net, encode_grid(x)));
}

namespace detail {

inline bool has_bias(const ButterflyNet2D& net) {
  for (const auto& l : net.layers)
    for (double b : l.bias)
      if (b != 0.0) return true;
  return false;
}

/// Activations of a batch kept only at spatial positions that can be
/// nonzero: position -> (batch x real channels).  Valid when every bias is
/// zero, since then an all-zero patch maps to zero.
using PositionBlocks = std::map<std::pair<int, int>, RowMatrix>;

inline PositionBlocks sparse_layer(const SparseConvLayer& layer, const PositionBlocks& in, Eigen::Index nb) {
  std::set<std::pair<int, int>> targets;
  for (const auto& [pos, block] : in) targets.insert({pos.first / layer.stride_h, pos.second / layer.stride_w});
  const int cin = layer.in_real(), cout = layer.out_real(), kh = layer.kernel_h, kw = layer.kernel_w;
  PositionBlocks out;
  RowMatrix x(nb, layer.fan_in()), y;
  for (const auto& t : targets) {
    std::vector<const RowMatrix*> taps(static_cast<std::size_t>(kh) * kw, nullptr);
    for (int a = 0; a < kh; ++a)
      for (int b = 0; b < kw; ++b) {
        const auto it = in.find({t.first * layer.stride_h + a, t.second * layer.stride_w + b});
        if (it != in.end()) taps[static_cast<std::size_t>(a) * kw + b] = &it->second;
      }
    RowMatrix& o = out[t];
    o.resize(nb, static_cast<Eigen::Index>(layer.groups) * cout);
    for (int g = 0; g < layer.groups; ++g) {
      for (int ci = 0; ci < cin; ++ci)
        for (int k = 0; k < kh * kw; ++k) {
          const Eigen::Index col = static_cast<Eigen::Index>(ci) * kh * kw + k;
          if (taps[static_cast<std::size_t>(k)])
            x.col(col) = taps[static_cast<std::size_t>(k)]->col(static_cast<Eigen::Index>(g) * cin + ci);
          else
            x.col(col).setZero();
        }
      y.noalias() = x * group_weight(layer, g);
      o.middleCols(static_cast<Eigen::Index>(g) * cout, cout) = y.cwiseMax(0.0);
    }
  }
  return out;
}

}  // namespace detail

/// Matrix of decode(forward(encode(e_c))) over all input basis vectors e_c.
/// Only equals the network map when the network is linear (zero biases and
/// canonical activations, as at Fourier initialization).  Columns are
/// processed in input tiles; without biases only the positions a tile can
/// reach are computed.
inline ComplexMatrix materialize_matrix(const ButterflyNet2D& net, int threads = 1) {
  const NetConfig& c = net.config;
  const int h = c.input_height(), w = c.input_width();
  const int n_out = c.output_height() * c.output_width();
  ComplexMatrix out(n_out, h * w);
  const bool sparse = !detail::has_bias(net);
  const int th = std::min(h, sparse ? 4 : 2 * c.omega_x), tw = std::min(w, sparse ? 8 : 2 * c.omega_y);
  const int tiles_x = (h + th - 1) / th, tiles_y = (w + tw - 1) / tw;
  parallel_for(tiles_x * tiles_y, threads, [&](int tile) {
    const int x0 = (tile / tiles_y) * th, y0 = (tile % tiles_y) * tw;
    std::vector<int> cols;
    for (int i = x0; i < std::min(h, x0 + th); ++i)
      for (int j = y0; j < std::min(w, y0 + tw); ++j) cols.push_back(i * w + j);
    const auto nb = static_cast<Eigen::Index>(cols.size());
    std::vector<EncodedTensor> ys;
    if (sparse) {
      detail::PositionBlocks blocks;
      for (Eigen::Index b = 0; b < nb; ++b) {
        auto& blk = blocks[{cols[static_cast<std::size_t>(b)] / w, cols[static_cast<std::size_t>(b)] % w}];
        if (blk.size() == 0) blk = detail::RowMatrix::Zero(nb, 4);
        blk(b, 0) = 1.0;
      }
      for (const auto& layer : net.layers) blocks = detail::sparse_layer(layer, blocks, nb);
      const detail::RowMatrix& last = blocks.begin()->second;
      const int channels = static_cast<int>(last.cols() / 4);
      for (Eigen::Index b = 0; b < nb; ++b) {
        EncodedTensor t(channels, 1, 1);
        std::copy(last.row(b).data(), last.row(b).data() + last.cols(), t.data.begin());
        ys.push_back(unreshape_output(t, c.L, c.m_x, c.m_y));
      }
    } else {
      std::vector<EncodedTensor> batch;
      for (int col : cols) {
        EncodedTensor e(1, h, w);
        e.at(0, col / w, col % w) = 1.0;
        batch.push_back(std::move(e));
      }
      ys = forward(net, std::move(batch));
    }
    for (std::size_t b = 0; b < cols.size(); ++b) {
      const ComplexGrid y = decode_grid(ys[b]);
      for (int row = 0; row < n_out; ++row) out(row, cols[b]) = y.values[static_cast<std::size_t>(row)];
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Parameter counting

struct LayerCount {
  long weights = 0;        // stored (structurally nonzero) weights
  long biases = 0;
  long formula_weights = 0;  // closed form
  long formula_biases = 0;
  long dense_weights = 0;  // same layer with fully connected channels
  long dense_biases = 0;
};

struct ParamReport {
  std::vector<LayerCount> layers;
  long total = 0;
  long formula_total = 0;
  long dense_total = 0;
  long recursion_weight_sum = 0;
  long recursion_bias_sum = 0;
  long recursion_weight_closed_form = 0;  // (4^(L+4) - 4^5) r^4 / 3
  long recursion_bias_closed_form = 0;    // (4^(L+2) - 4^3) r^2 / 3
  long closed_form_dense_total = 0;       // dense-CNN total from the closed form

  [[nodiscard]] double dense_ratio() const { return static_cast<double>(dense_total) / total; }
};

inline long pow4(int e) { return 1L << (2 * e); }

inline ParamReport param_count(const NetConfig& config) {
  config.validate();
  const ButterflyNet2D shape = [&] {
    // Shapes only; weights of the structural build are counted, not touched.
    ButterflyNet2D net{config, {}};
    const int r2 = config.r * config.r;
    net.layers.reserve(static_cast<std::size_t>(config.L) + 1);
    auto shell = [](int g, int in_c, int out_c, int kh, int kw) {
      SparseConvLayer s;
      s.groups = g, s.in_per_group = in_c, s.out_per_group = out_c;
      s.kernel_h = s.stride_h = kh, s.kernel_w = s.stride_w = kw;
      return s;
    };
    net.layers.push_back(shell(1, 1, 4 * r2, config.omega_x, config.omega_y));
    for (int l = 1; l < config.L; ++l) net.layers.push_back(shell(1 << (2 * l), r2, 4 * r2, 2, 2));
    net.layers.push_back(shell(1 << (2 * config.L), r2, config.m_x * config.m_y, 1, 1));
    return net;
  }();

  const long r = config.r, r2 = r * r, r4 = r2 * r2;
  const long wxy = static_cast<long>(config.omega_x) * config.omega_y;
  const long mm = static_cast<long>(config.m_x) * config.m_y;
  const int L = config.L;
  ParamReport rep;
  for (int l = 0; l <= L; ++l) {
    const SparseConvLayer& s = shape.layers[static_cast<std::size_t>(l)];
    LayerCount c;
    const long taps = static_cast<long>(s.kernel_h) * s.kernel_w;
    c.weights = static_cast<long>(s.groups) * s.in_real() * s.out_real() * taps;
    c.biases = static_cast<long>(s.groups) * s.out_real();
    c.dense_weights = static_cast<long>(s.groups) * s.in_real() * s.groups * s.out_real() * taps;
    c.dense_biases = c.biases;
    if (l == 0) {
      c.formula_weights = 64 * r2 * wxy;
      c.formula_biases = 16 * r2;
    } else if (l < L) {
      c.formula_weights = pow4(l + 4) * r4;
      c.formula_biases = pow4(l + 2) * r2;
      rep.recursion_weight_sum += c.weights;
      rep.recursion_bias_sum += c.biases;
    } else {
      c.formula_weights = pow4(L + 2) * r2 * mm;
      c.formula_biases = pow4(L + 1) * mm;
    }
    rep.total += c.weights + c.biases;
    rep.formula_total += c.formula_weights + c.formula_biases;
    rep.dense_total += c.dense_weights + c.dense_biases;
    rep.layers.push_back(c);
  }
  rep.recursion_weight_closed_form = (pow4(L + 4) - pow4(5)) * r4 / 3;
  rep.recursion_bias_closed_form = (pow4(L + 2) - pow4(3)) * r2 / 3;
  rep.closed_form_dense_total = 16 * r2 * (1 + 4 * wxy) + (pow4(L + 2) - pow4(3)) / 3 +
                          (pow4(2 * L + 8) - pow4(6)) / 15 + pow4(L + 1) * mm * (1 + 4 * r2);
  return rep;
}

inline ParamReport param_count(const ButterflyNet2D& net) {
  // Counts taken from the allocated arrays rather than from the shapes.
  ParamReport rep = param_count(net.config);
  rep.total = rep.recursion_weight_sum = rep.recursion_bias_sum = 0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    LayerCount& c = rep.layers[l];
    c.weights = static_cast<long>(net.layers[l].weight.size());
    c.biases = static_cast<long>(net.layers[l].bias.size());
    rep.total += c.weights + c.biases;
    if (l > 0 && l + 1 < net.layers.size()) {
      rep.recursion_weight_sum += c.weights;
      rep.recursion_bias_sum += c.biases;
    }
  }
  return rep;
}

}  // namespace bfnet
