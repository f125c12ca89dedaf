#pragma once
// A complex number as four nonnegative reals [(Re)+, (Im)+, (Re)-, (Im)-].
// Complex multiplication becomes a 4x4 real matrix followed by ReLU, which is
// exact as long as the input is in canonical form.

#include <algorithm>
#include <array>
#include <span>
#include <vector>

#include "bfnet/signal.hpp"

namespace bfnet {

struct Encoded4 {
  std::array<double, 4> v{0.0, 0.0, 0.0, 0.0};

  /// At most one of each +/- pair is nonzero and all entries are >= 0.
  [[nodiscard]] bool canonical() const {
    return v[0] >= 0 && v[1] >= 0 && v[2] >= 0 && v[3] >= 0 && v[0] * v[2] == 0.0 &&
           v[1] * v[3] == 0.0;
  }
  friend bool operator==(const Encoded4&, const Encoded4&) = default;
};

using Matrix4 = std::array<std::array<double, 4>, 4>;

inline Encoded4 encode(Complex z) {
  const double re = z.real(), im = z.imag();
  return Encoded4{{std::max(re, 0.0), std::max(im, 0.0), std::max(-re, 0.0), std::max(-im, 0.0)}};
}

inline Complex decode(const Encoded4& e) { return {e.v[0] - e.v[2], e.v[1] - e.v[3]}; }

inline Matrix4 weight_matrix(Complex a) {
  const double re = a.real(), im = a.imag();
  return Matrix4{{{re, -im, -re, im}, {im, re, -im, -re}, {-re, im, re, -im}, {-im, -re, im, re}}};
}

inline std::array<double, 4> apply(const Matrix4& m, const Encoded4& x) {
  std::array<double, 4> out{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out[i] += m[i][j] * x.v[j];
  return out;
}

inline double relu(double x) { return x > 0.0 ? x : 0.0; }

inline void relu_inplace(std::span<double> t) {
  for (double& x : t) x = relu(x);
}

inline std::vector<double> relu(std::span<const double> t) {
  std::vector<double> out(t.begin(), t.end());
  relu_inplace(out);
  return out;
}

inline Encoded4 relu(const std::array<double, 4>& pre) {
  return Encoded4{{relu(pre[0]), relu(pre[1]), relu(pre[2]), relu(pre[3])}};
}

/// Real activation tensor: `channels` complex channels, each expanded to 4
/// consecutive real channels, stored channel-major as (4*channels, height, width).
struct EncodedTensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  EncodedTensor() = default;
  EncodedTensor(int c, int h, int w)
      : channels(c), height(h), width(w),
        data(static_cast<std::size_t>(4) * c * h * w, 0.0) {
    if (c < 1 || h < 1 || w < 1) throw InvalidArgument("EncodedTensor: dimensions must be >= 1");
  }

  [[nodiscard]] int real_channels() const { return 4 * channels; }
  [[nodiscard]] std::size_t plane() const { return static_cast<std::size_t>(height) * width; }
  double& at(int real_channel, int i, int j) {
    return data[real_channel * plane() + static_cast<std::size_t>(i) * width + j];
  }
  [[nodiscard]] double at(int real_channel, int i, int j) const {
    return data[real_channel * plane() + static_cast<std::size_t>(i) * width + j];
  }
  [[nodiscard]] Complex complex_at(int c, int i, int j) const {
    return {at(4 * c, i, j) - at(4 * c + 2, i, j), at(4 * c + 1, i, j) - at(4 * c + 3, i, j)};
  }
};

/// One complex channel holding the whole grid.  Real grids are simply
/// complex grids with zero imaginary part, i.e. channels [x+, 0, x-, 0].
inline EncodedTensor encode_grid(const ComplexGrid& g) {
  EncodedTensor t(1, g.nx, g.ny);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const Encoded4 e = encode(g(i, j));
      for (int k = 0; k < 4; ++k) t.at(k, i, j) = e.v[k];
    }
  return t;
}

/// Decodes complex channel 0; valid for non-canonical tensors as well.
inline ComplexGrid decode_grid(const EncodedTensor& t) {
  if (t.channels != 1) throw InvalidArgument("decode_grid: expected one complex channel");
  ComplexGrid g(t.height, t.width);
  for (int i = 0; i < t.height; ++i)
    for (int j = 0; j < t.width; ++j) g(i, j) = t.complex_at(0, i, j);
  return g;
}

}  // namespace bfnet
