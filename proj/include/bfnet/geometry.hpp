#pragma once
// Sizes, coordinates and kernel sign of one 2D transform instance.
//
// Both directions are written as sum_s exp(sign * 2 pi i tau . s) x(s) with
// sources s on the uniform grid i/n_in of [0,1)^2 and targets tau in the
// square [0, K).  Forward: tau = j (integer frequency), K = n_out.  Inverse:
// the input frequencies xi are rescaled to s = xi/n_in and the output times
// t = j/n_out to tau = t*n_in, so K = n_in.  In both cases the product of
// paired box sides stays constant across levels.
//
// The source-side (B) boxes are cells centred on the samples: the tree
// partitions [-h/2, 1 - h/2)^2 with h = 1/n_in, so a finest box holds its
// omega samples symmetrically about its centre.  Anchoring the boxes at 0
// instead leaves every sample set lopsided toward its box's lower edge and
// roughly doubles the spectral-norm error at r = 6.

#include <string>

#include "bfnet/error.hpp"
#include "bfnet/kernel_math.hpp"
#include "bfnet/signal.hpp"

namespace bfnet {

struct AxisGeometry {
  int n_in = 0;
  int n_out = 0;
  int omega = 0;   // input samples per finest B box
  int m = 0;       // output samples per finest A box
  double extent = 0.0;

  [[nodiscard]] double source(int i) const { return static_cast<double>(i) / n_in; }
  [[nodiscard]] double target(int j) const { return j * extent / n_out; }
  /// Lower edge of the source-side box tree.
  [[nodiscard]] double source_origin() const { return -0.5 / n_in; }
};

struct TransformGeometry {
  int L = 0;
  AxisGeometry x;
  AxisGeometry y;
  Direction direction = Direction::forward;

  [[nodiscard]] double sign() const { return direction == Direction::forward ? -1.0 : 1.0; }
  /// Inverse transforms are normalised by the number of input frequencies.
  [[nodiscard]] double scale() const {
    return direction == Direction::forward ? 1.0 : 1.0 / (static_cast<double>(x.n_in) * y.n_in);
  }

  /// A box in frequency (Side::A, over [0, K)) or source (Side::B, shifted
  /// onto the sample cells) coordinates.
  [[nodiscard]] DomainBox box(const DomainIndex& idx) const {
    DomainBox b = subdomain(idx, x.extent, y.extent, L);
    if (idx.side == Side::B) {
      b.lo[0] += x.source_origin();
      b.lo[1] += y.source_origin();
    }
    return b;
  }
};

namespace detail {
inline AxisGeometry make_axis(int L, int n_in, int n_out, Direction d, const char* axis) {
  const int fine_b = 1 << (L - 1);
  const int fine_a = 1 << L;
  if (n_in < fine_b || n_in % fine_b != 0)
    throw InvalidArgument(std::string("geometry: input size along ") + axis + " (" +
                          std::to_string(n_in) + ") is not omega * 2^(L-1)");
  if (n_out < fine_a || n_out % fine_a != 0)
    throw InvalidArgument(std::string("geometry: output size along ") + axis + " (" +
                          std::to_string(n_out) + ") is not m * 2^L");
  AxisGeometry g;
  g.n_in = n_in;
  g.n_out = n_out;
  g.omega = n_in / fine_b;
  g.m = n_out / fine_a;
  g.extent = d == Direction::forward ? n_out : n_in;
  return g;
}
}  // namespace detail

inline TransformGeometry make_geometry(int L, int n_in_x, int n_in_y, int n_out_x, int n_out_y,
                                       Direction d) {
  if (L < 1 || L > 12) throw InvalidArgument("geometry: L must be in [1, 12]");
  return TransformGeometry{L, detail::make_axis(L, n_in_x, n_out_x, d, "x"),
                           detail::make_axis(L, n_in_y, n_out_y, d, "y"), d};
}

}  // namespace bfnet
