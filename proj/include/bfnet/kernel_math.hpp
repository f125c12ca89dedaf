#pragma once
// Chebyshev interpolation on [-1/2, 1/2] and the recursive 4-partition of
// the frequency square [0,K)^2 (side A) and the time square [0,1)^2 (side B).

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "bfnet/error.hpp"

namespace bfnet {

/// Chebyshev points of order r, stored in decreasing order:
/// points[i] = cos((2i+1) pi / (2r)) / 2.
struct ChebGrid {
  int r = 0;
  std::vector<double> points;

  [[nodiscard]] int order() const { return r; }
  [[nodiscard]] double operator[](int i) const { return points[static_cast<std::size_t>(i)]; }
};

inline ChebGrid cheb_points(int r) {
  if (r < 1) throw InvalidArgument("cheb_points: order must be >= 1, got " + std::to_string(r));
  ChebGrid grid{r, std::vector<double>(static_cast<std::size_t>(r))};
  for (int i = 0; i < r; ++i)
    grid.points[static_cast<std::size_t>(i)] =
        0.5 * std::cos((2.0 * i + 1.0) * std::numbers::pi / (2.0 * r));
  return grid;
}

/// Lagrange basis polynomial for node k, evaluated anywhere on the real line.
inline double lagrange_eval(const ChebGrid& grid, int k, double x) {
  if (k < 0 || k >= grid.r) throw InvalidArgument("lagrange_eval: node index out of range");
  const double zk = grid[k];
  double value = 1.0;
  for (int p = 0; p < grid.r; ++p) {
    if (p == k) continue;
    value *= (x - grid[p]) / (zk - grid[p]);
  }
  return value;
}

inline double lagrange2d_eval(const ChebGrid& grid, int kx, int ky, double x, double y) {
  return lagrange_eval(grid, kx, x) * lagrange_eval(grid, ky, y);
}

/// All r basis values at x, i.e. out[k] = L_k(x).
inline std::vector<double> lagrange_all(const ChebGrid& grid, double x) {
  std::vector<double> out(static_cast<std::size_t>(grid.r));
  for (int k = 0; k < grid.r; ++k) out[static_cast<std::size_t>(k)] = lagrange_eval(grid, k, x);
  return out;
}

/// Half-open axis-aligned box [lo, lo + side).
struct DomainBox {
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> side{1.0, 1.0};

  [[nodiscard]] std::array<double, 2> center() const {
    return {lo[0] + 0.5 * side[0], lo[1] + 0.5 * side[1]};
  }
  [[nodiscard]] bool contains(double x, double y) const {
    return x >= lo[0] && x < lo[0] + side[0] && y >= lo[1] && y < lo[1] + side[1];
  }
  /// Affine map of the box onto [-1/2, 1/2]^2 (the Chebyshev reference frame).
  [[nodiscard]] std::array<double, 2> to_reference(double x, double y) const {
    const auto c = center();
    return {(x - c[0]) / side[0], (y - c[1]) / side[1]};
  }
  [[nodiscard]] std::array<double, 2> from_reference(double zx, double zy) const {
    const auto c = center();
    return {c[0] + side[0] * zx, c[1] + side[1] * zy};
  }
};

enum class Side { A, B };

/// A box of the recursive partition.  For side A, `level` is l and there are
/// 2^(l+1) boxes per axis.  For side B, `level` is the superscript of B^level:
/// 2^(level-1) boxes per axis for level >= 1, and level 0 names the root
/// [0,1)^2 as well (the kernel-application stage writes it that way).
struct DomainIndex {
  int level = 0;
  int ix = 0;
  int iy = 0;
  Side side = Side::A;

  friend bool operator==(const DomainIndex&, const DomainIndex&) = default;
};

inline int boxes_per_axis(Side side, int level) {
  if (level < 0) throw InvalidArgument("boxes_per_axis: negative level");
  if (side == Side::A) return 1 << (level + 1);
  return level <= 1 ? 1 : 1 << (level - 1);
}

namespace detail {
inline void check_index(const DomainIndex& idx, int L) {
  if (idx.level < 0 || idx.level > L)
    throw InvalidArgument("domain index: level " + std::to_string(idx.level) +
                          " outside [0, " + std::to_string(L) + "]");
  const int n = boxes_per_axis(idx.side, idx.level);
  if (idx.ix < 0 || idx.ix >= n || idx.iy < 0 || idx.iy >= n)
    throw InvalidArgument("domain index: (" + std::to_string(idx.ix) + ", " +
                          std::to_string(idx.iy) + ") outside [" + std::to_string(n) + "]^2");
}
}  // namespace detail

/// Box of `idx`.  K is the extent of the frequency square; for non-square
/// frequency domains use the two-extent overload.
inline DomainBox subdomain(const DomainIndex& idx, double Kx, double Ky, int L) {
  detail::check_index(idx, L);
  const int n = boxes_per_axis(idx.side, idx.level);
  const double ex = idx.side == Side::A ? Kx : 1.0;
  const double ey = idx.side == Side::A ? Ky : 1.0;
  const double sx = ex / n;
  const double sy = ey / n;
  return DomainBox{{idx.ix * sx, idx.iy * sy}, {sx, sy}};
}

inline DomainBox subdomain(const DomainIndex& idx, double K, int L) {
  return subdomain(idx, K, K, L);
}

/// The four children in (0,0), (0,1), (1,0), (1,1) order.  Children of the
/// B root (level 0 or 1) live at level 2.
inline std::array<DomainIndex, 4> children(const DomainIndex& idx, int L) {
  detail::check_index(idx, L);
  const int next = (idx.side == Side::B && idx.level == 0) ? 2 : idx.level + 1;
  if (next > L) throw InvalidArgument("children: level would exceed L");
  std::array<DomainIndex, 4> out{};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      out[static_cast<std::size_t>(2 * a + b)] =
          DomainIndex{next, 2 * idx.ix + a, 2 * idx.iy + b, idx.side};
  return out;
}

inline DomainIndex parent(const DomainIndex& idx, int L) {
  detail::check_index(idx, L);
  const int root_level = idx.side == Side::A ? 0 : 1;
  if (idx.level <= root_level) throw InvalidArgument("parent: index is already a root box");
  return DomainIndex{idx.level - 1, idx.ix / 2, idx.iy / 2, idx.side};
}

/// C-free factor gamma^(r^2) / (1 - gamma) of the low-rank bound for a domain
/// pair with side lengths side_a and side_b, gamma = e*pi*side_a*side_b / r^2.
inline double lowrank_error_bound(double side_a, double side_b, int r) {
  if (r < 1) throw InvalidArgument("lowrank_error_bound: r must be >= 1");
  if (side_a < 0.0 || side_b < 0.0) throw InvalidArgument("lowrank_error_bound: negative side");
  const double gamma = std::numbers::e * std::numbers::pi * side_a * side_b / (double(r) * r);
  if (gamma >= 1.0)
    throw BoundInapplicable("lowrank_error_bound: gamma = " + std::to_string(gamma) + " >= 1");
  return std::pow(gamma, double(r) * r) / (1.0 - gamma);
}

}  // namespace bfnet
