#pragma once
// Reference implementations in native complex arithmetic: the exact O(N^2)
// 2D DFT/IDFT and the three-stage butterfly approximation.

#include <cmath>
#include <numbers>
#include <vector>

#include "bfnet/geometry.hpp"
#include "bfnet/kernel_math.hpp"
#include "bfnet/matrix.hpp"

namespace bfnet {

namespace detail {
/// table[k] = exp(sign * 2 pi i k / n); exponents are reduced mod n exactly.
inline std::vector<Complex> twiddles(int n, double sign) {
  std::vector<Complex> t(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    t[static_cast<std::size_t>(k)] = std::polar(1.0, sign * 2.0 * std::numbers::pi * k / n);
  return t;
}

inline Complex phase(double sign, double x) { return std::polar(1.0, sign * 2.0 * std::numbers::pi * x); }
}  // namespace detail

/// u(xi) = sum_t exp(-2 pi i xi . t) x(t) over t = (i/nx, j/ny), for integer
/// frequencies xi in [0, kx_max) x [0, ky_max).
inline FreqSignal dft2d_exact(const GridSignal& x, int kx_max, int ky_max) {
  FreqSignal u(kx_max, ky_max);
  const auto tx = detail::twiddles(x.nx, -1.0);
  const auto ty = detail::twiddles(x.ny, -1.0);
  for (int a = 0; a < kx_max; ++a)
    for (int b = 0; b < ky_max; ++b) {
      Complex acc{};
      for (int i = 0; i < x.nx; ++i) {
        const Complex wx = tx[static_cast<std::size_t>((static_cast<long>(a) * i) % x.nx)];
        for (int j = 0; j < x.ny; ++j)
          acc += wx * ty[static_cast<std::size_t>((static_cast<long>(b) * j) % x.ny)] * x(i, j);
      }
      u(a, b) = acc;
    }
  return u;
}

/// x(t) = (1/(kx_max*ky_max)) sum_xi exp(+2 pi i xi . t) u(xi) at t = (i/nx, j/ny).
inline GridSignal idft2d_exact(const FreqSignal& u, int nx, int ny) {
  GridSignal x(nx, ny);
  const auto tx = detail::twiddles(nx, 1.0);
  const auto ty = detail::twiddles(ny, 1.0);
  const double scale = 1.0 / (static_cast<double>(u.nx) * u.ny);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      Complex acc{};
      for (int a = 0; a < u.nx; ++a) {
        const Complex wx = tx[static_cast<std::size_t>((static_cast<long>(a) * i) % nx)];
        for (int b = 0; b < u.ny; ++b)
          acc += wx * ty[static_cast<std::size_t>((static_cast<long>(b) * j) % ny)] * u(a, b);
      }
      x(i, j) = scale * acc;
    }
  return x;
}

/// Exact transform matrix; column index is the row-major input position,
/// row index the row-major output position.
inline ComplexMatrix exact_transform_matrix(int n_in_x, int n_in_y, int n_out_x, int n_out_y,
                                            Direction d) {
  ComplexMatrix f(n_out_x * n_out_y, n_in_x * n_in_y);
  // forward: exp(-2 pi i j i'/n_in); inverse: exp(+2 pi i i' j / n_out) / N_in.
  const int px = d == Direction::forward ? n_in_x : n_out_x;
  const int py = d == Direction::forward ? n_in_y : n_out_y;
  const double sign = d == Direction::forward ? -1.0 : 1.0;
  const double scale = d == Direction::forward ? 1.0 : 1.0 / (static_cast<double>(n_in_x) * n_in_y);
  const auto tx = detail::twiddles(px, sign);
  const auto ty = detail::twiddles(py, sign);
  for (int a = 0; a < n_out_x; ++a)
    for (int b = 0; b < n_out_y; ++b) {
      const int row = a * n_out_y + b;
      for (int i = 0; i < n_in_x; ++i)
        for (int j = 0; j < n_in_y; ++j)
          f(row, i * n_in_y + j) = scale *
                                   tx[static_cast<std::size_t>((static_cast<long>(a) * i) % px)] *
                                   ty[static_cast<std::size_t>((static_cast<long>(b) * j) % py)];
    }
  return f;
}

/// Butterfly expansion coefficients after stage `level`: indexed by the A box
/// (na x na boxes at level `level`), the B box (nb x nb boxes at level
/// L - level) and the Chebyshev node (kx, ky).
struct CoefficientTensor {
  int level = 0;
  int r = 0;
  int na = 0;
  int nb = 0;
  std::vector<Complex> lambda;

  CoefficientTensor() = default;
  CoefficientTensor(int level_, int r_, int na_, int nb_)
      : level(level_), r(r_), na(na_), nb(nb_),
        lambda(static_cast<std::size_t>(na_) * na_ * nb_ * nb_ * r_ * r_) {}

  [[nodiscard]] std::size_t index(int ax, int ay, int bx, int by, int kx, int ky) const {
    return ((((static_cast<std::size_t>(ax) * na + ay) * nb + bx) * nb + by) * r + kx) * r + ky;
  }
  Complex& at(int ax, int ay, int bx, int by, int kx, int ky) {
    return lambda[index(ax, ay, bx, by, kx, ky)];
  }
  [[nodiscard]] const Complex& at(int ax, int ay, int bx, int by, int kx, int ky) const {
    return lambda[index(ax, ay, bx, by, kx, ky)];
  }
};

/// Stage 0: transfer from the uniform grid of every finest B box to its
/// Chebyshev nodes, for each of the 2x2 coarsest A boxes.
inline CoefficientTensor butterfly_interpolate(const ComplexGrid& x, const TransformGeometry& geo, int r) {
  if (x.nx != geo.x.n_in || x.ny != geo.y.n_in)
    throw InvalidArgument("butterfly_interpolate: input size does not match geometry");
  const ChebGrid cheb = cheb_points(r);
  const int L = geo.L;
  const int nb = boxes_per_axis(Side::B, L);
  CoefficientTensor out(0, r, 2, nb);
  const double sign = geo.sign();

  for (int ax = 0; ax < 2; ++ax)
    for (int ay = 0; ay < 2; ++ay) {
      const auto xi0 = geo.box(DomainIndex{0, ax, ay, Side::A}).center();
      for (int bx = 0; bx < nb; ++bx)
        for (int by = 0; by < nb; ++by) {
          const DomainBox box = geo.box(DomainIndex{L, bx, by, Side::B});
          for (int kx = 0; kx < r; ++kx)
            for (int ky = 0; ky < r; ++ky) {
              const auto tk = box.from_reference(cheb[kx], cheb[ky]);
              Complex acc{};
              for (int i = bx * geo.x.omega; i < (bx + 1) * geo.x.omega; ++i)
                for (int j = by * geo.y.omega; j < (by + 1) * geo.y.omega; ++j) {
                  const double tx = geo.x.source(i), ty = geo.y.source(j);
                  const auto z = box.to_reference(tx, ty);
                  const double phase = xi0[0] * (tx - tk[0]) + xi0[1] * (ty - tk[1]);
                  acc += detail::phase(sign, phase) * lagrange2d_eval(cheb, kx, ky, z[0], z[1]) * x(i, j);
                }
              out.at(ax, ay, bx, by, kx, ky) = acc;
            }
        }
    }
  return out;
}

/// Stage l (1 <= l <= L-1): Chebyshev nodes of the four child B boxes to the
/// Chebyshev nodes of their parent, for every child A box.
inline CoefficientTensor butterfly_recurse(const CoefficientTensor& in, int level,
                                           const TransformGeometry& geo) {
  const int L = geo.L;
  if (level < 1 || level > L - 1) throw InvalidArgument("butterfly_recurse: level outside [1, L-1]");
  if (in.level != level - 1)
    throw InvalidArgument("butterfly_recurse: expected coefficients at level " +
                          std::to_string(level - 1) + ", got " + std::to_string(in.level));
  const int r = in.r;
  const ChebGrid cheb = cheb_points(r);
  const int na = boxes_per_axis(Side::A, level);
  const int b_level = L - level;
  const int nb = boxes_per_axis(Side::B, b_level);
  if (in.na * 2 != na || in.nb != boxes_per_axis(Side::B, b_level + 1))
    throw InvalidArgument("butterfly_recurse: coefficient tensor shape mismatch");
  CoefficientTensor out(level, r, na, nb);
  const double sign = geo.sign();
  const auto ur = static_cast<std::size_t>(r);

  std::vector<Complex> px(ur), py(ur), mu(ur * ur), tmp(ur * ur), acc(ur * ur);
  std::vector<double> lx(ur * ur), ly(ur * ur);  // [k_out][k_in]

  for (int ax = 0; ax < na; ++ax)
    for (int ay = 0; ay < na; ++ay) {
      const auto xi0 = geo.box(DomainIndex{level, ax, ay, Side::A}).center();
      for (int bx = 0; bx < nb; ++bx)
        for (int by = 0; by < nb; ++by) {
          const DomainIndex pidx{b_level, bx, by, Side::B};
          const DomainBox pbox = geo.box(pidx);
          std::fill(acc.begin(), acc.end(), Complex{});
          for (const DomainIndex& c : children(pidx, L)) {
            const DomainBox cbox = geo.box(c);
            for (int k = 0; k < r; ++k) {
              const auto t = cbox.from_reference(cheb[k], cheb[k]);
              const auto z = pbox.to_reference(t[0], t[1]);
              px[static_cast<std::size_t>(k)] = detail::phase(sign, xi0[0] * t[0]);
              py[static_cast<std::size_t>(k)] = detail::phase(sign, xi0[1] * t[1]);
              for (int ko = 0; ko < r; ++ko) {
                lx[static_cast<std::size_t>(ko) * ur + k] = lagrange_eval(cheb, ko, z[0]);
                ly[static_cast<std::size_t>(ko) * ur + k] = lagrange_eval(cheb, ko, z[1]);
              }
            }
            for (int kx = 0; kx < r; ++kx)
              for (int ky = 0; ky < r; ++ky)
                mu[static_cast<std::size_t>(kx) * ur + ky] =
                    px[static_cast<std::size_t>(kx)] * py[static_cast<std::size_t>(ky)] *
                    in.at(ax / 2, ay / 2, c.ix, c.iy, kx, ky);
            // acc += Lx * mu * Ly^T, one axis at a time.
            for (std::size_t ko = 0; ko < ur; ++ko)
              for (std::size_t ky = 0; ky < ur; ++ky) {
                Complex s{};
                for (std::size_t kx = 0; kx < ur; ++kx) s += lx[ko * ur + kx] * mu[kx * ur + ky];
                tmp[ko * ur + ky] = s;
              }
            for (std::size_t kox = 0; kox < ur; ++kox)
              for (std::size_t koy = 0; koy < ur; ++koy) {
                Complex s{};
                for (std::size_t ky = 0; ky < ur; ++ky) s += ly[koy * ur + ky] * tmp[kox * ur + ky];
                acc[kox * ur + koy] += s;
              }
          }
          for (int kx = 0; kx < r; ++kx)
            for (int ky = 0; ky < r; ++ky) {
              const auto t = pbox.from_reference(cheb[kx], cheb[ky]);
              out.at(ax, ay, bx, by, kx, ky) =
                  detail::phase(-sign, xi0[0] * t[0] + xi0[1] * t[1]) *
                  acc[static_cast<std::size_t>(kx) * ur + ky];
            }
        }
    }
  return out;
}

/// Final stage: evaluate the kernel between the Chebyshev nodes of the root
/// B box and the uniform output grid of each finest A box.  Expects the
/// coefficients produced by stage L-1, whose B side is the root box.
inline ComplexGrid butterfly_apply_kernel(const CoefficientTensor& in, const TransformGeometry& geo) {
  const int L = geo.L;
  if (in.level != L - 1)
    throw InvalidArgument("butterfly_apply_kernel: expected coefficients at level " +
                          std::to_string(L - 1) + ", got " + std::to_string(in.level));
  if (in.nb != 1 || in.na != (1 << L))
    throw InvalidArgument("butterfly_apply_kernel: coefficient tensor shape mismatch");
  const int r = in.r;
  const ChebGrid cheb = cheb_points(r);
  const DomainBox root = geo.box(DomainIndex{1, 0, 0, Side::B});
  const double sign = geo.sign();
  const double scale = geo.scale();
  ComplexGrid u(geo.x.n_out, geo.y.n_out);
  const auto ur = static_cast<std::size_t>(r);
  std::vector<Complex> ex(ur), ey(ur);
  for (int ax = 0; ax < in.na; ++ax)
    for (int ay = 0; ay < in.na; ++ay)
      for (int jx = ax * geo.x.m; jx < (ax + 1) * geo.x.m; ++jx)
        for (int jy = ay * geo.y.m; jy < (ay + 1) * geo.y.m; ++jy) {
          const double tau_x = geo.x.target(jx), tau_y = geo.y.target(jy);
          for (int k = 0; k < r; ++k) {
            const auto t = root.from_reference(cheb[k], cheb[k]);
            ex[static_cast<std::size_t>(k)] = detail::phase(sign, tau_x * t[0]);
            ey[static_cast<std::size_t>(k)] = detail::phase(sign, tau_y * t[1]);
          }
          Complex acc{};
          for (int kx = 0; kx < r; ++kx) {
            Complex inner{};
            for (int ky = 0; ky < r; ++ky) inner += ey[static_cast<std::size_t>(ky)] * in.at(ax, ay, 0, 0, kx, ky);
            acc += ex[static_cast<std::size_t>(kx)] * inner;
          }
          u(jx, jy) = scale * acc;
        }
  return u;
}

/// Full three-stage butterfly for an explicit geometry.
inline ComplexGrid butterfly_transform(const ComplexGrid& x, const TransformGeometry& geo, int r) {
  CoefficientTensor lambda = butterfly_interpolate(x, geo, r);
  for (int level = 1; level <= geo.L - 1; ++level) lambda = butterfly_recurse(lambda, level, geo);
  return butterfly_apply_kernel(lambda, geo);
}

/// Butterfly approximation of the 2D DFT (forward) or IDFT (inverse) of x,
/// producing an n_out_x by n_out_y grid.
inline ComplexGrid butterfly_forward(const ComplexGrid& x, int L, int r, Direction direction,
                                     int n_out_x, int n_out_y) {
  return butterfly_transform(x, make_geometry(L, x.nx, x.ny, n_out_x, n_out_y, direction), r);
}

inline ComplexGrid butterfly_forward(const ComplexGrid& x, int L, int r, Direction direction) {
  return butterfly_forward(x, L, r, direction, x.nx, x.ny);
}

/// Dense matrix of the reference butterfly, one basis input per column.
inline ComplexMatrix butterfly_matrix(const TransformGeometry& geo, int r) {
  const int n_in = geo.x.n_in * geo.y.n_in;
  ComplexMatrix out(geo.x.n_out * geo.y.n_out, n_in);
  ComplexGrid e(geo.x.n_in, geo.y.n_in);
  for (int c = 0; c < n_in; ++c) {
    e.values[static_cast<std::size_t>(c)] = 1.0;
    const ComplexGrid col = butterfly_transform(e, geo, r);
    for (int row = 0; row < out.rows; ++row) out(row, c) = col.values[static_cast<std::size_t>(row)];
    e.values[static_cast<std::size_t>(c)] = 0.0;
  }
  return out;
}

}  // namespace bfnet
