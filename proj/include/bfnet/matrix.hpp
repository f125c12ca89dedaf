#pragma once
// Dense complex matrices and the relative operator-norm discrepancies used to
// score an approximate transform against the exact one.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "bfnet/signal.hpp"

namespace bfnet {

struct ComplexMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<Complex> data;  // row-major

  ComplexMatrix() = default;
  ComplexMatrix(int r, int c)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c)) {
    if (r < 0 || c < 0) throw InvalidArgument("ComplexMatrix: negative shape");
  }

  Complex& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  const Complex& operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

  [[nodiscard]] std::vector<Complex> multiply(const std::vector<Complex>& x) const {
    if (static_cast<int>(x.size()) != cols) throw InvalidArgument("ComplexMatrix::multiply: size mismatch");
    std::vector<Complex> y(static_cast<std::size_t>(rows));
    for (int i = 0; i < rows; ++i) {
      const Complex* row = &data[static_cast<std::size_t>(i) * cols];
      Complex acc{};
      for (int j = 0; j < cols; ++j) acc += row[j] * x[static_cast<std::size_t>(j)];
      y[static_cast<std::size_t>(i)] = acc;
    }
    return y;
  }

  /// y = A^H x
  [[nodiscard]] std::vector<Complex> multiply_adjoint(const std::vector<Complex>& x) const {
    if (static_cast<int>(x.size()) != rows) throw InvalidArgument("ComplexMatrix::multiply_adjoint: size mismatch");
    std::vector<Complex> y(static_cast<std::size_t>(cols));
    for (int i = 0; i < rows; ++i) {
      const Complex* row = &data[static_cast<std::size_t>(i) * cols];
      const Complex xi = x[static_cast<std::size_t>(i)];
      for (int j = 0; j < cols; ++j) y[static_cast<std::size_t>(j)] += std::conj(row[j]) * xi;
    }
    return y;
  }
};

/// Maximum absolute column sum.
inline double norm1(const ComplexMatrix& a) {
  std::vector<double> col(static_cast<std::size_t>(a.cols), 0.0);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) col[static_cast<std::size_t>(j)] += std::abs(a(i, j));
  return col.empty() ? 0.0 : *std::max_element(col.begin(), col.end());
}

/// Maximum absolute row sum.
inline double norm_inf(const ComplexMatrix& a) {
  double best = 0.0;
  for (int i = 0; i < a.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < a.cols; ++j) s += std::abs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

struct PowerIterationOptions {
  double tolerance = 1e-6;  // relative change of the eigenvalue estimate
  int max_iterations = 10000;
  std::uint64_t seed = 12345;
};

/// Largest singular value via power iteration on A^H A.
inline double spectral_norm(const ComplexMatrix& a, const PowerIterationOptions& opt = {}) {
  if (a.rows == 0 || a.cols == 0) return 0.0;
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Complex> v(static_cast<std::size_t>(a.cols));
  for (auto& x : v) x = {normal(rng), normal(rng)};

  auto normalize = [](std::vector<Complex>& x) {
    double n = 0.0;
    for (const auto& e : x) n += std::norm(e);
    n = std::sqrt(n);
    if (n > 0.0)
      for (auto& e : x) e /= n;
    return n;
  };
  normalize(v);

  double estimate = 0.0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const auto w = a.multiply(v);
    double sigma2 = 0.0;
    for (const auto& e : w) sigma2 += std::norm(e);
    if (sigma2 == 0.0) return 0.0;
    v = a.multiply_adjoint(w);
    normalize(v);
    if (it > 0 && std::abs(sigma2 - estimate) <= opt.tolerance * sigma2) {
      estimate = sigma2;
      break;
    }
    estimate = sigma2;
  }
  return std::sqrt(estimate);
}

struct EpsilonMetrics {
  double eps1 = 0.0;
  double eps2 = 0.0;
  double eps_inf = 0.0;
};

/// eps_p = ||B - F||_p / ||F||_p for p = 1, 2, inf.  B is taken by value and
/// overwritten with the difference, so callers can move a large matrix in.
inline EpsilonMetrics epsilon_metrics(ComplexMatrix approx, const ComplexMatrix& exact,
                                      const PowerIterationOptions& opt = {}) {
  if (approx.rows != exact.rows || approx.cols != exact.cols)
    throw InvalidArgument("epsilon_metrics: shape mismatch");
  const double f1 = norm1(exact), f2 = spectral_norm(exact, opt), finf = norm_inf(exact);
  if (f1 == 0.0) throw InvalidArgument("epsilon_metrics: reference matrix is zero");
  for (std::size_t k = 0; k < approx.data.size(); ++k) approx.data[k] -= exact.data[k];
  return {norm1(approx) / f1, spectral_norm(approx, opt) / f2, norm_inf(approx) / finf};
}

}  // namespace bfnet
