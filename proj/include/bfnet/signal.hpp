#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "bfnet/error.hpp"

namespace bfnet {

using Complex = std::complex<double>;

enum class Direction { forward, inverse };

inline const char* to_string(Direction d) { return d == Direction::forward ? "forward" : "inverse"; }

/// Complex samples on an nx-by-ny grid, row-major (x index outermost).
/// As a time signal, sample (i, j) sits at t = (i/nx, j/ny); as a frequency
/// signal it holds the coefficient of integer frequency (i, j).
struct ComplexGrid {
  int nx = 0;
  int ny = 0;
  std::vector<Complex> values;

  ComplexGrid() = default;
  ComplexGrid(int nx_, int ny_) : nx(nx_), ny(ny_) {
    if (nx_ < 1 || ny_ < 1) throw InvalidArgument("ComplexGrid: extents must be >= 1");
    values.assign(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_), Complex{});
  }

  [[nodiscard]] std::size_t size() const { return values.size(); }
  Complex& operator()(int i, int j) { return values[static_cast<std::size_t>(i) * ny + j]; }
  const Complex& operator()(int i, int j) const { return values[static_cast<std::size_t>(i) * ny + j]; }
};

using GridSignal = ComplexGrid;
using FreqSignal = ComplexGrid;

/// Relative l2 distance ||a - b|| / ||b||.
inline double relative_l2(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  if (a.size() != b.size()) throw InvalidArgument("relative_l2: size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace bfnet
