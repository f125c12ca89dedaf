#pragma once
// Shared helpers for the unit tests.

#include <random>

#include "bfnet/signal.hpp"

namespace bfnet::testing {

inline ComplexGrid random_grid(int nx, int ny, std::uint64_t seed, bool real = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  ComplexGrid g(nx, ny);
  for (auto& v : g.values) v = {n(rng), real ? 0.0 : n(rng)};
  return g;
}

inline double rel_l2(const ComplexGrid& a, const ComplexGrid& b) { return relative_l2(a.values, b.values); }

}  // namespace bfnet::testing
