#pragma once

#include <random>
#include <vector>

#include "bdd/frame.hpp"
#include "bdd/geometry.hpp"
#include "bdd/rng.hpp"

namespace bdd::testing {

/// Horizontal arm (1,0)-(0,0) then vertical arm (0,0)-(0,1); the first
/// quadrant is treated.
inline geometry::Boundary l_boundary() {
  return geometry::Boundary({{1.0, 0.0}, {0.0, 0.0}, {0.0, 1.0}}, false,
                            geometry::Side::right);
}

inline geometry::Boundary unit_segment() {
  return geometry::Boundary({{0.0, 0.0}, {1.0, 0.0}}, false, geometry::Side::left);
}

/// Scores uniform on [lo, hi]^2 with outcome f(x) plus N(0, sd^2) noise.
template <class F>
Dataset uniform_sample(std::size_t n, double lo, double hi, double sd, F&& f,
                       std::uint64_t seed) {
  Engine engine(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::normal_distribution<double> e(0.0, 1.0);
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    Point x{u(engine), u(engine)};
    d.x.push_back(x);
    d.y.push_back(f(x) + sd * e(engine));
  }
  return d;
}

}  // namespace bdd::testing
