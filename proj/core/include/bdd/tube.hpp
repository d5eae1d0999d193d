#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "bdd/common.hpp"
#include "bdd/geometry.hpp"

namespace bdd::tube {

struct LimitRow {
  double h = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double rel_error = 0.0;
  std::size_t cells = 0;
};

/// Compares the shrinking-tube integral
///   (1/h) * integral over {x in support : d(x, B) <= h} of g(d(x, B)/h) m(x) dx
/// with its limit c_B * integral_0^1 g * (line integral of m along B), for
/// each h. The area integral is a midpoint rule on square cells of side
/// h / cells_per_h anchored at the first boundary vertex and clipped to the
/// support. This is a verification tool, not a production path.
std::vector<LimitRow> verify_tube_limit(const geometry::Boundary& boundary, Box support,
                                        const std::function<double(Point)>& m,
                                        const std::function<double(double)>& g,
                                        const std::vector<double>& hs, double cells_per_h = 50.0,
                                        double c_b = 2.0);

/// Area integral alone (the left-hand side above) at one h.
double tube_integral(const geometry::Boundary& boundary, Box support,
                     const std::function<double(Point)>& m,
                     const std::function<double(double)>& g, double h, double cells_per_h = 50.0,
                     std::size_t* cells = nullptr);

}  // namespace bdd::tube
