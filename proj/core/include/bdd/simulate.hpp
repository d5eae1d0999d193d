#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bdd/frame.hpp"
#include "bdd/geometry.hpp"
#include "bdd/rng.hpp"

namespace bdd::sim {

/// Polynomial in (x1, x2), written like `1 + 0.5*x1 - 2*x1^2*x2`.
class Polynomial {
 public:
  struct Term {
    double coef = 0.0;
    int e1 = 0;
    int e2 = 0;
  };

  Polynomial() = default;
  explicit Polynomial(std::vector<Term> terms) : terms_(std::move(terms)) {}

  /// Throws ParseError on malformed input.
  static Polynomial parse(const std::string& text);

  double operator()(Point x) const;
  const std::vector<Term>& terms() const { return terms_; }
  std::string str() const;

 private:
  std::vector<Term> terms_;
};

enum class Shape { line, l_shape, jagged, file };
enum class DensityKind { uniform_box, tilted };

/// Synthetic design. Boundary shapes are laid out relative to the box centre c:
///   line     horizontal through c across the box; treated above
///   l_shape  (hi.x1, c.x2) -> c -> (c.x1, hi.x2); treated is the upper-right quadrant
///   jagged   zigzag across the box with `kinks` interior vertices; treated above
///   file     boundary file at `boundary_file`
/// Scores are uniform on the box, or for `tilted` have density proportional
/// to 1 + tilt * u, with u the relative x1 position in the box.
struct DgpSpec {
  Shape shape = Shape::l_shape;
  int kinks = 4;
  double jag_amplitude = 0.2;
  std::string boundary_file;
  Box box{{-1.0, -1.0}, {1.0, 1.0}};
  Polynomial mu0;
  Polynomial mu1;
  double noise_sd = 1.0;
  DensityKind density = DensityKind::uniform_box;
  double tilt = 0.0;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  /// Grid size J for truth reporting.
  int grid = 40;
  /// Pieces of an even partition, for segment-level truths.
  int segments = 1;

  double tau(Point x) const { return mu1(x) - mu0(x); }
  /// Normalised score density.
  double density_at(Point x) const;
};

/// Flat `key = value` file; `#` starts a comment. Keys: boundary
/// (line | l-shape | jagged | file), kinks, amplitude, boundary_file, box
/// (x1lo x2lo x1hi x2hi), mu0, mu1, noise_sd, density (uniform-box | tilted),
/// tilt, n, seed, grid, segments.
DgpSpec parse_dgp(const std::string& text);
DgpSpec load_dgp(const std::string& path);

geometry::Boundary make_boundary(const DgpSpec& dgp);

/// n draws of (Y, X); T follows the boundary's region rule.
Dataset draw(const DgpSpec& dgp, const geometry::Boundary& boundary, Engine& engine);

/// Quadrature truths along the boundary.
struct Truth {
  std::vector<double> arclengths;
  std::vector<Point> points;
  std::vector<double> tau;
  /// Density-weighted boundary average (also the density-weighted WBATE).
  double bate = 0.0;
  /// Arclength (uniform-weight) average.
  double wbate_uniform = 0.0;
  double lbate = 0.0;
  double lbate_arclength = 0.0;
  Point lbate_point;
  /// Density-weighted average over each piece of the partition.
  std::vector<double> segment_bate;
  /// |difference| between the averages at full and half quadrature resolution.
  double quadrature_error = 0.0;
};

Truth truth(const DgpSpec& dgp, const geometry::Boundary& boundary,
            const geometry::SegmentPartition& partition);

struct Simulation {
  Dataset data;
  geometry::Boundary boundary;
  geometry::SegmentPartition partition;
  Truth truth;
};

/// Seeded draw with truths; identical seeds give identical output.
Simulation simulate(const DgpSpec& dgp);

}  // namespace bdd::sim
