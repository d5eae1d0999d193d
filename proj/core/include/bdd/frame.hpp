#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bdd/common.hpp"
#include "bdd/geometry.hpp"

namespace bdd {

/// Raw sample: outcome y and bivariate score x per row.
struct Dataset {
  std::vector<double> y;
  std::vector<Point> x;

  std::size_t size() const { return y.size(); }
};

/// CSV with header `y,x1,x2`. Extra columns after x2 are ignored. Throws
/// ParseError (with line number) or NonFiniteValue.
Dataset load_dataset(const std::string& path);
Dataset parse_dataset(const std::string& text);
void write_dataset(const std::string& path, const Dataset& data);

/// Sample with the columns derived from the boundary geometry.
///
///   distance   signed distance D_i to the boundary (+ in A1, including on B)
///   treated    T_i = 1(D_i >= 0)
///   segment    S_i in 1..L, nearest piece of the partition
///   arclength  position of the nearest boundary point
struct SampleFrame {
  std::vector<double> y;
  std::vector<Point> x;
  std::vector<double> distance;
  std::vector<std::uint8_t> treated;
  std::vector<int> segment;
  std::vector<double> arclength;
  int segments = 1;

  std::size_t size() const { return y.size(); }
};

SampleFrame derive_frame(const Dataset& data, const geometry::Boundary& boundary,
                         const geometry::SegmentPartition& partition);

/// Frame built directly from (y, D) columns with T = 1(D >= 0) and S = 1.
/// Useful when no geometry is involved (pure univariate checks).
SampleFrame frame_from_distance(std::vector<double> y, std::vector<double> distance);

}  // namespace bdd
