#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace bdd {

/// A location in score space (X1, X2).
struct Point {
  double x1 = 0.0;
  double x2 = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
  friend Point operator-(Point a, Point b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
  friend Point operator*(double s, Point a) { return {s * a.x1, s * a.x2}; }
  friend bool operator==(Point a, Point b) = default;
};

inline double dot(Point a, Point b) { return a.x1 * b.x1 + a.x2 * b.x2; }
inline double cross(Point a, Point b) { return a.x1 * b.x2 - a.x2 * b.x1; }
inline double norm(Point a) { return std::hypot(a.x1, a.x2); }
inline double distance(Point a, Point b) { return norm(a - b); }

enum class ErrorCode {
  InvalidArgument,
  InvalidBoundary,
  AnchorOffBoundary,
  InvalidGrid,
  NonpositiveBandwidth,
  OrderNotGreater,
  ParseError,
  NonFiniteValue,
  IoError,
  DegenerateDesign,
  EmptyWindow,
  AllWeightsZero,
  InsufficientData,
};

const char* to_string(ErrorCode code);

/// True for errors caused by bad user input (as opposed to data that cannot
/// support the requested estimate).
inline bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateDesign:
    case ErrorCode::EmptyWindow:
    case ErrorCode::AllWeightsZero:
    case ErrorCode::InsufficientData:
      return false;
    default:
      return true;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  bool contains(double v) const { return lo <= v && v <= hi; }
};

/// Axis-aligned rectangle [lo.x1, hi.x1] x [lo.x2, hi.x2].
struct Box {
  Point lo;
  Point hi;

  bool contains(Point p) const {
    return lo.x1 <= p.x1 && p.x1 <= hi.x1 && lo.x2 <= p.x2 && p.x2 <= hi.x2;
  }
  double area() const { return (hi.x1 - lo.x1) * (hi.x2 - lo.x2); }
};

}  // namespace bdd
