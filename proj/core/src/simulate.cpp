#include "bdd/simulate.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "bdd/io.hpp"

namespace bdd::sim {

namespace {

class PolyParser {
 public:
  explicit PolyParser(const std::string& text) : s_(text) {}

  Polynomial run() {
    std::vector<Polynomial::Term> terms;
    skip();
    double sign = 1.0;
    if (peek() == '+' || peek() == '-') sign = take() == '-' ? -1.0 : 1.0;
    for (;;) {
      Polynomial::Term t = term();
      t.coef *= sign;
      terms.push_back(t);
      skip();
      if (at_end()) break;
      char op = take();
      if (op != '+' && op != '-') fail("expected + or -");
      sign = op == '-' ? -1.0 : 1.0;
    }
    return Polynomial(std::move(terms));
  }

 private:
  Polynomial::Term term() {
    Polynomial::Term t{1.0, 0, 0};
    factor(t);
    for (;;) {
      skip();
      if (peek() != '*') return t;
      take();
      factor(t);
    }
  }

  void factor(Polynomial::Term& t) {
    skip();
    if (peek() == 'x') {
      take();
      char which = take();
      if (which != '1' && which != '2') fail("expected x1 or x2");
      int e = 1;
      skip();
      if (peek() == '^') {
        take();
        skip();
        e = int(number());
        if (e < 0 || double(e) != last_) fail("exponent must be a nonnegative integer");
      }
      (which == '1' ? t.e1 : t.e2) += e;
      return;
    }
    t.coef *= number();
  }

  double number() {
    skip();
    const char* first = s_.data() + pos_;
    const char* last = s_.data() + s_.size();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr == first) fail("expected a number");
    pos_ += std::size_t(ptr - first);
    last_ = v;
    return v;
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return at_end() ? '\0' : s_[pos_]; }
  char take() { return at_end() ? '\0' : s_[pos_++]; }
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::ParseError,
                "polynomial '" + s_ + "' at column " + std::to_string(pos_ + 1) + ": " + what);
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  double last_ = 0.0;
};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& value) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw Error(ErrorCode::ParseError, "dgp key '" + key + "': expected a number, got '" + value + "'");
  }
  if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "dgp key '" + key + "'");
  return v;
}

template <typename Int>
Int parse_integer(const std::string& key, const std::string& value) {
  Int v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw Error(ErrorCode::ParseError, "dgp key '" + key + "': expected an integer, got '" + value + "'");
  }
  return v;
}

Point centre(const Box& b) { return {0.5 * (b.lo.x1 + b.hi.x1), 0.5 * (b.lo.x2 + b.hi.x2)}; }

}  // namespace

Polynomial Polynomial::parse(const std::string& text) {
  if (trim(text).empty()) throw Error(ErrorCode::ParseError, "empty polynomial");
  return PolyParser(text).run();
}

double Polynomial::operator()(Point x) const {
  double v = 0.0;
  for (const Term& t : terms_) v += t.coef * std::pow(x.x1, t.e1) * std::pow(x.x2, t.e2);
  return v;
}

std::string Polynomial::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const Term& t = terms_[i];
    if (i > 0) out << (t.coef < 0 ? " - " : " + ");
    out << (i > 0 ? std::abs(t.coef) : t.coef);
    if (t.e1 > 0) out << "*x1" << (t.e1 > 1 ? "^" + std::to_string(t.e1) : "");
    if (t.e2 > 0) out << "*x2" << (t.e2 > 1 ? "^" + std::to_string(t.e2) : "");
  }
  return out.str();
}

double DgpSpec::density_at(Point x) const {
  if (!box.contains(x)) return 0.0;
  if (density == DensityKind::uniform_box) return 1.0 / box.area();
  const double u = (x.x1 - box.lo.x1) / (box.hi.x1 - box.lo.x1);
  return (1.0 + tilt * u) / ((1.0 + 0.5 * tilt) * box.area());
}

DgpSpec parse_dgp(const std::string& text) {
  DgpSpec d;
  d.mu0 = Polynomial::parse("0");
  d.mu1 = Polynomial::parse("0");
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ParseError, "dgp line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "boundary") {
      if (value == "line") d.shape = Shape::line;
      else if (value == "l-shape") d.shape = Shape::l_shape;
      else if (value == "jagged") d.shape = Shape::jagged;
      else if (value == "file") d.shape = Shape::file;
      else throw Error(ErrorCode::ParseError, "unknown boundary shape '" + value + "'");
    } else if (key == "kinks") {
      d.kinks = parse_integer<int>(key, value);
    } else if (key == "amplitude") {
      d.jag_amplitude = parse_number(key, value);
    } else if (key == "boundary_file") {
      d.boundary_file = value;
    } else if (key == "box") {
      std::istringstream parts(value);
      std::string a, b, c, e, extra;
      if (!(parts >> a >> b >> c >> e) || (parts >> extra)) {
        throw Error(ErrorCode::ParseError, "box needs four numbers: x1lo x2lo x1hi x2hi");
      }
      d.box = {{parse_number(key, a), parse_number(key, b)}, {parse_number(key, c), parse_number(key, e)}};
    } else if (key == "mu0") {
      d.mu0 = Polynomial::parse(value);
    } else if (key == "mu1") {
      d.mu1 = Polynomial::parse(value);
    } else if (key == "noise_sd") {
      d.noise_sd = parse_number(key, value);
    } else if (key == "density") {
      if (value == "uniform-box") d.density = DensityKind::uniform_box;
      else if (value == "tilted") d.density = DensityKind::tilted;
      else throw Error(ErrorCode::ParseError, "unknown density '" + value + "'");
    } else if (key == "tilt") {
      d.tilt = parse_number(key, value);
    } else if (key == "n") {
      d.n = parse_integer<std::size_t>(key, value);
    } else if (key == "seed") {
      d.seed = parse_integer<std::uint64_t>(key, value);
    } else if (key == "grid") {
      d.grid = parse_integer<int>(key, value);
    } else if (key == "segments") {
      d.segments = parse_integer<int>(key, value);
    } else {
      throw Error(ErrorCode::ParseError, "dgp line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (!(d.box.hi.x1 > d.box.lo.x1) || !(d.box.hi.x2 > d.box.lo.x2)) {
    throw Error(ErrorCode::InvalidArgument, "box must have positive width and height");
  }
  if (d.noise_sd < 0.0) throw Error(ErrorCode::InvalidArgument, "noise_sd must be nonnegative");
  if (!(d.tilt > -1.0)) throw Error(ErrorCode::InvalidArgument, "tilt must exceed -1");
  if (d.shape == Shape::jagged && d.kinks < 1) {
    throw Error(ErrorCode::InvalidArgument, "jagged boundary needs at least one kink");
  }
  if (d.shape == Shape::file && d.boundary_file.empty()) {
    throw Error(ErrorCode::InvalidArgument, "boundary = file needs boundary_file");
  }
  if (d.grid < 2) throw Error(ErrorCode::InvalidGrid, "grid needs at least two points");
  if (d.segments < 1) throw Error(ErrorCode::InvalidArgument, "segments must be at least 1");
  return d;
}

DgpSpec load_dgp(const std::string& path) { return parse_dgp(io::read_text(path)); }

geometry::Boundary make_boundary(const DgpSpec& dgp) {
  using geometry::Side;
  const Box& b = dgp.box;
  const Point c = centre(b);
  switch (dgp.shape) {
    case Shape::line:
      return geometry::Boundary({{b.lo.x1, c.x2}, {b.hi.x1, c.x2}}, false, Side::left);
    case Shape::l_shape:
      return geometry::Boundary({{b.hi.x1, c.x2}, c, {c.x1, b.hi.x2}}, false, Side::right);
    case Shape::jagged: {
      std::vector<Point> v;
      const int m = dgp.kinks + 2;
      const double amp = dgp.jag_amplitude * 0.5 * (b.hi.x2 - b.lo.x2);
      for (int k = 0; k < m; ++k) {
        const double x = b.lo.x1 + (b.hi.x1 - b.lo.x1) * double(k) / double(m - 1);
        const double y = (k == 0 || k == m - 1) ? c.x2 : c.x2 + (k % 2 == 1 ? amp : -amp);
        v.push_back({x, y});
      }
      return geometry::Boundary(std::move(v), false, Side::left);
    }
    case Shape::file:
      return io::load_boundary(dgp.boundary_file).boundary;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown boundary shape");
}

Dataset draw(const DgpSpec& dgp, const geometry::Boundary& boundary, Engine& engine) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Box& b = dgp.box;
  const double w = b.hi.x1 - b.lo.x1, ht = b.hi.x2 - b.lo.x2;
  Dataset data;
  data.y.reserve(dgp.n);
  data.x.reserve(dgp.n);
  for (std::size_t i = 0; i < dgp.n; ++i) {
    double u1 = unif(engine);
    const double u2 = unif(engine);
    const double eps = normal(engine);
    if (dgp.density == DensityKind::tilted && dgp.tilt != 0.0) {
      // Invert F(u) = (u + tilt u^2 / 2) / (1 + tilt / 2).
      const double t = dgp.tilt;
      const double target = u1 * (1.0 + 0.5 * t);
      u1 = 2.0 * target / (1.0 + std::sqrt(1.0 + 2.0 * t * target));
    }
    const Point x{b.lo.x1 + w * u1, b.lo.x2 + ht * u2};
    const bool treated = geometry::region_of(boundary, x) == geometry::Region::A1;
    data.x.push_back(x);
    data.y.push_back((treated ? dgp.mu1(x) : dgp.mu0(x)) + dgp.noise_sd * eps);
  }
  return data;
}

Truth truth(const DgpSpec& dgp, const geometry::Boundary& boundary,
            const geometry::SegmentPartition& partition) {
  Truth t;
  t.arclengths = geometry::discretize_arclengths(boundary, dgp.grid);
  for (double s : t.arclengths) {
    Point b = boundary.point_at(s);
    t.points.push_back(b);
    t.tau.push_back(dgp.tau(b));
  }
  auto tf = [&](Point x) { return dgp.tau(x) * dgp.density_at(x); };
  auto f = [&](Point x) { return dgp.density_at(x); };
  auto tau = [&](Point x) { return dgp.tau(x); };
  auto one = [](Point) { return 1.0; };
  constexpr double kQuad = 400.0;
  auto average = [&](auto&& num, auto&& den, double nq, double from, double to) {
    return geometry::line_integral(boundary, num, nq, from, to) /
           geometry::line_integral(boundary, den, nq, from, to);
  };
  const double L = boundary.length();
  t.bate = average(tf, f, kQuad, 0.0, L);
  t.wbate_uniform = average(tau, one, kQuad, 0.0, L);
  t.quadrature_error = std::max(std::abs(t.bate - average(tf, f, kQuad / 2, 0.0, L)),
                                std::abs(t.wbate_uniform - average(tau, one, kQuad / 2, 0.0, L)));
  const auto& bp = partition.breakpoints();
  for (int l = 1; l <= partition.pieces(); ++l) {
    t.segment_bate.push_back(average(tf, f, kQuad, bp[std::size_t(l) - 1], bp[std::size_t(l)]));
  }

  // Maximum on a grid ten times finer than the reporting grid.
  const int fine = 10 * (dgp.grid - 1) + 1;
  t.lbate = -INFINITY;
  for (double s : geometry::discretize_arclengths(boundary, fine)) {
    Point b = boundary.point_at(s);
    const double v = dgp.tau(b);
    if (v > t.lbate) {
      t.lbate = v;
      t.lbate_arclength = s;
      t.lbate_point = b;
    }
  }
  return t;
}

Simulation simulate(const DgpSpec& dgp) {
  geometry::Boundary boundary = make_boundary(dgp);
  auto partition = geometry::SegmentPartition::even(boundary, dgp.segments);
  Engine engine = make_engine(dgp.seed, stream::simulation, 0);
  Dataset data = draw(dgp, boundary, engine);
  Truth tr = truth(dgp, boundary, partition);
  return {std::move(data), std::move(boundary), std::move(partition), std::move(tr)};
}

}  // namespace bdd::sim
