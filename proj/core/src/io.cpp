#include "bdd/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace bdd::io {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& token, int lineno) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw Error(ErrorCode::ParseError,
                "boundary line " + std::to_string(lineno) + ": bad number '" + token + "'");
  }
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::NonFiniteValue, "boundary line " + std::to_string(lineno));
  }
  return v;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

void optional_number(JsonWriter& w, std::string_view key, const std::optional<double>& v) {
  w.key(key);
  if (v) {
    w.value(*v);
  } else {
    w.null();
  }
}

}  // namespace

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
}

BoundaryFile parse_boundary(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool have_header = false, closed = false;
  geometry::Side side = geometry::Side::left;
  std::vector<Point> vertices;
  std::optional<std::vector<double>> interior;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::istringstream tokens(line);
    std::vector<std::string> parts;
    for (std::string t; tokens >> t;) parts.push_back(t);
    if (!have_header) {
      if (parts.size() != 3 || parts[0] != "boundary" || (parts[1] != "open" && parts[1] != "closed") ||
          (parts[2] != "treated_side=left" && parts[2] != "treated_side=right")) {
        throw Error(ErrorCode::ParseError,
                    "boundary line " + std::to_string(lineno) +
                        ": expected 'boundary open|closed treated_side=left|right'");
      }
      closed = parts[1] == "closed";
      side = parts[2] == "treated_side=left" ? geometry::Side::left : geometry::Side::right;
      have_header = true;
      continue;
    }
    if (parts[0] == "partition") {
      if (interior) {
        throw Error(ErrorCode::ParseError, "boundary line " + std::to_string(lineno) + ": duplicate partition");
      }
      interior.emplace();
      for (std::size_t k = 1; k < parts.size(); ++k) interior->push_back(parse_double(parts[k], lineno));
      continue;
    }
    if (parts.size() != 2) {
      throw Error(ErrorCode::ParseError,
                  "boundary line " + std::to_string(lineno) + ": expected 'x1 x2'");
    }
    vertices.push_back({parse_double(parts[0], lineno), parse_double(parts[1], lineno)});
  }
  if (!have_header) throw Error(ErrorCode::ParseError, "boundary file has no header line");
  geometry::Boundary boundary(std::move(vertices), closed, side);
  std::optional<geometry::SegmentPartition> partition;
  if (interior) partition = geometry::SegmentPartition::from_interior(boundary, *interior);
  return {std::move(boundary), std::move(partition)};
}

BoundaryFile load_boundary(const std::string& path) { return parse_boundary(read_text(path)); }

std::string format_boundary(const geometry::Boundary& boundary,
                            const geometry::SegmentPartition* partition) {
  std::string out = std::string("boundary ") + (boundary.closed() ? "closed" : "open") +
                    " treated_side=" +
                    (boundary.treated_side() == geometry::Side::left ? "left" : "right") + "\n";
  for (const Point& v : boundary.vertices()) {
    out += format_number(v.x1) + " " + format_number(v.x2) + "\n";
  }
  if (partition && partition->pieces() > 1) {
    out += "partition";
    const auto& bp = partition->breakpoints();
    for (std::size_t k = 1; k + 1 < bp.size(); ++k) out += " " + format_number(bp[k]);
    out += "\n";
  }
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void JsonWriter::separate() {
  if (after_key_) {
    after_key_ = false;
    return;
  }
  if (!first_.empty()) {
    if (!first_.back()) out_ += ",";
    first_.back() = false;
    out_ += "\n" + std::string(2 * first_.size(), ' ');
  }
}

JsonWriter& JsonWriter::begin_object() {
  separate();
  out_ += "{";
  first_.push_back(true);
  return *this;
}

void JsonWriter::close(char bracket) {
  const bool empty = first_.back();
  first_.pop_back();
  if (!empty) out_ += "\n" + std::string(2 * first_.size(), ' ');
  out_ += bracket;
}

JsonWriter& JsonWriter::end_object() {
  close('}');
  return *this;
}

JsonWriter& JsonWriter::begin_array() {
  separate();
  out_ += "[";
  first_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  close(']');
  return *this;
}

JsonWriter& JsonWriter::key(std::string_view k) {
  separate();
  out_ += "\"" + escape(k) + "\": ";
  after_key_ = true;
  return *this;
}

JsonWriter& JsonWriter::value(double v) {
  if (!std::isfinite(v)) return null();
  separate();
  out_ += format_number(v);
  return *this;
}

JsonWriter& JsonWriter::value(long long v) {
  separate();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(unsigned long long v) {
  separate();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(bool v) {
  separate();
  out_ += v ? "true" : "false";
  return *this;
}

JsonWriter& JsonWriter::value(std::string_view v) {
  separate();
  out_ += "\"" + escape(v) + "\"";
  return *this;
}

JsonWriter& JsonWriter::null() {
  separate();
  out_ += "null";
  return *this;
}

JsonWriter& JsonWriter::array(const std::vector<double>& v) {
  begin_array();
  for (double x : v) value(x);
  return end_array();
}

JsonWriter& JsonWriter::array(const std::vector<std::string>& v) {
  begin_array();
  for (const auto& x : v) value(std::string_view(x));
  return end_array();
}

JsonWriter& JsonWriter::point(Point p) {
  begin_array();
  value(p.x1);
  value(p.x2);
  return end_array();
}

JsonWriter& JsonWriter::interval(Interval i) {
  begin_array();
  value(i.lo);
  value(i.hi);
  return end_array();
}

void write_bandwidth(JsonWriter& w, const bandwidth::BandwidthResult& bw) {
  w.begin_object();
  w.key("h").value(bw.h);
  w.key("bias_constant").value(bw.bias_constant);
  w.key("variance_constant").value(bw.variance_constant);
  w.key("exponent").value(bw.exponent);
  w.key("pilot_order").value(bw.pilot_order);
  w.key("fallback").value(bw.fallback);
  w.key("warnings").array(bw.warnings);
  w.end_object();
}

std::string to_json(const pooled::EstimateResult& est, const bandwidth::BandwidthResult* bw) {
  JsonWriter w;
  w.begin_object();
  w.key("spec").value(est.spec_id);
  w.key("tau_hat").array(est.tau_hat);
  w.key("se").array(est.se);
  w.key("ci_conventional").begin_array();
  for (const auto& ci : est.ci_conventional) w.interval(ci);
  w.end_array();
  w.key("tau_rbc").array(est.tau_rbc);
  w.key("se_rbc").array(est.se_rbc);
  w.key("ci_rbc").begin_array();
  for (const auto& ci : est.ci_rbc) w.interval(ci);
  w.end_array();
  w.key("n_treated").value(est.n_treated);
  w.key("n_control").value(est.n_control);
  w.key("effective_n").value(est.effective_n);
  w.key("h_used").value(est.h_used);
  w.key("p_used").value(est.p_used);
  w.key("q_used");
  if (est.q_used) {
    w.value(*est.q_used);
  } else {
    w.null();
  }
  w.key("alpha").value(est.alpha);
  w.key("kernel").value(regression::to_string(est.kernel));
  w.key("vce").value(regression::to_string(est.vce));
  w.key("dropped_columns").array(est.dropped_columns);
  if (bw) {
    w.key("bandwidth");
    write_bandwidth(w, *bw);
  }
  w.end_object();
  return w.str();
}

std::string to_json(const curve::CurveResult& c, const curve::AggregateResult* agg,
                    const bandwidth::BandwidthResult* bw) {
  JsonWriter w;
  w.begin_object();
  w.key("method").value(curve::to_string(c.method));
  w.key("p_used").value(c.p);
  w.key("q_used");
  if (c.q) {
    w.value(*c.q);
  } else {
    w.null();
  }
  w.key("kernel").value(regression::to_string(c.kernel));
  w.key("vce").value(regression::to_string(c.vce));
  w.key("alpha").value(c.alpha);
  w.key("seed").value(static_cast<unsigned long long>(c.seed));
  w.key("n_draws").value(c.n_draws);
  w.key("arclength").array(c.arclengths);
  w.key("points").begin_array();
  for (const Point& p : c.points) w.point(p);
  w.end_array();
  w.key("tau_hat").array(c.tau_hat);
  w.key("tau_rbc").array(c.tau_rbc);
  w.key("se").array(c.se);
  w.key("ci_pointwise").begin_array();
  for (const auto& ci : c.ci_pointwise) w.interval(ci);
  w.end_array();
  w.key("band").begin_array();
  for (const auto& ci : c.band) w.interval(ci);
  w.end_array();
  w.key("band_critical_value").value(c.crit);
  w.key("h_per_point").array(c.h_per_point);
  w.key("effective_n").begin_array();
  for (std::size_t n : c.effective_n) w.value(n);
  w.end_array();
  w.key("n_missing").value(c.n_missing);
  w.key("cov").begin_array();
  for (Eigen::Index i = 0; i < c.cov.rows(); ++i) {
    w.begin_array();
    for (Eigen::Index j = 0; j < c.cov.cols(); ++j) w.value(c.cov(i, j));
    w.end_array();
  }
  w.end_array();
  w.key("messages").array(c.messages);
  if (agg) {
    w.key("aggregate").begin_object();
    w.key("weights").value(curve::to_string(agg->weights_used));
    w.key("wbate").value(agg->wbate);
    w.key("wbate_se").value(agg->wbate_se);
    optional_number(w, "wbate_rbc", agg->wbate_rbc);
    w.key("lbate").value(agg->lbate);
    w.key("lbate_point").point(agg->lbate_point);
    w.key("lbate_arclength").value(agg->lbate_arclength);
    w.key("skipped").value(agg->skipped);
    w.end_object();
  }
  if (bw) {
    w.key("bandwidth");
    write_bandwidth(w, *bw);
  }
  w.end_object();
  return w.str();
}

std::string to_json(const mc::McReport& r) {
  JsonWriter w;
  w.begin_object();
  w.key("n_reps").value(r.n_reps);
  w.key("failures").value(r.failures);
  w.key("seed").value(static_cast<unsigned long long>(r.seed));
  w.key("coverage_conventional").value(r.coverage_conventional);
  optional_number(w, "coverage_rbc", r.coverage_rbc);
  optional_number(w, "simultaneous_pointwise", r.simultaneous_pointwise);
  optional_number(w, "simultaneous_band", r.simultaneous_band);
  w.key("mean_bias").value(r.mean_bias);
  w.key("mse").value(r.mse);
  w.key("mean_h").value(r.mean_h);
  w.key("rep_seeds").begin_array();
  for (auto s : r.rep_seeds) w.value(static_cast<unsigned long long>(s));
  w.end_array();
  w.key("failure_messages").array(r.failure_messages);
  w.end_object();
  return w.str();
}

std::string to_json(const sim::Truth& t) {
  JsonWriter w;
  w.begin_object();
  w.key("arclength").array(t.arclengths);
  w.key("points").begin_array();
  for (const Point& p : t.points) w.point(p);
  w.end_array();
  w.key("tau").array(t.tau);
  w.key("bate").value(t.bate);
  w.key("wbate_density").value(t.bate);
  w.key("wbate_uniform").value(t.wbate_uniform);
  w.key("lbate").value(t.lbate);
  w.key("lbate_point").point(t.lbate_point);
  w.key("lbate_arclength").value(t.lbate_arclength);
  w.key("segment_bate").array(t.segment_bate);
  w.key("quadrature_error").value(t.quadrature_error);
  w.end_object();
  return w.str();
}

std::string to_json(const std::vector<tube::LimitRow>& rows) {
  JsonWriter w;
  w.begin_array();
  for (const auto& r : rows) {
    w.begin_object();
    w.key("h").value(r.h);
    w.key("lhs").value(r.lhs);
    w.key("rhs").value(r.rhs);
    w.key("rel_error").value(r.rel_error);
    w.key("cells").value(r.cells);
    w.end_object();
  }
  w.end_array();
  return w.str();
}

std::string to_csv(const curve::CurveResult& c) {
  std::string out = "arclength,b1,b2,tau_hat,se,ci_lo,ci_hi,band_lo,band_hi\n";
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double vals[] = {c.arclengths[j],        c.points[j].x1,       c.points[j].x2,
                           c.tau_hat[j],           c.se[j],              c.ci_pointwise[j].lo,
                           c.ci_pointwise[j].hi,   c.band[j].lo,         c.band[j].hi};
    for (std::size_t k = 0; k < std::size(vals); ++k) {
      if (k) out += ",";
      out += format_number(vals[k]);
    }
    out += "\n";
  }
  return out;
}

std::string to_csv(const std::vector<pooled::RdBin>& bins) {
  std::string out = "bin_center,mean_y,count,side\n";
  for (const auto& b : bins) {
    out += format_number(b.center) + "," + format_number(b.mean_y) + "," +
           std::to_string(b.count) + "," + std::to_string(b.side) + "\n";
  }
  return out;
}

}  // namespace bdd::io
