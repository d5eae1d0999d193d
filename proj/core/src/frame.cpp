#include "bdd/frame.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "bdd/parallel.hpp"

namespace bdd {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_field(const std::string& field, std::size_t line_no) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || field.empty()) {
    // from_chars rejects "inf"/"nan" spellings only on some libraries; treat
    // anything unparseable as a parse error.
    std::string lower;
    for (char c : field) lower.push_back(char(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "nan" || lower == "inf" || lower == "-inf" || lower == "+inf") {
      throw Error(ErrorCode::NonFiniteValue, "non-finite value at line " + std::to_string(line_no));
    }
    throw Error(ErrorCode::ParseError,
                "cannot parse '" + field + "' at line " + std::to_string(line_no));
  }
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::NonFiniteValue, "non-finite value at line " + std::to_string(line_no));
  }
  return v;
}

}  // namespace

Dataset parse_dataset(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  Dataset data;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(t);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(trim(f));
    if (!header_seen) {
      if (fields.size() < 3 || fields[0] != "y" || fields[1] != "x1" || fields[2] != "x2") {
        throw Error(ErrorCode::ParseError,
                    "expected header 'y,x1,x2' at line " + std::to_string(line_no));
      }
      header_seen = true;
      continue;
    }
    if (fields.size() < 3) {
      throw Error(ErrorCode::ParseError,
                  "expected 3 fields at line " + std::to_string(line_no));
    }
    data.y.push_back(parse_field(fields[0], line_no));
    data.x.push_back({parse_field(fields[1], line_no), parse_field(fields[2], line_no)});
  }
  if (!header_seen) throw Error(ErrorCode::ParseError, "missing header 'y,x1,x2'");
  return data;
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str());
}

void write_dataset(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << "y,x1,x2\n" << std::setprecision(17);
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << data.y[i] << ',' << data.x[i].x1 << ',' << data.x[i].x2 << '\n';
  }
}

SampleFrame derive_frame(const Dataset& data, const geometry::Boundary& boundary,
                         const geometry::SegmentPartition& partition) {
  const std::size_t n = data.size();
  SampleFrame f;
  f.y = data.y;
  f.x = data.x;
  f.distance.resize(n);
  f.treated.resize(n);
  f.segment.resize(n);
  f.arclength.resize(n);
  f.segments = partition.pieces();
  parallel_for(n, [&](std::size_t i) {
    auto loc = geometry::locate(boundary, data.x[i]);
    f.distance[i] = loc.signed_distance;
    f.treated[i] = loc.region == geometry::Region::A1 ? 1 : 0;
    f.arclength[i] = loc.projection.arclength;
    f.segment[i] = partition.pieces() == 1
                       ? 1
                       : geometry::segment_assign(partition, boundary, data.x[i]);
  });
  return f;
}

SampleFrame frame_from_distance(std::vector<double> y, std::vector<double> distance) {
  SampleFrame f;
  const std::size_t n = y.size();
  f.y = std::move(y);
  f.distance = std::move(distance);
  f.x.assign(n, Point{});
  f.treated.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.treated[i] = f.distance[i] >= 0.0 ? 1 : 0;
  f.segment.assign(n, 1);
  f.arclength.assign(n, 0.0);
  return f;
}

}  // namespace bdd
