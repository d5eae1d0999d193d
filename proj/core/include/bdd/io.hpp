#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bdd/bandwidth.hpp"
#include "bdd/curve.hpp"
#include "bdd/geometry.hpp"
#include "bdd/monte_carlo.hpp"
#include "bdd/pooled.hpp"
#include "bdd/simulate.hpp"
#include "bdd/tube.hpp"

namespace bdd::io {

/// Throws IoError when the file cannot be read or written.
std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

/// Boundary text format:
///
///   boundary open|closed treated_side=left|right
///   x1 x2            (one vertex per line, in order)
///   partition s1 ... (optional interior arclength breakpoints)
///
/// `#` starts a comment.
struct BoundaryFile {
  geometry::Boundary boundary;
  std::optional<geometry::SegmentPartition> partition;
};

BoundaryFile parse_boundary(const std::string& text);
BoundaryFile load_boundary(const std::string& path);
std::string format_boundary(const geometry::Boundary& boundary,
                            const geometry::SegmentPartition* partition = nullptr);

/// 17 significant digits; "nan"/"inf" spelled out.
std::string format_number(double v);

/// Minimal streaming JSON writer. Non-finite numbers are written as null.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(std::string_view k);
  JsonWriter& value(double v);
  JsonWriter& value(long long v);
  JsonWriter& value(unsigned long long v);
  JsonWriter& value(int v) { return value(static_cast<long long>(v)); }
  JsonWriter& value(std::size_t v) { return value(static_cast<unsigned long long>(v)); }
  JsonWriter& value(bool v);
  JsonWriter& value(std::string_view v);
  JsonWriter& value(const char* v) { return value(std::string_view(v)); }
  JsonWriter& null();

  JsonWriter& array(const std::vector<double>& v);
  JsonWriter& array(const std::vector<std::string>& v);
  JsonWriter& point(Point p);
  JsonWriter& interval(Interval i);

  std::string str() const { return out_ + "\n"; }

 private:
  void separate();
  void close(char bracket);

  std::string out_;
  std::vector<bool> first_;
  bool after_key_ = false;
};

void write_bandwidth(JsonWriter& w, const bandwidth::BandwidthResult& bw);

std::string to_json(const pooled::EstimateResult& est,
                    const bandwidth::BandwidthResult* bw = nullptr);
std::string to_json(const curve::CurveResult& curve, const curve::AggregateResult* agg = nullptr,
                    const bandwidth::BandwidthResult* bw = nullptr);
std::string to_json(const mc::McReport& report);
std::string to_json(const sim::Truth& truth);
std::string to_json(const std::vector<tube::LimitRow>& rows);

/// arclength,b1,b2,tau_hat,se,ci_lo,ci_hi,band_lo,band_hi
std::string to_csv(const curve::CurveResult& curve);
/// bin_center,mean_y,count,side
std::string to_csv(const std::vector<pooled::RdBin>& bins);

}  // namespace bdd::io
