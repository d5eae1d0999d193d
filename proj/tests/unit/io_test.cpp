#include "bdd/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <json.hpp>
#include <sstream>

#include "bdd/frame.hpp"
#include "fixtures.hpp"

using namespace bdd;
using nlohmann::json;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Dataset, WellFormed) {
  auto d = parse_dataset("y,x1,x2\n1,0.5,0.25\n2,-1,3e-2\n3,0,0\n");
  ASSERT_EQ(d.size(), 3u);
  EXPECT_DOUBLE_EQ(d.x[1].x2, 0.03);
  EXPECT_DOUBLE_EQ(d.y[2], 3.0);
}

TEST(Dataset, ExtraColumnsAreIgnored) {
  auto d = parse_dataset("y,x1,x2,D,T\n1,2,3,0.4,1\n");
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d.x[0], (Point{2, 3}));
}

TEST(Dataset, HeaderOnlyIsEmpty) { EXPECT_EQ(parse_dataset("y,x1,x2\n").size(), 0u); }

TEST(Dataset, ParseErrorsCarryTheLineNumber) {
  EXPECT_EQ(code_of([] { parse_dataset("y,x1,x2\n1,2,abc\n"); }), ErrorCode::ParseError);
  EXPECT_NE(message_of([] { parse_dataset("y,x1,x2\n1,2,abc\n"); }).find("line 2"),
            std::string::npos);
  EXPECT_NE(message_of([] { parse_dataset("y,x1,x2\n1,2,3\n4,5\n"); }).find("line 3"),
            std::string::npos);
  EXPECT_EQ(code_of([] { parse_dataset("a,b,c\n1,2,3\n"); }), ErrorCode::ParseError);
}

TEST(Dataset, NonFiniteValuesAreRejected) {
  EXPECT_EQ(code_of([] { parse_dataset("y,x1,x2\nnan,1,2\n"); }), ErrorCode::NonFiniteValue);
  EXPECT_EQ(code_of([] { parse_dataset("y,x1,x2\n1,inf,2\n"); }), ErrorCode::NonFiniteValue);
}

TEST(Dataset, FileRoundTripIsExact) {
  auto d = bdd::testing::uniform_sample(50, -1, 1, 1.0, [](Point x) { return x.x1; }, 3);
  auto path = (std::filesystem::temp_directory_path() / "bdd_io_roundtrip.csv").string();
  write_dataset(path, d);
  auto back = load_dataset(path);
  std::filesystem::remove(path);
  ASSERT_EQ(back.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(back.y[i], d.y[i]);
    EXPECT_EQ(back.x[i], d.x[i]);
  }
  EXPECT_EQ(code_of([] { load_dataset("/nonexistent/bdd.csv"); }), ErrorCode::IoError);
}

TEST(DeriveFrame, LBoundaryExamples) {
  auto b = bdd::testing::l_boundary();
  auto part = geometry::SegmentPartition::from_interior(b, {1.0});
  Dataset d{{1.0, 2.0, 3.0, 4.0}, {{0.3, 0.4}, {-0.2, 0.5}, {0.5, 0.0}, {0.0, 0.7}}};
  auto f = derive_frame(d, b, part);
  EXPECT_DOUBLE_EQ(f.distance[0], 0.3);
  EXPECT_EQ(f.treated[0], 1);
  EXPECT_EQ(f.segment[0], 2);  // the vertical arm is the nearer one
  EXPECT_DOUBLE_EQ(f.distance[1], -0.2);
  EXPECT_EQ(f.treated[1], 0);
  EXPECT_EQ(f.segment[1], 2);
  EXPECT_EQ(f.segment[2], 1);
  // Points on the boundary are treated.
  EXPECT_EQ(f.treated[2], 1);
  EXPECT_EQ(f.treated[3], 1);
  EXPECT_EQ(f.segments, 2);
}

TEST(BoundaryFile, ParseAndRoundTrip) {
  auto bf = io::parse_boundary(
      "# L-shaped cut\n"
      "boundary open treated_side=right\n"
      "1 0\n0 0   # corner\n0 1\n"
      "partition 1.0\n");
  EXPECT_EQ(bf.boundary.vertices().size(), 3u);
  EXPECT_EQ(bf.boundary.treated_side(), geometry::Side::right);
  ASSERT_TRUE(bf.partition);
  EXPECT_EQ(bf.partition->pieces(), 2);

  auto again = io::parse_boundary(io::format_boundary(bf.boundary, &*bf.partition));
  EXPECT_EQ(again.boundary.vertices(), bf.boundary.vertices());
  EXPECT_EQ(again.boundary.closed(), bf.boundary.closed());
  EXPECT_EQ(again.boundary.treated_side(), bf.boundary.treated_side());
  EXPECT_EQ(again.partition->breakpoints(), bf.partition->breakpoints());
}

TEST(BoundaryFile, Errors) {
  EXPECT_EQ(code_of([] { io::parse_boundary("0 0\n1 1\n"); }), ErrorCode::ParseError);
  EXPECT_NE(message_of([] { io::parse_boundary("boundary open treated_side=left\n0 0\n1 x\n"); })
                .find("line 3"),
            std::string::npos);
  EXPECT_EQ(code_of([] { io::parse_boundary("boundary open treated_side=left\n0 0\n"); }),
            ErrorCode::InvalidBoundary);
}

TEST(FormatNumber, SeventeenDigitsRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) {
    EXPECT_EQ(std::stod(io::format_number(v)), v);
  }
  EXPECT_EQ(io::format_number(NAN), "nan");
  EXPECT_EQ(io::format_number(-INFINITY), "-inf");
}

TEST(JsonWriter, ProducesValidJson) {
  io::JsonWriter w;
  w.begin_object()
      .key("a")
      .value(1.5)
      .key("b")
      .array(std::vector<double>{1, NAN, 3})
      .key("s")
      .value("q\"uote\n")
      .key("nested")
      .begin_array()
      .begin_object()
      .key("t")
      .value(true)
      .end_object()
      .null()
      .end_array()
      .end_object();
  auto j = json::parse(w.str());
  EXPECT_DOUBLE_EQ(j["a"].get<double>(), 1.5);
  EXPECT_TRUE(j["b"][1].is_null());
  EXPECT_EQ(j["s"].get<std::string>(), "q\"uote\n");
  EXPECT_TRUE(j["nested"][0]["t"].get<bool>());
}

TEST(JsonOutput, EstimateCurveAndTubeDocuments) {
  pooled::EstimateResult est;
  est.spec_id = 6;
  est.tau_hat = {0.5};
  est.se = {0.1};
  est.ci_conventional = {{0.3, 0.7}};
  est.ci_rbc = {{0.25, 0.8}};
  est.tau_rbc = {0.52};
  est.se_rbc = {0.14};
  est.q_used = 2;
  est.h_used = 0.3;
  auto j = json::parse(io::to_json(est));
  EXPECT_DOUBLE_EQ(j["tau_hat"][0].get<double>(), 0.5);
  EXPECT_DOUBLE_EQ(j["h_used"].get<double>(), 0.3);
  EXPECT_TRUE(j.contains("ci_rbc"));

  curve::CurveResult c;
  c.points = {{0, 0}, {1, 0}};
  c.arclengths = {0, 1};
  c.tau_hat = {1.0, NAN};
  c.valid = {true, false};
  c.se = {0.2, NAN};
  c.ci_pointwise = {{0.6, 1.4}, {NAN, NAN}};
  c.band = {{0.5, 1.5}, {NAN, NAN}};
  c.h_per_point = {0.2, 0.2};
  c.effective_n = {10, 0};
  c.cov = Eigen::MatrixXd::Constant(2, 2, NAN);
  c.cov(0, 0) = 0.04;
  auto jc = json::parse(io::to_json(c));
  EXPECT_TRUE(jc["tau_hat"][1].is_null());
  EXPECT_EQ(jc["method"].get<std::string>(), "location");

  std::vector<tube::LimitRow> rows{{0.1, 2.0, 2.0, 0.0, 100}};
  auto jt = json::parse(io::to_json(rows));
  EXPECT_EQ(jt.size(), 1u);
}

TEST(CsvOutput, CurveAndBins) {
  curve::CurveResult c;
  c.points = {{0, 0}, {1, 0}};
  c.arclengths = {0, 1};
  c.tau_hat = {1.0, 2.0};
  c.se = {0.1, 0.2};
  c.ci_pointwise = {{0.8, 1.2}, {1.6, 2.4}};
  c.band = {{0.7, 1.3}, {1.5, 2.5}};
  std::istringstream in(io::to_csv(c));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "arclength,b1,b2,tau_hat,se,ci_lo,ci_hi,band_lo,band_hi");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 2);

  std::vector<pooled::RdBin> bins(1);
  bins[0].center = 0.5;
  bins[0].mean_y = 2.0;
  bins[0].count = 3;
  bins[0].side = 1;
  EXPECT_EQ(io::to_csv(bins).substr(0, 27), "bin_center,mean_y,count,sid");
}
