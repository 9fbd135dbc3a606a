#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include <gtest/gtest.h>

#include "ocpls/csv.hpp"
#include "ocpls/report.hpp"

using namespace ocpls;
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("ocpls_report_" + name); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<RunRecord> sample_records(std::size_t n, double scale) {
  std::vector<RunRecord> out;
  for (std::size_t k = 1; k <= n; ++k) {
    RunRecord r;
    r.k = k;
    r.train_loss = scale / double(k) + 1.0 / 3.0;
    r.val_loss = k % 2 == 0 ? 1.23456789e-5 * double(k) : kNaN;
    r.step_norm = std::sqrt(double(k));
    r.clamp_hits = k % 3;
    out.push_back(r);
  }
  return out;
}

bool same_to_six_digits(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return std::abs(a - b) <= 5e-6 * std::abs(b) + 1e-300;
}

}  // namespace

TEST(Csv, FormatNumber) {
  EXPECT_EQ(csv::format_number(0.1), "0.1");
  EXPECT_EQ(csv::format_number(1.0 / 3.0, 6), "0.333333");
  EXPECT_EQ(csv::format_number(123456789.0, 6), "1.23457e+08");
  EXPECT_EQ(csv::format_number(kNaN), "nan");
  EXPECT_EQ(csv::format_number(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(csv::parse_number("2.5e-3"), 2.5e-3);
  EXPECT_TRUE(std::isnan(csv::parse_number("")));
  EXPECT_THROW(csv::parse_number("1,5"), std::invalid_argument);
}

TEST(Records, EmptyListIsHeaderOnly) {
  EXPECT_EQ(format_records({}), std::string(kRecordsHeader) + "\n");
}

TEST(Records, RoundTripToSixDigits) {
  const auto recs = sample_records(25, 7.0);
  const fs::path p = temp_file("records.csv");
  write_records(recs, p);
  const auto back = read_records(p);
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(back[i].k, recs[i].k);
    EXPECT_TRUE(same_to_six_digits(back[i].train_loss, recs[i].train_loss));
    EXPECT_TRUE(same_to_six_digits(back[i].val_loss, recs[i].val_loss));
    EXPECT_TRUE(same_to_six_digits(back[i].step_norm, recs[i].step_norm));
    EXPECT_EQ(back[i].clamp_hits, recs[i].clamp_hits);
  }
  fs::remove(p);
}

TEST(Records, SixSignificantDigitsAndEmptyValidation) {
  RunRecord r;
  r.k = 3;
  r.train_loss = 1.0 / 3.0;
  r.val_loss = kNaN;
  r.step_norm = 2.0;
  EXPECT_EQ(format_records(std::vector<RunRecord>{r}), std::string(kRecordsHeader) + "\n3,0.333333,,2,0,0\n");
}

TEST(Records, IoErrorsNameThePath) {
  try {
    write_records({}, "/nonexistent_dir/x.csv");
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent_dir/x.csv"), std::string::npos);
  }
  const fs::path bad = temp_file("bad_header.csv");
  csv::write_text(bad, "a,b\n1,2\n");
  EXPECT_THROW(read_records(bad), std::runtime_error);
  fs::remove(bad);
}

TEST(Summary, ColumnOrderAndRoundTrip) {
  SummaryRow row{"synthetic", "ocp_ls", {0.5, 0.75, 2.0, 3.5}, -1.25, -3.5};
  const std::vector<SummaryRow> rows{row};
  EXPECT_EQ(format_summary(rows), std::string(kSummaryHeader) + "\nsynthetic,ocp_ls,0.5,0.75,2,3.5,-1.25,-3.5\n");
  EXPECT_EQ(csv::split(kSummaryHeader).size(), 8u);
  const fs::path p = temp_file("summary.csv");
  write_summary(rows, p);
  const auto back = read_summary(p);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].algorithm, "ocp_ls");
  EXPECT_EQ(back[0].errors.mean_rot, 3.5);
  EXPECT_EQ(back[0].s_q, -3.5);
  fs::remove(p);
}

TEST(Curves, TwoArmsTwoLabelledSeries) {
  const std::vector<CurveSeries> s{{"ocp_ls", sample_records(10, 2.0)}, {"adamw", sample_records(10, 3.0)}};
  const std::string svg = render_curves_svg(s);
  EXPECT_NE(svg.find("data-series=\"ocp_ls\""), std::string::npos);
  EXPECT_NE(svg.find("data-series=\"adamw\""), std::string::npos);
  const std::string csv_text = render_curves_csv(s);
  EXPECT_EQ(std::count(csv_text.begin(), csv_text.end(), '\n'), 21);
}

TEST(Curves, MonotoneSeriesGivesMonotonePolyline) {
  const std::vector<CurveSeries> s{{"only", sample_records(30, 5.0)}};
  const std::string svg = render_curves_svg(s);
  const auto start = svg.find("points=\"", svg.find("data-series=\"only\"")) + 8;
  std::istringstream pts(svg.substr(start, svg.find('"', start) - start));
  std::string pair;
  double prev_x = -1.0, prev_y = -1.0;
  int count = 0;
  while (pts >> pair) {
    const double x = std::stod(pair.substr(0, pair.find(','))), y = std::stod(pair.substr(pair.find(',') + 1));
    EXPECT_GT(x, prev_x);
    EXPECT_GE(y, prev_y);  // falling loss moves down the page
    prev_x = x, prev_y = y;
    ++count;
  }
  EXPECT_EQ(count, 30);
}

TEST(Curves, ByteStableGolden) {
  std::vector<RunRecord> recs;
  for (std::uint64_t k = 1; k <= 3; ++k) {
    RunRecord r;
    r.k = k;
    r.train_loss = 4.0 - double(k);
    r.val_loss = k == 3 ? 0.5 : kNaN;
    recs.push_back(r);
  }
  const std::vector<CurveSeries> s{{"a", recs}};
  EXPECT_EQ(render_curves_csv(s), "series,k,train_loss,val_loss\na,1,3,\na,2,2,\na,3,1,0.5\n");
  const fs::path p1 = temp_file("c1.svg"), p2 = temp_file("c2.svg");
  emit_curves(s, p1);
  emit_curves(s, p2);
  EXPECT_EQ(slurp(p1), slurp(p2));
  EXPECT_EQ(slurp(p1), render_curves_svg(s));
  EXPECT_NE(slurp(p1).find("points=\"70.00,70.00 260.00,200.00 450.00,330.00\""), std::string::npos);
  fs::remove(p1);
  fs::remove(p2);
  EXPECT_THROW(emit_curves({}, p1), std::invalid_argument);
}

TEST(RateJson, NonFiniteBecomesNull) {
  RateReport r;
  r.beta_est = 4.0;
  r.rho_pred = kNaN;
  const std::string j = rate_report_json(r);
  EXPECT_NE(j.find("\"beta_est\": 4.0"), std::string::npos);
  EXPECT_NE(j.find("\"rho_pred\": null"), std::string::npos);
}
