#include "ocpls/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "ocpls/csv.hpp"

namespace ocpls {
namespace {

constexpr int kDigits = 6;

std::string num(double v) { return csv::format_number(v, kDigits); }

std::string fixed2(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
}

std::uint64_t parse_u64(std::string_view field, const std::filesystem::path& path, std::size_t line) {
  std::uint64_t v = 0;
  auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": bad integer '" + std::string(field) + "'");
  }
  return v;
}

std::vector<std::vector<std::string_view>> read_table(const std::vector<std::string>& lines, const char* header,
                                                      const std::filesystem::path& path) {
  if (lines.empty() || lines.front() != header) {
    throw std::runtime_error(path.string() + ": unexpected header (want '" + header + "')");
  }
  const std::size_t columns = csv::split(header).size();
  std::vector<std::vector<std::string_view>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto fields = csv::split(lines[i]);
    if (fields.size() != columns) {
      throw std::runtime_error(path.string() + ":" + std::to_string(i + 1) + ": expected " + std::to_string(columns) +
                               " fields");
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

double parse_real(std::string_view field, const std::filesystem::path& path, std::size_t line) {
  try {
    return csv::parse_number(field);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + e.what());
  }
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

struct Panel {
  double x0, y0, w, h;
};

void render_panel(std::string& svg, const Panel& panel, const char* title, std::span<const CurveSeries> series,
                  bool validation) {
  double kmax = 1.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const CurveSeries& s : series) {
    for (const RunRecord& r : s.records) {
      const double v = validation ? r.val_loss : r.train_loss;
      if (!std::isfinite(v)) continue;
      kmax = std::max(kmax, double(r.k));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (hi == lo) hi = lo + 1.0;

  svg += "<g>\n<rect x=\"" + fixed2(panel.x0) + "\" y=\"" + fixed2(panel.y0) + "\" width=\"" + fixed2(panel.w) +
         "\" height=\"" + fixed2(panel.h) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  svg += "<text x=\"" + fixed2(panel.x0 + panel.w / 2) + "\" y=\"" + fixed2(panel.y0 - 8) +
         "\" text-anchor=\"middle\">" + title + "</text>\n";
  svg += "<text x=\"" + fixed2(panel.x0 - 4) + "\" y=\"" + fixed2(panel.y0 + 12) + "\" text-anchor=\"end\">" +
         num(hi) + "</text>\n";
  svg += "<text x=\"" + fixed2(panel.x0 - 4) + "\" y=\"" + fixed2(panel.y0 + panel.h) + "\" text-anchor=\"end\">" +
         num(lo) + "</text>\n";
  svg += "<text x=\"" + fixed2(panel.x0 + panel.w) + "\" y=\"" + fixed2(panel.y0 + panel.h + 16) +
         "\" text-anchor=\"end\">k = " + std::to_string(std::uint64_t(kmax)) + "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    std::string points;
    for (const RunRecord& r : series[si].records) {
      const double v = validation ? r.val_loss : r.train_loss;
      if (!std::isfinite(v)) continue;
      const double px = panel.x0 + panel.w * (kmax > 1.0 ? (double(r.k) - 1.0) / (kmax - 1.0) : 0.0);
      const double py = panel.y0 + panel.h * (1.0 - (v - lo) / (hi - lo));
      if (!points.empty()) points += ' ';
      points += fixed2(px) + "," + fixed2(py);
    }
    svg += "<polyline data-series=\"" + series[si].label + "\" fill=\"none\" stroke=\"" +
           kPalette[si % std::size(kPalette)] + "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
  }
  svg += "</g>\n";
}

}  // namespace

std::string format_records(std::span<const RunRecord> records) {
  std::string text = std::string(kRecordsHeader) + "\n";
  for (const RunRecord& r : records) {
    text += std::to_string(r.k) + "," + num(r.train_loss) + "," + (std::isnan(r.val_loss) ? "" : num(r.val_loss)) +
            "," + num(r.step_norm) + "," + std::to_string(r.clamp_hits) + "," + num(r.elapsed_s) + "\n";
  }
  return text;
}

void write_records(std::span<const RunRecord> records, const std::filesystem::path& path) {
  csv::write_text(path, format_records(records));
}

std::vector<RunRecord> read_records(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  const auto rows = read_table(lines, kRecordsHeader, path);
  std::vector<RunRecord> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& f = rows[i];
    const std::size_t line = i + 2;
    RunRecord r;
    r.k = parse_u64(f[0], path, line);
    r.train_loss = parse_real(f[1], path, line);
    r.val_loss = parse_real(f[2], path, line);
    r.step_norm = parse_real(f[3], path, line);
    r.clamp_hits = parse_u64(f[4], path, line);
    r.elapsed_s = parse_real(f[5], path, line);
    out.push_back(r);
  }
  return out;
}

std::string format_summary(std::span<const SummaryRow> rows) {
  std::string text = std::string(kSummaryHeader) + "\n";
  for (const SummaryRow& r : rows) {
    text += r.dataset + "," + r.algorithm + "," + num(r.errors.median_pos) + "," + num(r.errors.mean_pos) + "," +
            num(r.errors.median_rot) + "," + num(r.errors.mean_rot) + "," + num(r.s_p) + "," + num(r.s_q) + "\n";
  }
  return text;
}

void write_summary(std::span<const SummaryRow> rows, const std::filesystem::path& path) {
  csv::write_text(path, format_summary(rows));
}

std::vector<SummaryRow> read_summary(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  const auto rows = read_table(lines, kSummaryHeader, path);
  std::vector<SummaryRow> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& f = rows[i];
    const std::size_t line = i + 2;
    SummaryRow r;
    r.dataset = std::string(f[0]);
    r.algorithm = std::string(f[1]);
    r.errors = {parse_real(f[2], path, line), parse_real(f[3], path, line), parse_real(f[4], path, line),
                parse_real(f[5], path, line)};
    r.s_p = parse_real(f[6], path, line);
    r.s_q = parse_real(f[7], path, line);
    out.push_back(std::move(r));
  }
  return out;
}

void write_evaluations(std::span<const EvaluationRow> rows, const std::filesystem::path& path) {
  std::string text = std::string(kEvaluationsHeader) + "\n";
  for (const EvaluationRow& r : rows) {
    text += r.algorithm + "," + std::to_string(r.iteration) + "," + num(r.noise_level) + "," +
            num(r.errors.median_pos) + "," + num(r.errors.mean_pos) + "," + num(r.errors.median_rot) + "," +
            num(r.errors.mean_rot) + "," + num(r.s_p) + "," + num(r.s_q) + "," + num(r.val_loss) + "\n";
  }
  csv::write_text(path, text);
}

std::string render_curves_csv(std::span<const CurveSeries> series) {
  std::string text = "series,k,train_loss,val_loss\n";
  for (const CurveSeries& s : series) {
    for (const RunRecord& r : s.records) {
      text += s.label + "," + std::to_string(r.k) + "," + num(r.train_loss) + "," +
              (std::isnan(r.val_loss) ? "" : num(r.val_loss)) + "\n";
    }
  }
  return text;
}

std::string render_curves_svg(std::span<const CurveSeries> series) {
  const double panel_w = 380.0, panel_h = 260.0, margin = 70.0;
  const double width = 2 * panel_w + 3 * margin;
  const double legend_h = 20.0 * double(series.size());
  const double height = panel_h + 2 * margin + legend_h;
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed2(width) + "\" height=\"" +
                    fixed2(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  render_panel(svg, {margin, margin, panel_w, panel_h}, "Train loss", series, false);
  render_panel(svg, {2 * margin + panel_w, margin, panel_w, panel_h}, "Validation loss", series, true);
  for (std::size_t si = 0; si < series.size(); ++si) {
    const double y = margin + panel_h + 40.0 + 20.0 * double(si);
    const char* color = kPalette[si % std::size(kPalette)];
    svg += "<line x1=\"" + fixed2(margin) + "\" y1=\"" + fixed2(y) + "\" x2=\"" + fixed2(margin + 30) + "\" y2=\"" +
           fixed2(y) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fixed2(margin + 38) + "\" y=\"" + fixed2(y + 4) + "\">" + series[si].label + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void emit_curves(std::span<const CurveSeries> series, const std::filesystem::path& path) {
  if (series.empty()) throw std::invalid_argument("emit_curves: no series");
  for (const CurveSeries& s : series)
    if (s.records.empty()) throw std::invalid_argument("emit_curves: series '" + s.label + "' has no records");
  csv::write_text(path, path.extension() == ".svg" ? render_curves_svg(series) : render_curves_csv(series));
}

std::string rate_report_json(const RateReport& report) {
  nlohmann::json j = {
      {"beta_est", number_or_null(report.beta_est)},
      {"mu_pl_est", number_or_null(report.mu_pl_est)},
      {"rho_pred", number_or_null(report.rho_pred)},
      {"rho_fit", number_or_null(report.rho_fit)},
      {"fit_r2", number_or_null(report.fit_r2)},
      {"a3_violation_count", report.a3_violation_count},
      {"descent_violations", report.descent_violations},
  };
  return j.dump(2);
}

void write_outputs(const ExperimentResult& result, const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<SummaryRow> summary;
  std::vector<EvaluationRow> evaluations;
  std::vector<CurveSeries> curves;
  nlohmann::json arms = nlohmann::json::array();
  for (const ArmResult& arm : result.arms) {
    write_records(arm.records, out_dir / ("records_" + arm.name + ".csv"));
    summary.push_back(arm.summary);
    evaluations.insert(evaluations.end(), arm.evaluations.begin(), arm.evaluations.end());
    if (!arm.records.empty()) curves.push_back({arm.name, arm.records});
    arms.push_back({
        {"name", arm.name},
        {"diverged", arm.diverged},
        {"divergence_reason", arm.divergence_reason},
        {"iterations_completed", arm.iterations_completed},
        {"initial_train_loss", number_or_null(arm.initial_train_loss)},
        {"final_train_loss", number_or_null(arm.final_train_loss)},
        {"rates", nlohmann::json::parse(rate_report_json(arm.rates))},
    });
  }
  write_summary(summary, out_dir / "summary.csv");
  write_evaluations(evaluations, out_dir / "evaluations.csv");
  if (!curves.empty()) {
    emit_curves(curves, out_dir / "curves.csv");
    emit_curves(curves, out_dir / "curves.svg");
  }
  nlohmann::json doc = {{"dataset", cfg.problem.dataset},
                        {"problem", to_string(cfg.problem.kind)},
                        {"all_diverged", result.all_diverged()},
                        {"arms", arms}};
  csv::write_text(out_dir / "summary.json", doc.dump(2) + "\n");
  save_config(cfg, out_dir / "config.ini");
}

}  // namespace ocpls
