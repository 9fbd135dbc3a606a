#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ocpls/experiment.hpp"

namespace ocpls {

inline constexpr const char* kRecordsHeader = "k,train_loss,val_loss,step_norm,clamp_hits,elapsed_s";
inline constexpr const char* kSummaryHeader =
    "dataset,algorithm,median_pos_m,mean_pos_m,median_rot_deg,mean_rot_deg,s_p,s_q";
inline constexpr const char* kEvaluationsHeader =
    "algorithm,iteration,noise_level,median_pos_m,mean_pos_m,median_rot_deg,mean_rot_deg,s_p,s_q,val_loss";

// Reals use 6 significant digits; a missing val_loss is an empty field.
std::string format_records(std::span<const RunRecord> records);
void write_records(std::span<const RunRecord> records, const std::filesystem::path& path);
std::vector<RunRecord> read_records(const std::filesystem::path& path);

std::string format_summary(std::span<const SummaryRow> rows);
void write_summary(std::span<const SummaryRow> rows, const std::filesystem::path& path);
std::vector<SummaryRow> read_summary(const std::filesystem::path& path);

void write_evaluations(std::span<const EvaluationRow> rows, const std::filesystem::path& path);

struct CurveSeries {
  std::string label;
  std::vector<RunRecord> records;
};

// Train and validation loss against iteration for each series. A ".svg" path gets a
// two-panel line plot, anything else a long-format CSV (series,k,train_loss,val_loss).
void emit_curves(std::span<const CurveSeries> series, const std::filesystem::path& path);
std::string render_curves_svg(std::span<const CurveSeries> series);
std::string render_curves_csv(std::span<const CurveSeries> series);

std::string rate_report_json(const RateReport& report);

// Writes records_<arm>.csv, summary.csv, evaluations.csv, curves.csv, curves.svg,
// summary.json and the resolved config.ini into out_dir.
void write_outputs(const ExperimentResult& result, const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace ocpls
