#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ocpls/config.hpp"
#include "ocpls/pose_metrics.hpp"
#include "ocpls/problems.hpp"
#include "ocpls/theory.hpp"

namespace ocpls {

struct RunRecord {
  std::uint64_t k = 0;
  double train_loss = 0.0;  // mini-batch loss at the point where step k's gradient was taken
  double val_loss = 0.0;    // NaN between validation points
  double step_norm = 0.0;
  std::uint64_t clamp_hits = 0;
  double elapsed_s = 0.0;
};

// Column set of the comparison table: dataset, algorithm, error summary, final s_p, s_q.
struct SummaryRow {
  std::string dataset;
  std::string algorithm;
  ErrorSummary errors;
  double s_p = 0.0;
  double s_q = 0.0;
};

// Validation-set errors of one arm at one checkpoint under one input-noise level.
struct EvaluationRow {
  std::string algorithm;
  std::uint64_t iteration = 0;
  double noise_level = 0.0;
  ErrorSummary errors;
  double s_p = 0.0;
  double s_q = 0.0;
  double val_loss = 0.0;
};

struct ArmResult {
  std::string name;
  std::vector<RunRecord> records;
  SummaryRow summary;
  std::vector<EvaluationRow> evaluations;
  RateReport rates;
  bool diverged = false;
  std::string divergence_reason;
  std::uint64_t iterations_completed = 0;
  double initial_train_loss = 0.0;  // full training objective at x0
  double final_train_loss = 0.0;    // full training objective at the last finite iterate
};

struct ExperimentResult {
  std::vector<ArmResult> arms;

  bool all_diverged() const;
};

// Training objective as seen by the runner: mini-batch evaluation plus full-set
// train/validation losses.
class TrainingTask {
 public:
  virtual ~TrainingTask() = default;
  virtual std::size_t dimension() const = 0;
  // Samples available for mini-batching; 0 means full-batch evaluation.
  virtual std::size_t num_train() const = 0;
  virtual ParamVector initial_point() const = 0;
  virtual double batch_loss(const ParamVector& x, std::span<const std::size_t> batch, ParamVector* grad) const = 0;
  virtual double train_loss(const ParamVector& x) const = 0;
  virtual double val_loss(const ParamVector& x) const = 0;
  // Full training objective for theory checks.
  virtual const Objective& objective() const = 0;
  // f(x) - f*; falls back to train_loss minus the known optimum when available.
  virtual std::optional<double> gap(const ParamVector& x) const;
  virtual bool has_pose_metrics() const { return false; }
  virtual EvaluationRow evaluate_pose(const ParamVector& x, double noise_level, std::uint64_t noise_seed) const;
};

std::unique_ptr<TrainingTask> make_task(const ProblemSpec& spec);

// Deterministic sequence of mini-batches: seeded per-epoch shuffles of [0, n).
class BatchStream {
 public:
  BatchStream(std::size_t n, std::size_t batch_size, std::uint64_t seed);
  std::vector<std::size_t> next();

 private:
  std::size_t n_, batch_size_;
  std::vector<std::size_t> order_;
  std::size_t cursor_;
  std::uint64_t rng_state_;
};

ArmResult run_arm(const ExperimentConfig& cfg, const ArmSpec& arm, const TrainingTask& task);

// Every arm starts from the same x0 and consumes the same batch sequence.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Rate report for a finished quadratic-style trajectory of optimality gaps.
RateReport rate_report(const TrainingTask& task, const ArmSpec& arm, std::span<const double> gaps,
                       std::span<const ParamVector> snapshots, const ParamVector& x_final);

}  // namespace ocpls
