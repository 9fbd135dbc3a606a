#include <cmath>
#include <filesystem>
#include <set>

#include <gtest/gtest.h>

#include "ocpls/experiment.hpp"
#include "ocpls/report.hpp"

using namespace ocpls;

namespace {

ExperimentConfig quadratic_config() {
  ExperimentConfig cfg = parse_config(R"(
[problem]
kind = quadratic
seed = 3
dimension = 20
lambda_min = 1
lambda_max = 4
init_scale = 0.2
[run]
max_iterations = 500
checkpoints =
[arm.ocp_ls]
optimizer = ocp_ls
alpha = 0.1
beta1 = 0
beta2 = 0
clamp_floor = 4
inner_cap = unlimited
)");
  return cfg;
}

ExperimentConfig small_pose_config() {
  return parse_config(R"(
[problem]
kind = pose
seed = 5
n_train = 64
n_val = 16
hidden = 8
[run]
max_iterations = 20
batch_size = 8
validation_interval = 5
checkpoints = 5, 10
[robustness]
noise_levels = 0, 0.05, 0.1
)");
}

class RecordingTask : public TrainingTask {
 public:
  explicit RecordingTask(const TrainingTask& inner) : inner_(inner) {}
  std::size_t dimension() const override { return inner_.dimension(); }
  std::size_t num_train() const override { return inner_.num_train(); }
  ParamVector initial_point() const override { return inner_.initial_point(); }
  double batch_loss(const ParamVector& x, std::span<const std::size_t> batch, ParamVector* grad) const override {
    seen.emplace_back(batch.begin(), batch.end());
    return inner_.batch_loss(x, batch, grad);
  }
  double train_loss(const ParamVector& x) const override { return inner_.train_loss(x); }
  double val_loss(const ParamVector& x) const override { return inner_.val_loss(x); }
  const Objective& objective() const override { return inner_.objective(); }

  mutable std::vector<std::vector<std::size_t>> seen;

 private:
  const TrainingTask& inner_;
};

}  // namespace

TEST(BatchStreamTest, DeterministicEpochPermutations) {
  BatchStream a(10, 4, 77), b(10, 4, 77), c(10, 4, 78);
  bool differs = false;
  for (int i = 0; i < 12; ++i) {
    const auto ba = a.next();
    EXPECT_EQ(ba, b.next());
    EXPECT_EQ(ba.size(), 4u);
    if (ba != c.next()) differs = true;
  }
  EXPECT_TRUE(differs);

  BatchStream epoch(12, 3, 1);
  std::set<std::size_t> covered;
  for (int i = 0; i < 4; ++i)
    for (std::size_t j : epoch.next()) covered.insert(j);
  EXPECT_EQ(covered.size(), 12u);
  EXPECT_TRUE(BatchStream(0, 3, 1).next().empty());
}

TEST(Experiment, IdenticalArmsGiveIdenticalRecords) {
  ExperimentConfig cfg = small_pose_config();
  cfg.arms = {{"first", default_arms()[0].optimizer}, {"second", default_arms()[0].optimizer}};
  const ExperimentResult r = run_experiment(cfg);
  ASSERT_EQ(r.arms.size(), 2u);
  EXPECT_EQ(format_records(r.arms[0].records), format_records(r.arms[1].records));
  for (std::size_t i = 0; i < r.arms[0].records.size(); ++i) {
    EXPECT_EQ(r.arms[0].records[i].train_loss, r.arms[1].records[i].train_loss);
  }
}

TEST(Experiment, ThreadedRunMatchesSerial) {
  ExperimentConfig cfg = small_pose_config();
  const ExperimentResult serial = run_experiment(cfg);
  cfg.run.threads = 3;
  const ExperimentResult threaded = run_experiment(cfg);
  for (std::size_t a = 0; a < serial.arms.size(); ++a) {
    EXPECT_EQ(format_records(serial.arms[a].records), format_records(threaded.arms[a].records));
  }
}

TEST(Experiment, OcpLsSolvesQuadratic) {
  const ExperimentConfig cfg = quadratic_config();
  const auto task = make_task(cfg.problem);
  const ParamVector x0 = task->initial_point();
  const double gap0 = *task->gap(x0);
  ASSERT_GT(gap0, 0.0);
  const ArmResult r = run_arm(cfg, cfg.arms[0], *task);
  ASSERT_FALSE(r.diverged);
  EXPECT_EQ(r.records.size(), 500u);
  EXPECT_LE(r.final_train_loss - *task->objective().optimal_value(), 1e-6 * gap0);
  EXPECT_EQ(r.rates.a3_violation_count, 0u);
  EXPECT_EQ(r.rates.descent_violations, 0u);
}

TEST(Experiment, EvaluationBlocksPerNoiseLevelAndCheckpoint) {
  const ExperimentConfig cfg = small_pose_config();
  const ExperimentResult r = run_experiment(cfg);
  ASSERT_EQ(r.arms.size(), 3u);
  for (const ArmResult& arm : r.arms) {
    ASSERT_FALSE(arm.diverged) << arm.divergence_reason;
    // checkpoints 5, 10 plus the final iterate, times three noise levels
    ASSERT_EQ(arm.evaluations.size(), 9u);
    for (std::size_t i = 0; i < arm.evaluations.size(); ++i) {
      EXPECT_EQ(arm.evaluations[i].noise_level, cfg.robustness.noise_levels[i % 3]);
      EXPECT_EQ(arm.evaluations[i].iteration, (std::vector<std::uint64_t>{5, 10, 20})[i / 3]);
    }
    EXPECT_TRUE(std::isfinite(arm.summary.errors.mean_rot));
    EXPECT_EQ(arm.evaluations[6].errors.mean_pos, arm.summary.errors.mean_pos);
  }
}

TEST(Experiment, ArmsSeeTheSameBatches) {
  const ExperimentConfig cfg = small_pose_config();
  const auto inner = make_task(cfg.problem);
  RecordingTask first(*inner), second(*inner);
  run_arm(cfg, cfg.arms[0], first);
  run_arm(cfg, cfg.arms[1], second);
  ASSERT_EQ(first.seen.size(), cfg.run.max_iterations);
  EXPECT_EQ(first.seen, second.seen);
}

TEST(Experiment, DivergenceIsContainedToItsArm) {
  ExperimentConfig cfg = quadratic_config();
  cfg.run.max_iterations = 50;
  OptimizerSpec wild;
  wild.kind = OptimizerKind::sophia;
  wild.alpha = 1e300;
  cfg.arms.push_back({"wild", wild});
  const ExperimentResult r = run_experiment(cfg);
  ASSERT_EQ(r.arms.size(), 2u);
  EXPECT_FALSE(r.arms[0].diverged);
  EXPECT_EQ(r.arms[0].records.size(), 50u);
  EXPECT_TRUE(r.arms[1].diverged);
  EXPECT_FALSE(r.arms[1].divergence_reason.empty());
  EXPECT_LT(r.arms[1].records.size(), 50u);
  EXPECT_TRUE(std::isnan(r.arms[1].summary.s_p));
  EXPECT_FALSE(r.all_diverged());
}

TEST(Experiment, WriteOutputsProducesEveryFile) {
  ExperimentConfig cfg = small_pose_config();
  cfg.run.max_iterations = 10;
  const ExperimentResult r = run_experiment(cfg);
  const auto dir = std::filesystem::temp_directory_path() / "ocpls_experiment_outputs";
  std::filesystem::remove_all(dir);
  write_outputs(r, cfg, dir);
  for (const char* name : {"records_ocp_ls.csv", "records_adamw.csv", "records_sophia.csv", "summary.csv",
                           "evaluations.csv", "curves.csv", "curves.svg", "summary.json", "config.ini"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
  }
  EXPECT_EQ(load_config(dir / "config.ini"), cfg);
  EXPECT_EQ(read_records(dir / "records_adamw.csv").size(), 10u);
  std::filesystem::remove_all(dir);
}
