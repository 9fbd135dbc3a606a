#include "ocpls/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <random>

#include "ocpls/optimizer.hpp"
#include "ocpls/pose_task.hpp"

namespace ocpls {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kBatchSeedSalt = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kInitSeedSalt = 0x5851f42d4c957f2dULL;

ParamVector gaussian_vector(std::size_t n, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  ParamVector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = scale * normal(rng);
  return v;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = n == 1 ? lo : lo + (hi - lo) * double(i) / double(n - 1);
  return out;
}

class ObjectiveTask final : public TrainingTask {
 public:
  ObjectiveTask(std::unique_ptr<Objective> objective, ParamVector x0)
      : objective_(std::move(objective)), x0_(std::move(x0)) {}

  std::size_t dimension() const override { return objective_->dimension(); }
  std::size_t num_train() const override { return 0; }
  ParamVector initial_point() const override { return x0_; }
  double batch_loss(const ParamVector& x, std::span<const std::size_t>, ParamVector* grad) const override {
    return objective_->evaluate(x, grad);
  }
  double train_loss(const ParamVector& x) const override { return objective_->value(x); }
  double val_loss(const ParamVector& x) const override { return objective_->value(x); }
  const Objective& objective() const override { return *objective_; }
  std::optional<double> gap(const ParamVector& x) const override {
    if (const auto* quad = dynamic_cast<const QuadraticProblem*>(objective_.get())) return quad->gap(x);
    return TrainingTask::gap(x);
  }

 private:
  std::unique_ptr<Objective> objective_;
  ParamVector x0_;
};

// Full training-set pose loss as a plain objective.
class PoseObjective final : public Objective {
 public:
  PoseObjective(const TinyRegressor& model, const std::vector<PoseSample>& data) : model_(model), data_(data) {
    all_.resize(data.size());
    std::iota(all_.begin(), all_.end(), std::size_t{0});
  }
  std::size_t dimension() const override { return model_.parameter_count(); }
  double evaluate(const ParamVector& x, ParamVector* grad) const override {
    return model_.loss_and_gradient(x, data_, all_, grad);
  }

 private:
  const TinyRegressor& model_;
  const std::vector<PoseSample>& data_;
  std::vector<std::size_t> all_;
};

class PoseTask final : public TrainingTask {
 public:
  explicit PoseTask(const ProblemSpec& spec)
      : spec_(spec),
        scene_(make_synthetic_scene(spec.n_train, spec.n_val, spec.noise_sigma, spec.seed, spec.feature_dim)),
        model_(spec.feature_dim, spec.hidden, Activation::tanh),
        objective_(model_, scene_.train) {}

  std::size_t dimension() const override { return model_.parameter_count(); }
  std::size_t num_train() const override { return scene_.train.size(); }
  ParamVector initial_point() const override {
    return model_.initial_parameters(spec_.seed ^ kInitSeedSalt, {spec_.s_p_init, spec_.s_q_init});
  }
  double batch_loss(const ParamVector& x, std::span<const std::size_t> batch, ParamVector* grad) const override {
    return model_.loss_and_gradient(x, scene_.train, batch, grad);
  }
  double train_loss(const ParamVector& x) const override { return model_.loss(x, scene_.train); }
  double val_loss(const ParamVector& x) const override { return model_.loss(x, scene_.val); }
  const Objective& objective() const override { return objective_; }
  bool has_pose_metrics() const override { return true; }

  EvaluationRow evaluate_pose(const ParamVector& x, double noise_level, std::uint64_t noise_seed) const override {
    const std::vector<PoseSample> val = add_feature_noise(scene_.val, noise_level, noise_seed);
    const std::vector<Pose> pred = model_.predict(x, val);
    std::vector<double> pos(val.size()), rot(val.size());
    for (std::size_t i = 0; i < val.size(); ++i) {
      pos[i] = position_error(pred[i].p, val[i].pose.p);
      rot[i] = rotation_error(pred[i].q, val[i].pose.q);
    }
    EvaluationRow row;
    row.noise_level = noise_level;
    row.errors = summarize(pos, rot);
    const PoseLossParams s = model_.loss_params(x);
    row.s_p = s.s_p;
    row.s_q = s.s_q;
    row.val_loss = model_.loss(x, val);
    return row;
  }

 private:
  ProblemSpec spec_;
  SyntheticScene scene_;
  TinyRegressor model_;
  PoseObjective objective_;
};

double safe_rho_infinity(double alpha, double beta, double mu) {
  try {
    return rho_infinity(alpha, beta, mu);
  } catch (const std::domain_error&) {
    return kNaN;
  }
}

}  // namespace

bool ExperimentResult::all_diverged() const {
  return !arms.empty() && std::all_of(arms.begin(), arms.end(), [](const ArmResult& a) { return a.diverged; });
}

std::optional<double> TrainingTask::gap(const ParamVector& x) const {
  if (auto f_star = objective().optimal_value()) return train_loss(x) - *f_star;
  return std::nullopt;
}

EvaluationRow TrainingTask::evaluate_pose(const ParamVector&, double noise_level, std::uint64_t) const {
  EvaluationRow row;
  row.noise_level = noise_level;
  row.errors = {kNaN, kNaN, kNaN, kNaN};
  row.s_p = row.s_q = row.val_loss = kNaN;
  return row;
}

std::unique_ptr<TrainingTask> make_task(const ProblemSpec& spec) {
  const std::uint64_t init_seed = spec.seed ^ kInitSeedSalt;
  switch (spec.kind) {
    case ProblemKind::quadratic: {
      const std::vector<double> eig = linspace(spec.lambda_min, spec.lambda_max, spec.dimension);
      auto quad = std::make_unique<QuadraticProblem>(QuadraticProblem::random(eig, spec.seed, spec.lambda_reg, true));
      ParamVector x0 = scale_add(quad->minimizer(), 1.0, gaussian_vector(spec.dimension, spec.init_scale, init_seed));
      return std::make_unique<ObjectiveTask>(std::move(quad), std::move(x0));
    }
    case ProblemKind::rosenbrock: {
      auto rosen = std::make_unique<RosenbrockProblem>(spec.dimension);
      ParamVector x0 = gaussian_vector(spec.dimension, spec.init_scale, init_seed);
      return std::make_unique<ObjectiveTask>(std::move(rosen), std::move(x0));
    }
    case ProblemKind::least_squares: {
      auto lsq = std::make_unique<LinearLeastSquares>(
          LinearLeastSquares::random(std::max<std::size_t>(spec.n_train, 1), spec.dimension, spec.seed));
      ParamVector x0 = gaussian_vector(spec.dimension, spec.init_scale, init_seed);
      return std::make_unique<ObjectiveTask>(std::move(lsq), std::move(x0));
    }
    case ProblemKind::pose:
      return std::make_unique<PoseTask>(spec);
  }
  throw ConfigError("problem.kind: unsupported");
}

BatchStream::BatchStream(std::size_t n, std::size_t batch_size, std::uint64_t seed)
    : n_(n), batch_size_(std::min(batch_size, n)), order_(n), cursor_(n), rng_state_(seed) {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
}

std::vector<std::size_t> BatchStream::next() {
  if (n_ == 0) return {};
  if (cursor_ + batch_size_ > n_) {
    std::mt19937_64 rng(rng_state_++);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    // Fisher-Yates with an explicit index draw so the order does not depend on the
    // standard library's shuffle
    for (std::size_t i = n_ - 1; i > 0; --i) {
      const std::size_t j = std::size_t(rng() % (i + 1));
      std::swap(order_[i], order_[j]);
    }
    cursor_ = 0;
  }
  std::vector<std::size_t> batch(order_.begin() + std::ptrdiff_t(cursor_),
                                 order_.begin() + std::ptrdiff_t(cursor_ + batch_size_));
  cursor_ += batch_size_;
  return batch;
}

RateReport rate_report(const TrainingTask& task, const ArmSpec& arm, std::span<const double> gaps,
                       std::span<const ParamVector> snapshots, const ParamVector& x_final) {
  RateReport report;
  const Objective& obj = task.objective();
  const double radius = 1e-2 * (1.0 + x_final.norm() / std::sqrt(double(std::max<std::size_t>(x_final.size(), 1))));
  report.beta_est = smoothness_constant(obj, x_final, radius, 16, 7);

  std::optional<double> f_star = obj.optimal_value();
  if (!f_star && !snapshots.empty()) {
    double best = std::numeric_limits<double>::infinity();
    for (const ParamVector& x : snapshots) best = std::min(best, obj.value(x));
    f_star = best;
  }
  report.mu_pl_est = kNaN;
  if (!snapshots.empty()) {
    try {
      report.mu_pl_est = pl_constant(obj, snapshots, f_star);
    } catch (const std::invalid_argument&) {
    }
  }

  report.rho_pred = kNaN;
  if (arm.optimizer.kind == OptimizerKind::ocp_ls && std::isfinite(report.mu_pl_est)) {
    report.rho_pred = safe_rho_infinity(arm.optimizer.clamp_floor, report.beta_est, report.mu_pl_est);
  }

  std::vector<double> from_snapshots;
  if (gaps.empty() && f_star) {
    for (const ParamVector& x : snapshots) from_snapshots.push_back(obj.value(x) - *f_star);
    gaps = from_snapshots;
  }
  std::vector<double> positive;
  for (double g : gaps) {
    if (!(g > 0.0) || !std::isfinite(g)) break;
    positive.push_back(g);
  }
  report.rho_fit = report.fit_r2 = kNaN;
  if (positive.size() >= 10) {
    const RateFit fit = fit_empirical_rate(positive);
    report.rho_fit = fit.rho;
    report.fit_r2 = fit.r2;
  }
  return report;
}

ArmResult run_arm(const ExperimentConfig& cfg, const ArmSpec& arm, const TrainingTask& task) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const RunSpec& run = cfg.run;

  ArmResult result;
  result.name = arm.name;
  result.summary.dataset = cfg.problem.dataset;
  result.summary.algorithm = arm.name;

  ParamVector x = task.initial_point();
  Optimizer opt(arm.optimizer, x.size());
  BatchStream stream(task.num_train(), run.batch_size, cfg.problem.seed ^ kBatchSeedSalt);
  result.initial_train_loss = task.train_loss(x);
  result.final_train_loss = result.initial_train_loss;

  const bool is_ocp = arm.optimizer.kind == OptimizerKind::ocp_ls;
  const OcpLsConfig ocp_cfg = arm.optimizer.ocp_ls();

  std::vector<double> gaps;
  std::vector<double> values;  // gap if known, else full objective; only for descent auditing
  if (auto g0 = task.gap(x)) gaps.push_back(*g0);
  std::vector<ParamVector> snapshots{x};
  std::optional<std::size_t> first_a3_valid;

  std::vector<std::size_t> checkpoints = run.checkpoints;
  checkpoints.push_back(run.max_iterations);
  auto is_checkpoint = [&](std::size_t k) {
    return std::find(checkpoints.begin(), checkpoints.end(), k) != checkpoints.end();
  };
  auto evaluate = [&](std::uint64_t k) {
    if (!task.has_pose_metrics()) return;
    for (std::size_t li = 0; li < cfg.robustness.noise_levels.size(); ++li) {
      EvaluationRow row = task.evaluate_pose(x, cfg.robustness.noise_levels[li], cfg.problem.seed * 1000003ULL + li);
      row.algorithm = arm.name;
      row.iteration = k;
      result.evaluations.push_back(row);
    }
  };

  for (std::uint64_t k = 1; k <= run.max_iterations; ++k) {
    const std::vector<std::size_t> batch = stream.next();
    ParamVector g;
    double loss = kNaN;
    StepDiagnostics diag;
    try {
      loss = task.batch_loss(x, batch, &g);
      if (!std::isfinite(loss) || !g.all_finite()) throw NonFiniteError("non-finite loss or gradient");
      ParamVector x_next = x;
      diag = opt.step(x_next, g);
      x_next.validate("iterate");
      x = std::move(x_next);
    } catch (const std::exception& e) {
      result.diverged = true;
      result.divergence_reason = "iteration " + std::to_string(k) + ": " + e.what();
      break;
    }

    RunRecord rec;
    rec.k = k;
    rec.train_loss = loss;
    rec.val_loss = kNaN;
    rec.step_norm = diag.step_norm;
    rec.clamp_hits = diag.clamp_hits;
    if (k % run.validation_interval == 0 || k == run.max_iterations) {
      rec.val_loss = task.val_loss(x);
      snapshots.push_back(x);
    }
    if (run.record_wall_time) rec.elapsed_s = std::chrono::duration<double>(Clock::now() - start).count();
    result.records.push_back(rec);
    result.iterations_completed = k;

    if (is_ocp) {
      const OptimizerState& st = opt.state();
      const ParamVector h_hat(st.h_ema.vec() / (1.0 - std::pow(ocp_cfg.beta2, double(st.k))));
      const std::uint64_t inner = ocp_cfg.inner_cap ? std::min<std::uint64_t>(st.k - 1, *ocp_cfg.inner_cap) : st.k - 1;
      if (check_a3(h_hat, ocp_cfg.alpha, inner).holds) {
        if (!first_a3_valid) first_a3_valid = values.size();
      } else {
        ++result.rates.a3_violation_count;
      }
    }
    if (auto gk = task.gap(x)) {
      gaps.push_back(*gk);
      values.push_back(*gk);
    }
    if (task.has_pose_metrics() && is_checkpoint(k)) evaluate(k);
  }

  if (!result.diverged) {
    result.final_train_loss = task.train_loss(x);
  }

  const std::size_t a3_count = result.rates.a3_violation_count;
  if (!result.diverged) {
    result.rates = rate_report(task, arm, gaps, snapshots, x);
  } else {
    result.rates.beta_est = result.rates.mu_pl_est = result.rates.rho_pred = kNaN;
    result.rates.rho_fit = result.rates.fit_r2 = kNaN;
  }
  result.rates.a3_violation_count = a3_count;
  if (is_ocp && first_a3_valid) {
    result.rates.descent_violations = count_descent_violations(values, *first_a3_valid);
  }

  if (task.has_pose_metrics() && !result.diverged) {
    const EvaluationRow clean = task.evaluate_pose(x, 0.0, 0);
    result.summary.errors = clean.errors;
    result.summary.s_p = clean.s_p;
    result.summary.s_q = clean.s_q;
  } else {
    result.summary.errors = {kNaN, kNaN, kNaN, kNaN};
    result.summary.s_p = result.summary.s_q = kNaN;
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::unique_ptr<TrainingTask> task = make_task(cfg.problem);
  ExperimentResult out;
  out.arms.resize(cfg.arms.size());
  const std::size_t threads = std::max<std::size_t>(cfg.run.threads, 1);
  for (std::size_t begin = 0; begin < cfg.arms.size(); begin += threads) {
    const std::size_t end = std::min(cfg.arms.size(), begin + threads);
    if (end - begin == 1) {
      out.arms[begin] = run_arm(cfg, cfg.arms[begin], *task);
      continue;
    }
    std::vector<std::future<ArmResult>> futures;
    for (std::size_t i = begin; i < end; ++i) {
      futures.push_back(std::async(std::launch::async, [&cfg, &task, i] { return run_arm(cfg, cfg.arms[i], *task); }));
    }
    for (std::size_t i = begin; i < end; ++i) out.arms[i] = futures[i - begin].get();
  }
  return out;
}

}  // namespace ocpls
