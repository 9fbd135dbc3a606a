#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>

#include <Eigen/Core>

#include "ocpls/curvature.hpp"
#include "ocpls/param_vector.hpp"

namespace ocpls {

// Deterministic differentiable objective.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual std::size_t dimension() const = 0;
  // Returns f(x); writes the gradient when `grad` is non-null.
  virtual double evaluate(const ParamVector& x, ParamVector* grad) const = 0;
  virtual std::optional<double> optimal_value() const { return std::nullopt; }

  double value(const ParamVector& x) const { return evaluate(x, nullptr); }
  ParamVector gradient(const ParamVector& x) const;
};

// f(x) = 0.5 x'Ax - b'x + 0.5 lambda |x|^2 with A symmetric positive definite.
class QuadraticProblem final : public Objective {
 public:
  QuadraticProblem(Eigen::MatrixXd a, ParamVector b, double lambda_reg = 0.0);

  static QuadraticProblem diagonal(std::span<const double> eigenvalues, double lambda_reg = 0.0);
  // Q diag(eigenvalues) Q' with Q a seeded random rotation; b ~ N(0, 1) unless zero_b.
  static QuadraticProblem random(std::span<const double> eigenvalues, std::uint64_t seed,
                                 double lambda_reg = 0.0, bool zero_b = false);

  std::size_t dimension() const override { return std::size_t(a_.rows()); }
  double evaluate(const ParamVector& x, ParamVector* grad) const override;
  std::optional<double> optimal_value() const override { return f_star_; }

  // f(x) - f* through 0.5 (x - x*)'(A + lambda I)(x - x*); stays accurate near the optimum.
  double gap(const ParamVector& x) const;

  const ParamVector& minimizer() const { return x_star_; }
  // Gradient Lipschitz constant lambda_max(A) + lambda.
  double smoothness() const { return lambda_max_ + lambda_; }
  // Exact PL constant lambda_min(A) + lambda.
  double pl_constant() const { return lambda_min_ + lambda_; }

  const Eigen::MatrixXd& matrix() const { return a_; }
  const ParamVector& linear_term() const { return b_; }
  double lambda_reg() const { return lambda_; }

 private:
  Eigen::MatrixXd a_;
  ParamVector b_;
  double lambda_;
  double lambda_min_ = 0.0;
  double lambda_max_ = 0.0;
  ParamVector x_star_;
  double f_star_ = 0.0;
};

std::pair<double, ParamVector> quadratic_eval(const QuadraticProblem& prob, const ParamVector& x);

// Chained Rosenbrock: sum_i 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2.
std::pair<double, ParamVector> rosenbrock_eval(const ParamVector& x);

class RosenbrockProblem final : public Objective {
 public:
  explicit RosenbrockProblem(std::size_t dimension);
  std::size_t dimension() const override { return dim_; }
  double evaluate(const ParamVector& x, ParamVector* grad) const override;
  std::optional<double> optimal_value() const override { return 0.0; }

 private:
  std::size_t dim_;
};

// l_n(x) = a_n'x; objective (1/N) sum_n 0.5 (l_n(x) - y_n)^2. Exposes Jacobian rows so it
// doubles as the Gauss-Newton oracle target.
class LinearLeastSquares final : public Objective, public ResidualModel {
 public:
  LinearLeastSquares(Eigen::MatrixXd rows, Eigen::VectorXd targets);
  static LinearLeastSquares random(std::size_t samples, std::size_t dimension, std::uint64_t seed);

  std::size_t dimension() const override { return std::size_t(rows_.cols()); }
  std::size_t num_samples() const override { return std::size_t(rows_.rows()); }

  double evaluate(const ParamVector& x, ParamVector* grad) const override;
  std::optional<double> optimal_value() const override { return f_star_; }

  double predict(const ParamVector& x, std::size_t sample) const override;
  ParamVector weighted_gradient(const ParamVector& x, std::span<const std::size_t> batch,
                                std::span<const double> weights) const override;
  std::optional<ParamVector> jacobian_row(const ParamVector& x, std::size_t sample) const override;

  const Eigen::MatrixXd& rows() const { return rows_; }
  const Eigen::VectorXd& targets() const { return targets_; }

 private:
  Eigen::MatrixXd rows_;
  Eigen::VectorXd targets_;
  double f_star_ = 0.0;
};

}  // namespace ocpls
