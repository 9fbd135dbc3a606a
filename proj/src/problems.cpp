#include "ocpls/problems.hpp"

#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace ocpls {

ParamVector Objective::gradient(const ParamVector& x) const {
  ParamVector g;
  evaluate(x, &g);
  return g;
}

QuadraticProblem::QuadraticProblem(Eigen::MatrixXd a, ParamVector b, double lambda_reg)
    : a_(std::move(a)), b_(std::move(b)), lambda_(lambda_reg) {
  if (a_.rows() != a_.cols()) throw ShapeError("QuadraticProblem: A must be square");
  if (std::size_t(a_.rows()) != b_.size()) throw ShapeError("QuadraticProblem: A and b sizes differ");
  if (lambda_ < 0.0) throw std::invalid_argument("QuadraticProblem: lambda_reg must be >= 0");
  if (!a_.isApprox(a_.transpose(), 1e-12)) throw std::invalid_argument("QuadraticProblem: A must be symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a_, Eigen::EigenvaluesOnly);
  lambda_min_ = eig.eigenvalues().minCoeff();
  lambda_max_ = eig.eigenvalues().maxCoeff();
  if (!(lambda_min_ > 0.0)) throw std::invalid_argument("QuadraticProblem: A must be positive definite");

  const Eigen::MatrixXd reg = a_ + lambda_ * Eigen::MatrixXd::Identity(a_.rows(), a_.cols());
  x_star_ = ParamVector(Eigen::VectorXd(reg.ldlt().solve(b_.vec())));
  f_star_ = -0.5 * b_.vec().dot(x_star_.vec());
}

QuadraticProblem QuadraticProblem::diagonal(std::span<const double> eigenvalues, double lambda_reg) {
  const auto n = Eigen::Index(eigenvalues.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) a(i, i) = eigenvalues[std::size_t(i)];
  return QuadraticProblem(std::move(a), ParamVector::zeros(eigenvalues.size()), lambda_reg);
}

QuadraticProblem QuadraticProblem::random(std::span<const double> eigenvalues, std::uint64_t seed,
                                          double lambda_reg, bool zero_b) {
  const auto n = Eigen::Index(eigenvalues.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) m(i, j) = normal(rng);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(m).householderQ();
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d[i] = eigenvalues[std::size_t(i)];
  Eigen::MatrixXd a = q * d.asDiagonal() * q.transpose();
  a = 0.5 * (a + a.transpose());

  ParamVector b = ParamVector::zeros(eigenvalues.size());
  if (!zero_b)
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = normal(rng);
  return QuadraticProblem(std::move(a), std::move(b), lambda_reg);
}

double QuadraticProblem::evaluate(const ParamVector& x, ParamVector* grad) const {
  require_same_shape(x, b_, "QuadraticProblem::evaluate");
  const Eigen::VectorXd ax = a_ * x.vec();
  if (grad) *grad = ParamVector(Eigen::VectorXd(ax - b_.vec() + lambda_ * x.vec()));
  return 0.5 * x.vec().dot(ax) - b_.vec().dot(x.vec()) + 0.5 * lambda_ * x.squared_norm();
}

double QuadraticProblem::gap(const ParamVector& x) const {
  require_same_shape(x, x_star_, "QuadraticProblem::gap");
  const Eigen::VectorXd e = x.vec() - x_star_.vec();
  return 0.5 * e.dot(a_ * e) + 0.5 * lambda_ * e.squaredNorm();
}

std::pair<double, ParamVector> quadratic_eval(const QuadraticProblem& prob, const ParamVector& x) {
  ParamVector g;
  const double f = prob.evaluate(x, &g);
  return {f, std::move(g)};
}

std::pair<double, ParamVector> rosenbrock_eval(const ParamVector& x) {
  if (x.size() < 2) throw std::invalid_argument("rosenbrock_eval: dimension must be >= 2");
  double f = 0.0;
  ParamVector g = ParamVector::zeros(x.size());
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double t = x[i + 1] - x[i] * x[i];
    const double s = 1.0 - x[i];
    f += 100.0 * t * t + s * s;
    g[i] += -400.0 * t * x[i] - 2.0 * s;
    g[i + 1] += 200.0 * t;
  }
  return {f, std::move(g)};
}

RosenbrockProblem::RosenbrockProblem(std::size_t dimension) : dim_(dimension) {
  if (dim_ < 2) throw std::invalid_argument("RosenbrockProblem: dimension must be >= 2");
}

double RosenbrockProblem::evaluate(const ParamVector& x, ParamVector* grad) const {
  auto [f, g] = rosenbrock_eval(x);
  if (grad) *grad = std::move(g);
  return f;
}

LinearLeastSquares::LinearLeastSquares(Eigen::MatrixXd rows, Eigen::VectorXd targets)
    : rows_(std::move(rows)), targets_(std::move(targets)) {
  if (rows_.rows() != targets_.size()) throw ShapeError("LinearLeastSquares: rows and targets differ");
  if (rows_.rows() == 0) throw std::invalid_argument("LinearLeastSquares: no samples");
  const Eigen::VectorXd x = rows_.colPivHouseholderQr().solve(targets_);
  f_star_ = 0.5 * (rows_ * x - targets_).squaredNorm() / double(rows_.rows());
}

LinearLeastSquares LinearLeastSquares::random(std::size_t samples, std::size_t dimension, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd rows{Eigen::Index(samples), Eigen::Index(dimension)};
  for (Eigen::Index j = 0; j < rows.cols(); ++j)
    for (Eigen::Index i = 0; i < rows.rows(); ++i) rows(i, j) = normal(rng);
  Eigen::VectorXd y{Eigen::Index(samples)};
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = normal(rng);
  return LinearLeastSquares(std::move(rows), std::move(y));
}

double LinearLeastSquares::evaluate(const ParamVector& x, ParamVector* grad) const {
  if (std::size_t(rows_.cols()) != x.size()) throw ShapeError("LinearLeastSquares: dimension mismatch");
  const Eigen::VectorXd r = rows_ * x.vec() - targets_;
  const double n = double(rows_.rows());
  if (grad) *grad = ParamVector(Eigen::VectorXd(rows_.transpose() * r / n));
  return 0.5 * r.squaredNorm() / n;
}

double LinearLeastSquares::predict(const ParamVector& x, std::size_t sample) const {
  return rows_.row(Eigen::Index(sample)).dot(x.vec());
}

ParamVector LinearLeastSquares::weighted_gradient(const ParamVector& x, std::span<const std::size_t> batch,
                                                  std::span<const double> weights) const {
  if (std::size_t(rows_.cols()) != x.size()) throw ShapeError("LinearLeastSquares: dimension mismatch");
  if (batch.size() != weights.size()) throw ShapeError("weighted_gradient: batch and weights differ");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(rows_.cols());
  for (std::size_t j = 0; j < batch.size(); ++j) g += weights[j] * rows_.row(Eigen::Index(batch[j])).transpose();
  return ParamVector(std::move(g));
}

std::optional<ParamVector> LinearLeastSquares::jacobian_row(const ParamVector&, std::size_t sample) const {
  return ParamVector(Eigen::VectorXd(rows_.row(Eigen::Index(sample)).transpose()));
}

}  // namespace ocpls
