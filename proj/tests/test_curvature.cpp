#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ocpls/curvature.hpp"
#include "ocpls/problems.hpp"

using namespace ocpls;

namespace {

// l(x) = c for every x; its Jacobian is zero.
class ConstantModel final : public ResidualModel {
 public:
  ConstantModel(std::size_t dim, double c) : dim_(dim), c_(c) {}
  std::size_t dimension() const override { return dim_; }
  std::size_t num_samples() const override { return 3; }
  double predict(const ParamVector&, std::size_t) const override { return c_; }
  ParamVector weighted_gradient(const ParamVector&, std::span<const std::size_t>,
                                std::span<const double>) const override {
    return ParamVector::zeros(dim_);
  }
  std::optional<ParamVector> jacobian_row(const ParamVector&, std::size_t) const override {
    return ParamVector::zeros(dim_);
  }

 private:
  std::size_t dim_;
  double c_;
};

class NoJacobianModel final : public ResidualModel {
 public:
  std::size_t dimension() const override { return 1; }
  std::size_t num_samples() const override { return 1; }
  double predict(const ParamVector& x, std::size_t) const override { return x[0]; }
  ParamVector weighted_gradient(const ParamVector&, std::span<const std::size_t>,
                                std::span<const double> w) const override {
    return ParamVector{w[0]};
  }
};

LinearLeastSquares single_row(std::initializer_list<double> a) {
  Eigen::MatrixXd rows(1, Eigen::Index(a.size()));
  Eigen::Index j = 0;
  for (double v : a) rows(0, j++) = v;
  return LinearLeastSquares(rows, Eigen::VectorXd::Zero(1));
}

}  // namespace

TEST(SimplifiedHessian, Examples) {
  EXPECT_EQ(simplified_hessian(ParamVector::zeros(4)).diag, ParamVector::zeros(4));
  EXPECT_EQ(simplified_hessian({3, -2}).diag, (ParamVector{9, 4}));
  EXPECT_EQ(simplified_hessian(ParamVector::ones(3)).diag, ParamVector::ones(3));
  EXPECT_EQ(simplified_hessian({1}).source, CurvatureSource::simplified);
}

TEST(SimplifiedHessian, NonNegativeAndRejectsNonFinite) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 10.0);
  ParamVector g(100);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = normal(rng);
  const ParamVector h = simplified_hessian(g).diag;
  for (std::size_t i = 0; i < h.size(); ++i) EXPECT_GE(h[i], 0.0);
  EXPECT_THROW(simplified_hessian({std::numeric_limits<double>::infinity()}), NonFiniteError);
}

TEST(SyntheticLabels, FirstTwoNormalsOfTheStream) {
  Rng a(77), b(77);
  const std::vector<double> preds{0.0, 0.0};
  const std::vector<double> y = sample_synthetic_labels(preds, a);
  std::normal_distribution<double> normal;
  EXPECT_EQ(y[0], normal(b));
  EXPECT_EQ(y[1], normal(b));
}

TEST(SyntheticLabels, MeanAndVarianceOfNoise) {
  Rng rng(5);
  const std::vector<double> preds(100000, 2.5);
  const std::vector<double> y = sample_synthetic_labels(preds, rng);
  double sum = 0.0, sum_sq = 0.0;
  for (double v : y) {
    sum += v - 2.5;
    sum_sq += (v - 2.5) * (v - 2.5);
  }
  const double mean = sum / double(y.size());
  const double var = sum_sq / double(y.size()) - mean * mean;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(var, 1.0, 0.02);
}

TEST(ExactGnDiagonal, Examples) {
  const LinearLeastSquares one = single_row({1, 2});
  const std::vector<std::size_t> b0{0};
  EXPECT_EQ(exact_gn_diagonal(one, ParamVector::zeros(2), b0).diag, (ParamVector{1, 4}));

  Eigen::MatrixXd rows(2, 2);
  rows << 1, 0, 0, 1;
  const LinearLeastSquares two(rows, Eigen::VectorXd::Zero(2));
  const std::vector<std::size_t> b01{0, 1};
  const CurvatureEstimate est = exact_gn_diagonal(two, ParamVector::zeros(2), b01);
  EXPECT_EQ(est.diag, (ParamVector{0.5, 0.5}));
  EXPECT_EQ(est.source, CurvatureSource::exact_oracle);

  const ConstantModel zero_jac(3, 1.0);
  EXPECT_EQ(exact_gn_diagonal(zero_jac, ParamVector::zeros(3), b01).diag, ParamVector::zeros(3));
}

TEST(ExactGnDiagonal, NeedsJacobian) {
  const std::vector<std::size_t> b{0};
  EXPECT_THROW(exact_gn_diagonal(NoJacobianModel(), ParamVector{1.0}, b), std::logic_error);
}

TEST(GnbEstimate, EmptyBatchRejected) {
  const LinearLeastSquares m = single_row({1, 2});
  Rng rng(1);
  EXPECT_THROW(gnb_mse_estimate(m, ParamVector::zeros(2), {}, rng), std::invalid_argument);
}

TEST(GnbEstimate, ZeroJacobianGivesZero) {
  const ConstantModel m(4, 3.0);
  Rng rng(2);
  const std::vector<std::size_t> b{0, 1, 2};
  for (int i = 0; i < 10; ++i) EXPECT_EQ(gnb_mse_estimate(m, ParamVector::zeros(4), b, rng).diag, ParamVector::zeros(4));
}

TEST(GnbEstimate, ZeroNoiseGivesZero) {
  const LinearLeastSquares m = single_row({1, 2});
  Rng rng(3);
  const std::vector<std::size_t> b{0};
  EXPECT_EQ(gnb_mse_estimate(m, ParamVector{0.3, -0.1}, b, rng, 0.0).diag, ParamVector::zeros(2));
}

TEST(GnbEstimate, DeterministicGivenSeed) {
  const LinearLeastSquares m = LinearLeastSquares::random(8, 5, 1);
  const std::vector<std::size_t> b{0, 3, 5};
  Rng r1(9), r2(9);
  const ParamVector x = ParamVector::ones(5);
  EXPECT_EQ(gnb_mse_estimate(m, x, b, r1).diag, gnb_mse_estimate(m, x, b, r2).diag);
  EXPECT_EQ(gnb_mse_estimate(m, x, b, r1).source, CurvatureSource::gnb_sampled);
}

// Monte Carlo expectation of the single-sample estimate for l(x) = a'x, a = (1, 2).
TEST(GnbEstimate, ExpectationIsSquaredRow) {
  const LinearLeastSquares m = single_row({1, 2});
  const std::vector<std::size_t> b{0};
  Rng rng(123);
  const std::size_t draws = 100000;
  double s[2] = {0, 0}, ss[2] = {0, 0};
  for (std::size_t i = 0; i < draws; ++i) {
    const ParamVector e = gnb_mse_estimate(m, ParamVector{0.2, 0.4}, b, rng).diag;
    for (int j = 0; j < 2; ++j) {
      s[j] += e[std::size_t(j)];
      ss[j] += e[std::size_t(j)] * e[std::size_t(j)];
    }
  }
  const double expected[2] = {1.0, 4.0};
  for (int j = 0; j < 2; ++j) {
    const double mean = s[j] / double(draws);
    const double se = std::sqrt((ss[j] / double(draws) - mean * mean) / double(draws));
    EXPECT_LE(std::abs(mean - expected[j]), 3.0 * se) << "coordinate " << j;
  }
}

// The mini-batch and per-sample forms share an expectation.
TEST(GnbEstimate, PerSampleAndMiniBatchAgreeInExpectation) {
  const LinearLeastSquares m = LinearLeastSquares::random(4, 3, 8);
  const std::vector<std::size_t> b{0, 1, 2, 3};
  const ParamVector x{0.1, -0.2, 0.3};
  Rng r1(10), r2(11);
  const std::size_t draws = 100000;
  std::vector<double> s1(3), s2(3), q1(3), q2(3);
  for (std::size_t i = 0; i < draws; ++i) {
    const ParamVector e1 = gnb_mse_estimate(m, x, b, r1).diag;
    const ParamVector e2 = gnb_per_sample_estimate(m, x, b, r2).diag;
    for (std::size_t j = 0; j < 3; ++j) {
      s1[j] += e1[j], q1[j] += e1[j] * e1[j];
      s2[j] += e2[j], q2[j] += e2[j] * e2[j];
    }
  }
  const ParamVector exact = exact_gn_diagonal(m, x, b).diag;
  for (std::size_t j = 0; j < 3; ++j) {
    const double m1 = s1[j] / double(draws), m2 = s2[j] / double(draws);
    const double v1 = (q1[j] / double(draws) - m1 * m1) / double(draws);
    const double v2 = (q2[j] / double(draws) - m2 * m2) / double(draws);
    EXPECT_LE(std::abs(m1 - m2), 3.0 * std::sqrt(v1 + v2));
    EXPECT_LE(std::abs(m2 - exact[j]), 3.0 * std::sqrt(v2));
  }
}

// Independent oracle: the Gauss-Newton diagonal from finite-difference Jacobian rows.
TEST(ExactGnDiagonal, MatchesFiniteDifferenceJacobian) {
  const LinearLeastSquares m = LinearLeastSquares::random(6, 4, 2);
  const ParamVector x{0.5, -1.0, 0.25, 2.0};
  const std::vector<std::size_t> b{0, 1, 2, 3, 4, 5};
  std::vector<double> oracle(4, 0.0);
  for (std::size_t n : b) {
    const auto row = ocpls::testing::central_difference([&](const ParamVector& p) { return m.predict(p, n); }, x,
                                                 ocpls::testing::all_coords(4));
    for (std::size_t i = 0; i < 4; ++i) oracle[i] += row[i] * row[i] / double(b.size());
  }
  const ParamVector exact = exact_gn_diagonal(m, x, b).diag;
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(exact[i], oracle[i], 1e-8 * (1.0 + oracle[i]));
}
