#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ocpls/theory.hpp"

using namespace ocpls;

namespace {

// f(x) = (lambda / 2) |x|^2 with gradient lambda x, seen only through the Objective interface.
class L2Only final : public Objective {
 public:
  L2Only(std::size_t n, double lambda) : n_(n), lambda_(lambda) {}
  std::size_t dimension() const override { return n_; }
  double evaluate(const ParamVector& x, ParamVector* grad) const override {
    if (grad) *grad = ParamVector(Eigen::VectorXd(lambda_ * x.vec()));
    return 0.5 * lambda_ * x.squared_norm();
  }
  std::optional<double> optimal_value() const override { return 0.0; }

 private:
  std::size_t n_;
  double lambda_;
};

// diag(1, 4) quadratic hidden behind the interface so the sampled path is exercised.
class Diag14 final : public Objective {
 public:
  std::size_t dimension() const override { return 2; }
  double evaluate(const ParamVector& x, ParamVector* grad) const override {
    if (grad) *grad = ParamVector{x[0], 4.0 * x[1]};
    return 0.5 * x[0] * x[0] + 2.0 * x[1] * x[1];
  }
  std::optional<double> optimal_value() const override { return 0.0; }
};

}  // namespace

TEST(RhoInfinity, SpotValues) {
  EXPECT_EQ(rho_infinity(1.0, 1.0, 0.5), 0.5);
  const double a = 3.0, b = 5.0;
  EXPECT_NEAR(rho_infinity(a, b, a * b / (2 * a - b)), 0.0, 1e-12);
  EXPECT_GT(rho_infinity(1.0, 1.0, 1e-9), 1.0 - 1e-8);
  EXPECT_LT(rho_infinity(1.0, 1.0, 1e-9), 1.0);
}

TEST(RhoInfinity, PreconditionsNamed) {
  auto message = [](double a, double b, double m) {
    try {
      rho_infinity(a, b, m);
    } catch (const std::domain_error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message(1.0, 2.0, 0.5).find("beta < 2 alpha"), std::string::npos);
  EXPECT_NE(message(1.0, 1.0, 1.5).find("mu <="), std::string::npos);
  EXPECT_NE(message(0.0, 1.0, 0.5).find("alpha > 0"), std::string::npos);
  EXPECT_NE(message(1.0, 1.0, -1.0).find("mu > 0"), std::string::npos);
}

TEST(RhoInfinity, GridInUnitIntervalAndMonotoneInMu) {
  std::size_t points = 0;
  for (int ia = 1; ia <= 10; ++ia) {
    for (int ib = 1; ib <= 10; ++ib) {
      const double alpha = 0.3 * ia, beta = 2.0 * alpha * ib / 11.0;
      const double mu_max = alpha * beta / (2 * alpha - beta);
      double prev = 1.0;
      for (int im = 1; im <= 10; ++im) {
        const double rho = rho_infinity(alpha, beta, mu_max * im / 10.0);
        EXPECT_GE(rho, 0.0);
        EXPECT_LT(rho, 1.0);
        EXPECT_LE(rho, prev);
        prev = rho;
        ++points;
      }
    }
  }
  EXPECT_EQ(points, 1000u);
}

TEST(CheckA3, Examples) {
  EXPECT_TRUE(check_a3({1.0, 5.0, 19.0}, 0.1, 3).holds);
  const A3Check zero = check_a3({1.0, 0.0}, 0.1, 3);
  EXPECT_FALSE(zero.holds);
  EXPECT_EQ(zero.worst_index, 1u);
  const A3Check big = check_a3({25.0}, 0.1, 1);
  EXPECT_FALSE(big.holds);
  EXPECT_NEAR(big.worst_value, 2.25, 1e-12);
}

TEST(CheckA3, NeverHoldsOnBoundary) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int t = 0; t < 200; ++t) {
    const double alpha = 0.1 + u(rng);
    ParamVector h{u(rng), 2.0 / alpha + u(rng)};
    for (std::uint64_t k : {1u, 3u, 9u}) EXPECT_FALSE(check_a3(h, alpha, k).holds);
    h[1] = 0.0;
    EXPECT_FALSE(check_a3(h, alpha, 4).holds);
  }
}

TEST(EstimateBeta, ApproachesLargestEigenvalue) {
  const Diag14 q;
  const ParamVector c{0.3, -0.2};
  const double few = estimate_beta(q, c, 1.0, 5, 3), many = estimate_beta(q, c, 1.0, 2000, 3);
  EXPECT_LE(many, 4.0 + 1e-12);
  EXPECT_GT(many, 3.99);
  EXPECT_LE(few, many);
}

TEST(EstimateBeta, NondecreasingInPairs) {
  const Diag14 q;
  double prev = 0.0;
  for (std::size_t n = 1; n < 60; ++n) {
    const double b = estimate_beta(q, {1.0, 1.0}, 0.5, n, 17);
    EXPECT_GE(b, prev);
    prev = b;
  }
}

TEST(EstimateBeta, L2RegularizerIsExact) {
  const L2Only reg(5, 0.3);
  EXPECT_NEAR(estimate_beta(reg, ParamVector::ones(5), 1.0, 10, 1), 0.3, 1e-14);
}

TEST(SmoothnessConstant, ExactForQuadratics) {
  const QuadraticProblem q = QuadraticProblem::random(ocpls::testing::linspace(1.0, 4.0, 6), 3, 0.5);
  EXPECT_NEAR(smoothness_constant(q, ParamVector::zeros(6), 1.0, 4, 1), 4.5, 1e-12);
}

TEST(EstimateMuPl, QuadraticWitness) {
  const Diag14 q;
  const std::vector<ParamVector> traj{{1.0, 1.0}, {0.2, -0.7}, {2.0, 0.0}};
  EXPECT_NEAR(estimate_mu_pl(q, traj), 1.0, 1e-14);
  const std::vector<ParamVector> off{{1.0, 1.0}, {0.2, -0.7}};
  const double mu = estimate_mu_pl(q, off);
  EXPECT_GE(mu, 1.0);
  EXPECT_LE(mu, 4.0 + 1e-12);
}

TEST(EstimateMuPl, DegenerateTrajectories) {
  const Diag14 q;
  EXPECT_THROW(estimate_mu_pl(q, std::vector<ParamVector>{}), std::invalid_argument);
  EXPECT_THROW(estimate_mu_pl(q, std::vector<ParamVector>{{0.0, 0.0}, {1e-9, 0.0}}), std::invalid_argument);
}

TEST(PlConstant, ExactForQuadratics) {
  const QuadraticProblem q = QuadraticProblem::random(ocpls::testing::linspace(2.0, 4.0, 4), 5, 0.25);
  EXPECT_NEAR(pl_constant(q, std::vector<ParamVector>{ParamVector::ones(4)}), 2.25, 1e-12);
}

TEST(FitEmpiricalRate, ExactGeometric) {
  std::vector<double> gaps;
  for (int k = 0; k < 60; ++k) gaps.push_back(std::pow(0.5, k));
  const RateFit f = fit_empirical_rate(gaps);
  EXPECT_NEAR(f.rho, 0.5, 1e-12);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
}

TEST(FitEmpiricalRate, ConstantGaps) {
  const std::vector<double> gaps(30, 2.0);
  EXPECT_EQ(fit_empirical_rate(gaps).rho, 1.0);
}

TEST(FitEmpiricalRate, NoisyGeometric) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> gaps;
  for (int k = 0; k < 200; ++k) gaps.push_back(3.0 * std::pow(0.9, k) * (1.0 + noise(rng)));
  const RateFit f = fit_empirical_rate(gaps);
  EXPECT_GE(f.rho, 0.885);
  EXPECT_LE(f.rho, 0.915);
  EXPECT_GE(f.r2, 0.99);
}

TEST(FitEmpiricalRate, RejectsBadInput) {
  EXPECT_THROW(fit_empirical_rate(std::vector<double>(5, 1.0)), std::invalid_argument);
  std::vector<double> gaps(20, 1.0);
  gaps[7] = 0.0;
  EXPECT_THROW(fit_empirical_rate(gaps), std::invalid_argument);
}

TEST(DescentViolations, CountsIncreasesAfterStart) {
  const std::vector<double> v{5, 6, 4, 3, 3.5, 2, 1};
  EXPECT_EQ(count_descent_violations(v, 0), 2u);
  EXPECT_EQ(count_descent_violations(v, 2), 1u);
  EXPECT_EQ(count_descent_violations(v, 4), 0u);
}
