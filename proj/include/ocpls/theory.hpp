#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "ocpls/param_vector.hpp"
#include "ocpls/problems.hpp"

namespace ocpls {

struct RateReport {
  double beta_est = 0.0;   // gradient Lipschitz constant
  double mu_pl_est = 0.0;  // Polyak-Lojasiewicz constant
  double rho_pred = 0.0;   // asymptotic rate bound; NaN when its preconditions fail
  double rho_fit = 0.0;    // fitted per-iteration decay of the optimality gap
  double fit_r2 = 0.0;
  std::size_t a3_violation_count = 0;  // steps whose curvature broke the A3 condition
  std::size_t descent_violations = 0;  // increases of f after A3 first held
};

// 1 - (2 mu alpha - mu beta) / (alpha beta). Requires alpha, beta, mu > 0,
// beta < 2 alpha and mu <= alpha beta / (2 alpha - beta); throws std::domain_error
// naming the failed inequality otherwise.
double rho_infinity(double alpha, double beta, double mu);

struct A3Check {
  bool holds = true;
  std::size_t worst_index = 0;
  double worst_value = 0.0;  // |1 - alpha H_i|^(k+1) at worst_index
};

// Diagonal form of the A3 condition: |1 - alpha H_i|^(k+1) < 1 for every i.
A3Check check_a3(const ParamVector& h_hat, double alpha, std::uint64_t k);

// max |g(y) - g(x)| / |y - x| over n_pairs seeded random pairs near `center`. A lower
// bound on the true constant; the first n pairs do not depend on n_pairs.
double estimate_beta(const Objective& problem, const ParamVector& center, double radius, std::size_t n_pairs,
                     std::uint64_t seed);

// Exact value for quadratics, sampled estimate otherwise.
double smoothness_constant(const Objective& problem, const ParamVector& center, double radius,
                           std::size_t n_pairs, std::uint64_t seed);

// min over trajectory points of 0.5 |g|^2 / (f - f*), skipping points with f - f* < 1e-12.
// f* defaults to problem.optimal_value(). Throws when no point qualifies.
double estimate_mu_pl(const Objective& problem, std::span<const ParamVector> trajectory,
                      std::optional<double> f_star = std::nullopt);

// Exact value for quadratics, estimate_mu_pl otherwise.
double pl_constant(const Objective& problem, std::span<const ParamVector> trajectory,
                   std::optional<double> f_star = std::nullopt);

struct RateFit {
  double rho = 1.0;
  double r2 = 1.0;
};

// Least-squares line through (k, log gap_k) over the final half; rho = exp(slope).
RateFit fit_empirical_rate(std::span<const double> gaps);

// Number of k > first_valid with values[k] > values[k-1] (+ relative slack 1e-12).
std::size_t count_descent_violations(std::span<const double> values, std::size_t first_valid);

}  // namespace ocpls
