#include "ocpls/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace ocpls {

double rho_infinity(double alpha, double beta, double mu) {
  if (!(alpha > 0.0)) throw std::domain_error("rho_infinity: requires alpha > 0");
  if (!(beta > 0.0)) throw std::domain_error("rho_infinity: requires beta > 0");
  if (!(mu > 0.0)) throw std::domain_error("rho_infinity: requires mu > 0");
  if (!(beta < 2.0 * alpha)) throw std::domain_error("rho_infinity: requires beta < 2 alpha");
  const double mu_max = alpha * beta / (2.0 * alpha - beta);
  if (!(mu <= mu_max * (1.0 + 8.0 * std::numeric_limits<double>::epsilon()))) throw std::domain_error("rho_infinity: requires mu <= alpha beta / (2 alpha - beta)");
  const double rho = 1.0 - (2.0 * mu * alpha - mu * beta) / (alpha * beta);
  // boundary rounding
  return std::max(rho, 0.0);
}

A3Check check_a3(const ParamVector& h_hat, double alpha, std::uint64_t k) {
  A3Check out;
  const double n = double(k) + 1.0;
  double worst = -1.0;
  for (std::size_t i = 0; i < h_hat.size(); ++i) {
    const double r = std::abs(1.0 - alpha * h_hat[i]);
    if (r > worst) {
      worst = r;
      out.worst_index = i;
    }
  }
  if (h_hat.empty()) return out;
  out.worst_value = std::pow(worst, n);
  out.holds = worst < 1.0 && out.worst_value < 1.0;
  return out;
}

double estimate_beta(const Objective& problem, const ParamVector& center, double radius, std::size_t n_pairs,
                     std::uint64_t seed) {
  if (center.size() != problem.dimension()) throw ShapeError("estimate_beta: center dimension mismatch");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const std::size_t d = center.size();
  double best = 0.0;
  for (std::size_t p = 0; p < n_pairs; ++p) {
    ParamVector x = center, step(d);
    for (std::size_t i = 0; i < d; ++i) x[i] += radius * normal(rng);
    for (std::size_t i = 0; i < d; ++i) step[i] = normal(rng);
    step.vec() *= radius / std::max(step.norm(), std::numeric_limits<double>::min());
    const ParamVector y = scale_add(x, 1.0, step);
    const ParamVector gx = problem.gradient(x), gy = problem.gradient(y);
    const double dist = (y.vec() - x.vec()).norm();
    if (dist > 0.0) best = std::max(best, (gy.vec() - gx.vec()).norm() / dist);
  }
  return best;
}

double smoothness_constant(const Objective& problem, const ParamVector& center, double radius,
                           std::size_t n_pairs, std::uint64_t seed) {
  if (const auto* quad = dynamic_cast<const QuadraticProblem*>(&problem)) return quad->smoothness();
  return estimate_beta(problem, center, radius, n_pairs, seed);
}

double pl_constant(const Objective& problem, std::span<const ParamVector> trajectory,
                   std::optional<double> f_star) {
  if (const auto* quad = dynamic_cast<const QuadraticProblem*>(&problem)) return quad->pl_constant();
  return estimate_mu_pl(problem, trajectory, f_star);
}

double estimate_mu_pl(const Objective& problem, std::span<const ParamVector> trajectory,
                      std::optional<double> f_star) {
  if (trajectory.empty()) throw std::invalid_argument("estimate_mu_pl: empty trajectory");
  if (!f_star) f_star = problem.optimal_value();
  if (!f_star) throw std::invalid_argument("estimate_mu_pl: optimal value unknown and no proxy given");
  const auto* quad = dynamic_cast<const QuadraticProblem*>(&problem);
  double best = std::numeric_limits<double>::infinity();
  for (const ParamVector& x : trajectory) {
    ParamVector g;
    const double f = problem.evaluate(x, &g);
    const double gap = quad ? quad->gap(x) : f - *f_star;
    if (gap < 1e-12) continue;
    best = std::min(best, 0.5 * g.squared_norm() / gap);
  }
  if (!std::isfinite(best)) throw std::invalid_argument("estimate_mu_pl: no trajectory point away from the optimum");
  return best;
}

RateFit fit_empirical_rate(std::span<const double> gaps) {
  if (gaps.size() < 10) throw std::invalid_argument("fit_empirical_rate: need at least 10 gaps");
  for (double g : gaps) {
    if (!(g > 0.0) || !std::isfinite(g)) throw std::invalid_argument("fit_empirical_rate: gaps must be positive");
  }
  const std::size_t start = gaps.size() / 2;
  const std::size_t m = gaps.size() - start;
  double sx = 0.0, sy = 0.0;
  for (std::size_t k = start; k < gaps.size(); ++k) {
    sx += double(k);
    sy += std::log(gaps[k]);
  }
  const double mx = sx / double(m), my = sy / double(m);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = start; k < gaps.size(); ++k) {
    const double dx = double(k) - mx, dy = std::log(gaps[k]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double slope = sxy / sxx;
  RateFit fit;
  fit.rho = std::exp(slope);
  const double ss_res = std::max(syy - slope * sxy, 0.0);
  fit.r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

std::size_t count_descent_violations(std::span<const double> values, std::size_t first_valid) {
  std::size_t count = 0;
  for (std::size_t k = first_valid + 1; k < values.size(); ++k) {
    if (values[k] > values[k - 1] + 1e-12 * std::abs(values[k - 1])) ++count;
  }
  return count;
}

}  // namespace ocpls
