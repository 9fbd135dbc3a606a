#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "ocpls/param_vector.hpp"

namespace ocpls {

using Rng = std::mt19937_64;

enum class CurvatureSource { simplified, gnb_sampled, exact_oracle };

const char* to_string(CurvatureSource source);

// Estimated diagonal of the Gauss-Newton matrix.
struct CurvatureEstimate {
  ParamVector diag;
  CurvatureSource source = CurvatureSource::simplified;
};

// Per-sample scalar predictions l_n(x) with first-order access.
class ResidualModel {
 public:
  virtual ~ResidualModel() = default;

  virtual std::size_t dimension() const = 0;
  virtual std::size_t num_samples() const = 0;

  virtual double predict(const ParamVector& x, std::size_t sample) const = 0;

  // Gradient w.r.t. x of sum_j weights[j] * l_{batch[j]}(x).
  virtual ParamVector weighted_gradient(const ParamVector& x, std::span<const std::size_t> batch,
                                        std::span<const double> weights) const = 0;

  // d l_n / dx, only for models small enough to materialize it.
  virtual std::optional<ParamVector> jacobian_row(const ParamVector& x, std::size_t sample) const {
    (void)x;
    (void)sample;
    return std::nullopt;
  }
};

// diag[i] = g[i]^2
CurvatureEstimate simplified_hessian(const ParamVector& g);

// y_n = l_n + sigma * z_n, z_n ~ N(0, 1). Only sigma = 1 makes 0.5*(l - y)^2 the
// exact negative log-likelihood; other values are for ablations.
std::vector<double> sample_synthetic_labels(std::span<const double> predictions, Rng& rng,
                                            double sigma = 1.0);

// Mini-batch form. With V(x) = (1/N) sum_n 0.5 * (l_n(x) - y_n)^2 and sampled y,
// returns N * grad V (.) grad V. Its expectation over y is sigma^2 times the mean
// Gauss-Newton diagonal (1/N) sum_n (d l_n / dx)^2.
CurvatureEstimate gnb_mse_estimate(const ResidualModel& model, const ParamVector& x,
                                   std::span<const std::size_t> batch, Rng& rng, double sigma = 1.0);

// Per-sample form: (1/N) sum_n grad Psi_n (.) grad Psi_n with Psi_n = 0.5 (l_n - y_n)^2.
// Same expectation as gnb_mse_estimate, different variance.
CurvatureEstimate gnb_per_sample_estimate(const ResidualModel& model, const ParamVector& x,
                                          std::span<const std::size_t> batch, Rng& rng,
                                          double sigma = 1.0);

// diag[i] = (1/N) sum_n (d l_n / d x_i)^2 from explicit Jacobian rows.
CurvatureEstimate exact_gn_diagonal(const ResidualModel& model, const ParamVector& x,
                                    std::span<const std::size_t> batch);

}  // namespace ocpls
