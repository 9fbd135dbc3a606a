#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ocpls/param_vector.hpp"
#include "ocpls/pose_metrics.hpp"

namespace ocpls {

struct PoseSample {
  Eigen::VectorXd feature;
  Pose pose;  // q unit, w >= 0
};

// Learnable homoscedastic weights of the position and rotation terms.
struct PoseLossParams {
  double s_p = 0.0;
  double s_q = -3.0;
};

struct PoseLossTerms {
  double position = 0.0;  // mean absolute position residual
  double rotation = 0.0;  // mean absolute residual of the normalized quaternion
  double total = 0.0;
};

// exp(-s_p) L_p + s_p + exp(-s_q) L_q + s_q. Predicted quaternions need not be unit;
// a zero-norm one throws std::domain_error.
PoseLossTerms pose_loss_terms(std::span<const Pose> predicted, std::span<const Pose> truth,
                              const PoseLossParams& params);
double pose_loss(std::span<const Pose> predicted, std::span<const Pose> truth, const PoseLossParams& params);

enum class Activation { tanh, identity };

// Fully connected regressor from a feature vector to (p, q). The parameter vector
// holds each layer's column-major weights then bias, followed by s_p and s_q.
class TinyRegressor {
 public:
  static constexpr std::size_t kOutputDim = 7;

  explicit TinyRegressor(std::size_t input_dim = 16, std::vector<std::size_t> hidden = {64, 64},
                         Activation activation = Activation::tanh);

  std::size_t input_dim() const { return sizes_.front(); }
  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  Activation activation() const { return activation_; }

  std::size_t network_parameter_count() const { return network_params_; }
  std::size_t parameter_count() const { return network_params_ + 2; }
  std::size_t s_p_index() const { return network_params_; }
  std::size_t s_q_index() const { return network_params_ + 1; }

  // Scaled-uniform weights, zero biases except a unit scalar part on the quaternion output.
  ParamVector initial_parameters(std::uint64_t seed, const PoseLossParams& init = {}) const;
  PoseLossParams loss_params(const ParamVector& x) const;

  std::vector<Pose> predict(const ParamVector& x, std::span<const PoseSample> data,
                            std::span<const std::size_t> batch) const;
  std::vector<Pose> predict(const ParamVector& x, std::span<const PoseSample> data) const;

  // Pose loss over data[batch]; exact gradient (sign(0) = 0 at L1 kinks) when grad is non-null.
  double loss_and_gradient(const ParamVector& x, std::span<const PoseSample> data,
                           std::span<const std::size_t> batch, ParamVector* grad) const;
  double loss(const ParamVector& x, std::span<const PoseSample> data) const;

  // Smallest |residual| entering an L1 term; finite-difference checks skip points near zero.
  double min_abs_residual(const ParamVector& x, std::span<const PoseSample> data,
                          std::span<const std::size_t> batch) const;

 private:
  struct Forward;
  Forward forward(const ParamVector& x, std::span<const PoseSample> data, std::span<const std::size_t> batch) const;
  void check_layout(const ParamVector& x) const;

  std::vector<std::size_t> sizes_;
  Activation activation_;
  std::size_t network_params_ = 0;
};

// Gradient of the pose loss over the whole batch w.r.t. every coordinate of x.
ParamVector pose_loss_grad(const ParamVector& x, std::span<const PoseSample> batch, const TinyRegressor& model);

struct SyntheticScene {
  std::vector<PoseSample> train;
  std::vector<PoseSample> val;
};

// Poses along a smooth closed camera path; features are a fixed seeded embedding
// A z + tanh(B z + c) of z = (p / 5, q) plus noise_sigma * N(0, 1).
SyntheticScene make_synthetic_scene(std::size_t n_train, std::size_t n_val, double noise_sigma, std::uint64_t seed,
                                    std::size_t feature_dim = 16);

// Copy of samples with extra N(0, sigma^2) feature noise.
std::vector<PoseSample> add_feature_noise(std::span<const PoseSample> samples, double sigma, std::uint64_t seed);

// One row per sample: f0..f{D-1},px,py,pz,qw,qx,qy,qz (shortest round-trip decimals).
void write_samples_csv(const std::filesystem::path& path, std::span<const PoseSample> samples);
std::vector<PoseSample> read_samples_csv(const std::filesystem::path& path);

}  // namespace ocpls
