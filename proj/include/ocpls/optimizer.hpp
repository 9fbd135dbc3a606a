#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "ocpls/param_vector.hpp"

namespace ocpls {

enum class InnerMode { closed_form, recursion };

const char* to_string(InnerMode mode);
InnerMode parse_inner_mode(const std::string& text);

struct OcpLsConfig {
  double alpha = 1e-2;  // M = alpha * I
  double beta1 = 0.9;
  double beta2 = 0.999;
  double lambda = 0.0;  // decoupled weight decay
  double clamp_floor = 1e-8;
  InnerMode inner_mode = InnerMode::closed_form;
  // Inner iterations are min(k - 1, cap) on step k; nullopt means uncapped.
  std::optional<std::uint64_t> inner_cap = 10;
  // Contraction factors r = 1 - alpha * H are kept >= -1 + stability_delta.
  double stability_delta = 1e-8;

  void validate() const;
};

struct OptimizerState {
  ParamVector g_ema;
  ParamVector h_ema;
  std::uint64_t k = 0;

  static OptimizerState zeros(std::size_t n) { return {ParamVector::zeros(n), ParamVector::zeros(n), 0}; }
};

struct StepDiagnostics {
  std::size_t clamp_hits = 0;
  double step_norm = 0.0;
};

struct StepResult {
  ParamVector x;
  OptimizerState state;
  StepDiagnostics diagnostics;
};

OptimizerState ema_update(const OptimizerState& state, const ParamVector& g, const ParamVector& h_clamped,
                          const OcpLsConfig& cfg);

// (g_ema / (1 - beta1^k), h_ema / (1 - beta2^k)); requires k >= 1.
std::pair<ParamVector, ParamVector> bias_correct(const OptimizerState& state, const OcpLsConfig& cfg);

ParamVector clamp_curvature(const ParamVector& h, double floor);

// Literal inner loop: phi_0 = alpha g, phi_l = alpha g + (1 - alpha H) phi_{l-1}.
ParamVector phi_recursion(const ParamVector& g_hat, const ParamVector& h_hat, const OcpLsConfig& cfg,
                          std::uint64_t inner_iterations);

// Summed series: (1 - r^(k+1)) g / H with r = 1 - alpha H. Agrees with phi_recursion(.., k)
// whenever r >= -1 + delta. Coordinates where that floor binds are counted in *clamp_hits.
ParamVector phi_closed_form(const ParamVector& g_hat, const ParamVector& h_hat, const OcpLsConfig& cfg,
                            std::uint64_t k, std::size_t* clamp_hits = nullptr);

// One OCP-LS iteration using the g (.) g curvature estimate.
StepResult step(const OptimizerState& state, const ParamVector& x, const ParamVector& g, const OcpLsConfig& cfg);

// Same update with a caller-supplied raw curvature diagonal in place of g (.) g.
StepResult step_with_curvature(const OptimizerState& state, const ParamVector& x, const ParamVector& g,
                               const ParamVector& h, const OcpLsConfig& cfg);

struct AdamWConfig {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double lambda = 0.0;

  void validate() const;
};

StepResult adamw_step(const OptimizerState& state, const ParamVector& x, const ParamVector& g,
                      const AdamWConfig& cfg);

struct SophiaConfig {
  double alpha = 1e-3;
  double beta1 = 0.965;
  double beta2 = 0.99;
  double epsilon = 1e-12;
  double rho_clip = 1.0;
  double lambda = 0.0;

  void validate() const;
};

// x' = x (1 - alpha lambda) - alpha * clip(g_hat / max(H_hat, eps), rho_clip), H from g (.) g.
StepResult sophia_step(const OptimizerState& state, const ParamVector& x, const ParamVector& g,
                       const SophiaConfig& cfg);

enum class OptimizerKind { ocp_ls, adamw, sophia };

const char* to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(const std::string& text);

// Everything an experiment arm needs to build an optimizer. Fields irrelevant to
// the chosen kind are ignored.
struct OptimizerSpec {
  OptimizerKind kind = OptimizerKind::ocp_ls;
  double alpha = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double lambda = 0.0;
  double clamp_floor = 1e-8;
  InnerMode inner_mode = InnerMode::closed_form;
  std::optional<std::uint64_t> inner_cap = 10;
  double epsilon = 1e-8;
  double rho_clip = 1.0;

  OcpLsConfig ocp_ls() const;
  AdamWConfig adamw() const;
  SophiaConfig sophia() const;
  void validate() const;

  friend bool operator==(const OptimizerSpec&, const OptimizerSpec&) = default;
};

// Stateful wrapper used by the experiment runner.
class Optimizer {
 public:
  Optimizer(OptimizerSpec spec, std::size_t dimension);

  // Updates x in place and returns the step's diagnostics.
  StepDiagnostics step(ParamVector& x, const ParamVector& g);

  const OptimizerState& state() const { return state_; }
  const OptimizerSpec& spec() const { return spec_; }
  std::size_t total_clamp_hits() const { return total_clamp_hits_; }

 private:
  OptimizerSpec spec_;
  OptimizerState state_;
  std::size_t total_clamp_hits_ = 0;
};

}  // namespace ocpls
