#include "ocpls/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ocpls {
namespace {

void require(bool cond, const std::string& message) {
  if (!cond) throw std::invalid_argument(message);
}

void require_decay(double beta, const char* name) {
  require(beta >= 0.0 && beta < 1.0, std::string(name) + " must lie in [0, 1)");
}

double correction(double beta, std::uint64_t k) { return -std::expm1(double(k) * std::log(beta)); }

// 1 - r^n for r in [-1, 1], evaluated without cancellation near |r| = 1.
// `u` is alpha * H (so r = 1 - u) unless the clamp replaced r.
double one_minus_power(double r, double u, bool clamped, double delta, double n) {
  if (r >= 0.0) return -std::expm1(n * std::log1p(-u));
  // |r| = u - 1; u - 2 is exact for u in [1, 4]
  const double log_abs = clamped ? std::log1p(-delta) : std::log1p(u - 2.0);
  const bool even = std::fmod(n, 2.0) == 0.0;
  return even ? -std::expm1(n * log_abs) : 1.0 + std::exp(n * log_abs);
}

std::uint64_t inner_iterations(std::uint64_t k, const std::optional<std::uint64_t>& cap) {
  const std::uint64_t l = k - 1;  // Algorithm iteration index of step k
  return cap ? std::min(l, *cap) : l;
}

}  // namespace

const char* to_string(InnerMode mode) {
  return mode == InnerMode::closed_form ? "closed_form" : "recursion";
}

InnerMode parse_inner_mode(const std::string& text) {
  if (text == "closed_form") return InnerMode::closed_form;
  if (text == "recursion") return InnerMode::recursion;
  throw std::invalid_argument("unknown inner_mode '" + text + "'");
}

void OcpLsConfig::validate() const {
  require(alpha > 0.0, "alpha must be > 0");
  require_decay(beta1, "beta1");
  require_decay(beta2, "beta2");
  require(lambda >= 0.0, "lambda must be >= 0");
  require(clamp_floor > 0.0, "clamp_floor must be > 0");
  require(stability_delta > 0.0 && stability_delta < 1.0, "stability_delta must lie in (0, 1)");
}

OptimizerState ema_update(const OptimizerState& state, const ParamVector& g, const ParamVector& h_clamped,
                          const OcpLsConfig& cfg) {
  require_same_shape(state.g_ema, g, "ema_update");
  require_same_shape(state.h_ema, h_clamped, "ema_update");
  OptimizerState next;
  next.g_ema = ParamVector(cfg.beta1 * state.g_ema.vec() + (1.0 - cfg.beta1) * g.vec());
  next.h_ema = ParamVector(cfg.beta2 * state.h_ema.vec() + (1.0 - cfg.beta2) * h_clamped.vec());
  next.k = state.k + 1;
  return next;
}

std::pair<ParamVector, ParamVector> bias_correct(const OptimizerState& state, const OcpLsConfig& cfg) {
  if (state.k == 0) throw std::logic_error("bias_correct: iteration counter must be >= 1");
  return {ParamVector(state.g_ema.vec() / correction(cfg.beta1, state.k)),
          ParamVector(state.h_ema.vec() / correction(cfg.beta2, state.k))};
}

ParamVector clamp_curvature(const ParamVector& h, double floor) {
  require(floor > 0.0, "clamp_curvature: floor must be > 0");
  return ParamVector(h.vec().cwiseMax(floor));
}

ParamVector phi_recursion(const ParamVector& g_hat, const ParamVector& h_hat, const OcpLsConfig& cfg,
                          std::uint64_t inner_iterations) {
  require_same_shape(g_hat, h_hat, "phi_recursion");
  const Eigen::VectorXd base = cfg.alpha * g_hat.vec();
  const Eigen::VectorXd contraction = (1.0 - cfg.alpha * h_hat.vec().array()).matrix();
  Eigen::VectorXd phi = base;
  for (std::uint64_t l = 0; l < inner_iterations; ++l) {
    phi = base + contraction.cwiseProduct(phi);
  }
  ParamVector out(std::move(phi));
  out.validate("phi_recursion (divergent series)");
  return out;
}

ParamVector phi_closed_form(const ParamVector& g_hat, const ParamVector& h_hat, const OcpLsConfig& cfg,
                            std::uint64_t k, std::size_t* clamp_hits) {
  require_same_shape(g_hat, h_hat, "phi_closed_form");
  const double n = double(k) + 1.0;
  const double r_min = -1.0 + cfg.stability_delta;
  ParamVector out(g_hat.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < g_hat.size(); ++i) {
    const double h = h_hat[i];
    if (!(h > 0.0)) throw std::invalid_argument("phi_closed_form: curvature must be > 0");
    const double u = cfg.alpha * h;
    double r = 1.0 - u;
    const bool clamped = r < r_min;
    if (clamped) {
      r = r_min;
      ++hits;
    }
    out[i] = one_minus_power(r, u, clamped, cfg.stability_delta, n) * g_hat[i] / h;
  }
  if (clamp_hits) *clamp_hits = hits;
  return out;
}

StepResult step(const OptimizerState& state, const ParamVector& x, const ParamVector& g, const OcpLsConfig& cfg) {
  g.validate("gradient");
  return step_with_curvature(state, x, g, hadamard(g, g), cfg);
}

StepResult step_with_curvature(const OptimizerState& state, const ParamVector& x, const ParamVector& g,
                               const ParamVector& h, const OcpLsConfig& cfg) {
  require_same_shape(x, g, "step");
  require_same_shape(x, h, "step");
  OptimizerState next = ema_update(state, g, clamp_curvature(h, cfg.clamp_floor), cfg);
  auto [g_hat, h_hat] = bias_correct(next, cfg);

  const std::uint64_t inner = inner_iterations(next.k, cfg.inner_cap);
  StepDiagnostics diag;
  ParamVector phi;
  if (cfg.inner_mode == InnerMode::closed_form) {
    phi = phi_closed_form(g_hat, h_hat, cfg, inner, &diag.clamp_hits);
  } else {
    const double r_min = -1.0 + cfg.stability_delta;
    for (std::size_t i = 0; i < h_hat.size(); ++i) diag.clamp_hits += (1.0 - cfg.alpha * h_hat[i]) < r_min;
    phi = phi_recursion(g_hat, h_hat, cfg, inner);
  }

  ParamVector x_next((1.0 - cfg.alpha * cfg.lambda) * x.vec() - phi.vec());
  diag.step_norm = (x_next.vec() - x.vec()).norm();
  return {std::move(x_next), std::move(next), diag};
}

void AdamWConfig::validate() const {
  require(alpha > 0.0, "alpha must be > 0");
  require_decay(beta1, "beta1");
  require_decay(beta2, "beta2");
  require(epsilon > 0.0, "epsilon must be > 0");
  require(lambda >= 0.0, "lambda must be >= 0");
}

StepResult adamw_step(const OptimizerState& state, const ParamVector& x, const ParamVector& g,
                      const AdamWConfig& cfg) {
  require_same_shape(x, g, "adamw_step");
  g.validate("gradient");
  OptimizerState next;
  next.g_ema = ParamVector(cfg.beta1 * state.g_ema.vec() + (1.0 - cfg.beta1) * g.vec());
  next.h_ema = ParamVector(cfg.beta2 * state.h_ema.vec() + (1.0 - cfg.beta2) * g.vec().cwiseAbs2());
  next.k = state.k + 1;
  const Eigen::ArrayXd m_hat = next.g_ema.vec().array() / correction(cfg.beta1, next.k);
  const Eigen::ArrayXd v_hat = next.h_ema.vec().array() / correction(cfg.beta2, next.k);

  ParamVector x_next(((1.0 - cfg.alpha * cfg.lambda) * x.vec().array() -
                      cfg.alpha * m_hat / (v_hat.sqrt() + cfg.epsilon))
                         .matrix());
  StepDiagnostics diag;
  diag.step_norm = (x_next.vec() - x.vec()).norm();
  return {std::move(x_next), std::move(next), diag};
}

void SophiaConfig::validate() const {
  require(alpha > 0.0, "alpha must be > 0");
  require_decay(beta1, "beta1");
  require_decay(beta2, "beta2");
  require(epsilon > 0.0, "epsilon must be > 0");
  require(rho_clip > 0.0, "rho_clip must be > 0");
  require(lambda >= 0.0, "lambda must be >= 0");
}

StepResult sophia_step(const OptimizerState& state, const ParamVector& x, const ParamVector& g,
                       const SophiaConfig& cfg) {
  require_same_shape(x, g, "sophia_step");
  g.validate("gradient");
  OptimizerState next;
  next.g_ema = ParamVector(cfg.beta1 * state.g_ema.vec() + (1.0 - cfg.beta1) * g.vec());
  next.h_ema = ParamVector(cfg.beta2 * state.h_ema.vec() + (1.0 - cfg.beta2) * g.vec().cwiseAbs2());
  next.k = state.k + 1;
  const Eigen::ArrayXd m_hat = next.g_ema.vec().array() / correction(cfg.beta1, next.k);
  const Eigen::ArrayXd h_hat = next.h_ema.vec().array() / correction(cfg.beta2, next.k);

  StepDiagnostics diag;
  Eigen::ArrayXd ratio = m_hat / h_hat.max(cfg.epsilon);
  for (Eigen::Index i = 0; i < ratio.size(); ++i) {
    if (std::abs(ratio[i]) > cfg.rho_clip) {
      ratio[i] = std::copysign(cfg.rho_clip, ratio[i]);
      ++diag.clamp_hits;
    }
  }
  ParamVector x_next(((1.0 - cfg.alpha * cfg.lambda) * x.vec().array() - cfg.alpha * ratio).matrix());
  diag.step_norm = (x_next.vec() - x.vec()).norm();
  return {std::move(x_next), std::move(next), diag};
}

const char* to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::ocp_ls:
      return "ocp_ls";
    case OptimizerKind::adamw:
      return "adamw";
    case OptimizerKind::sophia:
      return "sophia";
  }
  return "unknown";
}

OptimizerKind parse_optimizer_kind(const std::string& text) {
  if (text == "ocp_ls") return OptimizerKind::ocp_ls;
  if (text == "adamw") return OptimizerKind::adamw;
  if (text == "sophia") return OptimizerKind::sophia;
  throw std::invalid_argument("unknown optimizer '" + text + "' (expected ocp_ls, adamw or sophia)");
}

OcpLsConfig OptimizerSpec::ocp_ls() const {
  OcpLsConfig c;
  c.alpha = alpha;
  c.beta1 = beta1;
  c.beta2 = beta2;
  c.lambda = lambda;
  c.clamp_floor = clamp_floor;
  c.inner_mode = inner_mode;
  c.inner_cap = inner_cap;
  return c;
}

AdamWConfig OptimizerSpec::adamw() const { return {alpha, beta1, beta2, epsilon, lambda}; }

SophiaConfig OptimizerSpec::sophia() const { return {alpha, beta1, beta2, epsilon, rho_clip, lambda}; }

void OptimizerSpec::validate() const {
  switch (kind) {
    case OptimizerKind::ocp_ls:
      ocp_ls().validate();
      break;
    case OptimizerKind::adamw:
      adamw().validate();
      break;
    case OptimizerKind::sophia:
      sophia().validate();
      break;
  }
}

Optimizer::Optimizer(OptimizerSpec spec, std::size_t dimension)
    : spec_(std::move(spec)), state_(OptimizerState::zeros(dimension)) {
  spec_.validate();
}

StepDiagnostics Optimizer::step(ParamVector& x, const ParamVector& g) {
  StepResult r;
  switch (spec_.kind) {
    case OptimizerKind::ocp_ls:
      r = ocpls::step(state_, x, g, spec_.ocp_ls());
      break;
    case OptimizerKind::adamw:
      r = adamw_step(state_, x, g, spec_.adamw());
      break;
    case OptimizerKind::sophia:
      r = sophia_step(state_, x, g, spec_.sophia());
      break;
  }
  x = std::move(r.x);
  state_ = std::move(r.state);
  total_clamp_hits_ += r.diagnostics.clamp_hits;
  return r.diagnostics;
}

}  // namespace ocpls
