#include "ocpls/pose_task.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ocpls/csv.hpp"

namespace ocpls {
namespace {

double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double activate(Activation a, double z) { return a == Activation::tanh ? std::tanh(z) : z; }

// derivative expressed through the activation output
double activate_grad(Activation a, double y) { return a == Activation::tanh ? 1.0 - y * y : 1.0; }

Eigen::Vector4d quaternion_from_euler(double yaw, double pitch, double roll) {
  const double cy = std::cos(0.5 * yaw), sy = std::sin(0.5 * yaw);
  const double cp = std::cos(0.5 * pitch), sp = std::sin(0.5 * pitch);
  const double cr = std::cos(0.5 * roll), sr = std::sin(0.5 * roll);
  Eigen::Vector4d q(cr * cp * cy + sr * sp * sy, sr * cp * cy - cr * sp * sy, cr * sp * cy + sr * cp * sy,
                    cr * cp * sy - sr * sp * cy);
  q.normalize();
  if (q[0] < 0.0) q = -q;
  return q;
}

}  // namespace

PoseLossTerms pose_loss_terms(std::span<const Pose> predicted, std::span<const Pose> truth,
                              const PoseLossParams& params) {
  if (predicted.empty()) throw std::invalid_argument("pose_loss: empty batch");
  if (predicted.size() != truth.size()) throw ShapeError("pose_loss: prediction and truth counts differ");
  double lp = 0.0, lq = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    lp += (predicted[i].p - truth[i].p).lpNorm<1>();
    const double n = predicted[i].q.norm();
    if (!(n > 0.0)) throw std::domain_error("pose_loss: predicted quaternion has zero norm");
    lq += (predicted[i].q / n - truth[i].q).lpNorm<1>();
  }
  const double count = double(predicted.size());
  PoseLossTerms t;
  t.position = lp / (count * 3.0);
  t.rotation = lq / (count * 4.0);
  t.total = std::exp(-params.s_p) * t.position + params.s_p + std::exp(-params.s_q) * t.rotation + params.s_q;
  return t;
}

double pose_loss(std::span<const Pose> predicted, std::span<const Pose> truth, const PoseLossParams& params) {
  return pose_loss_terms(predicted, truth, params).total;
}

struct TinyRegressor::Forward {
  std::vector<Eigen::MatrixXd> activations;  // [input, hidden..., output], each width x batch
};

TinyRegressor::TinyRegressor(std::size_t input_dim, std::vector<std::size_t> hidden, Activation activation)
    : activation_(activation) {
  if (input_dim == 0) throw std::invalid_argument("TinyRegressor: input_dim must be >= 1");
  sizes_.push_back(input_dim);
  for (std::size_t h : hidden) {
    if (h == 0) throw std::invalid_argument("TinyRegressor: hidden widths must be >= 1");
    sizes_.push_back(h);
  }
  sizes_.push_back(kOutputDim);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) network_params_ += sizes_[l + 1] * (sizes_[l] + 1);
}

void TinyRegressor::check_layout(const ParamVector& x) const {
  if (x.size() != parameter_count()) {
    throw ShapeError("TinyRegressor: expected " + std::to_string(parameter_count()) + " parameters, got " +
                     std::to_string(x.size()));
  }
}

ParamVector TinyRegressor::initial_parameters(std::uint64_t seed, const PoseLossParams& init) const {
  std::mt19937_64 rng(seed);
  ParamVector x = ParamVector::zeros(parameter_count());
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const std::size_t fan_in = sizes_[l], fan_out = sizes_[l + 1];
    const double bound = std::sqrt(6.0 / double(fan_in + fan_out));
    std::uniform_real_distribution<double> uni(-bound, bound);
    for (std::size_t i = 0; i < fan_in * fan_out; ++i) x[offset + i] = uni(rng);
    offset += fan_in * fan_out + fan_out;
  }
  // quaternion bias starts at the identity rotation so predictions have nonzero norm
  x[network_params_ - kOutputDim + 3] = 1.0;
  x[s_p_index()] = init.s_p;
  x[s_q_index()] = init.s_q;
  return x;
}

PoseLossParams TinyRegressor::loss_params(const ParamVector& x) const {
  check_layout(x);
  return {x[s_p_index()], x[s_q_index()]};
}

TinyRegressor::Forward TinyRegressor::forward(const ParamVector& x, std::span<const PoseSample> data,
                                              std::span<const std::size_t> batch) const {
  check_layout(x);
  Forward f;
  Eigen::MatrixXd input(Eigen::Index(input_dim()), Eigen::Index(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const Eigen::VectorXd& feat = data[batch[j]].feature;
    if (std::size_t(feat.size()) != input_dim()) throw ShapeError("TinyRegressor: feature dimension mismatch");
    input.col(Eigen::Index(j)) = feat;
  }
  f.activations.push_back(std::move(input));

  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const auto in = Eigen::Index(sizes_[l]), out = Eigen::Index(sizes_[l + 1]);
    Eigen::Map<const Eigen::MatrixXd> w(x.data() + offset, out, in);
    Eigen::Map<const Eigen::VectorXd> b(x.data() + offset + std::size_t(out * in), out);
    offset += std::size_t(out * (in + 1));
    Eigen::MatrixXd z = w * f.activations.back();
    z.colwise() += b;
    if (l + 2 < sizes_.size()) z = z.unaryExpr([this](double v) { return activate(activation_, v); });
    f.activations.push_back(std::move(z));
  }
  return f;
}

std::vector<Pose> TinyRegressor::predict(const ParamVector& x, std::span<const PoseSample> data,
                                         std::span<const std::size_t> batch) const {
  const Forward f = forward(x, data, batch);
  const Eigen::MatrixXd& y = f.activations.back();
  std::vector<Pose> out(batch.size());
  for (std::size_t j = 0; j < batch.size(); ++j) {
    out[j].p = y.block<3, 1>(0, Eigen::Index(j));
    out[j].q = y.block<4, 1>(3, Eigen::Index(j));
  }
  return out;
}

std::vector<Pose> TinyRegressor::predict(const ParamVector& x, std::span<const PoseSample> data) const {
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return predict(x, data, all);
}

double TinyRegressor::loss_and_gradient(const ParamVector& x, std::span<const PoseSample> data,
                                        std::span<const std::size_t> batch, ParamVector* grad) const {
  if (batch.empty()) throw std::invalid_argument("pose loss: empty batch");
  const Forward f = forward(x, data, batch);
  const Eigen::MatrixXd& y = f.activations.back();
  const double s_p = x[s_p_index()], s_q = x[s_q_index()];
  const double wp = std::exp(-s_p), wq = std::exp(-s_q);
  const double n = double(batch.size());

  double lp = 0.0, lq = 0.0;
  Eigen::MatrixXd dy(Eigen::Index(kOutputDim), Eigen::Index(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto c = Eigen::Index(j);
    const Pose& gt = data[batch[j]].pose;
    const Eigen::Vector3d rp = y.block<3, 1>(0, c) - gt.p;
    lp += rp.lpNorm<1>();
    const Eigen::Vector4d q = y.block<4, 1>(3, c);
    const double qn = q.norm();
    if (!(qn > 0.0)) throw std::domain_error("pose loss: predicted quaternion has zero norm");
    const Eigen::Vector4d unit = q / qn;
    const Eigen::Vector4d rq = unit - gt.q;
    lq += rq.lpNorm<1>();

    const Eigen::Vector3d dp = rp.unaryExpr(&sign0) * (wp / (3.0 * n));
    const Eigen::Vector4d du = rq.unaryExpr(&sign0) * (wq / (4.0 * n));
    // d(q / |q|) = (I - u u') / |q|
    dy.block<3, 1>(0, c) = dp;
    dy.block<4, 1>(3, c) = (du - unit * unit.dot(du)) / qn;
  }
  lp /= 3.0 * n;
  lq /= 4.0 * n;
  const double total = wp * lp + s_p + wq * lq + s_q;
  if (!grad) return total;

  ParamVector g = ParamVector::zeros(parameter_count());
  Eigen::MatrixXd delta = std::move(dy);
  std::size_t offset = network_params_;
  for (std::size_t l = sizes_.size() - 1; l-- > 0;) {
    const auto in = Eigen::Index(sizes_[l]), out = Eigen::Index(sizes_[l + 1]);
    offset -= std::size_t(out * (in + 1));
    const Eigen::MatrixXd& a_in = f.activations[l];
    Eigen::Map<Eigen::MatrixXd> gw(g.data() + offset, out, in);
    Eigen::Map<Eigen::VectorXd> gb(g.data() + offset + std::size_t(out * in), out);
    gw.noalias() = delta * a_in.transpose();
    gb = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::Map<const Eigen::MatrixXd> w(x.data() + offset, out, in);
    Eigen::MatrixXd back = w.transpose() * delta;
    delta = back.cwiseProduct(a_in.unaryExpr([this](double v) { return activate_grad(activation_, v); }));
  }
  g[s_p_index()] = 1.0 - wp * lp;
  g[s_q_index()] = 1.0 - wq * lq;
  *grad = std::move(g);
  return total;
}

double TinyRegressor::loss(const ParamVector& x, std::span<const PoseSample> data) const {
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return loss_and_gradient(x, data, all, nullptr);
}

double TinyRegressor::min_abs_residual(const ParamVector& x, std::span<const PoseSample> data,
                                       std::span<const std::size_t> batch) const {
  const std::vector<Pose> pred = predict(x, data, batch);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const Pose& gt = data[batch[j]].pose;
    m = std::min(m, (pred[j].p - gt.p).cwiseAbs().minCoeff());
    m = std::min(m, (pred[j].q.normalized() - gt.q).cwiseAbs().minCoeff());
  }
  return m;
}

ParamVector pose_loss_grad(const ParamVector& x, std::span<const PoseSample> batch, const TinyRegressor& model) {
  std::vector<std::size_t> all(batch.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  ParamVector g;
  model.loss_and_gradient(x, batch, all, &g);
  return g;
}

SyntheticScene make_synthetic_scene(std::size_t n_train, std::size_t n_val, double noise_sigma, std::uint64_t seed,
                                    std::size_t feature_dim) {
  if (n_train == 0 || n_val == 0) throw std::invalid_argument("make_synthetic_scene: counts must be >= 1");
  if (noise_sigma < 0.0) throw std::invalid_argument("make_synthetic_scene: noise_sigma must be >= 0");
  if (feature_dim == 0) throw std::invalid_argument("make_synthetic_scene: feature_dim must be >= 1");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto fd = Eigen::Index(feature_dim);
  Eigen::MatrixXd lin(fd, 7), nonlin(fd, 7);
  Eigen::VectorXd shift(fd);
  for (Eigen::Index j = 0; j < 7; ++j)
    for (Eigen::Index i = 0; i < fd; ++i) lin(i, j) = normal(rng) / std::sqrt(7.0);
  for (Eigen::Index j = 0; j < 7; ++j)
    for (Eigen::Index i = 0; i < fd; ++i) nonlin(i, j) = normal(rng) * 1.5 / std::sqrt(7.0);
  for (Eigen::Index i = 0; i < fd; ++i) shift[i] = 0.5 * normal(rng);
  const double phase = 2.0 * std::numbers::pi * unit(rng);

  auto make = [&](std::size_t count) {
    std::vector<PoseSample> out(count);
    for (PoseSample& s : out) {
      const double t = 2.0 * std::numbers::pi * unit(rng);
      s.pose.p = Eigen::Vector3d(5.0 * std::cos(t), 3.0 * std::sin(t), 1.5 + 0.5 * std::sin(2.0 * t + phase));
      s.pose.q = quaternion_from_euler(0.8 * std::numbers::pi * std::sin(t), 0.2 * std::sin(2.0 * t + phase),
                                       0.1 * std::sin(3.0 * t));
      Eigen::Matrix<double, 7, 1> z;
      z << s.pose.p / 5.0, s.pose.q;
      s.feature = lin * z + (nonlin * z + shift).array().tanh().matrix();
      for (Eigen::Index i = 0; i < fd; ++i) s.feature[i] += noise_sigma * normal(rng);
    }
    return out;
  };
  SyntheticScene scene;
  scene.train = make(n_train);
  scene.val = make(n_val);
  return scene;
}

std::vector<PoseSample> add_feature_noise(std::span<const PoseSample> samples, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<PoseSample> out(samples.begin(), samples.end());
  if (sigma == 0.0) return out;
  for (PoseSample& s : out)
    for (Eigen::Index i = 0; i < s.feature.size(); ++i) s.feature[i] += sigma * normal(rng);
  return out;
}

void write_samples_csv(const std::filesystem::path& path, std::span<const PoseSample> samples) {
  const std::size_t dim = samples.empty() ? 0 : std::size_t(samples.front().feature.size());
  std::string text;
  for (std::size_t i = 0; i < dim; ++i) text += "f" + std::to_string(i) + ",";
  text += "px,py,pz,qw,qx,qy,qz\n";
  for (const PoseSample& s : samples) {
    if (std::size_t(s.feature.size()) != dim) throw ShapeError("write_samples_csv: ragged feature dimensions");
    for (double v : s.feature) text += csv::format_number(v) + ",";
    for (int i = 0; i < 3; ++i) text += csv::format_number(s.pose.p[i]) + ",";
    for (int i = 0; i < 4; ++i) text += csv::format_number(s.pose.q[i]) + (i == 3 ? "\n" : ",");
  }
  csv::write_text(path, text);
}

std::vector<PoseSample> read_samples_csv(const std::filesystem::path& path) {
  const std::vector<std::string> lines = csv::read_lines(path);
  if (lines.empty()) throw std::runtime_error(path.string() + ": missing header");
  const std::size_t columns = csv::split(lines.front()).size();
  if (columns < 7) throw std::runtime_error(path.string() + ": header has fewer than 7 columns");
  const std::size_t dim = columns - 7;
  std::vector<PoseSample> out;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    const auto fields = csv::split(lines[li]);
    if (fields.size() != columns) {
      throw std::runtime_error(path.string() + ":" + std::to_string(li + 1) + ": expected " +
                               std::to_string(columns) + " fields");
    }
    PoseSample s;
    s.feature.resize(Eigen::Index(dim));
    try {
      for (std::size_t i = 0; i < dim; ++i) s.feature[Eigen::Index(i)] = csv::parse_number(fields[i]);
      for (int i = 0; i < 3; ++i) s.pose.p[i] = csv::parse_number(fields[dim + std::size_t(i)]);
      for (int i = 0; i < 4; ++i) s.pose.q[i] = csv::parse_number(fields[dim + 3 + std::size_t(i)]);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(li + 1) + ": " + e.what());
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace ocpls
