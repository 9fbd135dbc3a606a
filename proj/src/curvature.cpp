#include "ocpls/curvature.hpp"

#include <stdexcept>

namespace ocpls {
namespace {

void require_batch(std::span<const std::size_t> batch, const char* op) {
  if (batch.empty()) throw std::invalid_argument(std::string(op) + ": empty batch");
}

std::vector<double> batch_predictions(const ResidualModel& model, const ParamVector& x,
                                      std::span<const std::size_t> batch) {
  std::vector<double> out;
  out.reserve(batch.size());
  for (std::size_t n : batch) out.push_back(model.predict(x, n));
  return out;
}

}  // namespace

const char* to_string(CurvatureSource source) {
  switch (source) {
    case CurvatureSource::simplified:
      return "simplified";
    case CurvatureSource::gnb_sampled:
      return "gnb_sampled";
    case CurvatureSource::exact_oracle:
      return "exact_oracle";
  }
  return "unknown";
}

CurvatureEstimate simplified_hessian(const ParamVector& g) {
  g.validate("simplified_hessian input");
  return {hadamard(g, g), CurvatureSource::simplified};
}

std::vector<double> sample_synthetic_labels(std::span<const double> predictions, Rng& rng,
                                            double sigma) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> labels;
  labels.reserve(predictions.size());
  for (double p : predictions) labels.push_back(p + sigma * normal(rng));
  return labels;
}

CurvatureEstimate gnb_mse_estimate(const ResidualModel& model, const ParamVector& x,
                                   std::span<const std::size_t> batch, Rng& rng, double sigma) {
  require_batch(batch, "gnb_mse_estimate");
  const std::vector<double> pred = batch_predictions(model, x, batch);
  const std::vector<double> labels = sample_synthetic_labels(pred, rng, sigma);

  const double n = double(batch.size());
  std::vector<double> weights(batch.size());
  for (std::size_t j = 0; j < batch.size(); ++j) weights[j] = (pred[j] - labels[j]) / n;

  ParamVector grad = model.weighted_gradient(x, batch, weights);
  grad.validate("gnb_mse_estimate gradient");
  ParamVector diag = hadamard(grad, grad);
  diag.vec() *= n;
  return {std::move(diag), CurvatureSource::gnb_sampled};
}

CurvatureEstimate gnb_per_sample_estimate(const ResidualModel& model, const ParamVector& x,
                                          std::span<const std::size_t> batch, Rng& rng,
                                          double sigma) {
  require_batch(batch, "gnb_per_sample_estimate");
  const std::vector<double> pred = batch_predictions(model, x, batch);
  const std::vector<double> labels = sample_synthetic_labels(pred, rng, sigma);

  ParamVector acc = ParamVector::zeros(model.dimension());
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const double residual = pred[j] - labels[j];
    ParamVector g = model.weighted_gradient(x, batch.subspan(j, 1), std::span(&residual, 1));
    acc.vec() += g.vec().cwiseAbs2();
  }
  acc.vec() /= double(batch.size());
  acc.validate("gnb_per_sample_estimate");
  return {std::move(acc), CurvatureSource::gnb_sampled};
}

CurvatureEstimate exact_gn_diagonal(const ResidualModel& model, const ParamVector& x,
                                    std::span<const std::size_t> batch) {
  require_batch(batch, "exact_gn_diagonal");
  ParamVector acc = ParamVector::zeros(model.dimension());
  for (std::size_t n : batch) {
    std::optional<ParamVector> row = model.jacobian_row(x, n);
    if (!row) throw std::logic_error("exact_gn_diagonal: model does not expose Jacobian rows");
    require_same_shape(acc, *row, "exact_gn_diagonal");
    acc.vec() += row->vec().cwiseAbs2();
  }
  acc.vec() /= double(batch.size());
  return {std::move(acc), CurvatureSource::exact_oracle};
}

}  // namespace ocpls
