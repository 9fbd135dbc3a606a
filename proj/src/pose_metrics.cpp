#include "ocpls/pose_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace ocpls {

double position_error(const Eigen::Vector3d& predicted, const Eigen::Vector3d& truth) {
  return (predicted - truth).norm();
}

double rotation_error(const Eigen::Vector4d& predicted, const Eigen::Vector4d& truth) {
  const double n = predicted.norm();
  if (!(n > 0.0)) throw std::domain_error("rotation_error: predicted quaternion has zero norm");
  const double d = std::clamp(std::abs(predicted.dot(truth)) / n, 0.0, 1.0);
  return 2.0 * std::acos(d) * 180.0 / std::numbers::pi;
}

double median(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  std::vector<double> v(values.begin(), values.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + std::ptrdiff_t(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + std::ptrdiff_t(mid));
  return 0.5 * (lower + upper);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean: empty input");
  return std::accumulate(values.begin(), values.end(), 0.0) / double(values.size());
}

ErrorSummary summarize(std::span<const double> errors_pos, std::span<const double> errors_rot) {
  if (errors_pos.empty() || errors_rot.empty()) throw std::invalid_argument("summarize: empty input");
  if (errors_pos.size() != errors_rot.size()) {
    throw std::invalid_argument("summarize: position and rotation error counts differ");
  }
  return {median(errors_pos), mean(errors_pos), median(errors_rot), mean(errors_rot)};
}

}  // namespace ocpls
