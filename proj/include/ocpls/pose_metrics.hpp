#pragma once

#include <span>

#include <Eigen/Core>

namespace ocpls {

// Position in meters plus a scalar-first quaternion (w, x, y, z).
struct Pose {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Eigen::Vector4d q = Eigen::Vector4d(1.0, 0.0, 0.0, 0.0);
};

struct ErrorSummary {
  double median_pos = 0.0;  // m
  double mean_pos = 0.0;    // m
  double median_rot = 0.0;  // deg
  double mean_rot = 0.0;    // deg
};

// Euclidean distance in meters.
double position_error(const Eigen::Vector3d& predicted, const Eigen::Vector3d& truth);

// Geodesic angle 2 acos(|q_pred_normalized . q_truth|) in degrees, in [0, 180].
// Throws std::domain_error for a zero-norm prediction.
double rotation_error(const Eigen::Vector4d& predicted, const Eigen::Vector4d& truth);

// Medians use the midpoint of the two central values for even counts.
ErrorSummary summarize(std::span<const double> errors_pos, std::span<const double> errors_rot);

double median(std::span<const double> values);
double mean(std::span<const double> values);

}  // namespace ocpls
