#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ocpls {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense double-precision coordinate vector. Holds parameters as well as every
// same-shaped quantity derived from them (gradients, curvature diagonals,
// moving averages, inner-solve iterates).
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t n, double fill = 0.0) : v_(Eigen::VectorXd::Constant(Index(n), fill)) {}
  ParamVector(std::initializer_list<double> values);
  explicit ParamVector(std::span<const double> values);
  explicit ParamVector(Eigen::VectorXd v) : v_(std::move(v)) {}

  static ParamVector zeros(std::size_t n) { return ParamVector(n, 0.0); }
  static ParamVector ones(std::size_t n) { return ParamVector(n, 1.0); }

  std::size_t size() const { return std::size_t(v_.size()); }
  bool empty() const { return v_.size() == 0; }

  double operator[](std::size_t i) const { return v_[Index(i)]; }
  double& operator[](std::size_t i) { return v_[Index(i)]; }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::span<double> span() { return {v_.data(), size()}; }
  std::span<const double> span() const { return {v_.data(), size()}; }

  Eigen::VectorXd& vec() { return v_; }
  const Eigen::VectorXd& vec() const { return v_; }

  std::vector<double> to_vector() const { return {v_.data(), v_.data() + v_.size()}; }

  double norm() const { return v_.norm(); }
  double squared_norm() const { return v_.squaredNorm(); }
  double dot(const ParamVector& other) const;

  bool all_finite() const { return v_.allFinite(); }

  // Throws NonFiniteError naming `what` and the first offending index.
  void validate(const std::string& what = "vector") const;

  friend bool operator==(const ParamVector& a, const ParamVector& b) {
    return a.v_.size() == b.v_.size() && a.v_ == b.v_;
  }

 private:
  using Index = Eigen::Index;
  Eigen::VectorXd v_;
};

void require_same_shape(const ParamVector& a, const ParamVector& b, const char* op);

// result[i] = a[i] * b[i]
ParamVector hadamard(const ParamVector& a, const ParamVector& b);

// result[i] = a[i]^n; n = 0 gives all ones.
ParamVector elementwise_pow(const ParamVector& a, unsigned n);

// a + s * b
ParamVector scale_add(const ParamVector& a, double s, const ParamVector& b);

}  // namespace ocpls
