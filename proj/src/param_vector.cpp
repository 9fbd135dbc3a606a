#include "ocpls/param_vector.hpp"

#include <cassert>
#include <cmath>

namespace ocpls {

ParamVector::ParamVector(std::initializer_list<double> values) : v_(Index(values.size())) {
  Index i = 0;
  for (double x : values) v_[i++] = x;
}

ParamVector::ParamVector(std::span<const double> values) : v_(Index(values.size())) {
  for (std::size_t i = 0; i < values.size(); ++i) v_[Index(i)] = values[i];
}

double ParamVector::dot(const ParamVector& other) const {
  require_same_shape(*this, other, "dot");
  return v_.dot(other.v_);
}

void ParamVector::validate(const std::string& what) const {
  for (Index i = 0; i < v_.size(); ++i) {
    if (!std::isfinite(v_[i])) {
      throw NonFiniteError(what + ": non-finite entry at index " + std::to_string(i));
    }
  }
}

void require_same_shape(const ParamVector& a, const ParamVector& b, const char* op) {
  if (a.size() != b.size()) {
    throw ShapeError(std::string(op) + ": length mismatch (" + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
  }
}

ParamVector hadamard(const ParamVector& a, const ParamVector& b) {
  require_same_shape(a, b, "hadamard");
  return ParamVector(a.vec().cwiseProduct(b.vec()));
}

ParamVector elementwise_pow(const ParamVector& a, unsigned n) {
  ParamVector out = ParamVector::ones(a.size());
  // square-and-multiply per coordinate; keeps pow(a, m+n) == pow(a,m)*pow(a,n) tight
  for (std::size_t i = 0; i < a.size(); ++i) {
    double base = a[i];
    double acc = 1.0;
    for (unsigned e = n; e != 0; e >>= 1) {
      if (e & 1u) acc *= base;
      base *= base;
    }
    out[i] = acc;
  }
  assert(out.all_finite() || !a.all_finite());
  return out;
}

ParamVector scale_add(const ParamVector& a, double s, const ParamVector& b) {
  require_same_shape(a, b, "scale_add");
  return ParamVector(a.vec() + s * b.vec());
}

}  // namespace ocpls
