#include "aamsupcon/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "aamsupcon/errors.hpp"
#include "aamsupcon/matrix.hpp"

namespace aamsupcon {

UnitVector UnitVector::from_unit(std::vector<double> components) {
  if (components.size() < 2) {
    throw Error(ErrorCode::kInvalidInput, "unit vectors need dimension >= 2");
  }
  const double norm = std::sqrt(squared_norm(components));
  if (std::abs(norm - 1.0) > kUnitNormTolerance) {
    throw Error(ErrorCode::kInvalidInput, "vector norm " + std::to_string(norm) + " is not 1");
  }
  return UnitVector(std::move(components));
}

Angle::Angle(double radians) : radians_(radians) {
  if (!(radians >= 0.0 && radians <= std::numbers::pi)) {
    throw Error(ErrorCode::kInvalidInput, "angle outside [0, pi]: " + std::to_string(radians));
  }
}

double normalize_in_place(std::span<double> v) {
  if (v.size() < 2) throw Error(ErrorCode::kInvalidInput, "unit vectors need dimension >= 2");
  const double norm = std::sqrt(squared_norm(v));
  if (!(norm > kNormEpsilon)) {
    throw Error(ErrorCode::kZeroVector, "cannot normalize a vector of norm " + std::to_string(norm));
  }
  for (double& x : v) x /= norm;
  return norm;
}

UnitVector normalize(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  normalize_in_place(out);
  return UnitVector(std::move(out));
}

double clamp_cosine(double c) noexcept { return std::clamp(c, -1.0, 1.0); }

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  return clamp_cosine(dot(a, b));
}

double cosine(const UnitVector& a, const UnitVector& b) {
  return cosine(a.components(), b.components());
}

Angle angle_of(double c) noexcept { return Angle(std::acos(clamp_cosine(c))); }

void validate_margin(double m) {
  if (!(m >= 0.0 && m < std::numbers::pi / 2)) {
    throw Error(ErrorCode::kInvalidMargin, "margin must lie in [0, pi/2), got " + std::to_string(m));
  }
}

double margin_logit(double c, double m) {
  validate_margin(m);
  // cos(arccos(c)) is not exactly c in floating point.
  if (m == 0.0) return c;
  const double shifted = std::acos(clamp_cosine(c)) + m;
  return std::cos(std::min(shifted, std::numbers::pi));
}

double margin_logit_derivative(double c, double m) {
  validate_margin(m);
  if (m == 0.0) return 1.0;
  if (std::abs(c) >= 1.0) return 1.0;
  const double cc = std::clamp(c, -1.0 + kCosineDerivativeClamp, 1.0 - kCosineDerivativeClamp);
  if (std::acos(cc) + m >= std::numbers::pi) return 0.0;
  // d/dc cos(arccos c + m) = sin(theta + m) / sin(theta)
  return std::cos(m) + cc * std::sin(m) / std::sqrt(1.0 - cc * cc);
}

}  // namespace aamsupcon
