#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace aamsupcon {

/// Pre-normalization vectors with L2 norm at or below this are rejected.
inline constexpr double kNormEpsilon = 1e-12;
/// Maximum deviation from unit norm accepted for a UnitVector.
inline constexpr double kUnitNormTolerance = 1e-9;
/// Cosines are pulled this far inside (-1, 1) before differentiating arccos.
inline constexpr double kCosineDerivativeClamp = 1e-7;

/// A point on the unit hypersphere in d >= 2 dimensions.
class UnitVector {
 public:
  /// Wraps components that are already unit length; throws InvalidInput if
  /// the norm is off by more than kUnitNormTolerance or d < 2.
  static UnitVector from_unit(std::vector<double> components);

  std::span<const double> components() const noexcept { return components_; }
  std::size_t dim() const noexcept { return components_.size(); }
  double operator[](std::size_t i) const noexcept { return components_[i]; }

  friend bool operator==(const UnitVector&, const UnitVector&) = default;

 private:
  explicit UnitVector(std::vector<double> c) : components_(std::move(c)) {}
  friend UnitVector normalize(std::span<const double> v);

  std::vector<double> components_;
};

/// Angle in radians, always in [0, pi].
class Angle {
 public:
  explicit Angle(double radians);
  double radians() const noexcept { return radians_; }

 private:
  double radians_;
};

/// v / ||v||. Throws ZeroVector when ||v|| <= kNormEpsilon and InvalidInput for d < 2.
UnitVector normalize(std::span<const double> v);

/// Normalizes in place and returns the original norm. Same error contract as normalize().
double normalize_in_place(std::span<double> v);

/// Dot product clamped to [-1, 1]. Throws DimensionMismatch.
double cosine(const UnitVector& a, const UnitVector& b);
double cosine(std::span<const double> a, std::span<const double> b);

double clamp_cosine(double c) noexcept;

Angle angle_of(double c) noexcept;

/// cos(min(arccos(c) + m, pi)). Requires 0 <= m < pi/2, else InvalidMargin.
double margin_logit(double c, double m);

/// d margin_logit / dc. Zero in the saturated region where arccos(c) + m >= pi;
/// the subgradient 1 is used at |c| = 1.
double margin_logit_derivative(double c, double m);

void validate_margin(double m);

}  // namespace aamsupcon
