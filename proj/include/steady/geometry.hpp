#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace steady {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Planar pose. theta is kept normalized to (-pi, pi] by the operations that
// produce poses.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

// Normalizes an angle to (-pi, pi].
inline double wrap_angle(double a) {
  if (!std::isfinite(a)) throw std::invalid_argument("wrap_angle: non-finite angle");
  double w = std::remainder(a, kTwoPi);
  if (w <= -kPi) w += kTwoPi;
  return w;
}

// Rotates a global-frame vector into the frame with heading theta: R(-theta) v.
inline Vec2 to_local(double theta, Vec2 v_global) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * v_global.x + s * v_global.y, -s * v_global.x + c * v_global.y};
}

// Inverse of to_local: R(theta) v.
inline Vec2 from_local(double theta, Vec2 v_local) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * v_local.x - s * v_local.y, s * v_local.x + c * v_local.y};
}

// Difference a - b wrapped to (-pi, pi].
inline double angle_diff(double a, double b) { return wrap_angle(a - b); }

}  // namespace steady
