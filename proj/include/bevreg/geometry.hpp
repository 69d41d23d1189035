#pragma once

#include <cmath>
#include <numbers>

namespace bevreg {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Wraps an angle into (-pi, pi]; +pi is kept, -pi maps to +pi.
// Throws DomainError for non-finite input.
double normalize_angle(double a);

// Smallest absolute difference between two angles, in [0, pi].
double angular_distance(double a, double b);

// Planar position in meters plus a facing angle in radians. The constructor
// normalizes theta and rejects non-finite values.
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose2D() = default;
  Pose2D(double x_, double y_, double theta_);

  bool operator==(const Pose2D&) const = default;
};

// Rotation by dtheta (counterclockwise) followed by translation (dx, dy):
//   p' = T(dx, dy) * R(dtheta) * p,   theta' = theta + dtheta.
struct RigidTransform2D {
  double dx = 0.0;
  double dy = 0.0;
  double dtheta = 0.0;

  RigidTransform2D() = default;
  RigidTransform2D(double dx_, double dy_, double dtheta_);

  bool operator==(const RigidTransform2D&) const = default;
};

Pose2D apply_transform(const RigidTransform2D& t, const Pose2D& p);

// Closed-form transform that carries `unr` exactly onto `ref`. One oriented
// correspondence fixes all three degrees of freedom.
RigidTransform2D estimate_transform(const Pose2D& unr, const Pose2D& ref);

RigidTransform2D inverse(const RigidTransform2D& t);

// A pose read as the transform from its local frame to the parent frame.
inline RigidTransform2D as_transform(const Pose2D& frame) {
  return {frame.x, frame.y, frame.theta};
}
inline Pose2D as_pose(const RigidTransform2D& t) { return {t.dx, t.dy, t.dtheta}; }

// Expresses a parent-frame pose in the local frame of `frame`.
Pose2D to_local_frame(const Pose2D& frame, const Pose2D& p);

inline double planar_distance(const Pose2D& a, const Pose2D& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace bevreg
