#include "bevreg/geometry.hpp"

#include <cmath>
#include <string>

#include "bevreg/errors.hpp"

namespace bevreg {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw DomainError(std::string("non-finite ") + what);
  }
}

}  // namespace

double normalize_angle(double a) {
  require_finite(a, "angle");
  // std::remainder is exact and returns a value in [-pi, pi].
  double r = std::remainder(a, kTwoPi);
  if (r <= -kPi) r = kPi;
  return r;
}

double angular_distance(double a, double b) {
  return std::abs(normalize_angle(a - b));
}

Pose2D::Pose2D(double x_, double y_, double theta_) : x(x_), y(y_), theta(normalize_angle(theta_)) {
  require_finite(x, "x coordinate");
  require_finite(y, "y coordinate");
}

RigidTransform2D::RigidTransform2D(double dx_, double dy_, double dtheta_)
    : dx(dx_), dy(dy_), dtheta(normalize_angle(dtheta_)) {
  require_finite(dx, "dx");
  require_finite(dy, "dy");
}

Pose2D apply_transform(const RigidTransform2D& t, const Pose2D& p) {
  const double c = std::cos(t.dtheta);
  const double s = std::sin(t.dtheta);
  return {c * p.x - s * p.y + t.dx, s * p.x + c * p.y + t.dy, p.theta + t.dtheta};
}

RigidTransform2D estimate_transform(const Pose2D& unr, const Pose2D& ref) {
  const double dtheta = normalize_angle(ref.theta - unr.theta);
  const double c = std::cos(dtheta);
  const double s = std::sin(dtheta);
  return {ref.x - unr.x * c + unr.y * s, ref.y - unr.x * s - unr.y * c, dtheta};
}

RigidTransform2D inverse(const RigidTransform2D& t) {
  const double c = std::cos(t.dtheta);
  const double s = std::sin(t.dtheta);
  // R(-a) * (-d)
  return {-(c * t.dx + s * t.dy), -(-s * t.dx + c * t.dy), -t.dtheta};
}

Pose2D to_local_frame(const Pose2D& frame, const Pose2D& p) {
  return apply_transform(inverse(as_transform(frame)), p);
}

}  // namespace bevreg
