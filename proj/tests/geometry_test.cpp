#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "bevreg/errors.hpp"
#include "bevreg/geometry.hpp"
#include "support/random_cases.hpp"

using namespace bevreg;

namespace {

constexpr double kTol = 1e-12;

void expect_pose(const Pose2D& p, double x, double y, double theta, double tol = kTol) {
  EXPECT_NEAR(p.x, x, tol);
  EXPECT_NEAR(p.y, y, tol);
  EXPECT_NEAR(angular_distance(p.theta, theta), 0.0, tol);
}

void expect_transform(const RigidTransform2D& t, double dx, double dy, double dtheta, double tol = kTol) {
  EXPECT_NEAR(t.dx, dx, tol);
  EXPECT_NEAR(t.dy, dy, tol);
  EXPECT_NEAR(angular_distance(t.dtheta, dtheta), 0.0, tol);
}

}  // namespace

TEST(NormalizeAngle, Examples) {
  EXPECT_NEAR(normalize_angle(3 * kPi / 2), -kPi / 2, kTol);
  EXPECT_EQ(normalize_angle(kPi), kPi);
  EXPECT_EQ(normalize_angle(-kPi), kPi);
  EXPECT_NEAR(normalize_angle(-3 * kPi), kPi, kTol);
  EXPECT_GT(normalize_angle(-3 * kPi), 0.0);
}

TEST(NormalizeAngle, RejectsNonFinite) {
  EXPECT_THROW(normalize_angle(std::numeric_limits<double>::quiet_NaN()), DomainError);
  EXPECT_THROW(normalize_angle(std::numeric_limits<double>::infinity()), DomainError);
}

TEST(NormalizeAngle, RangeIdempotenceAndPeriodicity) {
  testgen::CaseGen gen(1);
  for (int i = 0; i < 2000; ++i) {
    const double a = gen.uniform(-100.0, 100.0);
    const double n = normalize_angle(a);
    EXPECT_GT(n, -kPi);
    EXPECT_LE(n, kPi);
    EXPECT_EQ(normalize_angle(n), n);
    EXPECT_NEAR(angular_distance(normalize_angle(a + kTwoPi), n), 0.0, 1e-12);
    EXPECT_NEAR(std::remainder(a - n, kTwoPi), 0.0, 1e-12);
  }
}

TEST(AngularDistance, Examples) {
  EXPECT_NEAR(angular_distance(0.0, kTwoPi), 0.0, kTol);
  EXPECT_NEAR(angular_distance(kPi - 0.1, -kPi + 0.1), 0.2, kTol);
  EXPECT_NEAR(angular_distance(0.0, kPi / 2), kPi / 2, kTol);
}

TEST(AngularDistance, MetricProperties) {
  testgen::CaseGen gen(2);
  for (int i = 0; i < 2000; ++i) {
    const double a = gen.uniform(-10, 10), b = gen.uniform(-10, 10), c = gen.uniform(-10, 10);
    const double ab = angular_distance(a, b);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, kPi);
    EXPECT_DOUBLE_EQ(ab, angular_distance(b, a));
    EXPECT_LE(angular_distance(a, c), ab + angular_distance(b, c) + 1e-12);
    EXPECT_NEAR(angular_distance(a + kTwoPi, b), ab, 1e-12);
  }
}

TEST(Pose2D, ConstructorNormalizesAndRejectsNonFinite) {
  EXPECT_NEAR(Pose2D(0, 0, 3 * kPi / 2).theta, -kPi / 2, kTol);
  EXPECT_THROW(Pose2D(std::nan(""), 0, 0), DomainError);
  EXPECT_THROW(RigidTransform2D(0, std::numeric_limits<double>::infinity(), 0), DomainError);
}

TEST(ApplyTransform, Examples) {
  expect_pose(apply_transform({0, 0, 0}, {5, -2, 1.0}), 5, -2, 1.0);
  expect_pose(apply_transform({1, -1, kPi / 2}, {2, 3, kPi / 4}), -2, 1, 3 * kPi / 4);
  expect_pose(apply_transform({0, 0, kPi}, {1, 0, 0}), -1, 0, kPi);
  EXPECT_EQ(apply_transform({0, 0, kPi}, {1, 0, 0}).theta, kPi);
}

TEST(EstimateTransform, Examples) {
  expect_transform(estimate_transform({0, 0, 0}, {0, 0, 0}), 0, 0, 0);
  expect_transform(estimate_transform({1, 0, 0}, {0, 1, kPi / 2}), 0, 0, kPi / 2);
  expect_transform(estimate_transform({2, 3, kPi / 4}, {-2, 1, 3 * kPi / 4}), 1, -1, kPi / 2);
}

TEST(EstimateTransform, RoundTripProperties) {
  testgen::CaseGen gen(3);
  for (int i = 0; i < 1000; ++i) {
    const RigidTransform2D t = gen.transform();
    const Pose2D p = gen.pose();
    const RigidTransform2D back = estimate_transform(p, apply_transform(t, p));
    expect_transform(back, t.dx, t.dy, t.dtheta);

    const Pose2D u = gen.pose(), r = gen.pose();
    const Pose2D mapped = apply_transform(estimate_transform(u, r), u);
    expect_pose(mapped, r.x, r.y, r.theta);
  }
}

TEST(Inverse, ComposesToIdentity) {
  testgen::CaseGen gen(4);
  for (int i = 0; i < 1000; ++i) {
    const RigidTransform2D t = gen.transform();
    const Pose2D p = gen.pose();
    const Pose2D q = apply_transform(inverse(t), apply_transform(t, p));
    expect_pose(q, p.x, p.y, p.theta);
  }
}

TEST(ToLocalFrame, FrameOriginMapsToZero) {
  testgen::CaseGen gen(5);
  for (int i = 0; i < 200; ++i) {
    const Pose2D frame = gen.pose();
    expect_pose(to_local_frame(frame, frame), 0, 0, 0);
    const Pose2D p = gen.pose();
    const Pose2D local = to_local_frame(frame, p);
    const Pose2D world = apply_transform(as_transform(frame), local);
    expect_pose(world, p.x, p.y, p.theta);
  }
}
