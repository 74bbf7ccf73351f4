// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <random>

#include "sonimap/geometry.hpp"
#include "support.hpp"

using namespace sonimap;
using Catch::Approx;

TEST_CASE("transform_to_world basics") {
  PointCloud cloud;
  cloud.points = {Vec3(1, 2, 3)};

  SECTION("identity pose is a no-op") {
    const auto out = transform_to_world(Pose::identity(), cloud);
    REQUIRE(out.frame == Frame::World);
    REQUIRE(out.points[0].isApprox(Vec3(1, 2, 3), 1e-12));
  }

  SECTION("translation moves the origin") {
    PointCloud origin_cloud;
    origin_cloud.points = {Vec3(0, 0, 0)};
    const Pose pose(Vec3(1, 0, 0), Quat::Identity());
    const auto out = transform_to_world(pose, origin_cloud);
    REQUIRE(out.points[0].isApprox(Vec3(1, 0, 0), 1e-12));
  }

  SECTION("quarter yaw turn about +Z") {
    const Pose pose(Vec3::Zero(), testsupport::yaw_quat(90.0));
    PointCloud c;
    c.points = {Vec3(1, 0, 0)};
    const auto out = transform_to_world(pose, c);
    REQUIRE((out.points[0] - Vec3(0, 1, 0)).norm() < 1e-9);
  }

  SECTION("world-frame cloud is rejected") {
    PointCloud world = cloud;
    world.frame = Frame::World;
    REQUIRE_THROWS_AS(transform_to_world(Pose::identity(), world), Error);
  }
}

TEST_CASE("pose invariants") {
  std::mt19937_64 rng = testsupport::seeded_rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Quat q(u(rng), u(rng), u(rng), u(rng));
    if (q.norm() < 1e-3) continue;
    const Pose pose(Vec3(u(rng), u(rng), u(rng)) * 5.0, q);
    REQUIRE(std::abs(pose.q.norm() - 1.0) < 1e-9);

    const Pose round_trip = pose.compose(pose.inverse());
    REQUIRE(round_trip.t.norm() < 1e-9);
    REQUIRE(std::abs(std::abs(round_trip.q.dot(Quat::Identity())) - 1.0) <
            1e-9);
  }
}

TEST_CASE("transform_to_world preserves pairwise distances") {
  std::mt19937_64 rng = testsupport::seeded_rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  PointCloud cloud;
  for (int i = 0; i < 50; ++i)
    cloud.points.emplace_back(u(rng), u(rng), u(rng));

  const Pose pose(Vec3(0.4, -1.2, 2.0),
                  Quat(0.3, -0.5, 0.2, 0.9));
  const auto out = transform_to_world(pose, cloud);
  for (std::size_t i = 1; i < cloud.points.size(); ++i) {
    const double before = (cloud.points[i] - cloud.points[i - 1]).norm();
    const double after = (out.points[i] - out.points[i - 1]).norm();
    REQUIRE(std::abs(before - after) < 1e-9);
  }
}

TEST_CASE("sensor_heading_2d") {
  SECTION("identity pose with +X convention") {
    const auto h = sensor_heading_2d(Pose::identity(), OpticalAxis::PlusX);
    REQUIRE(h.isApprox(Vec2(1, 0), 1e-12));
  }

  SECTION("yaw 90 with +X convention") {
    const Pose pose(Vec3::Zero(), testsupport::yaw_quat(90.0));
    const auto h = sensor_heading_2d(pose, OpticalAxis::PlusX);
    REQUIRE((h - Vec2(0, 1)).norm() < 1e-9);
  }

  SECTION("near-vertical optical axis throws") {
    // pitch the +X axis up by 89.9999 degrees about +Y
    const Quat q(Eigen::AngleAxisd(deg2rad(-89.9999999), Vec3::UnitY()));
    const Pose pose(Vec3::Zero(), q);
    REQUIRE_THROWS_AS(sensor_heading_2d(pose, OpticalAxis::PlusX),
                      HeadingDegenerateError);
  }

  SECTION("default +Z convention: identity camera looks straight up") {
    REQUIRE_THROWS_AS(sensor_heading_2d(Pose::identity(), OpticalAxis::PlusZ),
                      HeadingDegenerateError);
  }
}

TEST_CASE("signed_azimuth_deg") {
  const Vec2 heading(1, 0);
  REQUIRE(signed_azimuth_deg(heading, Vec2(1, 0)) == Approx(0.0));
  REQUIRE(signed_azimuth_deg(heading, Vec2(0, 1)) == Approx(90.0));
  REQUIRE(signed_azimuth_deg(heading, Vec2(-1, -1e-12)) ==
          Approx(180.0).margin(1e-6));
  REQUIRE(signed_azimuth_deg(heading, Vec2(0, -1)) == Approx(270.0));
  REQUIRE_THROWS_AS(signed_azimuth_deg(heading, Vec2(0, 0)), Error);

  SECTION("result always lands in [0, 360)") {
    std::mt19937_64 rng = testsupport::seeded_rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
      Vec2 h(u(rng), u(rng));
      Vec2 v(u(rng), u(rng));
      if (h.norm() < 1e-6 || v.norm() < 1e-6) continue;
      h.normalize();
      const double a = signed_azimuth_deg(h, v);
      REQUIRE(a >= 0.0);
      REQUIRE(a < 360.0);
    }
  }

  SECTION("antisymmetry modulo 360") {
    std::mt19937_64 rng = testsupport::seeded_rng(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 500; ++i) {
      Vec2 h(u(rng), u(rng));
      Vec2 v(u(rng), u(rng));
      if (h.norm() < 1e-6 || v.norm() < 1e-6) continue;
      h.normalize();
      const double forward = signed_azimuth_deg(h, v);
      const double backward = signed_azimuth_deg(v.normalized(), h * v.norm());
      const double sum = std::fmod(forward + backward, 360.0);
      REQUIRE(std::min(sum, 360.0 - sum) < 1e-6);
    }
  }

  SECTION("invariant under common planar rotation") {
    std::mt19937_64 rng = testsupport::seeded_rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> ang(0.0, 360.0);
    for (int i = 0; i < 500; ++i) {
      Vec2 h(u(rng), u(rng));
      Vec2 v(u(rng), u(rng));
      if (h.norm() < 1e-6 || v.norm() < 1e-6) continue;
      h.normalize();
      const double rot = ang(rng);
      const double before = signed_azimuth_deg(h, v);
      const double after =
          signed_azimuth_deg(rotate_2d(h, rot), rotate_2d(v, rot));
      const double diff = std::abs(wrap_deg_180(after - before));
      REQUIRE(diff < 1e-6);
    }
  }
}

TEST_CASE("wrap_deg_360 edge cases") {
  REQUIRE(wrap_deg_360(0.0) == 0.0);
  REQUIRE(wrap_deg_360(-0.0) == 0.0);
  REQUIRE(wrap_deg_360(360.0) == 0.0);
  REQUIRE(wrap_deg_360(-1e-12) >= 0.0);
  REQUIRE(wrap_deg_360(-1e-12) < 360.0);
  REQUIRE(wrap_deg_360(725.0) == Approx(5.0));
  REQUIRE(wrap_deg_360(-90.0) == Approx(270.0));
}
