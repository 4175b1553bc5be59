#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "oracles.hpp"
#include "vopred/kinematics.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace vopred;

namespace {

KinematicProfile pedestrianProfile() {
  KinematicProfile p;
  p.type = AgentType::Pedestrian;
  p.model = HolonomicModel{1.5, std::numeric_limits<double>::infinity()};
  p.epsilon_max = 0.2;
  p.tau = 1.0;
  return p;
}

KinematicProfile carProfile() {
  KinematicProfile p;
  p.type = AgentType::Car;
  p.model = CarLikeModel{2.5, 0.6, 8.0, 3.0};
  p.epsilon_max = 0.5;
  p.tau = 1.0;
  return p;
}

double sidewaysError(const KinematicProfile& car, double s) {
  const Pose start{Vec2(0, 0), 0.0, s};
  return trackVelocity(car, start, Vec2(0.0, s), car.tau, 0.01).max_error;
}

}  // namespace

TEST_CASE("holonomic tracking without an acceleration limit is exact") {
  KinematicProfile p = pedestrianProfile();
  const Pose start{Vec2(1, 2), 0.3, 0.4};
  TrackResult r = trackVelocity(p, start, Vec2(0.9, -0.7), 1.0, 0.01);
  CHECK(r.max_error <= 1e-12);
  CHECK(r.trajectory.size() == 101);
  // Requests beyond s_max are clamped and accumulate error.
  TrackResult fast = trackVelocity(p, start, Vec2(3.0, 0.0), 1.0, 0.01);
  CHECK(fast.max_error > 1.0);
}

TEST_CASE("holonomic acceleration limit delays convergence") {
  KinematicProfile p = pedestrianProfile();
  p.model = HolonomicModel{1.5, 1.0};
  const Pose start{Vec2(0, 0), 0.0, 0.0};
  TrackResult r = trackVelocity(p, start, Vec2(1.0, 0.0), 2.0, 0.01);
  CHECK(r.max_error > 0.1);   // roughly v^2/(2a) of catch-up lag
  CHECK(r.max_error < 1.0);
  // Final speed reaches the target.
  CHECK(r.trajectory.back().speed == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("car tracking a heading-aligned target is near exact") {
  KinematicProfile car = carProfile();
  const double s = 5.0;
  const Pose start{Vec2(0, 0), 0.0, s};
  TrackResult r = trackVelocity(car, start, Vec2(s, 0.0), 1.0, 0.01);
  CHECK(r.max_error < 1e-3);
}

TEST_CASE("car sideways tracking error grows with speed; bisection matches a dense sweep") {
  KinematicProfile car = carProfile();

  // Dense sweep at 0.01 m/s resolution: largest sideways speed within budget.
  double sweep_boundary = 0.0;
  double prev = 0.0;
  bool monotone = true;
  for (double s = 0.01; s <= 3.0; s += 0.01) {
    const double err = sidewaysError(car, s);
    if (err < prev - 1e-9) monotone = false;
    prev = err;
    if (err <= car.epsilon_max) sweep_boundary = s;
  }
  CHECK(monotone);
  CHECK(sweep_boundary > 0.05);
  CHECK(sweep_boundary < 2.0);

  // Bisection on the same error function.
  double lo = 0.0, hi = 3.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (sidewaysError(car, mid) <= car.epsilon_max ? lo : hi) = mid;
  }
  CHECK(lo == doctest::Approx(sweep_boundary).epsilon(0.02));
}

TEST_CASE("holonomic trackable set is a polygon inscribed in the speed disc") {
  KinematicProfile p = pedestrianProfile();
  ConvexPolygon k = estimateTrackableSet(p, defaultGrid(p.model), 0.02);
  const double s_max = 1.5;
  for (const Vec2& v : k.vertices()) {
    CHECK(v.norm() == doctest::Approx(s_max).epsilon(1e-9));
  }
  CHECK(k.contains({0, 0}));

  // Hausdorff distance to the disc bounded by grid resolution.
  const double dphi = 5.0 * M_PI / 180.0;
  const double bound = s_max * (1.0 - std::cos(dphi / 2.0)) + 0.1;
  for (int i = 0; i < 720; ++i) {
    const double a = M_PI * i / 360.0;
    const Vec2 rim = s_max * Vec2(std::cos(a), std::sin(a));
    CHECK(k.distance(rim) <= bound + 1e-9);
  }
}

TEST_CASE("car trackable set matches the per-angle bisection boundary") {
  KinematicProfile car = carProfile();
  const DiscretizationGrid grid = DiscretizationGrid::make(0.1, 8.0, 5.0 * M_PI / 180.0, M_PI / 2);
  ConvexPolygon k = estimateTrackableSet(car, grid, 0.01);

  CHECK(k.contains({0, 0}));
  // Symmetric about the body x axis.
  for (const Vec2& v : k.vertices()) {
    CHECK(k.contains({v.x(), -v.y()}, 1e-9));
  }

  // Straight ahead the full speed range is trackable.
  CHECK(k.contains({8.0 - 1e-6, 0.0}, 1e-9));

  // Per-angle oracle. The hull must cover the bisected boundary speed at
  // every grid angle (within one speed cell); where the measured point
  // survives as a hull vertex (the radial profile is locally convex there),
  // the extent must also not exceed it by more than a cell.
  for (int deg = 0; deg <= 90; deg += 5) {
    const double rad = deg * M_PI / 180.0;
    const Vec2 dir(std::cos(rad), std::sin(rad));
    double lo = 0.0, hi = 8.0;
    for (int it = 0; it < 50; ++it) {
      const double mid = 0.5 * (lo + hi);
      const Pose start{Vec2(0, 0), 0.0, mid};
      const double err = trackVelocity(car, start, mid * dir, car.tau, 0.01).max_error;
      (err <= car.epsilon_max ? lo : hi) = mid;
    }
    double extent = 0.0;
    for (double r = 0.0; r <= 8.0; r += 0.005) {
      if (k.contains(r * dir, 1e-9)) extent = r;
    }
    CHECK(extent >= lo - 0.11);
    bool at_vertex = false;
    for (const Vec2& v : k.vertices()) {
      if (std::abs(std::atan2(std::abs(v.y()), v.x()) - rad) < 1e-6) at_vertex = true;
    }
    if (at_vertex) {
      CHECK(std::abs(extent - lo) <= 0.11);
    }
  }

  // The hull never invents vertices: each one is a measured grid velocity.
  for (const Vec2& v : k.vertices()) {
    if (v.norm() < 1e-12) continue;
    const double s = v.norm();
    double nearest_speed = 1e9;
    for (double gs : grid.speeds) nearest_speed = std::min(nearest_speed, std::abs(gs - s));
    CHECK(nearest_speed <= 1e-9);
  }
}

TEST_CASE("trackable-set vertices re-verify against the controller") {
  KinematicProfile car = carProfile();
  const DiscretizationGrid grid = DiscretizationGrid::make(0.2, 8.0, 10.0 * M_PI / 180.0, M_PI / 2);
  ConvexPolygon k = estimateTrackableSet(car, grid, 0.01);
  for (const Vec2& v : k.vertices()) {
    const Pose start{Vec2(0, 0), 0.0, v.norm()};
    CHECK(trackVelocity(car, start, v, car.tau, 0.01).max_error <= car.epsilon_max + 1e-12);
  }
}

TEST_CASE("trackable set grows with the error budget") {
  KinematicProfile tight = carProfile();
  tight.epsilon_max = 0.3;
  KinematicProfile loose = carProfile();
  loose.epsilon_max = 0.6;
  const DiscretizationGrid grid = DiscretizationGrid::make(0.2, 8.0, 10.0 * M_PI / 180.0, M_PI / 2);
  ConvexPolygon k_tight = estimateTrackableSet(tight, grid, 0.01);
  ConvexPolygon k_loose = estimateTrackableSet(loose, grid, 0.01);
  for (const Vec2& v : k_tight.vertices()) {
    CHECK(k_loose.contains(v, 1e-9));
  }
}

TEST_CASE("static-obstacle estimation fails cleanly") {
  KinematicProfile p;
  p.type = AgentType::StaticObstacle;
  p.model = HolonomicModel{0.0};
  p.epsilon_max = 0.1;
  CHECK_THROWS_AS(estimateTrackableSet(p, DiscretizationGrid::make(0.1, 0.0, 0.5, M_PI), 0.05),
                  KinematicsError);
}

TEST_CASE("profiles round-trip through the text format") {
  ProfileMap profiles;
  KinematicProfile ped = pedestrianProfile();
  ped.trackable_set = ConvexPolygon::regular(8, 1.5);
  profiles[AgentType::Pedestrian] = ped;
  KinematicProfile car = carProfile();
  car.trackable_set = ConvexPolygon({{-1, -0.5}, {7.5, -2}, {8, 0}, {7.5, 2}, {-1, 0.5}});
  profiles[AgentType::Car] = car;

  std::stringstream buf;
  writeProfiles(profiles, buf);
  ProfileMap back = parseProfiles(buf);

  REQUIRE(back.size() == 2);
  const KinematicProfile& p2 = back.at(AgentType::Pedestrian);
  CHECK(p2.holonomic());
  CHECK(std::get<HolonomicModel>(p2.model).s_max == 1.5);
  CHECK(p2.epsilon_max == ped.epsilon_max);
  CHECK(p2.tau == ped.tau);
  REQUIRE(p2.trackable_set.has_value());
  CHECK(p2.trackable_set->size() == 8);

  const KinematicProfile& c2 = back.at(AgentType::Car);
  const CarLikeModel& m = std::get<CarLikeModel>(c2.model);
  CHECK(m.wheelbase == 2.5);
  CHECK(m.max_steer == 0.6);
  CHECK(m.s_max == 8.0);
  CHECK(m.a_max == 3.0);
  REQUIRE(c2.trackable_set.has_value());
  for (int i = 0; i < c2.trackable_set->size(); ++i) {
    CHECK((c2.trackable_set->vertex(i) - car.trackable_set->vertex(i)).norm() == 0.0);
  }
}

TEST_CASE("profile parser reports missing fields and bad input by line") {
  auto expectError = [](const std::string& text, const std::string& needle) {
    std::stringstream in(text);
    try {
      parseProfiles(in);
      FAIL_CHECK("expected parse error containing '" << needle << "'");
    } catch (const KinematicsError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  expectError("type car\nmodel car_like\nwheelbase 2.5\nmax_steer 0.6\ns_max 8\n"
              "epsilon_max 0.5\ntau 1\n",
              "a_max");
  expectError("type pedestrian\nmodel holonomic\ns_max 1.5\ntau 1\n", "epsilon_max");
  expectError("type dragon\nmodel holonomic\n", "unknown agent type");
  expectError("type pedestrian\nmodel hover\ns_max 1\nepsilon_max 0.2\ntau 1\n", "unknown model");
  expectError("type pedestrian\nmodel holonomic\ns_max abc\nepsilon_max 0.2\ntau 1\n", "line 3");
  expectError("type pedestrian\nmodel holonomic\ns_max 1.5\nepsilon_max 0.2\ntau 1\nwhoops\n",
              "line 6");
  expectError("type pedestrian\nmodel holonomic\ns_max 1.5\nepsilon_max 0.2\ntau 1\n"
              "K:\n1 0\n0 1 7\n",
              "trailing garbage");
}

TEST_CASE("save/load round trip through a file") {
  ProfileMap profiles;
  profiles[AgentType::Bicycle] = KinematicProfile{
      AgentType::Bicycle, CarLikeModel{1.1, 0.8, 6.0, 2.0}, std::nullopt, 0.3, 1.0};
  const std::string path = (std::filesystem::temp_directory_path() / "vopred_profiles.txt").string();
  saveProfiles(profiles, path);
  ProfileMap back = loadProfiles(path);
  REQUIRE(back.count(AgentType::Bicycle) == 1);
  CHECK(std::get<CarLikeModel>(back.at(AgentType::Bicycle).model).wheelbase == 1.1);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(loadProfiles("/nonexistent/profile.txt"), KinematicsError);
}
