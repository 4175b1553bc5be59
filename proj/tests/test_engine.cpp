#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "oracles.hpp"
#include "vopred/engine.hpp"

#include <cmath>
#include <sstream>

using namespace vopred;

namespace {

// Shared profiles with trackable sets estimated once per test binary.
const ProfileMap& testProfiles() {
  static const ProfileMap profiles = [] {
    ProfileMap m;
    KinematicProfile ped;
    ped.type = AgentType::Pedestrian;
    ped.model = HolonomicModel{1.5};
    ped.epsilon_max = 0.2;
    ped.tau = 1.0;
    ped.trackable_set = estimateTrackableSet(ped, DiscretizationGrid::make(0.1, 1.5, 0.2, M_PI), 0.05);
    m[AgentType::Pedestrian] = ped;

    KinematicProfile car;
    car.type = AgentType::Car;
    car.model = CarLikeModel{2.5, 0.6, 8.0, 3.0};
    car.epsilon_max = 0.5;
    car.tau = 1.0;
    car.trackable_set =
        estimateTrackableSet(car, DiscretizationGrid::make(0.2, 8.0, 0.1, M_PI / 2), 0.02);
    m[AgentType::Car] = car;
    return m;
  }();
  return profiles;
}

Engine testEngine(EngineConfig cfg = EngineConfig{}) { return Engine(cfg, testProfiles()); }

BehaviorConstraints passiveBehavior() {
  return BehaviorConstraints{Intention::KeepVelocity, 4.0, 2.0, 0.0, 0.5};
}

// Agent with a straight constant-velocity history ending at `position`.
AgentState movingAgent(const Engine& engine, int id, AgentType type, const Vec2& position,
                       const Vec2& velocity) {
  AgentState a = engine.makeAgent(id, type);
  a.position = position;
  a.velocity = velocity;
  a.heading = velocity.norm() > 1e-9 ? std::atan2(velocity.y(), velocity.x()) : 0.0;
  const double dt = engine.config().dt;
  for (long f = -2; f <= 0; ++f) a.history.push(f, position + static_cast<double>(f) * dt * velocity);
  return a;
}

// Jacobi commit mirroring the engine's contract, for tests that need the
// intermediate footprints and velocities.
void commitStep(WorldState& world, const std::vector<StepResult>& results) {
  for (size_t i = 0; i < world.agents.size(); ++i) {
    AgentState& agent = world.agents[i];
    agent.position = results[i].pose.position;
    agent.heading = results[i].pose.heading;
    agent.velocity = results[i].velocity;
    agent.history.push(agent.history.frame(agent.history.size() - 1) + 1, agent.position);
  }
}

}  // namespace

TEST_CASE("a lone holonomic agent keeps its preferred velocity") {
  Engine engine = testEngine();
  WorldState world;
  world.agents.push_back(movingAgent(engine, 0, AgentType::Pedestrian, {0, 0}, {1.0, 0.0}));

  StepResult r = engine.stepAgent(world, 0, passiveBehavior());
  CHECK(r.feasible);
  CHECK((r.velocity - Vec2(1.0, 0.0)).norm() <= 1e-12);
  CHECK((r.pose.position - Vec2(0.4, 0.0)).norm() <= 1e-12);
}

TEST_CASE("head-on pedestrians produce mirror-image velocities and never overlap") {
  Engine engine = testEngine();
  WorldState world;
  world.tau = 4.0;
  world.agents.push_back(movingAgent(engine, 0, AgentType::Pedestrian, {-2, 0}, {1.0, 0.0}));
  world.agents.push_back(movingAgent(engine, 1, AgentType::Pedestrian, {2, 0}, {-1.0, 0.0}));
  for (AgentState& a : world.agents) a.posterior = BehaviorPosterior({passiveBehavior()});

  StepResult ra = engine.stepAgent(world, 0, passiveBehavior());
  StepResult rb = engine.stepAgent(world, 1, passiveBehavior());
  CHECK((ra.velocity + rb.velocity).norm() <= 1e-9);  // 180-degree rotational symmetry
  CHECK(ra.velocity.norm() > 0.0);

  // Roll the pair forward over tau; committed footprints must never overlap.
  const int steps = static_cast<int>(std::ceil(world.tau / world.dt));
  for (int s = 0; s < steps; ++s) {
    std::vector<StepResult> results;
    for (size_t i = 0; i < world.agents.size(); ++i) {
      results.push_back(engine.stepAgent(world, static_cast<int>(i), passiveBehavior()));
    }
    commitStep(world, results);
    const ConvexPolygon fa =
        world.agents[0].footprint.transformed(world.agents[0].position, world.agents[0].heading);
    const ConvexPolygon fb =
        world.agents[1].footprint.transformed(world.agents[1].position, world.agents[1].heading);
    CHECK_FALSE(polygonsIntersect(fa, fb));
  }
  // And they actually made progress past each other.
  CHECK(world.agents[0].position.x() > -1.0);
  CHECK(world.agents[1].position.x() < 1.0);
}

TEST_CASE("sideways demands bind the car's trackable set and respect curvature") {
  Engine engine = testEngine();
  WorldState world;
  world.agents.push_back(movingAgent(engine, 0, AgentType::Car, {0, 0}, {3.0, 0.0}));

  Engine::StepContext ctx = engine.buildContext(world, 0);
  StepResult r = engine.stepFromContext(world, ctx, passiveBehavior(), Vec2(0.0, 3.0));
  CHECK(r.feasible);
  // The optimum sits on the trackable-set boundary.
  CHECK(ctx.kinematic_polygon.contains(r.velocity, 1e-7));
  CHECK((ctx.kinematic_polygon.closestBoundaryPoint(r.velocity) - r.velocity).norm() <= 1e-6);

  // Curvature bound along the tracked arc.
  const KinematicProfile& car = engine.profile(AgentType::Car);
  const CarLikeModel& m = std::get<CarLikeModel>(car.model);
  const Pose start{world.agents[0].position, world.agents[0].heading,
                   world.agents[0].velocity.norm()};
  TrackResult tr = trackVelocity(car, start, r.velocity, 0.4, 0.1);
  for (size_t i = 1; i < tr.trajectory.size(); ++i) {
    const double dtheta = std::abs(tr.trajectory[i].heading - tr.trajectory[i - 1].heading);
    const double ds = (tr.trajectory[i].position - tr.trajectory[i - 1].position).norm();
    if (ds > 1e-9) {
      CHECK(dtheta / ds <= std::tan(m.max_steer) / m.wheelbase + 1e-6);
    }
  }
}

TEST_CASE("prediction of distant straight walkers is exact constant-velocity extrapolation") {
  Engine engine = testEngine();
  WorldState world;
  world.agents.push_back(movingAgent(engine, 0, AgentType::Pedestrian, {0, 0}, {1.0, 0.0}));
  world.agents.push_back(movingAgent(engine, 1, AgentType::Pedestrian, {100, 50}, {-1.0, 0.2}));
  world.agents.push_back(movingAgent(engine, 2, AgentType::Pedestrian, {-80, 90}, {0.0, -1.2}));

  const auto pred = engine.predict(world, 12);
  REQUIRE(pred.size() == 3);
  for (const AgentState& a : world.agents) {
    const std::vector<Vec2>& track = pred.at(a.id);
    REQUIRE(track.size() == 12);
    for (int k = 0; k < 12; ++k) {
      const Vec2 expect = a.position + (k + 1) * world.dt * a.velocity;
      CHECK((track[static_cast<size_t>(k)] - expect).norm() <= 1e-9);
    }
  }
}

TEST_CASE("predict equals a manual Jacobi rollout and keeps approaching agents apart") {
  Engine engine = testEngine();
  WorldState world;
  world.agents.push_back(movingAgent(engine, 0, AgentType::Pedestrian, {-3, 0.05}, {1.2, 0.0}));
  world.agents.push_back(movingAgent(engine, 1, AgentType::Pedestrian, {3, -0.05}, {-1.2, 0.0}));
  for (AgentState& a : world.agents) a.posterior = BehaviorPosterior({passiveBehavior()});

  const auto pred = engine.predict(world, 12);

  WorldState manual = world;
  for (int s = 0; s < 12; ++s) {
    std::vector<StepResult> results;
    for (size_t i = 0; i < manual.agents.size(); ++i) {
      results.push_back(
          engine.stepAgent(manual, static_cast<int>(i), manual.agents[i].posterior.map()));
    }
    commitStep(manual, results);
    for (size_t i = 0; i < manual.agents.size(); ++i) {
      CHECK((manual.agents[i].position - pred.at(manual.agents[i].id)[static_cast<size_t>(s)])
                .norm() <= 1e-12);
    }
    const ConvexPolygon fa = manual.agents[0].footprint.transformed(manual.agents[0].position,
                                                                    manual.agents[0].heading);
    const ConvexPolygon fb = manual.agents[1].footprint.transformed(manual.agents[1].position,
                                                                    manual.agents[1].heading);
    CHECK_FALSE(polygonsIntersect(fa, fb));
  }
}

TEST_CASE("committed velocities stay inside the world-frame trackable set") {
  Engine engine = testEngine();
  WorldState world;
  world.agents.push_back(movingAgent(engine, 0, AgentType::Car, {-12, 0.3}, {6.0, 0.0}));
  world.agents.push_back(movingAgent(engine, 1, AgentType::Car, {12, -0.3}, {-6.0, 0.0}));
  world.agents.push_back(movingAgent(engine, 2, AgentType::Pedestrian, {0, -6}, {0.0, 1.0}));
  for (AgentState& a : world.agents) a.posterior = BehaviorPosterior({passiveBehavior()});

  for (int s = 0; s < 25; ++s) {
    std::vector<StepResult> results;
    for (size_t i = 0; i < world.agents.size(); ++i) {
      results.push_back(engine.stepAgent(world, static_cast<int>(i), passiveBehavior()));
    }
    for (size_t i = 0; i < world.agents.size(); ++i) {
      const AgentState& a = world.agents[i];
      const ConvexPolygon k =
          engine.profile(a.type).trackable_set->transformed(Vec2(0, 0), a.heading);
      CHECK(k.contains(results[i].velocity, 1e-6));
    }
    commitStep(world, results);
  }
}

TEST_CASE("obstacles in the exemption ring constrain even tiny attention radii") {
  Engine engine = testEngine();
  WorldState world;
  world.obstacles.push_back(ConvexPolygon({{0.45, -2}, {1.45, -2}, {1.45, 2}, {0.45, 2}}));
  world.agents.push_back(movingAgent(engine, 0, AgentType::Pedestrian, {0, 0}, {1.0, 0.0}));

  // Attention radius far too small to see the wall; the exemption ring keeps
  // the constraint alive because the wall sits within 1.5 circumradii.
  BehaviorConstraints blind{Intention::KeepVelocity, 0.2, 0.1, 0.0, 0.5};
  StepResult r = engine.stepAgent(world, 0, blind);
  CHECK(r.velocity.x() < 1.0 - 1e-6);

  // Outside the ring and outside the radius: unconstrained.
  world.agents[0].position = Vec2(-1.0, 0.0);
  world.agents[0].history = AgentHistory(engine.config().dt);
  for (long f = -2; f <= 0; ++f) {
    world.agents[0].history.push(f, Vec2(-1.0, 0.0) + static_cast<double>(f) * 0.4 * Vec2(1, 0));
  }
  StepResult free = engine.stepAgent(world, 0, blind);
  CHECK((free.velocity - Vec2(1.0, 0.0)).norm() <= 1e-12);
}

TEST_CASE("simulate: empty scenario, straight line, and seeded determinism") {
  Engine engine = testEngine();

  Scenario empty;
  CHECK(engine.simulate(empty, 5, 1).frames.empty());

  Scenario one;
  one.noise_sigma = 0.0;
  ScenarioAgent a;
  a.type = AgentType::Pedestrian;
  a.position = Vec2(1, 2);
  a.heading = 0.0;
  a.speed = 1.0;
  a.behavior = passiveBehavior();
  one.agents.push_back(a);
  TrajectoryDataset straight = engine.simulate(one, 10, 1);
  REQUIRE(straight.frames.size() == 11);
  for (const auto& [frame, rows] : straight.frames) {
    REQUIRE(rows.size() == 1);
    const Vec2 expect(1.0 + 0.4 * static_cast<double>(frame), 2.0);
    CHECK((rows[0].position - expect).norm() <= 1e-9);
  }

  Scenario crossing;
  crossing.noise_sigma = 0.05;
  ScenarioAgent b = a;
  b.position = Vec2(5, -5);
  b.heading = M_PI / 2;
  b.speed = 1.2;
  crossing.agents.push_back(a);
  crossing.agents.push_back(b);

  std::ostringstream s1, s2, s3;
  writeHeterogeneous(engine.simulate(crossing, 20, 7), s1);
  writeHeterogeneous(engine.simulate(crossing, 20, 7), s2);
  writeHeterogeneous(engine.simulate(crossing, 20, 9), s3);
  CHECK(s1.str() == s2.str());
  CHECK(s1.str() != s3.str());
  CHECK(!s1.str().empty());
}

TEST_CASE("scenario files parse and validate") {
  std::stringstream in(
      "# two agents and a wall\n"
      "dt 0.4\n"
      "tau 3.0\n"
      "noise_sigma 0.02\n"
      "seed 11\n"
      "OBSTACLE\n"
      "2 2\n3 2\n3 3\n2 3\n"
      "END\n"
      "AGENT\n"
      "type car\n"
      "position 0 0\n"
      "heading 0.1\n"
      "speed 4\n"
      "behavior keep_acceleration 8 2 0.05 0.3\n"
      "footprint 4.2 1.7\n"
      "END\n"
      "AGENT\n"
      "type pedestrian\n"
      "position 10 0\n"
      "behavior keep_velocity 4 2 0 0.5\n"
      "END\n");
  Scenario sc = parseScenario(in);
  CHECK(sc.dt == 0.4);
  CHECK(sc.tau == 3.0);
  CHECK(sc.noise_sigma == 0.02);
  CHECK(sc.seed == 11);
  REQUIRE(sc.obstacles.size() == 1);
  REQUIRE(sc.agents.size() == 2);
  CHECK(sc.agents[0].behavior.intention == Intention::KeepAcceleration);
  CHECK(sc.agents[0].footprint_dims->first == 4.2);
  CHECK(sc.agents[1].speed == 0.0);

  std::stringstream bad("AGENT\ntype car\nEND\n");
  CHECK_THROWS_AS(parseScenario(bad), EngineError);
  std::stringstream garbage("WALL\n1 2\n");
  CHECK_THROWS_AS(parseScenario(garbage), EngineError);
}

TEST_CASE("filtering is deterministic and updates only observed agents") {
  Engine engine = testEngine();
  WorldState world;
  world.agents.push_back(movingAgent(engine, 0, AgentType::Pedestrian, {-2, 0}, {1.0, 0.0}));
  world.agents.push_back(movingAgent(engine, 1, AgentType::Pedestrian, {2, 0.3}, {-1.0, 0.0}));

  WorldState twin = world;
  const std::map<int, Vec2> obs{{0, Vec2(-1.6, 0.02)}};
  engine.filterUpdate(world, obs);
  engine.filterUpdate(twin, obs);
  CHECK((world.agents[0].posterior.weights() - twin.agents[0].posterior.weights()).norm() == 0.0);
  // Agent 1 had no observation: untouched uniform posterior.
  const Eigen::VectorXd w1 = world.agents[1].posterior.weights();
  CHECK((w1.array() - w1[0]).abs().maxCoeff() <= 1e-15);
}

TEST_CASE("engine reports missing profiles and unknown agents") {
  ProfileMap only_ped;
  only_ped[AgentType::Pedestrian] = testProfiles().at(AgentType::Pedestrian);
  Engine engine(EngineConfig{}, only_ped);
  CHECK_THROWS_AS(engine.profile(AgentType::Bus), EngineError);

  WorldState world;
  world.agents.push_back(movingAgent(engine, 3, AgentType::Pedestrian, {0, 0}, {1, 0}));
  CHECK_THROWS_AS(engine.stepAgent(world, 99, passiveBehavior()), EngineError);

  ProfileMap no_set = only_ped;
  no_set[AgentType::Pedestrian].trackable_set.reset();
  Engine broken(EngineConfig{}, no_set);
  WorldState w2;
  w2.agents.push_back(movingAgent(broken, 0, AgentType::Pedestrian, {0, 0}, {1, 0}));
  CHECK_THROWS_AS(broken.stepAgent(w2, 0, passiveBehavior()), EngineError);
}

TEST_CASE("kinematics ablation swaps trackable sets for speed discs") {
  EngineConfig cfg;
  cfg.use_kinematics = false;
  Engine engine = testEngine(cfg);
  WorldState world;
  world.agents.push_back(movingAgent(engine, 0, AgentType::Car, {0, 0}, {3.0, 0.0}));
  Engine::StepContext ctx = engine.buildContext(world, 0);
  // The disc admits sideways motion the car's trackable set would reject.
  StepResult r = engine.stepFromContext(world, ctx, passiveBehavior(), Vec2(0.0, 3.0));
  CHECK((r.velocity - Vec2(0.0, 3.0)).norm() <= 1e-9);
}

TEST_CASE("polygon ablation swaps rectangles for bounding discs") {
  EngineConfig cfg;
  cfg.use_polygons = false;
  Engine with_discs = testEngine(cfg);
  Engine with_rects = testEngine();
  AgentState disc = with_discs.makeAgent(0, AgentType::Car);
  AgentState rect = with_rects.makeAgent(0, AgentType::Car);
  CHECK(disc.footprint.size() == 16);
  CHECK(rect.footprint.size() == 4);
  CHECK(disc.footprint.circumradius() == doctest::Approx(rect.footprint.circumradius()));
  // The disc is wider than the rectangle across the body.
  CHECK(disc.footprint.contains({0.0, 2.0}));
  CHECK_FALSE(rect.footprint.contains({0.0, 2.0}));
}
