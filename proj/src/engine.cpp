#include "vopred/engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace vopred {

namespace {

constexpr int kControllerSubsteps = 4;
constexpr int kDiscVertices = 16;       // footprint ablation
constexpr int kTrackableDiscVertices = 32;  // kinematics ablation

}  // namespace

std::pair<double, double> defaultFootprintDims(AgentType type) {
  switch (type) {
    case AgentType::Pedestrian: return {0.5, 0.5};
    case AgentType::Bicycle: return {1.8, 0.6};
    case AgentType::Motorbike: return {2.0, 0.8};
    case AgentType::Car: return {4.5, 1.8};
    case AgentType::Van: return {5.0, 2.0};
    case AgentType::Bus: return {11.0, 2.5};
    case AgentType::GyroScooter: return {0.6, 0.6};
    case AgentType::Truck: return {8.0, 2.5};
    case AgentType::StaticObstacle: return {1.0, 1.0};
  }
  return {1.0, 1.0};
}

int WorldState::indexOf(int agent_id) const {
  for (size_t i = 0; i < agents.size(); ++i) {
    if (agents[i].id == agent_id) return static_cast<int>(i);
  }
  return -1;
}

Engine::Engine(EngineConfig config, ProfileMap profiles)
    : config_(std::move(config)), profiles_(std::move(profiles)) {}

const KinematicProfile& Engine::profile(AgentType type) const {
  const auto it = profiles_.find(type);
  if (it == profiles_.end()) {
    throw EngineError("no kinematic profile for agent type '" + agentTypeName(type) + "'");
  }
  return it->second;
}

AgentState Engine::makeAgent(int id, AgentType type,
                             std::optional<std::pair<double, double>> dims) const {
  const auto [length, width] = dims.value_or(defaultFootprintDims(type));
  ConvexPolygon footprint = ConvexPolygon::rectangle(length, width);
  if (!config_.use_polygons) {
    footprint = ConvexPolygon::regular(kDiscVertices, footprint.circumradius());
  }
  return AgentState(id, type, std::move(footprint),
                    BehaviorPosterior(candidateGrid(config_, type)), config_.dt);
}

ConvexPolygon Engine::worldFootprint(const AgentState& agent) const {
  return agent.footprint.transformed(agent.position, agent.heading);
}

Vec2 Engine::intentionTarget(const AgentState& agent, Intention intention,
                             const Vec2* reference_offset) const {
  if (agent.history.size() < 2) return Vec2(0.0, 0.0);
  const double speed = agent.history.velocity().norm();
  if (speed < 1e-12) return Vec2(0.0, 0.0);

  Vec2 reference = intentionReference(agent.history, intention, config_.predictionHorizon());
  if (reference_offset != nullptr) reference += *reference_offset;
  const Vec2 offset = reference - agent.history.currentPosition();
  const double len = offset.norm();
  if (len < 1e-12) return Vec2(0.0, 0.0);
  return speed / len * offset;
}

Engine::StepContext Engine::buildContext(const WorldState& world, int agent_index) const {
  const AgentState& self = world.agents[static_cast<size_t>(agent_index)];
  const KinematicProfile& prof = profile(self.type);

  if (config_.use_kinematics && !prof.trackable_set) {
    throw EngineError("profile for '" + agentTypeName(self.type) +
                      "' has no trackable set; run estimate-kinematics first");
  }
  StepContext ctx(config_.use_kinematics
                      ? prof.trackable_set->transformed(Vec2(0.0, 0.0), self.heading)
                      : ConvexPolygon::regular(kTrackableDiscVertices, prof.maxSpeed()));
  ctx.agent_index = agent_index;
  ctx.v_opt = self.velocity;
  ctx.obstacle_exempt_radius = 1.5 * self.footprint.circumradius();

  const ConvexPolygon self_world = worldFootprint(self);
  const Vec2 heading_dir(std::cos(self.heading), std::sin(self.heading));

  auto addTerm = [&](const ConvexPolygon& other_world, const Vec2& v_opt_other,
                     double alpha_other_raw, bool obstacle, const Vec2& center) {
    NeighborTerm term;
    const Vec2 cp = other_world.closestPoint(self.position);
    term.attention_dist = (cp - self.position).norm();
    term.frontal = heading_dir.dot(cp - self.position) >= 0.0;
    term.sort_dist = (center - self.position).norm();
    const ConvexPolygon rel = minkowskiDifference(other_world, self_world);
    term.footprint_dist = rel.distance(Vec2(0.0, 0.0));
    const PairTerm pt = pairTerm(rel, ctx.v_opt - v_opt_other, world.tau, world.dt);
    term.u = pt.u;
    term.normal = pt.normal;
    term.v_opt_other = v_opt_other;
    term.alpha_other_raw = alpha_other_raw;
    term.obstacle = obstacle;
    ctx.terms.push_back(std::move(term));
  };

  for (size_t j = 0; j < world.agents.size(); ++j) {
    if (static_cast<int>(j) == agent_index) continue;
    const AgentState& other = world.agents[j];
    const ConvexPolygon other_world = worldFootprint(other);
    if (other.type == AgentType::StaticObstacle) {
      addTerm(other_world, Vec2(0.0, 0.0), 0.0, true, other.position);
      continue;
    }
    const BehaviorConstraints& other_map = other.posterior.map();
    const double d = polygonDistance(other_world, self_world);
    addTerm(other_world, other.velocity, responsibility(d, other_map.c1, other_map.c2), false,
            other.position);
  }
  for (const ConvexPolygon& obstacle : world.obstacles) {
    addTerm(obstacle, Vec2(0.0, 0.0), 0.0, true, obstacle.centroid());
  }

  std::stable_sort(ctx.terms.begin(), ctx.terms.end(),
                   [](const NeighborTerm& a, const NeighborTerm& b) {
                     return a.sort_dist < b.sort_dist;
                   });
  return ctx;
}

StepResult Engine::stepFromContext(const WorldState& world, const StepContext& context,
                                   const BehaviorConstraints& behavior,
                                   const Vec2& v_pref) const {
  const AgentState& self = world.agents[static_cast<size_t>(context.agent_index)];

  VelocityProgram program{v_pref, {}, context.kinematic_polygon};
  program.half_planes.reserve(context.terms.size());
  for (const NeighborTerm& term : context.terms) {
    const double radius = term.frontal ? behavior.r_front : behavior.r_rear;
    bool attended = term.attention_dist <= radius;
    if (term.obstacle && term.attention_dist <= context.obstacle_exempt_radius) attended = true;
    if (!attended) continue;

    double alpha = 1.0;  // obstacles never absorb any correction
    if (!term.obstacle) {
      const double alpha_self = responsibility(term.footprint_dist, behavior.c1, behavior.c2);
      alpha = normalizePair(alpha_self, term.alpha_other_raw).first;
    }
    program.half_planes.push_back(HalfPlane{context.v_opt + alpha * term.u, term.normal});
  }

  const LpResult lp = solve(program);

  const KinematicProfile& prof = profile(self.type);
  const Pose start{self.position, self.heading, self.velocity.norm()};
  TrackResult tracked;
  if (config_.use_kinematics) {
    tracked = trackVelocity(prof, start, lp.velocity, world.dt, world.dt / kControllerSubsteps);
  } else {
    // The kinematics ablation treats every agent as holonomic.
    KinematicProfile holo;
    holo.type = self.type;
    holo.model = HolonomicModel{prof.maxSpeed()};
    tracked = trackVelocity(holo, start, lp.velocity, world.dt, world.dt / kControllerSubsteps);
  }
  return StepResult{lp.velocity, tracked.trajectory.back(), lp.feasible};
}

StepResult Engine::stepAgent(const WorldState& world, int agent_id,
                             const BehaviorConstraints& behavior) const {
  const int index = world.indexOf(agent_id);
  if (index < 0) throw EngineError("unknown agent id " + std::to_string(agent_id));
  const AgentState& agent = world.agents[static_cast<size_t>(index)];
  if (agent.type == AgentType::StaticObstacle) {
    return StepResult{Vec2(0.0, 0.0), Pose{agent.position, agent.heading, 0.0}, true};
  }
  const Vec2 v_pref = intentionTarget(agent, behavior.intention, nullptr);
  return stepFromContext(world, buildContext(world, index), behavior, v_pref);
}

std::map<int, std::vector<Vec2>> Engine::predict(
    const WorldState& world, int horizon_steps,
    const std::map<int, Vec2>* reference_offsets) const {
  WorldState w = world;

  // Behaviors freeze at the MAP tuple for the whole horizon.
  std::vector<BehaviorConstraints> frozen;
  frozen.reserve(w.agents.size());
  for (const AgentState& a : w.agents) frozen.push_back(a.posterior.map());

  std::map<int, std::vector<Vec2>> out;
  for (const AgentState& a : w.agents) out.emplace(a.id, std::vector<Vec2>{});

  for (int step = 0; step < horizon_steps; ++step) {
    std::vector<StepResult> results(w.agents.size());
    for (size_t i = 0; i < w.agents.size(); ++i) {
      const AgentState& agent = w.agents[i];
      if (agent.type == AgentType::StaticObstacle) {
        results[i] = StepResult{Vec2(0.0, 0.0), Pose{agent.position, agent.heading, 0.0}, true};
        continue;
      }
      const Vec2* offset = nullptr;
      if (reference_offsets != nullptr) {
        const auto it = reference_offsets->find(agent.id);
        if (it != reference_offsets->end()) offset = &it->second;
      }
      const Vec2 v_pref = intentionTarget(agent, frozen[i].intention, offset);
      results[i] = stepFromContext(w, buildContext(w, static_cast<int>(i)), frozen[i], v_pref);
    }
    // Jacobi commit: everyone moves only after everyone has decided.
    for (size_t i = 0; i < w.agents.size(); ++i) {
      AgentState& agent = w.agents[i];
      agent.position = results[i].pose.position;
      agent.heading = results[i].pose.heading;
      agent.velocity = results[i].velocity;
      agent.history.push(agent.history.frame(agent.history.size() - 1) + 1, agent.position);
      out[agent.id].push_back(agent.position);
    }
  }
  return out;
}

void Engine::filterUpdate(WorldState& world, const std::map<int, Vec2>& observed_next) const {
  // Contexts come from the same snapshot for every agent (the update is
  // Jacobi-style: nobody sees a neighbor's same-step posterior change).
  struct Pending {
    size_t agent;
    StepContext context;
  };
  std::vector<Pending> pending;
  for (size_t i = 0; i < world.agents.size(); ++i) {
    const AgentState& agent = world.agents[i];
    if (agent.type == AgentType::StaticObstacle) continue;
    if (agent.history.size() < 2) continue;
    if (observed_next.find(agent.id) == observed_next.end()) continue;
    pending.push_back(Pending{i, buildContext(world, static_cast<int>(i))});
  }
  for (Pending& p : pending) {
    AgentState& agent = world.agents[p.agent];
    const std::vector<BehaviorConstraints>& candidates = agent.posterior.candidates();
    std::vector<Vec2> predictions;
    predictions.reserve(candidates.size());
    for (const BehaviorConstraints& candidate : candidates) {
      const Vec2 v_pref = intentionTarget(agent, candidate.intention, nullptr);
      predictions.push_back(stepFromContext(world, p.context, candidate, v_pref).pose.position);
    }
    bayesUpdate(agent.posterior, predictions, observed_next.at(agent.id), config_.sigma);
  }
}

TrajectoryDataset Engine::simulate(const Scenario& scenario, int n_steps,
                                   std::uint64_t seed) const {
  WorldState w;
  w.dt = scenario.dt;
  w.tau = scenario.tau;
  w.t_pred_steps = config_.t_pred_steps;
  w.obstacles = scenario.obstacles;

  std::vector<std::pair<double, double>> dims;
  for (size_t i = 0; i < scenario.agents.size(); ++i) {
    const ScenarioAgent& sa = scenario.agents[i];
    const auto d = sa.footprint_dims.value_or(defaultFootprintDims(sa.type));
    dims.push_back(d);
    ConvexPolygon footprint = ConvexPolygon::rectangle(d.first, d.second);
    if (!config_.use_polygons) {
      footprint = ConvexPolygon::regular(kDiscVertices, footprint.circumradius());
    }
    // The posterior is the ground truth: a single-candidate distribution.
    AgentState agent(static_cast<int>(i), sa.type, std::move(footprint),
                     BehaviorPosterior({sa.behavior}), scenario.dt);
    agent.position = sa.position;
    agent.heading = sa.heading;
    agent.velocity = sa.speed * Vec2(std::cos(sa.heading), std::sin(sa.heading));
    for (long f = -2; f <= 0; ++f) {
      agent.history.push(f, sa.position + static_cast<double>(f) * scenario.dt * agent.velocity);
    }
    w.agents.push_back(std::move(agent));
  }

  TrajectoryDataset ds;
  ds.frame_period = scenario.dt;
  ds.obstacles = scenario.obstacles;
  auto record = [&](long frame) {
    for (size_t i = 0; i < w.agents.size(); ++i) {
      const AgentState& a = w.agents[i];
      ObservationRow row;
      row.agent_id = a.id;
      row.type = a.type;
      row.position = a.position;
      row.heading = a.heading;
      row.footprint_dims = dims[i];
      ds.frames[frame].push_back(std::move(row));
    }
  };
  record(0);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, scenario.noise_sigma);
  for (int step = 1; step <= n_steps; ++step) {
    std::vector<StepResult> results(w.agents.size());
    for (size_t i = 0; i < w.agents.size(); ++i) {
      const AgentState& agent = w.agents[i];
      if (agent.type == AgentType::StaticObstacle) {
        results[i] = StepResult{Vec2(0.0, 0.0), Pose{agent.position, agent.heading, 0.0}, true};
        continue;
      }
      const Vec2 v_pref = intentionTarget(agent, agent.posterior.map().intention, nullptr);
      results[i] =
          stepFromContext(w, buildContext(w, static_cast<int>(i)), agent.posterior.map(), v_pref);
    }
    for (size_t i = 0; i < w.agents.size(); ++i) {
      AgentState& agent = w.agents[i];
      agent.position = results[i].pose.position;
      if (scenario.noise_sigma > 0.0 && agent.type != AgentType::StaticObstacle) {
        agent.position += Vec2(noise(rng), noise(rng));
      }
      agent.heading = results[i].pose.heading;
      agent.velocity = results[i].velocity;
      agent.history.push(step, agent.position);
    }
    record(step);
  }
  return ds;
}

namespace {

[[noreturn]] void scenarioFail(int line, const std::string& what) {
  throw EngineError("scenario line " + std::to_string(line) + ": " + what);
}

}  // namespace

Scenario parseScenario(std::istream& in) {
  Scenario sc;
  std::string raw;
  int number = 0;
  auto nextContentLine = [&](std::string& out) {
    while (std::getline(in, raw)) {
      ++number;
      const size_t hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      std::istringstream probe(raw);
      std::string tok;
      if (probe >> tok) {
        out = raw;
        return true;
      }
    }
    return false;
  };

  std::string line;
  while (nextContentLine(line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "dt" || key == "tau" || key == "noise_sigma" || key == "seed") {
      double value = 0.0;
      std::string rest;
      if (!(ls >> value) || (ls >> rest)) scenarioFail(number, "expected '" + key + " <number>'");
      if (key == "dt") sc.dt = value;
      if (key == "tau") sc.tau = value;
      if (key == "noise_sigma") sc.noise_sigma = value;
      if (key == "seed") sc.seed = static_cast<std::uint64_t>(value);
    } else if (key == "OBSTACLE") {
      std::vector<Vec2> vertices;
      bool closed = false;
      while (nextContentLine(line)) {
        std::istringstream vs(line);
        std::string tok;
        vs >> tok;
        if (tok == "END") {
          closed = true;
          break;
        }
        double x = 0.0, y = 0.0;
        std::string rest;
        std::istringstream vv(line);
        if (!(vv >> x >> y) || (vv >> rest)) scenarioFail(number, "expected obstacle vertex 'x y'");
        vertices.emplace_back(x, y);
      }
      if (!closed) scenarioFail(number, "obstacle block missing END");
      try {
        sc.obstacles.emplace_back(std::move(vertices));
      } catch (const GeometryError& e) {
        scenarioFail(number, std::string("bad obstacle polygon: ") + e.what());
      }
    } else if (key == "AGENT") {
      ScenarioAgent agent;
      bool closed = false;
      bool has_type = false, has_position = false, has_behavior = false;
      while (nextContentLine(line)) {
        std::istringstream as(line);
        std::string akey;
        as >> akey;
        if (akey == "END") {
          closed = true;
          break;
        }
        std::string rest;
        if (akey == "type") {
          std::string name;
          if (!(as >> name) || (as >> rest)) scenarioFail(number, "expected 'type <agent type>'");
          const std::optional<AgentType> t = parseAgentType(name);
          if (!t) scenarioFail(number, "unknown agent type '" + name + "'");
          agent.type = *t;
          has_type = true;
        } else if (akey == "position") {
          double x = 0.0, y = 0.0;
          if (!(as >> x >> y) || (as >> rest)) scenarioFail(number, "expected 'position x y'");
          agent.position = Vec2(x, y);
          has_position = true;
        } else if (akey == "heading") {
          if (!(as >> agent.heading) || (as >> rest)) scenarioFail(number, "expected 'heading <rad>'");
        } else if (akey == "speed") {
          if (!(as >> agent.speed) || (as >> rest)) scenarioFail(number, "expected 'speed <m/s>'");
        } else if (akey == "behavior") {
          std::string intent;
          BehaviorConstraints b;
          if (!(as >> intent >> b.r_front >> b.r_rear >> b.c1 >> b.c2) || (as >> rest)) {
            scenarioFail(number, "expected 'behavior <intention> r_front r_rear c1 c2'");
          }
          const std::optional<Intention> i = parseIntention(intent);
          if (!i) scenarioFail(number, "unknown intention '" + intent + "'");
          b.intention = *i;
          agent.behavior = b;
          has_behavior = true;
        } else if (akey == "footprint") {
          double l = 0.0, w = 0.0;
          if (!(as >> l >> w) || (as >> rest)) scenarioFail(number, "expected 'footprint length width'");
          agent.footprint_dims = std::make_pair(l, w);
        } else {
          scenarioFail(number, "unknown agent field '" + akey + "'");
        }
      }
      if (!closed) scenarioFail(number, "agent block missing END");
      if (!has_type || !has_position || !has_behavior) {
        scenarioFail(number, "agent block needs at least type, position and behavior");
      }
      sc.agents.push_back(std::move(agent));
    } else {
      scenarioFail(number, "unknown directive '" + key + "'");
    }
  }
  return sc;
}

Scenario loadScenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EngineError("cannot open scenario file: " + path);
  return parseScenario(in);
}

}  // namespace vopred
