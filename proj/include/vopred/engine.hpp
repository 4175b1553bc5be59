#pragma once

#include "vopred/behavior.hpp"
#include "vopred/config.hpp"
#include "vopred/datasets.hpp"
#include "vopred/geometry.hpp"
#include "vopred/kinematics.hpp"
#include "vopred/lp.hpp"

#include <map>
#include <random>

namespace vopred {

class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Default footprint (length, width) per agent type, meters.
std::pair<double, double> defaultFootprintDims(AgentType type);

struct AgentState {
  AgentState(int id, AgentType type, ConvexPolygon footprint, BehaviorPosterior posterior,
             double frame_period)
      : id(id),
        type(type),
        footprint(std::move(footprint)),
        posterior(std::move(posterior)),
        history(frame_period) {}

  int id;
  AgentType type;
  Vec2 position{0.0, 0.0};
  Vec2 velocity{0.0, 0.0};  // current = optimization velocity
  double heading = 0.0;
  ConvexPolygon footprint;  // body frame
  BehaviorPosterior posterior;
  AgentHistory history;
};

struct WorldState {
  std::vector<AgentState> agents;
  std::vector<ConvexPolygon> obstacles;
  double dt = 0.4;
  double tau = 4.0;
  int t_pred_steps = 12;

  int indexOf(int agent_id) const;  // -1 when absent
};

struct StepResult {
  Vec2 velocity;  // committed velocity (inside the trackable set)
  Pose pose;      // controller pose after one dt
  bool feasible = true;
};

// Forward-simulation scenario: obstacles, agents with ground-truth behavior
// tuples, position noise and a seed.
struct ScenarioAgent {
  AgentType type = AgentType::Pedestrian;
  Vec2 position{0.0, 0.0};
  double heading = 0.0;
  double speed = 0.0;
  BehaviorConstraints behavior;
  std::optional<std::pair<double, double>> footprint_dims;
};

struct Scenario {
  double dt = 0.4;
  double tau = 4.0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;
  std::vector<ConvexPolygon> obstacles;
  std::vector<ScenarioAgent> agents;
};

Scenario parseScenario(std::istream& in);
Scenario loadScenario(const std::string& path);

class Engine {
 public:
  Engine(EngineConfig config, ProfileMap profiles);

  const EngineConfig& config() const { return config_; }
  const ProfileMap& profiles() const { return profiles_; }
  const KinematicProfile& profile(AgentType type) const;

  // Agent with the type's candidate grid and footprint (explicit dims or the
  // type default; bounding disc under the polygon ablation).
  AgentState makeAgent(int id, AgentType type,
                       std::optional<std::pair<double, double>> dims = std::nullopt) const;

  // Everything about one agent's neighbors that does not depend on its own
  // behavior hypothesis; built once per agent per step and shared across the
  // candidate set during filtering.
  struct NeighborTerm {
    double attention_dist;   // self position to the other footprint
    bool frontal;            // closest point in the heading half-plane
    double sort_dist;        // center distance (constraint order)
    double footprint_dist;   // footprint gap, drives the responsibility law
    Vec2 u;                  // correction vector of the pair construction
    Vec2 normal;
    Vec2 v_opt_other;
    double alpha_other_raw;  // other agent's responsibility at this distance
    bool obstacle;           // static obstacles take no responsibility
  };
  struct StepContext {
    explicit StepContext(ConvexPolygon kinematic)
        : kinematic_polygon(std::move(kinematic)) {}

    int agent_index = -1;
    Vec2 v_opt{0.0, 0.0};
    double obstacle_exempt_radius = 0.0;
    std::vector<NeighborTerm> terms;
    ConvexPolygon kinematic_polygon;  // world frame, ablation-resolved
  };

  StepContext buildContext(const WorldState& world, int agent_index) const;
  StepResult stepFromContext(const WorldState& world, const StepContext& context,
                             const BehaviorConstraints& behavior, const Vec2& v_pref) const;

  // One velocity-selection step for an agent under a fixed behavior tuple.
  StepResult stepAgent(const WorldState& world, int agent_id,
                       const BehaviorConstraints& behavior) const;

  // Joint rollout: every step all agents are computed against the same
  // snapshot and committed together; each agent keeps its MAP behavior for
  // the whole horizon. `reference_offsets` perturbs the intention reference
  // position per agent (the sampling mode).
  std::map<int, std::vector<Vec2>> predict(
      const WorldState& world, int horizon_steps,
      const std::map<int, Vec2>* reference_offsets = nullptr) const;

  // One Bayes update per agent from its observed next position. Candidate
  // predictions start from the agent's current (observed) state; all other
  // agents stay on their observed motion.
  void filterUpdate(WorldState& world, const std::map<int, Vec2>& observed_next) const;

  // Forward-simulate a scenario with ground-truth behaviors and optional
  // Gaussian position noise; emits the heterogeneous dataset format.
  TrajectoryDataset simulate(const Scenario& scenario, int n_steps, std::uint64_t seed) const;

 private:
  Vec2 intentionTarget(const AgentState& agent, Intention intention,
                       const Vec2* reference_offset) const;
  ConvexPolygon worldFootprint(const AgentState& agent) const;

  EngineConfig config_;
  ProfileMap profiles_;
};

}  // namespace vopred
