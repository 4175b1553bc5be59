#pragma once

#include "vopred/geometry.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace vopred {

class KinematicsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AgentType {
  Pedestrian,
  Bicycle,
  Motorbike,
  Car,
  Van,
  Bus,
  GyroScooter,
  Truck,
  StaticObstacle,
};

std::string agentTypeName(AgentType type);
std::optional<AgentType> parseAgentType(const std::string& name);
std::vector<AgentType> allAgentTypes();

// Omnidirectional motion with a speed cap and optional acceleration limit.
struct HolonomicModel {
  double s_max = 0.0;
  double a_max = std::numeric_limits<double>::infinity();
};

// Kinematic bicycle tracked by pure pursuit (lookahead = wheelbase).
struct CarLikeModel {
  double wheelbase = 0.0;
  double max_steer = 0.0;
  double s_max = 0.0;
  double a_max = 0.0;
};

using KinematicModel = std::variant<HolonomicModel, CarLikeModel>;

struct KinematicProfile {
  AgentType type = AgentType::Pedestrian;
  KinematicModel model;
  // Trackable velocity set in the body frame (heading along +x); estimated
  // offline and absent until then.
  std::optional<ConvexPolygon> trackable_set;
  double epsilon_max = 0.5;
  double tau = 1.0;

  double maxSpeed() const;
  bool holonomic() const { return std::holds_alternative<HolonomicModel>(model); }
};

struct Pose {
  Vec2 position{0.0, 0.0};
  double heading = 0.0;
  double speed = 0.0;

  Vec2 velocity() const { return speed * Vec2(std::cos(heading), std::sin(heading)); }
};

struct TrackResult {
  std::vector<Pose> trajectory;  // poses at 0, dt, 2dt, ..., duration
  double max_error = 0.0;        // max_t | t*target - (f(t) - p0) |
};

// Simulate the type's low-level controller following `target_v` (world frame)
// for `duration` seconds at integration step `dt`.
TrackResult trackVelocity(const KinematicProfile& profile, const Pose& start,
                          const Vec2& target_v, double duration, double dt);

// Speed/deviation lattice for the offline trackable-set estimation. The
// deviation angles cover [0, phi_max]; estimation mirrors them across the
// body x axis.
struct DiscretizationGrid {
  std::vector<double> speeds;
  std::vector<double> deviations;

  static DiscretizationGrid make(double delta_s, double s_max, double delta_phi, double phi_max);
};

DiscretizationGrid defaultGrid(const KinematicModel& model);

// For each deviation angle, the fastest tracked velocity with error within
// epsilon_max; the hull of those boundary velocities is the trackable set.
// Raises KinematicsError when fewer than three non-collinear boundary points
// exist (for example a zero-speed profile).
ConvexPolygon estimateTrackableSet(const KinematicProfile& profile,
                                   const DiscretizationGrid& grid, double sim_dt = 0.01);

using ProfileMap = std::map<AgentType, KinematicProfile>;

// Text round trip. One block per profile: `type`, `model`, model parameters,
// `epsilon_max`, `tau`, then an optional `K:` section of body-frame `x y`
// vertex lines. See the repository README for the grammar.
ProfileMap parseProfiles(std::istream& in);
void writeProfiles(const ProfileMap& profiles, std::ostream& out);
ProfileMap loadProfiles(const std::string& path);
void saveProfiles(const ProfileMap& profiles, const std::string& path);

}  // namespace vopred
