#pragma once

#include "vopred/behavior.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace vopred {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Engine-wide knobs. Defaults reproduce the full model; the five ablation
// flags each disable exactly one ingredient while holding the rest fixed.
struct EngineConfig {
  double dt = 0.4;        // step and frame period, s
  double tau = 4.0;       // collision-avoidance horizon, s
  int t_pred_steps = 12;  // prediction horizon in steps (4.8 s)
  int t_hist = 8;         // observed frames per evaluation window
  double sigma = 0.1;     // observation noise for behavior filtering, m
  double sigma_s = 0.5;   // reference-position noise of the sampling mode, m
  int best_of_n = 20;

  bool use_kinematics = true;       // off: trackable sets become speed discs
  bool use_polygons = true;         // off: footprints become bounding discs
  bool infer_intention = true;      // off: keep-velocity only
  bool infer_attention = true;      // off: unbounded attention radii
  bool infer_responsibility = true; // off: fixed 0.5 split

  std::vector<double> r_front_values{2.0, 4.0, 8.0};
  std::vector<double> r_rear_values{1.0, 2.0};
  std::vector<double> c1_values{-0.05, 0.0, 0.05};
  std::vector<double> c2_pedestrian{0.5, 0.7};
  std::vector<double> c2_vehicle{0.3, 0.5};

  std::string profiles_path;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = hardware concurrency

  double predictionHorizon() const { return t_pred_steps * dt; }
};

// `key value` per line; '#' starts a comment. Unknown keys are errors.
EngineConfig loadEngineConfig(const std::string& path);
EngineConfig parseEngineConfig(std::istream& in);

// Apply one `key value` override (the file syntax and CLI flags share this).
void applyConfigOverride(EngineConfig& cfg, const std::string& key, const std::string& value);

// Disable one named factor: kinematics, polygons, intention, attention or
// responsibility.
void applyAblation(EngineConfig& cfg, const std::string& factor);

// Candidate grid for one agent type under the config's inference flags
// (collapsed along ablated factors). Pedestrian-like types draw the initial
// responsibility from c2_pedestrian, vehicle types from c2_vehicle.
std::vector<BehaviorConstraints> candidateGrid(const EngineConfig& cfg, AgentType type);

}  // namespace vopred
