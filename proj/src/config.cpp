#include "vopred/config.hpp"

#include <fstream>
#include <sstream>

namespace vopred {

namespace {

double toDouble(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const double d = std::stod(value, &pos);
    if (pos == value.size()) return d;
  } catch (...) {
  }
  throw ConfigError("bad number '" + value + "' for config key '" + key + "'");
}

int toInt(const std::string& key, const std::string& value) {
  const double d = toDouble(key, value);
  const int i = static_cast<int>(d);
  if (i != d) throw ConfigError("config key '" + key + "' needs an integer");
  return i;
}

bool toBool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "on") return true;
  if (value == "0" || value == "false" || value == "off") return false;
  throw ConfigError("config key '" + key + "' needs a boolean, got '" + value + "'");
}

std::vector<double> toList(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(toDouble(key, item));
  }
  if (out.empty()) throw ConfigError("config key '" + key + "' needs a comma list of numbers");
  return out;
}

}  // namespace

void applyConfigOverride(EngineConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "dt") {
    cfg.dt = toDouble(key, value);
  } else if (key == "tau") {
    cfg.tau = toDouble(key, value);
  } else if (key == "t_pred_steps") {
    cfg.t_pred_steps = toInt(key, value);
  } else if (key == "t_hist") {
    cfg.t_hist = toInt(key, value);
  } else if (key == "sigma") {
    cfg.sigma = toDouble(key, value);
  } else if (key == "sigma_s") {
    cfg.sigma_s = toDouble(key, value);
  } else if (key == "best_of_n") {
    cfg.best_of_n = toInt(key, value);
  } else if (key == "use_kinematics") {
    cfg.use_kinematics = toBool(key, value);
  } else if (key == "use_polygons") {
    cfg.use_polygons = toBool(key, value);
  } else if (key == "infer_intention") {
    cfg.infer_intention = toBool(key, value);
  } else if (key == "infer_attention") {
    cfg.infer_attention = toBool(key, value);
  } else if (key == "infer_responsibility") {
    cfg.infer_responsibility = toBool(key, value);
  } else if (key == "r_front") {
    cfg.r_front_values = toList(key, value);
  } else if (key == "r_rear") {
    cfg.r_rear_values = toList(key, value);
  } else if (key == "c1") {
    cfg.c1_values = toList(key, value);
  } else if (key == "c2_pedestrian") {
    cfg.c2_pedestrian = toList(key, value);
  } else if (key == "c2_vehicle") {
    cfg.c2_vehicle = toList(key, value);
  } else if (key == "profiles") {
    cfg.profiles_path = value;
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
  } else if (key == "threads") {
    cfg.threads = toInt(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void applyAblation(EngineConfig& cfg, const std::string& factor) {
  if (factor == "kinematics") {
    cfg.use_kinematics = false;
  } else if (factor == "polygons") {
    cfg.use_polygons = false;
  } else if (factor == "intention") {
    cfg.infer_intention = false;
  } else if (factor == "attention") {
    cfg.infer_attention = false;
  } else if (factor == "responsibility") {
    cfg.infer_responsibility = false;
  } else {
    throw ConfigError("unknown ablation factor '" + factor +
                      "' (expected kinematics, polygons, intention, attention or responsibility)");
  }
}

EngineConfig parseEngineConfig(std::istream& in) {
  EngineConfig cfg;
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    const size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream line(raw);
    std::string key, value, rest;
    if (!(line >> key)) continue;
    if (!(line >> value) || (line >> rest)) {
      throw ConfigError("config line " + std::to_string(number) + ": expected 'key value'");
    }
    try {
      applyConfigOverride(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(number) + ": " + e.what());
    }
  }
  return cfg;
}

EngineConfig loadEngineConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parseEngineConfig(in);
}

std::vector<BehaviorConstraints> candidateGrid(const EngineConfig& cfg, AgentType type) {
  const std::vector<Intention> intentions =
      cfg.infer_intention
          ? std::vector<Intention>{Intention::KeepVelocity, Intention::KeepAcceleration}
          : std::vector<Intention>{Intention::KeepVelocity};

  std::vector<std::pair<double, double>> radii;
  if (cfg.infer_attention) {
    for (double rf : cfg.r_front_values) {
      for (double rr : cfg.r_rear_values) {
        if (rr <= rf) radii.emplace_back(rf, rr);
      }
    }
    if (radii.empty()) throw ConfigError("attention grid admits no pair with r_rear <= r_front");
  } else {
    radii.emplace_back(1e9, 1e9);
  }

  const bool pedestrian_like = type == AgentType::Pedestrian || type == AgentType::GyroScooter;
  const std::vector<double> c1s = cfg.infer_responsibility ? cfg.c1_values
                                                           : std::vector<double>{0.0};
  const std::vector<double> c2s =
      cfg.infer_responsibility ? (pedestrian_like ? cfg.c2_pedestrian : cfg.c2_vehicle)
                               : std::vector<double>{0.5};

  std::vector<BehaviorConstraints> grid;
  grid.reserve(intentions.size() * radii.size() * c1s.size() * c2s.size());
  for (Intention intention : intentions) {
    for (const auto& [rf, rr] : radii) {
      for (double c1 : c1s) {
        for (double c2 : c2s) {
          grid.push_back(BehaviorConstraints{intention, rf, rr, c1, c2});
        }
      }
    }
  }
  return grid;
}

}  // namespace vopred
