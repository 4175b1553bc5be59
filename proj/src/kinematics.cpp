#include "vopred/kinematics.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

namespace vopred {

namespace {

constexpr double kHeadingSpeedFloor = 0.05;  // below this, heading is retained

double wrapAngle(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a < -M_PI) a += 2.0 * M_PI;
  return a;
}

Vec2 clampNorm(const Vec2& v, double max_norm) {
  const double n = v.norm();
  return n > max_norm ? (max_norm / n) * v : v;
}

}  // namespace

std::string agentTypeName(AgentType type) {
  switch (type) {
    case AgentType::Pedestrian: return "pedestrian";
    case AgentType::Bicycle: return "bicycle";
    case AgentType::Motorbike: return "motorbike";
    case AgentType::Car: return "car";
    case AgentType::Van: return "van";
    case AgentType::Bus: return "bus";
    case AgentType::GyroScooter: return "gyro_scooter";
    case AgentType::Truck: return "truck";
    case AgentType::StaticObstacle: return "static_obstacle";
  }
  return "unknown";
}

std::optional<AgentType> parseAgentType(const std::string& name) {
  for (AgentType t : allAgentTypes()) {
    if (name == agentTypeName(t)) return t;
  }
  return std::nullopt;
}

std::vector<AgentType> allAgentTypes() {
  return {AgentType::Pedestrian, AgentType::Bicycle,      AgentType::Motorbike,
          AgentType::Car,        AgentType::Van,          AgentType::Bus,
          AgentType::GyroScooter, AgentType::Truck,       AgentType::StaticObstacle};
}

double KinematicProfile::maxSpeed() const {
  return std::visit([](const auto& m) { return m.s_max; }, model);
}

TrackResult trackVelocity(const KinematicProfile& profile, const Pose& start,
                          const Vec2& target_v, double duration, double dt) {
  if (!(dt > 0.0) || dt > duration) throw KinematicsError("need 0 < dt <= duration");

  TrackResult out;
  const int steps = static_cast<int>(std::llround(duration / dt));
  out.trajectory.reserve(static_cast<size_t>(steps) + 1);
  out.trajectory.push_back(start);

  Pose pose = start;
  if (profile.holonomic()) {
    const HolonomicModel& m = std::get<HolonomicModel>(profile.model);
    const Vec2 desired = clampNorm(target_v, m.s_max);
    Vec2 vel = pose.velocity();
    for (int k = 1; k <= steps; ++k) {
      vel += clampNorm(desired - vel, m.a_max * dt);
      pose.position += vel * dt;
      pose.speed = vel.norm();
      if (pose.speed > kHeadingSpeedFloor) pose.heading = std::atan2(vel.y(), vel.x());
      out.trajectory.push_back(pose);
      const double t = k * dt;
      out.max_error = std::max(out.max_error, (start.position + t * target_v - pose.position).norm());
    }
    return out;
  }

  const CarLikeModel& m = std::get<CarLikeModel>(profile.model);
  const double s_target = target_v.norm();
  const double lookahead = m.wheelbase;
  for (int k = 1; k <= steps; ++k) {
    const double t_prev = (k - 1) * dt;
    double steer = 0.0;
    double s_des = 0.0;
    if (s_target > 1e-9) {
      // Pure pursuit toward a point one lookahead ahead of the moving
      // straight-line reference.
      const Vec2 dir = target_v / s_target;
      const Vec2 goal = start.position + t_prev * target_v + lookahead * dir;
      const Vec2 to_goal = goal - pose.position;
      const double dist = to_goal.norm();
      if (dist > 1e-9) {
        const double alpha = wrapAngle(std::atan2(to_goal.y(), to_goal.x()) - pose.heading);
        steer = std::clamp(std::atan2(2.0 * m.wheelbase * std::sin(alpha), dist), -m.max_steer,
                           m.max_steer);
      }
      // Unit catch-up gain: commanded speed matches the target when exactly
      // one lookahead behind the goal point.
      s_des = std::clamp(s_target * dist / lookahead, 0.0, m.s_max);
    }
    pose.speed += std::clamp(s_des - pose.speed, -m.a_max * dt, m.a_max * dt);
    pose.speed = std::max(pose.speed, 0.0);
    pose.position += pose.speed * Vec2(std::cos(pose.heading), std::sin(pose.heading)) * dt;
    pose.heading = wrapAngle(pose.heading + pose.speed * std::tan(steer) / m.wheelbase * dt);
    out.trajectory.push_back(pose);
    const double t = k * dt;
    out.max_error = std::max(out.max_error, (start.position + t * target_v - pose.position).norm());
  }
  return out;
}

DiscretizationGrid DiscretizationGrid::make(double delta_s, double s_max, double delta_phi,
                                            double phi_max) {
  if (!(delta_s > 0.0) || !(delta_phi > 0.0)) throw KinematicsError("grid steps must be positive");
  DiscretizationGrid g;
  for (double s = 0.0; s < s_max - 1e-12; s += delta_s) g.speeds.push_back(s);
  g.speeds.push_back(s_max);
  for (double phi = 0.0; phi < phi_max - 1e-12; phi += delta_phi) g.deviations.push_back(phi);
  g.deviations.push_back(phi_max);
  return g;
}

DiscretizationGrid defaultGrid(const KinematicModel& model) {
  const double s_max = std::visit([](const auto& m) { return m.s_max; }, model);
  const double phi_max = std::holds_alternative<HolonomicModel>(model) ? M_PI : M_PI / 2.0;
  return DiscretizationGrid::make(0.1, s_max, 5.0 * M_PI / 180.0, phi_max);
}

ConvexPolygon estimateTrackableSet(const KinematicProfile& profile,
                                   const DiscretizationGrid& grid, double sim_dt) {
  if (grid.speeds.empty() || grid.deviations.empty()) {
    throw KinematicsError("estimation grid is empty");
  }

  std::vector<Vec2> boundary;
  boundary.reserve(2 * grid.deviations.size() + 1);
  boundary.emplace_back(0.0, 0.0);  // braking to rest is always trackable
  for (double phi : grid.deviations) {
    // Snap floating residues of cos/sin at right angles so exact-sideways
    // boundary points land exactly on the body y axis.
    Vec2 dir(std::cos(phi), std::sin(phi));
    if (std::abs(dir.x()) < 1e-15) dir.x() = 0.0;
    if (std::abs(dir.y()) < 1e-15) dir.y() = 0.0;
    Vec2 best(0.0, 0.0);
    bool found = false;
    for (double s : grid.speeds) {
      const Vec2 target = s * dir;
      const Pose start{Vec2(0.0, 0.0), 0.0, s};
      const TrackResult r = trackVelocity(profile, start, target, profile.tau, sim_dt);
      if (r.max_error <= profile.epsilon_max && s >= best.norm()) {
        best = target;
        found = true;
      }
    }
    if (!found) continue;  // this deviation angle contributes nothing
    boundary.push_back(best);
    if (phi > 1e-12) boundary.emplace_back(best.x(), -best.y());
  }

  try {
    return convexHull(boundary);
  } catch (const GeometryError&) {
    throw KinematicsError(std::string("trackable-set estimation failed for ") +
                          agentTypeName(profile.type) + ": fewer than 3 non-collinear boundary points");
  }
}

namespace {

struct Line {
  std::string text;
  int number = 0;
};

[[noreturn]] void parseFail(int line, const std::string& what) {
  throw KinematicsError("profile parse error at line " + std::to_string(line) + ": " + what);
}

bool parseDouble(const std::string& s, double& out) {
  try {
    size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

}  // namespace

ProfileMap parseProfiles(std::istream& in) {
  std::vector<Line> lines;
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    const size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    // Trim.
    const size_t b = raw.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const size_t e = raw.find_last_not_of(" \t\r");
    lines.push_back({raw.substr(b, e - b + 1), number});
  }

  ProfileMap profiles;
  size_t i = 0;
  while (i < lines.size()) {
    std::istringstream head(lines[i].text);
    std::string key, value;
    head >> key >> value;
    if (key != "type") parseFail(lines[i].number, "expected 'type <agent type>'");
    const std::optional<AgentType> type = parseAgentType(value);
    if (!type) parseFail(lines[i].number, "unknown agent type '" + value + "'");
    ++i;

    std::map<std::string, std::pair<double, int>> fields;
    std::string model_name;
    std::vector<Vec2> k_vertices;
    bool has_k = false;
    int block_line = lines[i - 1].number;

    while (i < lines.size()) {
      const std::string& text = lines[i].text;
      if (text.rfind("type", 0) == 0 && text.size() > 4 && std::isspace(text[4])) break;
      if (text == "K:") {
        has_k = true;
        ++i;
        while (i < lines.size()) {
          std::istringstream vs(lines[i].text);
          double x = 0.0, y = 0.0;
          if (!(vs >> x >> y)) break;
          std::string rest;
          if (vs >> rest) parseFail(lines[i].number, "trailing garbage after vertex");
          k_vertices.emplace_back(x, y);
          ++i;
        }
        continue;
      }
      std::istringstream fs(text);
      std::string fkey, fval, rest;
      if (!(fs >> fkey >> fval) || (fs >> rest)) {
        parseFail(lines[i].number, "expected 'key value', got '" + text + "'");
      }
      if (fkey == "model") {
        model_name = fval;
      } else {
        double d = 0.0;
        if (!parseDouble(fval, d)) parseFail(lines[i].number, "bad number for '" + fkey + "'");
        fields[fkey] = {d, lines[i].number};
      }
      ++i;
    }

    auto take = [&](const std::string& name, bool required, double fallback) {
      auto it = fields.find(name);
      if (it == fields.end()) {
        if (required) {
          parseFail(block_line, std::string("profile '") + agentTypeName(*type) +
                                    "' is missing required field '" + name + "'");
        }
        return fallback;
      }
      const double v = it->second.first;
      fields.erase(it);
      return v;
    };

    KinematicProfile p;
    p.type = *type;
    if (model_name == "holonomic") {
      HolonomicModel m;
      m.s_max = take("s_max", true, 0.0);
      m.a_max = take("a_max", false, std::numeric_limits<double>::infinity());
      p.model = m;
    } else if (model_name == "car_like") {
      CarLikeModel m;
      m.wheelbase = take("wheelbase", true, 0.0);
      m.max_steer = take("max_steer", true, 0.0);
      m.s_max = take("s_max", true, 0.0);
      m.a_max = take("a_max", true, 0.0);
      p.model = m;
    } else if (model_name.empty()) {
      parseFail(block_line, std::string("profile '") + agentTypeName(*type) +
                                "' is missing required field 'model'");
    } else {
      parseFail(block_line, "unknown model '" + model_name + "'");
    }
    p.epsilon_max = take("epsilon_max", true, 0.0);
    p.tau = take("tau", true, 0.0);
    if (!fields.empty()) {
      parseFail(fields.begin()->second.second, "unknown field '" + fields.begin()->first + "'");
    }
    if (has_k) {
      try {
        p.trackable_set = ConvexPolygon(k_vertices);
      } catch (const GeometryError& e) {
        parseFail(block_line, std::string("bad K polygon: ") + e.what());
      }
    }
    if (profiles.count(p.type) != 0) {
      parseFail(block_line, std::string("duplicate profile for ") + agentTypeName(p.type));
    }
    profiles.emplace(p.type, std::move(p));
  }
  return profiles;
}

void writeProfiles(const ProfileMap& profiles, std::ostream& out) {
  auto num = [](double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
  };
  for (const auto& [type, p] : profiles) {
    out << "type " << agentTypeName(type) << "\n";
    if (const auto* h = std::get_if<HolonomicModel>(&p.model)) {
      out << "model holonomic\n";
      out << "s_max " << num(h->s_max) << "\n";
      if (std::isfinite(h->a_max)) out << "a_max " << num(h->a_max) << "\n";
    } else {
      const CarLikeModel& m = std::get<CarLikeModel>(p.model);
      out << "model car_like\n";
      out << "wheelbase " << num(m.wheelbase) << "\n";
      out << "max_steer " << num(m.max_steer) << "\n";
      out << "s_max " << num(m.s_max) << "\n";
      out << "a_max " << num(m.a_max) << "\n";
    }
    out << "epsilon_max " << num(p.epsilon_max) << "\n";
    out << "tau " << num(p.tau) << "\n";
    if (p.trackable_set) {
      out << "K:\n";
      for (const Vec2& v : p.trackable_set->vertices()) {
        out << num(v.x()) << " " << num(v.y()) << "\n";
      }
    }
    out << "\n";
  }
}

ProfileMap loadProfiles(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw KinematicsError("cannot open profile file: " + path);
  return parseProfiles(in);
}

void saveProfiles(const ProfileMap& profiles, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw KinematicsError("cannot write profile file: " + path);
  writeProfiles(profiles, out);
}

}  // namespace vopred
