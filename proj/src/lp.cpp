#include "vopred/lp.hpp"

#include <cmath>
#include <limits>
#include <optional>

namespace vopred {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kParallelTol = 1e-12;

// Closest point to `target` in the intersection of `planes`, processing
// constraints incrementally. Returns nullopt when the intersection is empty.
std::optional<Vec2> solvePlanes(const std::vector<HalfPlane>& planes, const Vec2& target) {
  Vec2 v = target;
  for (size_t i = 0; i < planes.size(); ++i) {
    const HalfPlane& hp = planes[i];
    if ((v - hp.point).dot(hp.normal) >= 0.0) continue;

    // Re-solve restricted to this constraint's boundary line, subject to all
    // previous constraints. q is the projection of target onto the line and d
    // its direction, so the 1-D objective is |t| and the optimum is the
    // clamp of 0 into the admitted interval.
    const Vec2 q = target - (target - hp.point).dot(hp.normal) * hp.normal;
    const Vec2 d = perp(hp.normal);
    double t_lo = -kInf, t_hi = kInf;
    for (size_t j = 0; j < i; ++j) {
      const double denom = d.dot(planes[j].normal);
      const double num = (planes[j].point - q).dot(planes[j].normal);
      if (std::abs(denom) <= kParallelTol) {
        if (num > kParallelTol) return std::nullopt;  // line fully infeasible
        continue;
      }
      if (denom > 0.0) {
        t_lo = std::max(t_lo, num / denom);
      } else {
        t_hi = std::min(t_hi, num / denom);
      }
    }
    if (t_lo > t_hi) return std::nullopt;
    v = q + std::clamp(0.0, t_lo, t_hi) * d;
  }
  return v;
}

}  // namespace

std::vector<HalfPlane> polygonHalfPlanes(const ConvexPolygon& polygon) {
  std::vector<HalfPlane> planes;
  planes.reserve(static_cast<size_t>(polygon.size()));
  const std::vector<Vec2>& v = polygon.vertices();
  for (size_t i = 0; i < v.size(); ++i) {
    const Vec2 e = v[(i + 1) % v.size()] - v[i];
    planes.push_back(HalfPlane{v[i], perp(e).normalized()});  // interior is left of CCW edges
  }
  return planes;
}

LpResult solve(const VelocityProgram& program) {
  const std::vector<HalfPlane> kinematic = polygonHalfPlanes(program.kinematic_polygon);

  std::vector<HalfPlane> planes = kinematic;
  planes.insert(planes.end(), program.half_planes.begin(), program.half_planes.end());

  if (std::optional<Vec2> v = solvePlanes(planes, program.target)) {
    return LpResult{*v, true};
  }

  // Infeasible: keep the kinematic constraints hard and relax the collision
  // half-planes uniformly. Bisect on the violation level; each level is a
  // plain feasibility solve with the collision planes shifted backwards.
  const std::optional<Vec2> inside = solvePlanes(kinematic, program.target);
  if (!inside) {
    throw GeometryError("kinematic polygon admits no velocity (misconfigured profile)");
  }

  auto shifted = [&](double level) {
    std::vector<HalfPlane> out = kinematic;
    for (const HalfPlane& hp : program.half_planes) {
      out.push_back(HalfPlane{hp.point - level * hp.normal, hp.normal});
    }
    return out;
  };

  double hi = 0.0;
  for (const HalfPlane& hp : program.half_planes) {
    hi = std::max(hi, hp.violation(*inside));
  }
  double lo = 0.0;
  Vec2 best = *inside;
  for (int it = 0; it < 64; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (std::optional<Vec2> v = solvePlanes(shifted(mid), program.target)) {
      best = *v;
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return LpResult{best, false};
}

}  // namespace vopred
