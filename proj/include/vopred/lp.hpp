#pragma once

#include "vopred/geometry.hpp"

namespace vopred {

// Minimum-norm velocity selection: find the v closest to `target` subject to
// the kinematic polygon (treated as hard constraints) and the collision
// half-planes. Constraints are processed in the given order, so identical
// input yields identical output.
struct VelocityProgram {
  Vec2 target;                        // preferred velocity
  std::vector<HalfPlane> half_planes; // collision constraints, caller order
  ConvexPolygon kinematic_polygon;    // trackable set in the world frame
};

struct LpResult {
  Vec2 velocity;
  // False when the intersection is empty; `velocity` then comes from the
  // relaxation that keeps kinematic constraints hard and minimizes the
  // maximum signed violation of the collision half-planes.
  bool feasible = true;
};

LpResult solve(const VelocityProgram& program);

// The kinematic polygon's edges as half-planes (interior side feasible).
std::vector<HalfPlane> polygonHalfPlanes(const ConvexPolygon& polygon);

}  // namespace vopred
