#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace vopred {

using Vec2 = Eigen::Vector2d;

// Tolerances used throughout the geometry kernel.
//   kGeomTol       vertex dedup, collinearity, unit-normal checks (meters / m/s)
//   kMembershipTol slack for region-membership queries
constexpr double kGeomTol = 1e-9;
constexpr double kMembershipTol = 1e-6;

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a velocity obstacle is requested for already-overlapping
// footprints (origin inside the Minkowski difference). Callers fall back to
// separatingHalfPlane().
class OverlapError : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Rotates v by +90 degrees (counter-clockwise).
inline Vec2 perp(const Vec2& v) { return Vec2(-v.y(), v.x()); }

inline Vec2 rotated(const Vec2& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return Vec2(c * v.x() - s * v.y(), s * v.x() + c * v.y());
}

bool isFinite(const Vec2& v);

// Closest point to q on segment [a, b].
Vec2 closestPointOnSegment(const Vec2& a, const Vec2& b, const Vec2& q);

// Convex polygon with counter-clockwise winding and strictly convex corners.
// Construction normalizes the input: consecutive duplicates (within kGeomTol)
// are merged, clockwise input is reversed, collinear vertices are dropped.
// Non-convex input raises GeometryError.
class ConvexPolygon {
 public:
  explicit ConvexPolygon(std::vector<Vec2> vertices);

  // Axis-aligned rectangle centered at the origin, length along +x.
  static ConvexPolygon rectangle(double length, double width);
  // Regular n-gon inscribed in the radius-r circle (first vertex on +x).
  static ConvexPolygon regular(int n, double radius);

  const std::vector<Vec2>& vertices() const { return verts_; }
  int size() const { return static_cast<int>(verts_.size()); }
  const Vec2& vertex(int i) const { return verts_[static_cast<size_t>(i)]; }

  bool contains(const Vec2& p, double tol = 0.0) const;
  Vec2 centroid() const;
  // Largest vertex distance from the body origin.
  double circumradius() const;

  // Closest point of the closed polygon to q (q itself when inside).
  Vec2 closestPoint(const Vec2& q) const;
  // Closest point on the boundary, even when q is interior.
  Vec2 closestBoundaryPoint(const Vec2& q) const;
  // Distance from q to the polygon (0 when inside).
  double distance(const Vec2& q) const;

  ConvexPolygon transformed(const Vec2& translation, double rotation) const;
  ConvexPolygon scaled(double factor) const;
  // Point reflection through the origin (preserves winding).
  ConvexPolygon negated() const;

 private:
  std::vector<Vec2> verts_;
};

// One linear constraint in velocity space. Feasible side:
//   (v - point) . normal >= 0
struct HalfPlane {
  Vec2 point;
  Vec2 normal;  // unit length

  bool contains(const Vec2& v, double tol = 0.0) const {
    return (v - point).dot(normal) >= -tol;
  }
  // Positive when v is on the infeasible side.
  double violation(const Vec2& v) const { return (point - v).dot(normal); }
};

// Truncated cone of colliding relative velocities. The region is
//   cone(P) intersect (1/tau)(P + cone(P))      with P the relative geometry;
// its boundary is the right leg ray, the scaled origin-facing chain of P, and
// the left leg ray. cutoff_chain runs from the right-leg tangent to the
// left-leg tangent.
struct VelocityObstacle {
  Vec2 leg_left;   // unit direction of the counter-clockwise-most tangent ray
  Vec2 leg_right;  // unit direction of the clockwise-most tangent ray
  std::vector<Vec2> cutoff_chain;
  double tau = 0.0;

  bool contains(const Vec2& v, double tol = 0.0) const;
  // Negative inside the region, positive outside; magnitude is the distance
  // to the region boundary.
  double signedDistance(const Vec2& v) const;
};

struct BoundaryPoint {
  Vec2 point;   // closest point on the VO boundary
  Vec2 normal;  // unit normal pointing out of the VO region
};

// Counter-clockwise hull of a point cloud; collinear points on hull edges are
// dropped. All-collinear input raises GeometryError.
ConvexPolygon convexHull(std::vector<Vec2> points);

// Minkowski difference b (+) (-a), by the rotating-calipers merge of the two
// edge sequences. Inputs are world-frame polygons.
ConvexPolygon minkowskiDifference(const ConvexPolygon& b, const ConvexPolygon& a);

// Velocity obstacle for relative geometry rel_geometry = B (-) A over horizon
// tau. Raises OverlapError when the origin lies inside rel_geometry.
VelocityObstacle buildVelocityObstacle(const ConvexPolygon& rel_geometry, double tau);

// Point on the VO boundary closest to v_rel and the outward normal there.
// The minimal correction of Eq-style constructions is point - v_rel.
BoundaryPoint closestBoundaryPoint(const VelocityObstacle& vo, const Vec2& v_rel);

// Collision-avoidance half-plane for the agent holding v_opt_a, taking an
// alpha share (in [0,1]) of the relative-velocity correction.
HalfPlane responsibilityHalfPlane(const Vec2& v_opt_a, const Vec2& v_opt_b,
                                  const VelocityObstacle& vo, double alpha);

// Fallback for overlapping footprints: a separating half-plane whose normal is
// the shortest escape direction of the origin from rel_geometry and whose
// offset pushes the penetration out within one time step dt.
HalfPlane separatingHalfPlane(const ConvexPolygon& rel_geometry, const Vec2& v_opt_a,
                              const Vec2& v_opt_b, double alpha, double dt);

// Correction vector and outward normal for one agent pair, independent of the
// responsibility split: the VO construction for disjoint footprints, the
// separating construction for overlapping ones. The half-plane for a share
// alpha is { v_opt_a + alpha*u, normal }.
struct PairTerm {
  Vec2 u;
  Vec2 normal;
};
PairTerm pairTerm(const ConvexPolygon& rel_geometry, const Vec2& v_rel, double tau, double dt);

// Distance between two convex polygons (0 when they intersect or touch).
double polygonDistance(const ConvexPolygon& a, const ConvexPolygon& b);

// Positive-area overlap test (touching boundaries do not count).
bool polygonsIntersect(const ConvexPolygon& a, const ConvexPolygon& b);

}  // namespace vopred
