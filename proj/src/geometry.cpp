#include "vopred/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vopred {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Signed area via the shoelace formula (positive for CCW).
double signedArea(const std::vector<Vec2>& v) {
  double a = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    a += cross(v[i], v[(i + 1) % v.size()]);
  }
  return 0.5 * a;
}

// Strict order of edge directions by angle in [0, 2pi).
bool angleLess(const Vec2& a, const Vec2& b) {
  const bool upper_a = (a.y() < 0.0) || (a.y() == 0.0 && a.x() < 0.0);
  const bool upper_b = (b.y() < 0.0) || (b.y() == 0.0 && b.x() < 0.0);
  if (upper_a != upper_b) return upper_b;
  return cross(a, b) > 0.0;
}

// Index of the bottom-most (then left-most) vertex.
size_t lowestVertex(const std::vector<Vec2>& v) {
  size_t best = 0;
  for (size_t i = 1; i < v.size(); ++i) {
    if (v[i].y() < v[best].y() || (v[i].y() == v[best].y() && v[i].x() < v[best].x())) {
      best = i;
    }
  }
  return best;
}

}  // namespace

bool isFinite(const Vec2& v) { return std::isfinite(v.x()) && std::isfinite(v.y()); }

Vec2 closestPointOnSegment(const Vec2& a, const Vec2& b, const Vec2& q) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 <= kGeomTol * kGeomTol) return a;
  const double t = std::clamp((q - a).dot(ab) / len2, 0.0, 1.0);
  return a + t * ab;
}

ConvexPolygon::ConvexPolygon(std::vector<Vec2> vertices) {
  if (vertices.size() < 3) throw GeometryError("polygon needs at least 3 vertices");
  for (const Vec2& v : vertices) {
    if (!isFinite(v)) throw GeometryError("polygon vertex is not finite");
  }

  // Merge consecutive duplicates (cyclically).
  std::vector<Vec2> cleaned;
  cleaned.reserve(vertices.size());
  for (const Vec2& v : vertices) {
    if (cleaned.empty() || (v - cleaned.back()).norm() > kGeomTol) cleaned.push_back(v);
  }
  while (cleaned.size() > 1 && (cleaned.front() - cleaned.back()).norm() <= kGeomTol) {
    cleaned.pop_back();
  }
  if (cleaned.size() < 3) throw GeometryError("degenerate polygon after deduplication");

  if (signedArea(cleaned) < 0.0) std::reverse(cleaned.begin(), cleaned.end());

  // Drop collinear vertices until every corner turns strictly left.
  bool changed = true;
  while (changed && cleaned.size() >= 3) {
    changed = false;
    for (size_t i = 0; i < cleaned.size();) {
      const size_t n = cleaned.size();
      const Vec2 e1 = cleaned[i] - cleaned[(i + n - 1) % n];
      const Vec2 e2 = cleaned[(i + 1) % n] - cleaned[i];
      if (std::abs(cross(e1, e2)) <= kGeomTol * e1.norm() * e2.norm()) {
        cleaned.erase(cleaned.begin() + static_cast<long>(i));
        changed = true;
      } else {
        ++i;
      }
    }
  }
  if (cleaned.size() < 3) throw GeometryError("polygon is collinear");

  for (size_t i = 0; i < cleaned.size(); ++i) {
    const size_t n = cleaned.size();
    const Vec2 e1 = cleaned[(i + 1) % n] - cleaned[i];
    const Vec2 e2 = cleaned[(i + 2) % n] - cleaned[(i + 1) % n];
    if (cross(e1, e2) <= 0.0) throw GeometryError("polygon is not convex");
  }
  verts_ = std::move(cleaned);
}

ConvexPolygon ConvexPolygon::rectangle(double length, double width) {
  const double hl = 0.5 * length, hw = 0.5 * width;
  return ConvexPolygon({{hl, -hw}, {hl, hw}, {-hl, hw}, {-hl, -hw}});
}

ConvexPolygon ConvexPolygon::regular(int n, double radius) {
  if (n < 3) throw GeometryError("regular polygon needs n >= 3");
  std::vector<Vec2> v;
  v.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * M_PI * i / n;
    v.emplace_back(radius * std::cos(a), radius * std::sin(a));
  }
  return ConvexPolygon(std::move(v));
}

bool ConvexPolygon::contains(const Vec2& p, double tol) const {
  for (size_t i = 0; i < verts_.size(); ++i) {
    const Vec2& a = verts_[i];
    const Vec2 e = verts_[(i + 1) % verts_.size()] - a;
    // Interior is on the left of every CCW edge.
    if (cross(e, p - a) < -tol * e.norm()) return false;
  }
  return true;
}

Vec2 ConvexPolygon::centroid() const {
  double a2 = 0.0;
  Vec2 c(0.0, 0.0);
  for (size_t i = 0; i < verts_.size(); ++i) {
    const Vec2& p = verts_[i];
    const Vec2& q = verts_[(i + 1) % verts_.size()];
    const double w = cross(p, q);
    a2 += w;
    c += w * (p + q);
  }
  return c / (3.0 * a2);
}

double ConvexPolygon::circumradius() const {
  double r = 0.0;
  for (const Vec2& v : verts_) r = std::max(r, v.norm());
  return r;
}

Vec2 ConvexPolygon::closestPoint(const Vec2& q) const {
  if (contains(q)) return q;
  return closestBoundaryPoint(q);
}

Vec2 ConvexPolygon::closestBoundaryPoint(const Vec2& q) const {
  double best = kInf;
  Vec2 best_point = verts_[0];
  for (size_t i = 0; i < verts_.size(); ++i) {
    const Vec2 c = closestPointOnSegment(verts_[i], verts_[(i + 1) % verts_.size()], q);
    const double d = (c - q).squaredNorm();
    if (d < best) {
      best = d;
      best_point = c;
    }
  }
  return best_point;
}

double ConvexPolygon::distance(const Vec2& q) const {
  if (contains(q)) return 0.0;
  return (closestBoundaryPoint(q) - q).norm();
}

ConvexPolygon ConvexPolygon::transformed(const Vec2& translation, double rotation) const {
  std::vector<Vec2> out;
  out.reserve(verts_.size());
  const double c = std::cos(rotation), s = std::sin(rotation);
  for (const Vec2& v : verts_) {
    out.emplace_back(translation.x() + c * v.x() - s * v.y(),
                     translation.y() + s * v.x() + c * v.y());
  }
  return ConvexPolygon(std::move(out));
}

ConvexPolygon ConvexPolygon::scaled(double factor) const {
  std::vector<Vec2> out;
  out.reserve(verts_.size());
  for (const Vec2& v : verts_) out.push_back(factor * v);
  return ConvexPolygon(std::move(out));
}

ConvexPolygon ConvexPolygon::negated() const {
  std::vector<Vec2> out;
  out.reserve(verts_.size());
  for (const Vec2& v : verts_) out.push_back(-v);
  return ConvexPolygon(std::move(out));
}

ConvexPolygon convexHull(std::vector<Vec2> points) {
  if (points.size() < 3) throw GeometryError("hull needs at least 3 points");
  for (const Vec2& p : points) {
    if (!isFinite(p)) throw GeometryError("hull input point is not finite");
  }
  std::sort(points.begin(), points.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  points.erase(std::unique(points.begin(), points.end(),
                           [](const Vec2& a, const Vec2& b) { return (a - b).norm() <= kGeomTol; }),
               points.end());
  if (points.size() < 3) throw GeometryError("hull input is degenerate");

  // Andrew's monotone chain; strict turns only, so collinear points drop out.
  std::vector<Vec2> hull(2 * points.size());
  size_t k = 0;
  for (size_t i = 0; i < points.size(); ++i) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], points[i] - hull[k - 2]) <= 0.0) --k;
    hull[k++] = points[i];
  }
  const size_t lower = k + 1;
  for (size_t i = points.size() - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], points[i] - hull[k - 2]) <= 0.0) --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) throw GeometryError("hull input is collinear");
  return ConvexPolygon(std::move(hull));
}

ConvexPolygon minkowskiDifference(const ConvexPolygon& b, const ConvexPolygon& a) {
  const ConvexPolygon na = a.negated();
  const std::vector<Vec2>& p = b.vertices();
  const std::vector<Vec2>& q = na.vertices();
  const size_t n = p.size(), m = q.size();
  const size_t p0 = lowestVertex(p), q0 = lowestVertex(q);

  // Merge the two CCW edge sequences by angle, starting at the bottom-most
  // vertices; collinear leftovers are cleaned up by the constructor.
  std::vector<Vec2> sum;
  sum.reserve(n + m);
  size_t i = 0, j = 0;
  while (i < n || j < m) {
    sum.push_back(p[(p0 + i) % n] + q[(q0 + j) % m]);
    if (j == m) {
      ++i;
    } else if (i == n) {
      ++j;
    } else {
      const Vec2 ep = p[(p0 + i + 1) % n] - p[(p0 + i) % n];
      const Vec2 eq = q[(q0 + j + 1) % m] - q[(q0 + j) % m];
      if (angleLess(eq, ep)) {
        ++j;
      } else {
        ++i;
      }
    }
  }
  return ConvexPolygon(std::move(sum));
}

VelocityObstacle buildVelocityObstacle(const ConvexPolygon& rel_geometry, double tau) {
  if (!(tau > 0.0)) throw GeometryError("velocity obstacle needs tau > 0");
  if (rel_geometry.contains(Vec2(0.0, 0.0), kGeomTol)) {
    throw OverlapError("origin inside relative geometry (overlapping footprints)");
  }

  const std::vector<Vec2>& v = rel_geometry.vertices();
  const size_t n = v.size();

  // The right leg is the clockwise-most tangent direction: no vertex lies
  // strictly clockwise of its ray. Mirrored for the left leg. Ties (an edge
  // collinear with the origin) go to the vertex farther out.
  long right_idx = -1, left_idx = -1;
  for (size_t i = 0; i < n; ++i) {
    bool any_right = false, any_left = false, shadowed = false;
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double c = cross(v[i], v[j]);
      const double scale = kGeomTol * v[i].norm() * v[j].norm();
      if (c < -scale) any_right = true;
      if (c > scale) any_left = true;
      if (std::abs(c) <= scale && v[j].dot(v[i]) > 0.0 && v[j].norm() > v[i].norm()) {
        shadowed = true;
      }
    }
    if (!any_right && !shadowed) right_idx = static_cast<long>(i);
    if (!any_left && !shadowed) left_idx = static_cast<long>(i);
  }
  if (right_idx < 0 || left_idx < 0 || right_idx == left_idx) {
    throw GeometryError("failed to find tangent vertices for velocity obstacle");
  }

  VelocityObstacle vo;
  vo.tau = tau;
  vo.leg_right = v[static_cast<size_t>(right_idx)].normalized();
  vo.leg_left = v[static_cast<size_t>(left_idx)].normalized();

  // Origin-facing chain from the right tangent to the left tangent, walking
  // clockwise (decreasing CCW index), scaled by 1/tau.
  const double inv_tau = 1.0 / tau;
  size_t idx = static_cast<size_t>(right_idx);
  vo.cutoff_chain.push_back(inv_tau * v[idx]);
  while (idx != static_cast<size_t>(left_idx)) {
    idx = (idx + n - 1) % n;
    vo.cutoff_chain.push_back(inv_tau * v[idx]);
  }
  return vo;
}

bool VelocityObstacle::contains(const Vec2& v, double tol) const {
  // Inside the tangent cone...
  if (cross(leg_right, v) < -tol) return false;
  if (cross(leg_left, v) > tol) return false;
  // ...and beyond every cutoff segment. The chain runs right-to-left, so the
  // region sits on its right side and the origin on its left.
  for (size_t i = 0; i + 1 < cutoff_chain.size(); ++i) {
    const Vec2 e = cutoff_chain[i + 1] - cutoff_chain[i];
    if (cross(e, v - cutoff_chain[i]) > tol * e.norm()) return false;
  }
  return true;
}

double VelocityObstacle::signedDistance(const Vec2& v) const {
  const BoundaryPoint bp = closestBoundaryPoint(*this, v);
  const double d = (bp.point - v).norm();
  return contains(v) ? -d : d;
}

BoundaryPoint closestBoundaryPoint(const VelocityObstacle& vo, const Vec2& v_rel) {
  struct Feature {
    Vec2 point;
    Vec2 normal;
    double dist2;
  };

  const Vec2& right_anchor = vo.cutoff_chain.front();
  const Vec2& left_anchor = vo.cutoff_chain.back();

  auto rayFeature = [&v_rel](const Vec2& anchor, const Vec2& dir, const Vec2& normal) {
    const double t = std::max(0.0, (v_rel - anchor).dot(dir));
    const Vec2 p = anchor + t * dir;
    return Feature{p, normal, (p - v_rel).squaredNorm()};
  };

  // Boundary pieces in fixed order: right leg, cutoff chain, left leg.
  Feature best = rayFeature(right_anchor, vo.leg_right, Vec2(vo.leg_right.y(), -vo.leg_right.x()));
  for (size_t i = 0; i + 1 < vo.cutoff_chain.size(); ++i) {
    const Vec2& a = vo.cutoff_chain[i];
    const Vec2& b = vo.cutoff_chain[i + 1];
    const Vec2 p = closestPointOnSegment(a, b, v_rel);
    const double d2 = (p - v_rel).squaredNorm();
    if (d2 < best.dist2) {
      // The origin-facing side of the chain is its left: outward normal of
      // the region is the CCW perpendicular of the chain direction.
      best = Feature{p, perp(b - a).normalized(), d2};
    }
  }
  const Feature left =
      rayFeature(left_anchor, vo.leg_left, Vec2(-vo.leg_left.y(), vo.leg_left.x()));
  if (left.dist2 < best.dist2) best = left;

  const double dist = std::sqrt(best.dist2);
  if (dist > kGeomTol) {
    const Vec2 dir = (v_rel - best.point) / dist;
    best.normal = vo.contains(v_rel) ? -dir : dir;
  }
  return BoundaryPoint{best.point, best.normal};
}

HalfPlane responsibilityHalfPlane(const Vec2& v_opt_a, const Vec2& v_opt_b,
                                  const VelocityObstacle& vo, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw GeometryError("responsibility share outside [0,1]");
  const Vec2 v_rel = v_opt_a - v_opt_b;
  const BoundaryPoint bp = closestBoundaryPoint(vo, v_rel);
  const Vec2 u = bp.point - v_rel;
  return HalfPlane{v_opt_a + alpha * u, bp.normal};
}

namespace {

// Shortest escape of the origin from a polygon it sits inside (or on).
std::pair<Vec2, double> escapeDirection(const ConvexPolygon& rel_geometry) {
  const Vec2 origin(0.0, 0.0);
  const Vec2 escape = rel_geometry.closestBoundaryPoint(origin);
  const double depth = escape.norm();
  if (depth > kGeomTol) return {escape / depth, depth};
  // Origin on the boundary: push along the outward normal of the closest edge.
  const std::vector<Vec2>& v = rel_geometry.vertices();
  double best = kInf;
  Vec2 n(1.0, 0.0);
  for (size_t i = 0; i < v.size(); ++i) {
    const Vec2& a = v[i];
    const Vec2& b = v[(i + 1) % v.size()];
    const double d = closestPointOnSegment(a, b, origin).norm();
    if (d < best) {
      best = d;
      n = -perp((b - a).normalized());
    }
  }
  return {n, depth};
}

}  // namespace

HalfPlane separatingHalfPlane(const ConvexPolygon& rel_geometry, const Vec2& v_opt_a,
                              const Vec2& v_opt_b, double alpha, double dt) {
  if (alpha < 0.0 || alpha > 1.0) throw GeometryError("responsibility share outside [0,1]");
  if (!(dt > 0.0)) throw GeometryError("separating half-plane needs dt > 0");

  const auto [n, depth] = escapeDirection(rel_geometry);
  // Require the relative velocity to clear the penetration within dt.
  const Vec2 v_rel = v_opt_a - v_opt_b;
  const Vec2 u = (depth / dt - v_rel.dot(n)) * n;
  return HalfPlane{v_opt_a + alpha * u, n};
}

PairTerm pairTerm(const ConvexPolygon& rel_geometry, const Vec2& v_rel, double tau, double dt) {
  if (rel_geometry.contains(Vec2(0.0, 0.0), kGeomTol)) {
    const auto [n, depth] = escapeDirection(rel_geometry);
    return PairTerm{(depth / dt - v_rel.dot(n)) * n, n};
  }
  const VelocityObstacle vo = buildVelocityObstacle(rel_geometry, tau);
  const BoundaryPoint bp = closestBoundaryPoint(vo, v_rel);
  return PairTerm{bp.point - v_rel, bp.normal};
}

double polygonDistance(const ConvexPolygon& a, const ConvexPolygon& b) {
  if (polygonsIntersect(a, b)) return 0.0;
  double best = kInf;
  for (const Vec2& p : a.vertices()) best = std::min(best, b.distance(p));
  for (const Vec2& p : b.vertices()) best = std::min(best, a.distance(p));
  return best;
}

bool polygonsIntersect(const ConvexPolygon& a, const ConvexPolygon& b) {
  // Separating axis test over both polygons' edge planes; a non-negative gap
  // on any outward edge normal means no positive-area overlap.
  auto separatedByEdge = [](const ConvexPolygon& p, const ConvexPolygon& q) {
    const std::vector<Vec2>& vp = p.vertices();
    for (size_t i = 0; i < vp.size(); ++i) {
      const Vec2& a0 = vp[i];
      const Vec2 outward = -perp((vp[(i + 1) % vp.size()] - a0).normalized());
      const double offset = outward.dot(a0);
      double q_min = kInf;
      for (const Vec2& v : q.vertices()) q_min = std::min(q_min, outward.dot(v));
      if (q_min >= offset - 1e-12) return true;
    }
    return false;
  };
  return !separatedByEdge(a, b) && !separatedByEdge(b, a);
}

}  // namespace vopred
