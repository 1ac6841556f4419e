#include "sdbc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace sdbc {

namespace {

constexpr double kCollinearTol = 1e-12;
constexpr double kDedupeTol = 1e-12;

double cross(const RatePair& o, const RatePair& a, const RatePair& b) {
  return (a.ry - o.ry) * (b.rz - o.rz) - (a.rz - o.rz) * (b.ry - o.ry);
}

bool nearly_same(const RatePair& a, const RatePair& b) {
  return std::abs(a.ry - b.ry) <= kDedupeTol && std::abs(a.rz - b.rz) <= kDedupeTol;
}

double point_dist(const RatePair& a, const RatePair& b) {
  return std::hypot(a.ry - b.ry, a.rz - b.rz);
}

double segment_dist(const RatePair& p, const RatePair& a, const RatePair& b) {
  double vx = b.ry - a.ry, vz = b.rz - a.rz;
  double len2 = vx * vx + vz * vz;
  if (len2 <= 0.0) return point_dist(p, a);
  double t = ((p.ry - a.ry) * vx + (p.rz - a.rz) * vz) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return point_dist(p, {a.ry + t * vx, a.rz + t * vz});
}

// Monotone-chain hull over lexicographically sorted, deduplicated points.
// Output is counterclockwise starting at the smallest point. Right turns
// always pop; left turns pop only when the middle point sits within the
// dedupe distance of the chord. A distance test (instead of an absolute
// cross-product cutoff) keeps the extreme points of degenerate slivers,
// whose triangle areas all round to zero no matter how far apart the
// points are.
std::vector<RatePair> hull_of(std::vector<RatePair> pts) {
  std::sort(pts.begin(), pts.end(), [](const RatePair& a, const RatePair& b) {
    if (a.ry != b.ry) return a.ry < b.ry;
    return a.rz < b.rz;
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const RatePair& a, const RatePair& b) { return nearly_same(a, b); }),
            pts.end());
  int n = static_cast<int>(pts.size());
  if (n <= 2) return pts;

  auto droppable = [](const RatePair& o, const RatePair& m, const RatePair& p) {
    if (cross(o, m, p) <= 0.0) return true;
    return segment_dist(m, o, p) <= kCollinearTol;
  };
  std::vector<RatePair> h(2 * n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    while (k >= 2 && droppable(h[k - 2], h[k - 1], pts[i])) --k;
    h[k++] = pts[i];
  }
  int lower = k + 1;
  for (int i = n - 2; i >= 0; --i) {
    while (k >= lower && droppable(h[k - 2], h[k - 1], pts[i])) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);  // last point repeats the first
  return h;
}

}  // namespace

ConvexRegion2D ConvexRegion2D::from_points(std::span<const RatePair> pts) {
  if (pts.empty()) throw std::invalid_argument("ConvexRegion2D: no points");
  std::vector<RatePair> clean;
  clean.reserve(pts.size());
  for (const RatePair& p : pts) {
    RatePair q = p;
    if (!std::isfinite(q.ry) || !std::isfinite(q.rz)) {
      throw std::invalid_argument("ConvexRegion2D: non-finite point");
    }
    if (q.ry < 0.0) {
      if (q.ry < -1e-9) throw std::invalid_argument("ConvexRegion2D: negative rate");
      q.ry = 0.0;
    }
    if (q.rz < 0.0) {
      if (q.rz < -1e-9) throw std::invalid_argument("ConvexRegion2D: negative rate");
      q.rz = 0.0;
    }
    clean.push_back(q);
  }
  ConvexRegion2D r;
  r.verts_ = hull_of(std::move(clean));
  return r;
}

ConvexRegion2D ConvexRegion2D::from_triple(const BoundTriple& t) {
  // a and c are entropy differences; a hair below zero is rounding noise,
  // and treating it as infeasible would drop the whole polytope over a
  // 1e-16 wiggle. Same clamp window as from_points.
  double a = (t.a < 0.0 && t.a >= -1e-9) ? 0.0 : t.a;
  if (t.c <= 0.0 || a < 0.0) {
    return from_points(std::vector<RatePair>{{0.0, 0.0}});
  }
  double b = std::max(t.b, 0.0);
  double c = t.c;
  double scale = std::max({1.0, a, b, c});
  double tol = 1e-12 * scale;

  // Pairwise intersections of the five boundary lines; keep feasible ones.
  const RatePair candidates[] = {
      {0.0, 0.0}, {a, 0.0}, {0.0, b}, {a, b}, {c, 0.0}, {0.0, c}, {a, c - a}, {c - b, b},
  };
  std::vector<RatePair> feasible;
  for (const RatePair& p : candidates) {
    if (p.ry < -tol || p.rz < -tol) continue;
    if (p.ry > a + tol || p.rz > b + tol) continue;
    if (p.ry + p.rz > c + tol) continue;
    feasible.push_back({std::clamp(p.ry, 0.0, a), std::clamp(p.rz, 0.0, b)});
  }
  return from_points(feasible);
}

bool ConvexRegion2D::contains(RatePair p, double tol) const {
  if (verts_.empty()) return false;
  if (verts_.size() == 1) return point_dist(p, verts_[0]) <= tol;
  if (verts_.size() == 2) return segment_dist(p, verts_[0], verts_[1]) <= tol;
  int n = static_cast<int>(verts_.size());
  for (int i = 0; i < n; ++i) {
    const RatePair& a = verts_[i];
    const RatePair& b = verts_[(i + 1) % n];
    double len = point_dist(a, b);
    if (len <= 0.0) continue;
    // signed distance; positive on the interior side of a CCW edge
    if (cross(a, b, p) / len < -tol) return false;
  }
  return true;
}

double ConvexRegion2D::support(double wy, double wz) const {
  if (verts_.empty()) throw std::invalid_argument("support: empty region");
  if (wy == 0.0 && wz == 0.0) throw std::invalid_argument("support: zero direction");
  double best = -1e300;
  for (const RatePair& v : verts_) best = std::max(best, wy * v.ry + wz * v.rz);
  return best;
}

double ConvexRegion2D::area() const {
  int n = static_cast<int>(verts_.size());
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (int i = 0; i < n; ++i) {
    const RatePair& a = verts_[i];
    const RatePair& b = verts_[(i + 1) % n];
    twice += a.ry * b.rz - b.ry * a.rz;
  }
  return 0.5 * twice;
}

std::string ConvexRegion2D::to_csv() const {
  std::string out = "r_y,r_z\n";
  char buf[80];
  for (const RatePair& v : verts_) {
    std::snprintf(buf, sizeof(buf), "%.9f,%.9f\n", v.ry, v.rz);
    out += buf;
  }
  return out;
}

ConvexRegion2D union_hull(std::span<const ConvexRegion2D> parts) {
  std::vector<RatePair> pts;
  for (const ConvexRegion2D& r : parts) {
    pts.insert(pts.end(), r.vertices().begin(), r.vertices().end());
  }
  if (pts.empty()) throw std::invalid_argument("union_hull: no vertices");
  return ConvexRegion2D::from_points(pts);
}

namespace {

double dist_to_region(const RatePair& p, const ConvexRegion2D& r) {
  const auto& v = r.vertices();
  if (v.empty()) throw std::invalid_argument("hausdorff_distance: empty region");
  if (v.size() == 1) return point_dist(p, v[0]);
  if (v.size() == 2) return segment_dist(p, v[0], v[1]);
  if (r.contains(p, 0.0)) return 0.0;
  double best = 1e300;
  int n = static_cast<int>(v.size());
  for (int i = 0; i < n; ++i) {
    best = std::min(best, segment_dist(p, v[i], v[(i + 1) % n]));
  }
  return best;
}

double directed_hausdorff(const ConvexRegion2D& a, const ConvexRegion2D& b) {
  double worst = 0.0;
  for (const RatePair& p : a.vertices()) worst = std::max(worst, dist_to_region(p, b));
  return worst;
}

}  // namespace

double hausdorff_distance(const ConvexRegion2D& a, const ConvexRegion2D& b) {
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

}  // namespace sdbc
