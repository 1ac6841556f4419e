#pragma once

#include <span>
#include <string>
#include <vector>

namespace sdbc {

/// A point in the nonnegative rate plane (legitimate rate, second-receiver rate).
struct RatePair {
  double ry = 0.0;
  double rz = 0.0;
};

/// Bounds (a, b, c) describing { r_y <= a, r_z <= b, r_y + r_z <= c } before
/// intersection with the nonnegative quadrant.
struct BoundTriple {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

/// Convex polygon in the nonnegative quadrant, stored in canonical form:
/// counterclockwise vertex order starting from the lexicographically smallest
/// vertex (by ry, then rz), with collinear and duplicate vertices removed.
/// Degenerate regions are a single point or a segment.
class ConvexRegion2D {
 public:
  ConvexRegion2D() = default;

  /// Convex hull of arbitrary points. Coordinates in [-1e-9, 0) are treated
  /// as rounding residue and clamped to zero; smaller values are rejected.
  static ConvexRegion2D from_points(std::span<const RatePair> pts);

  /// Polytope cut out by r_y <= a, r_z <= b, r_y + r_z <= c in the
  /// nonnegative quadrant. An infeasible or empty-interior triple
  /// (c <= 0 or a < 0) collapses to the origin; b < 0 is clamped to 0.
  static ConvexRegion2D from_triple(const BoundTriple& t);

  const std::vector<RatePair>& vertices() const { return verts_; }
  bool empty() const { return verts_.empty(); }

  /// Membership test with slack `tol` (measured as Euclidean distance for
  /// degenerate regions, signed edge distance otherwise).
  bool contains(RatePair p, double tol) const;

  /// max over the region of (wy * ry + wz * rz); attained at a vertex.
  double support(double wy, double wz) const;

  double area() const;

  /// CSV with header "r_y,r_z" and one vertex per line in canonical order,
  /// formatted with nine fixed decimals. Identical regions produce
  /// byte-identical output.
  std::string to_csv() const;

 private:
  std::vector<RatePair> verts_;
};

/// Convex hull of the union of the given regions.
ConvexRegion2D union_hull(std::span<const ConvexRegion2D> parts);

/// Hausdorff distance between two regions (max over either's vertices of the
/// distance to the other region; exact for convex polygons).
double hausdorff_distance(const ConvexRegion2D& a, const ConvexRegion2D& b);

}  // namespace sdbc
