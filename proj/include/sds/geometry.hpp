#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <vector>

#include "sds/gaussian.hpp"

namespace sds::geom {

using Vec2 = Eigen::Vector2d;

/// Absolute tolerance for geometric predicates (meter-scale coordinates).
constexpr double kGeomEps = 1e-9;

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // rad, in [-pi, pi)

  Vec2 position() const { return Vec2(x, y); }
};

/// Wrap an angle into [-pi, pi).
double wrap_angle(double a);

/// Axis-aligned-in-body-frame rectangle with a world pose.
struct OrientedBox {
  Pose2D center;
  double length = 0.0;  // extent along heading, m
  double width = 0.0;   // extent across heading, m

  /// Corners in counterclockwise order.
  std::array<Vec2, 4> corners() const;
  bool contains(const Vec2& p) const;
};

/// Convex polygon, vertices in strict counterclockwise order.
struct ConvexPolygon {
  std::vector<Vec2> vertices;

  double area() const;
  Vec2 centroid() const;
  /// Throws std::invalid_argument unless >= 3 vertices, CCW, convex.
  void validate() const;
};

/// Line-of-sight visibility of a pedestrian past a single occluder point,
/// assuming the occluder hides everything below the extended sight line.
/// Visible iff the pedestrian lies strictly above the ego->obj line.
/// A vertical sight line (x_obj == x_ego within tolerance) is degenerate for
/// the slope form; it is evaluated with the equivalent half-plane test.
struct LosResult {
  bool visible = false;
  bool degenerate = false;  // slope form undefined, half-plane test used
};
LosResult los_visible_checked(const Pose2D& ego, const Vec2& ped, const Vec2& obj);
bool los_visible(const Pose2D& ego, const Vec2& ped, const Vec2& obj);

/// Region hidden from the ego behind the occluder: the two silhouette
/// corners (extreme bearings from ego), those corners pushed `range` meters
/// further along their sight rays, and any box corners lying beyond the
/// silhouette line. Throws if the ego is inside the box.
ConvexPolygon build_occlusion_polygon(const Pose2D& ego, const OrientedBox& occluder,
                                      double range = 20.0);

/// True iff p lies on the left of (or on, within tolerance) every CCW edge.
bool point_in_polygon(const Vec2& p, const ConvexPolygon& poly);

/// Sutherland-Hodgman clip of a against b's half-planes. Empty (area below
/// 1e-9 m^2) intersections return nullopt.
std::optional<ConvexPolygon> intersect_convex(const ConvexPolygon& a,
                                              const ConvexPolygon& b);

/// Mean and covariance of the uniform distribution over the polygon.
gm::Gaussian polygon_gaussian_moments(const ConvexPolygon& poly);

/// CCW convex hull (monotone chain). Collinear interior points are dropped.
ConvexPolygon convex_hull(std::vector<Vec2> points);

}  // namespace sds::geom
