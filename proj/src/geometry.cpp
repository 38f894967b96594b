#include "sds/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sds::geom {

namespace {

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a < 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

std::array<Vec2, 4> OrientedBox::corners() const {
  const double c = std::cos(center.heading), s = std::sin(center.heading);
  const double hl = 0.5 * length, hw = 0.5 * width;
  auto to_world = [&](double bx, double by) {
    return Vec2(center.x + c * bx - s * by, center.y + s * bx + c * by);
  };
  return {to_world(hl, hw), to_world(-hl, hw), to_world(-hl, -hw), to_world(hl, -hw)};
}

bool OrientedBox::contains(const Vec2& p) const {
  const double c = std::cos(center.heading), s = std::sin(center.heading);
  const double dx = p.x() - center.x, dy = p.y() - center.y;
  const double bx = c * dx + s * dy, by = -s * dx + c * dy;
  return std::abs(bx) <= 0.5 * length + kGeomEps &&
         std::abs(by) <= 0.5 * width + kGeomEps;
}

double ConvexPolygon::area() const {
  double a = 0.0;
  const size_t n = vertices.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& p = vertices[i];
    const Vec2& q = vertices[(i + 1) % n];
    a += cross2(p, q);
  }
  return 0.5 * a;
}

Vec2 ConvexPolygon::centroid() const {
  const size_t n = vertices.size();
  double a = 0.0;
  Vec2 c = Vec2::Zero();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& p = vertices[i];
    const Vec2& q = vertices[(i + 1) % n];
    const double w = cross2(p, q);
    a += w;
    c += w * (p + q);
  }
  return c / (3.0 * a);
}

void ConvexPolygon::validate() const {
  if (vertices.size() < 3)
    throw std::invalid_argument("ConvexPolygon: fewer than 3 vertices");
  const size_t n = vertices.size();
  bool positive = false;
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices[i];
    const Vec2& b = vertices[(i + 1) % n];
    const Vec2& c = vertices[(i + 2) % n];
    const double cr = cross2(b - a, c - b);
    if (cr < -kGeomEps)
      throw std::invalid_argument("ConvexPolygon: not counterclockwise convex");
    if (cr > kGeomEps) positive = true;
  }
  if (!positive)
    throw std::invalid_argument("ConvexPolygon: degenerate (zero area)");
}

LosResult los_visible_checked(const Pose2D& ego, const Vec2& ped, const Vec2& obj) {
  LosResult r;
  const double dx = obj.x() - ego.x;
  if (std::abs(dx) <= kGeomEps) {
    // Slope form undefined; use the equivalent half-plane predicate
    // cross(obj - ego, ped - obj) > 0.
    r.degenerate = true;
    r.visible = cross2(obj - Vec2(ego.x, ego.y), ped - obj) > 0.0;
    return r;
  }
  const double slope = (obj.y() - ego.y) / dx;
  r.visible = (ped.y() - obj.y()) > slope * (ped.x() - obj.x());
  return r;
}

bool los_visible(const Pose2D& ego, const Vec2& ped, const Vec2& obj) {
  return los_visible_checked(ego, ped, obj).visible;
}

ConvexPolygon convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) {
                          return (a - b).norm() <= kGeomEps;
                        }),
            pts.end());
  const size_t n = pts.size();
  if (n < 3) throw std::invalid_argument("convex_hull: fewer than 3 distinct points");
  std::vector<Vec2> hull(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {  // lower
    while (k >= 2 && cross2(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= kGeomEps)
      --k;
    hull[k++] = pts[i];
  }
  for (size_t i = n - 1, t = k + 1; i-- > 0;) {  // upper
    while (k >= t && cross2(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= kGeomEps)
      --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  ConvexPolygon poly{std::move(hull)};
  poly.validate();
  return poly;
}

ConvexPolygon build_occlusion_polygon(const Pose2D& ego, const OrientedBox& occluder,
                                      double range) {
  const Vec2 e = ego.position();
  if (occluder.contains(e))
    throw std::invalid_argument("build_occlusion_polygon: ego inside occluder");

  const auto corners = occluder.corners();
  // Silhouette corners: extreme bearing relative to the box-center direction
  // (avoids atan2 wraparound for boxes behind the ego).
  const Vec2 to_center = (occluder.center.position() - e).normalized();
  int lo = 0, hi = 0;
  double lo_ang = 0.0, hi_ang = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Vec2 d = corners[i] - e;
    const double ang = std::atan2(cross2(to_center, d), to_center.dot(d));
    if (i == 0 || ang < lo_ang) {
      lo_ang = ang;
      lo = i;
    }
    if (i == 0 || ang > hi_ang) {
      hi_ang = ang;
      hi = i;
    }
  }
  const Vec2 s1 = corners[lo], s2 = corners[hi];

  std::vector<Vec2> pts{s1, s2};
  pts.push_back(s1 + range * (s1 - e).normalized());
  pts.push_back(s2 + range * (s2 - e).normalized());
  // Box corners beyond the silhouette line belong to the hidden region.
  const Vec2 edge = s2 - s1;
  const double ego_side = cross2(edge, e - s1);
  for (int i = 0; i < 4; ++i) {
    if (i == lo || i == hi) continue;
    const double side = cross2(edge, corners[i] - s1);
    if (side == 0.0 || (side > 0.0) != (ego_side > 0.0)) pts.push_back(corners[i]);
  }
  return convex_hull(std::move(pts));
}

bool point_in_polygon(const Vec2& p, const ConvexPolygon& poly) {
  const size_t n = poly.vertices.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = poly.vertices[i];
    const Vec2& b = poly.vertices[(i + 1) % n];
    if (cross2(b - a, p - a) < -kGeomEps) return false;
  }
  return true;
}

std::optional<ConvexPolygon> intersect_convex(const ConvexPolygon& a,
                                              const ConvexPolygon& b) {
  std::vector<Vec2> out = a.vertices;
  const size_t nb = b.vertices.size();
  for (size_t e = 0; e < nb && !out.empty(); ++e) {
    const Vec2& ca = b.vertices[e];
    const Vec2& cb = b.vertices[(e + 1) % nb];
    const Vec2 dir = cb - ca;
    std::vector<Vec2> in;
    in.swap(out);
    const size_t n = in.size();
    for (size_t i = 0; i < n; ++i) {
      const Vec2& p = in[i];
      const Vec2& q = in[(i + 1) % n];
      const double dp = cross2(dir, p - ca);
      const double dq = cross2(dir, q - ca);
      if (dp >= -kGeomEps) {
        out.push_back(p);
        if (dq < -kGeomEps && dp > kGeomEps) {
          const double t = dp / (dp - dq);
          out.push_back(p + t * (q - p));
        }
      } else if (dq > kGeomEps) {
        const double t = dp / (dp - dq);
        out.push_back(p + t * (q - p));
      }
    }
  }
  // Drop duplicate vertices introduced by clipping.
  std::vector<Vec2> clean;
  for (const Vec2& v : out) {
    if (clean.empty() || (v - clean.back()).norm() > kGeomEps) clean.push_back(v);
  }
  while (clean.size() > 1 && (clean.front() - clean.back()).norm() <= kGeomEps)
    clean.pop_back();
  if (clean.size() < 3) return std::nullopt;
  ConvexPolygon poly{std::move(clean)};
  if (poly.area() < 1e-9) return std::nullopt;
  return poly;
}

gm::Gaussian polygon_gaussian_moments(const ConvexPolygon& poly) {
  const double a = poly.area();
  if (a <= 1e-9)
    throw std::invalid_argument("polygon_gaussian_moments: degenerate polygon");
  // Closed-form shoelace moments of the uniform density (fan triangulation
  // against the origin).
  const size_t n = poly.vertices.size();
  double cx = 0.0, cy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const Vec2& p = poly.vertices[i];
    const Vec2& q = poly.vertices[(i + 1) % n];
    const double w = cross2(p, q);
    cx += w * (p.x() + q.x());
    cy += w * (p.y() + q.y());
    sxx += w * (p.x() * p.x() + p.x() * q.x() + q.x() * q.x());
    syy += w * (p.y() * p.y() + p.y() * q.y() + q.y() * q.y());
    sxy += w * (p.x() * q.y() + 2.0 * p.x() * p.y() + 2.0 * q.x() * q.y() + q.x() * p.y());
  }
  cx /= 6.0 * a;
  cy /= 6.0 * a;
  const double exx = sxx / (12.0 * a);
  const double eyy = syy / (12.0 * a);
  const double exy = sxy / (24.0 * a);
  gm::Gaussian g;
  g.mean = Eigen::Vector2d(cx, cy);
  g.cov = Eigen::Matrix2d{{exx - cx * cx, exy - cx * cy}, {exy - cx * cy, eyy - cy * cy}};
  return g;
}

}  // namespace sds::geom
