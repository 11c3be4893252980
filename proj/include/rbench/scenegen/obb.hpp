#pragma once

// Oriented bounding boxes of placed objects and the geometric queries the
// validity check is built from.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "rbench/core/geometry.hpp"

namespace rbench::scenegen {

struct OrientedBox {
  Vec3 center = Vec3::Zero();
  Mat3 axes = Mat3::Identity();  ///< columns are the box axes in world frame
  Vec3 half = Vec3::Ones();

  std::array<Vec3, 8> vertices() const {
    std::array<Vec3, 8> out;
    int i = 0;
    for (double sx : {-1.0, 1.0}) {
      for (double sy : {-1.0, 1.0}) {
        for (double sz : {-1.0, 1.0}) {
          out[i++] = center + axes * Vec3(sx * half.x(), sy * half.y(), sz * half.z());
        }
      }
    }
    return out;
  }

  double min_along(const Vec3& dir) const {
    return center.dot(dir) - projected_radius(dir);
  }
  double max_along(const Vec3& dir) const {
    return center.dot(dir) + projected_radius(dir);
  }

  double projected_radius(const Vec3& dir) const {
    return half.x() * std::abs(axes.col(0).dot(dir)) + half.y() * std::abs(axes.col(1).dot(dir)) +
           half.z() * std::abs(axes.col(2).dot(dir));
  }

  double bottom() const { return min_along(Vec3::UnitZ()); }
  double top() const { return max_along(Vec3::UnitZ()); }

  /// True if p lies inside the box shrunk by `inset` on every face.
  bool contains(const Vec3& p, double inset = 0.0) const {
    const Vec3 local = axes.transpose() * (p - center);
    for (int k = 0; k < 3; ++k) {
      if (std::abs(local[k]) >= half[k] - inset) return false;
    }
    return true;
  }
};

/// World-frame box of an object model placed at pose.
inline OrientedBox world_box(const BoundingBox& bbox, const Pose& pose) {
  return {pose.apply(bbox.local_center()), pose.rotation.matrix(), bbox.half_extents()};
}

/// Minimum over the 15 separating-axis candidates of (ra + rb - |d·L|).
/// Positive: the boxes overlap and the value is the penetration depth along
/// the least-overlapping axis. Negative: the boxes are separated by at least
/// the absolute value.
inline double sat_overlap(const OrientedBox& a, const OrientedBox& b) {
  const Vec3 d = b.center - a.center;
  double best = std::numeric_limits<double>::infinity();
  auto test = [&](Vec3 axis) {
    const double n = axis.norm();
    if (n < 1e-9) return;  // parallel edges: axis already covered by face normals
    axis /= n;
    const double overlap = a.projected_radius(axis) + b.projected_radius(axis) - std::abs(d.dot(axis));
    best = std::min(best, overlap);
  };
  for (int i = 0; i < 3; ++i) test(a.axes.col(i));
  for (int i = 0; i < 3; ++i) test(b.axes.col(i));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) test(a.axes.col(i).cross(b.axes.col(j)));
  }
  return best;
}

// ---- 2D footprints ----

using Point2 = Eigen::Vector2d;
using Polygon2 = std::vector<Point2>;

inline double cross2(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

/// Counter-clockwise convex hull (monotone chain), collinear points dropped.
inline Polygon2 convex_hull(Polygon2 pts) {
  std::sort(pts.begin(), pts.end(),
            [](const Point2& a, const Point2& b) { return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y()); });
  if (pts.size() < 3) return pts;
  Polygon2 hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross2(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

inline double polygon_area(const Polygon2& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % poly.size()];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return std::abs(a) / 2.0;
}

/// Sutherland-Hodgman clip of a convex subject by a convex CCW clip polygon.
inline Polygon2 clip_convex(const Polygon2& subject, const Polygon2& clip) {
  Polygon2 out = subject;
  for (std::size_t i = 0; i < clip.size() && !out.empty(); ++i) {
    const Point2& a = clip[i];
    const Point2& b = clip[(i + 1) % clip.size()];
    Polygon2 in = std::move(out);
    out.clear();
    for (std::size_t j = 0; j < in.size(); ++j) {
      const Point2& p = in[j];
      const Point2& q = in[(j + 1) % in.size()];
      const double sp = cross2(a, b, p);
      const double sq = cross2(a, b, q);
      if (sp >= 0) out.push_back(p);
      if ((sp >= 0) != (sq >= 0)) {
        const double t = sp / (sp - sq);
        out.push_back(p + t * (q - p));
      }
    }
  }
  return out;
}

/// Projection of the box onto the table plane.
inline Polygon2 footprint(const OrientedBox& box) {
  Polygon2 pts;
  for (const Vec3& v : box.vertices()) pts.emplace_back(v.x(), v.y());
  return convex_hull(std::move(pts));
}

/// Fraction of a's footprint covered by b's footprint.
inline double footprint_overlap_fraction(const OrientedBox& a, const OrientedBox& b) {
  const Polygon2 fa = footprint(a);
  const double area = polygon_area(fa);
  if (area <= 0.0) return 0.0;
  return polygon_area(clip_convex(fa, footprint(b))) / area;
}

}  // namespace rbench::scenegen
