#pragma once

// Oriented-rectangle geometry on the bird's-eye-view plane.
//
// Frame: origin at the sensor, x forward, y left, yaw counterclockwise from +x.
// All lengths are meters, all angles radians.

#include <array>
#include <numbers>
#include <span>

#include "csm/errors.hpp"

namespace csm {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }

double cross(Point2 a, Point2 b);
double dot(Point2 a, Point2 b);
double norm(Point2 p);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double radians);

/// Oriented rectangle. Construction rejects non-positive extents and
/// non-finite fields, and normalizes yaw into (-pi, pi].
class BevBox {
 public:
  BevBox(double cx, double cy, double length, double width, double yaw);

  double cx() const { return cx_; }
  double cy() const { return cy_; }
  Point2 center() const { return {cx_, cy_}; }
  /// Extent along the heading.
  double length() const { return length_; }
  /// Extent perpendicular to the heading.
  double width() const { return width_; }
  double yaw() const { return yaw_; }
  double area() const { return length_ * width_; }

  BevBox with_center(Point2 c) const { return {c.x, c.y, length_, width_, yaw_}; }
  BevBox with_yaw(double yaw) const { return {cx_, cy_, length_, width_, yaw}; }
  BevBox with_size(double length, double width) const {
    return {cx_, cy_, length, width, yaw_};
  }

  /// Maps a point in box-local coordinates (x along heading) to the BEV frame.
  Point2 to_world(Point2 local) const;
  /// Inverse of to_world.
  Point2 to_local(Point2 world) const;

  friend bool operator==(const BevBox&, const BevBox&) = default;

 private:
  double cx_, cy_, length_, width_, yaw_;
};

class Box3D {
 public:
  Box3D(const BevBox& bev, double cz, double height);

  const BevBox& bev() const { return bev_; }
  double cz() const { return cz_; }
  double height() const { return height_; }
  double z_min() const { return cz_ - 0.5 * height_; }
  double z_max() const { return cz_ + 0.5 * height_; }
  double volume() const { return bev_.area() * height_; }

  Box3D with_bev(const BevBox& bev) const { return {bev, cz_, height_}; }

  friend bool operator==(const Box3D&, const Box3D&) = default;

 private:
  BevBox bev_;
  double cz_, height_;
};

/// Box corners v1..v4 ranked for the closer-surfaces comparison: v1 is the
/// corner nearest the origin, v4 the farthest, and of the remaining two v2
/// has the smaller |x|.
struct OrderedVertices {
  Point2 v1, v2, v3, v4;
};

struct Edge {
  Point2 a, b;
};

/// Corners of the box in counterclockwise order, starting at the rear-right
/// corner (-length/2, -width/2) in local coordinates.
std::array<Point2, 4> bev_vertices(const BevBox& box);

/// Distances are compared with an absolute tolerance of 1e-9; ties go to the
/// smaller |x|, then the smaller y. Throws InvalidGeometry on coincident points.
OrderedVertices sort_vertices_cs(const std::array<Point2, 4>& vertices);
OrderedVertices sort_vertices_cs(const BevBox& box);

/// Perpendicular distance from p to the infinite line through the edge.
double point_to_edge_distance(Point2 p, const Edge& e);

/// Area of the intersection of two convex polygons given in counterclockwise
/// order (Sutherland-Hodgman clip of `subject` against `clip`).
double convex_polygon_intersection_area(std::span<const Point2> subject,
                                        std::span<const Point2> clip);
double polygon_area(std::span<const Point2> polygon);

double convex_intersection_area(const BevBox& a, const BevBox& b);
double bev_iou(const BevBox& a, const BevBox& b);
double iou_3d(const Box3D& a, const Box3D& b);

/// Absolute gap between the closer surfaces of a prediction and its ground
/// truth: |v1_pred - v1_gt| + dist(v2_pred, line(v1_gt, v2_gt))
///                        + dist(v3_pred, line(v1_gt, v3_gt)).
double closer_surfaces_gap(const BevBox& pred, const BevBox& gt);

}  // namespace csm
