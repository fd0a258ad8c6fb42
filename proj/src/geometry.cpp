#include "csm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace csm {

namespace {

constexpr double kDistanceTieTol = 1e-9;
constexpr double kCoincidentTol = 1e-12;

void require_finite(double v, const char* field) {
  if (!std::isfinite(v)) {
    throw InvalidGeometry(std::string("non-finite box field: ") + field);
  }
}

// Strict "nearer than" for the vertex ranking, with the documented tie rule.
bool ranks_before(Point2 a, Point2 b) {
  const double da = norm(a);
  const double db = norm(b);
  if (std::abs(da - db) > kDistanceTieTol) return da < db;
  if (std::abs(std::abs(a.x) - std::abs(b.x)) > kDistanceTieTol) {
    return std::abs(a.x) < std::abs(b.x);
  }
  if (std::abs(a.y - b.y) > kDistanceTieTol) return a.y < b.y;
  return a.x < b.x;  // mirror images of each other
}

}  // namespace

double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
double norm(Point2 p) { return std::hypot(p.x, p.y); }

double wrap_angle(double radians) {
  constexpr double kPi = std::numbers::pi;
  double r = std::remainder(radians, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

BevBox::BevBox(double cx, double cy, double length, double width, double yaw)
    : cx_(cx), cy_(cy), length_(length), width_(width), yaw_(0.0) {
  require_finite(cx, "cx");
  require_finite(cy, "cy");
  require_finite(length, "length");
  require_finite(width, "width");
  require_finite(yaw, "yaw");
  if (!(length > 0.0) || !(width > 0.0)) {
    throw InvalidGeometry("box extents must be positive (length=" +
                          std::to_string(length) + ", width=" + std::to_string(width) + ")");
  }
  yaw_ = wrap_angle(yaw);
}

Point2 BevBox::to_world(Point2 local) const {
  const double c = std::cos(yaw_);
  const double s = std::sin(yaw_);
  return {cx_ + c * local.x - s * local.y, cy_ + s * local.x + c * local.y};
}

Point2 BevBox::to_local(Point2 world) const {
  const double c = std::cos(yaw_);
  const double s = std::sin(yaw_);
  const double dx = world.x - cx_;
  const double dy = world.y - cy_;
  return {c * dx + s * dy, -s * dx + c * dy};
}

Box3D::Box3D(const BevBox& bev, double cz, double height)
    : bev_(bev), cz_(cz), height_(height) {
  require_finite(cz, "cz");
  require_finite(height, "height");
  if (!(height > 0.0)) {
    throw InvalidGeometry("box height must be positive (height=" + std::to_string(height) + ")");
  }
}

std::array<Point2, 4> bev_vertices(const BevBox& box) {
  const double hl = 0.5 * box.length();
  const double hw = 0.5 * box.width();
  return {box.to_world({-hl, -hw}), box.to_world({hl, -hw}), box.to_world({hl, hw}),
          box.to_world({-hl, hw})};
}

OrderedVertices sort_vertices_cs(const std::array<Point2, 4>& vertices) {
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (std::size_t j = i + 1; j < vertices.size(); ++j) {
      if (norm(vertices[i] - vertices[j]) <= kCoincidentTol) {
        throw InvalidGeometry("coincident box vertices");
      }
    }
  }

  // Insertion sort keeps the ranking deterministic even though the tolerant
  // comparison is not a strict weak order near ties.
  std::array<Point2, 4> v = vertices;
  for (std::size_t i = 1; i < v.size(); ++i) {
    for (std::size_t j = i; j > 0 && ranks_before(v[j], v[j - 1]); --j) {
      std::swap(v[j], v[j - 1]);
    }
  }

  Point2 second = v[1];
  Point2 third = v[2];
  const double ax = std::abs(second.x);
  const double bx = std::abs(third.x);
  bool swap = bx < ax;
  if (std::abs(ax - bx) <= kDistanceTieTol) {
    swap = std::abs(third.y - second.y) > kDistanceTieTol ? third.y < second.y : third.x < second.x;
  }
  if (swap) {
    std::swap(second, third);
  }
  return {v[0], second, third, v[3]};
}

OrderedVertices sort_vertices_cs(const BevBox& box) { return sort_vertices_cs(bev_vertices(box)); }

double point_to_edge_distance(Point2 p, const Edge& e) {
  const Point2 d = e.b - e.a;
  const double len = norm(d);
  if (!(len > kCoincidentTol)) throw InvalidGeometry("degenerate edge");
  return std::abs(cross(d, p - e.a)) / len;
}

double polygon_area(std::span<const Point2> polygon) {
  if (polygon.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    twice += cross(polygon[i], polygon[(i + 1) % polygon.size()]);
  }
  return 0.5 * twice;
}

double convex_polygon_intersection_area(std::span<const Point2> subject,
                                        std::span<const Point2> clip) {
  std::vector<Point2> out(subject.begin(), subject.end());
  std::vector<Point2> in;
  for (std::size_t k = 0; k < clip.size() && !out.empty(); ++k) {
    const Point2 a = clip[k];
    const Point2 b = clip[(k + 1) % clip.size()];
    const Point2 dir = b - a;
    in.swap(out);
    out.clear();
    for (std::size_t i = 0; i < in.size(); ++i) {
      const Point2 p = in[i];
      const Point2 q = in[(i + 1) % in.size()];
      const double sp = cross(dir, p - a);
      const double sq = cross(dir, q - a);
      if (sp >= 0.0) out.push_back(p);
      if ((sp >= 0.0) != (sq >= 0.0)) {
        const double t = sp / (sp - sq);
        out.push_back(p + t * (q - p));
      }
    }
  }
  return std::max(0.0, polygon_area(out));
}

double convex_intersection_area(const BevBox& a, const BevBox& b) {
  const auto va = bev_vertices(a);
  const auto vb = bev_vertices(b);
  return convex_polygon_intersection_area(va, vb);
}

double bev_iou(const BevBox& a, const BevBox& b) {
  const double inter = convex_intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double iou_3d(const Box3D& a, const Box3D& b) {
  const double dz = std::min(a.z_max(), b.z_max()) - std::max(a.z_min(), b.z_min());
  if (dz <= 0.0) return 0.0;
  const double inter = convex_intersection_area(a.bev(), b.bev()) * dz;
  const double uni = a.volume() + b.volume() - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double closer_surfaces_gap(const BevBox& pred, const BevBox& gt) {
  const OrderedVertices p = sort_vertices_cs(pred);
  const OrderedVertices g = sort_vertices_cs(gt);
  return norm(p.v1 - g.v1) + point_to_edge_distance(p.v2, {g.v1, g.v2}) +
         point_to_edge_distance(p.v3, {g.v1, g.v3});
}

}  // namespace csm
