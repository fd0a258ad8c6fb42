#include "csm/edgehead.hpp"

#include <cmath>
#include <optional>

namespace csm {

namespace {

constexpr double kPlacementTol = 1e-9;

}  // namespace

Point2 closest_vertex(const BevBox& box) { return sort_vertices_cs(box).v1; }

BevBox rotate_to(const BevBox& anchor, double yaw) { return anchor.with_yaw(yaw); }

EdgeTargets encode_targets(const Box3D& anchor, const Box3D& gt) {
  const double gt_yaw = gt.bev().yaw();
  const Point2 anchor_cv = closest_vertex(rotate_to(anchor.bev(), gt_yaw));
  const Point2 gt_cv = closest_vertex(gt.bev());
  return {gt_cv.x - anchor_cv.x, gt_cv.y - anchor_cv.y, wrap_angle(gt_yaw - anchor.bev().yaw())};
}

EdgeTargets naive_vertex_targets(const Box3D& anchor, const Box3D& gt) {
  const Point2 anchor_cv = closest_vertex(anchor.bev());
  const Point2 gt_cv = closest_vertex(gt.bev());
  return {gt_cv.x - anchor_cv.x, gt_cv.y - anchor_cv.y,
          wrap_angle(gt.bev().yaw() - anchor.bev().yaw())};
}

BevBox place_closest_vertex(const BevBox& box, Point2 target) {
  // Every corner is a candidate anchor point for the target; keep the valid
  // placement needing the shortest translation.
  const auto corners = bev_vertices(box);
  std::optional<BevBox> best;
  double best_shift = 0.0;
  for (const Point2& corner : corners) {
    const Point2 shift = target - corner;
    const BevBox candidate = box.with_center(box.center() + shift);
    if (norm(closest_vertex(candidate) - target) > kPlacementTol) continue;
    if (!best || norm(shift) < best_shift) {
      best = candidate;
      best_shift = norm(shift);
    }
  }
  if (best) return *best;

  // Origin expressed relative to the target point, in box-aligned axes.
  const double c = std::cos(box.yaw());
  const double s = std::sin(box.yaw());
  const Point2 q{-(c * target.x + s * target.y), -(-s * target.x + c * target.y)};
  const Point2 corner{q.x >= 0.0 ? 0.5 * box.length() : -0.5 * box.length(),
                      q.y >= 0.0 ? 0.5 * box.width() : -0.5 * box.width()};
  const Point2 offset{c * corner.x - s * corner.y, s * corner.x + c * corner.y};
  return box.with_center(target - offset);
}

Box3D decode_box(const Box3D& anchor, const EdgeTargets& residuals) {
  const double yaw = wrap_angle(anchor.bev().yaw() + residuals.dtheta);
  const BevBox rotated = rotate_to(anchor.bev(), yaw);
  const Point2 cv = closest_vertex(rotated);
  const Point2 target{cv.x + residuals.dx_cv, cv.y + residuals.dy_cv};
  return anchor.with_bev(place_closest_vertex(rotated, target));
}

double smooth_l1(double x, double beta) {
  if (!(beta > 0.0)) throw UsageError("smooth_l1 beta must be > 0");
  const double ax = std::abs(x);
  return ax < beta ? 0.5 * x * x / beta : ax - 0.5 * beta;
}

double smooth_l1_grad(double x, double beta) {
  if (!(beta > 0.0)) throw UsageError("smooth_l1 beta must be > 0");
  if (std::abs(x) < beta) return x / beta;
  return x > 0.0 ? 1.0 : -1.0;
}

double edgehead_loss(const EdgeTargets& pred, const EdgeTargets& target, const LossConfig& cfg) {
  return smooth_l1(pred.dx_cv - target.dx_cv, cfg.beta) +
         smooth_l1(pred.dy_cv - target.dy_cv, cfg.beta) +
         smooth_l1(wrap_angle(pred.dtheta - target.dtheta), cfg.beta);
}

CenterTargets control_group_targets(const Box3D& anchor, const Box3D& gt) {
  return {gt.bev().cx() - anchor.bev().cx(), gt.bev().cy() - anchor.bev().cy(),
          wrap_angle(gt.bev().yaw() - anchor.bev().yaw())};
}

double control_group_loss(const CenterTargets& pred, const CenterTargets& target,
                          const LossConfig& cfg) {
  return smooth_l1(pred.dx_c - target.dx_c, cfg.beta) +
         smooth_l1(pred.dy_c - target.dy_c, cfg.beta) +
         smooth_l1(wrap_angle(pred.dtheta - target.dtheta), cfg.beta);
}

}  // namespace csm
