#pragma once

// Closest-vertex regression targets for a box refinement head.
//
// Only the closest vertex (x, y) and the heading are refined; z, length, width
// and height stay as the anchor provides them. Targets are computed after
// rotating the anchor to the ground-truth heading so that regressing the
// vertex and the heading together still lands the vertex on the ground truth's.

#include "csm/geometry.hpp"

namespace csm {

struct EdgeTargets {
  double dx_cv = 0.0;
  double dy_cv = 0.0;
  double dtheta = 0.0;  // (-pi, pi]
};

/// Center-offset targets of the control-group loss.
struct CenterTargets {
  double dx_c = 0.0;
  double dy_c = 0.0;
  double dtheta = 0.0;  // (-pi, pi]
};

struct LossConfig {
  double beta = 1.0;  // smooth-l1 transition point, > 0
};

/// v1 of the closer-surfaces vertex ordering.
Point2 closest_vertex(const BevBox& box);

/// Anchor rotated about its own center to `yaw`.
BevBox rotate_to(const BevBox& anchor, double yaw);

EdgeTargets encode_targets(const Box3D& anchor, const Box3D& gt);

/// Rotation-free variant: residuals of the anchor's own closest vertex. Kept
/// to show why the rotation step is needed.
EdgeTargets naive_vertex_targets(const Box3D& anchor, const Box3D& gt);

/// Rotates the anchor to its refined heading and translates it so that its
/// closest vertex sits at the rotated anchor's closest vertex plus
/// (dx_cv, dy_cv). When several translations achieve that (a different corner
/// becoming the closest one), the shortest is used.
Box3D decode_box(const Box3D& anchor, const EdgeTargets& residuals);

/// Translates `box` as little as possible so its closest vertex is `target`.
BevBox place_closest_vertex(const BevBox& box, Point2 target);

double smooth_l1(double x, double beta = 1.0);
/// d/dx smooth_l1: x / beta inside the quadratic zone, sign(x) outside.
double smooth_l1_grad(double x, double beta = 1.0);

/// Sum of smooth-l1 over the dx_cv, dy_cv and wrapped dtheta residuals.
double edgehead_loss(const EdgeTargets& pred, const EdgeTargets& target,
                     const LossConfig& cfg = {});

CenterTargets control_group_targets(const Box3D& anchor, const Box3D& gt);

double control_group_loss(const CenterTargets& pred, const CenterTargets& target,
                          const LossConfig& cfg = {});

}  // namespace csm
