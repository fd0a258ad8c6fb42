#include "csm/metrics.hpp"

#include <cmath>

namespace csm {

namespace {

void require_alpha(double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw UsageError("alpha must be a finite value >= 0");
  }
}

}  // namespace

std::string_view metric_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::Bev:
      return "BEV";
    case MetricKind::Iou3d:
      return "3D";
    case MetricKind::CsAbs:
      return "CS-ABS";
    case MetricKind::CsBev:
      return "CS-BEV";
  }
  return "?";
}

std::optional<MetricKind> parse_metric_name(std::string_view name) {
  for (auto kind : {MetricKind::Bev, MetricKind::Iou3d, MetricKind::CsAbs, MetricKind::CsBev}) {
    if (name == metric_name(kind)) return kind;
  }
  if (name == "bev") return MetricKind::Bev;
  if (name == "3d") return MetricKind::Iou3d;
  if (name == "cs-abs") return MetricKind::CsAbs;
  if (name == "cs-bev") return MetricKind::CsBev;
  return std::nullopt;
}

double default_threshold(MetricKind kind) { return kind == MetricKind::CsBev ? 0.5 : 0.7; }

MetricConfig MetricConfig::for_kind(MetricKind kind) {
  MetricConfig cfg;
  cfg.kind = kind;
  cfg.iou_threshold = default_threshold(kind);
  return cfg;
}

void MetricConfig::validate() const {
  require_alpha(alpha);
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw UsageError("iou threshold must lie in (0, 1]");
  }
  if (!(match_floor >= 0.0 && match_floor < 1.0)) {
    throw UsageError("match floor must lie in [0, 1)");
  }
}

double cs_abs_score(const BevBox& pred, const BevBox& gt, double alpha) {
  require_alpha(alpha);
  if (alpha == 0.0) return 1.0;
  return 1.0 / (1.0 + alpha * closer_surfaces_gap(pred, gt));
}

double cs_bev_score(const BevBox& pred, const BevBox& gt, double alpha) {
  require_alpha(alpha);
  const double iou = bev_iou(pred, gt);
  if (alpha == 0.0 || iou == 0.0) return iou;
  return iou / (1.0 + alpha * closer_surfaces_gap(pred, gt));
}

double metric_score(const MetricConfig& cfg, const Box3D& pred, const Box3D& gt) {
  switch (cfg.kind) {
    case MetricKind::Bev:
      return bev_iou(pred.bev(), gt.bev());
    case MetricKind::Iou3d:
      return iou_3d(pred, gt);
    case MetricKind::CsAbs:
      return cs_abs_score(pred.bev(), gt.bev(), cfg.alpha);
    case MetricKind::CsBev:
      return cs_bev_score(pred.bev(), gt.bev(), cfg.alpha);
  }
  throw UsageError("unknown metric kind");
}

}  // namespace csm
