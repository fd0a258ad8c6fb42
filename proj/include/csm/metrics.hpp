#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "csm/geometry.hpp"

namespace csm {

enum class MetricKind { Bev, Iou3d, CsAbs, CsBev };

enum class RecallMode { R11, R40 };

/// How detections are paired with ground truth during matching.
///  SameMetric: greedy assignment by the evaluated metric's value.
///  BevAssign:  greedy assignment by BEV IoU; the evaluated metric then scores
///              the assigned pair against the threshold.
enum class MatchRule { SameMetric, BevAssign };

/// Column name used in reports: "BEV", "3D", "CS-ABS", "CS-BEV".
std::string_view metric_name(MetricKind kind);
std::optional<MetricKind> parse_metric_name(std::string_view name);

/// Default penalty ratio for the closer-surfaces scores.
inline constexpr double kDefaultAlpha = 1.0;
/// Alpha range in which the closer-surfaces scores behave well in practice.
inline constexpr double kPracticalAlphaLo = 0.5;
inline constexpr double kPracticalAlphaHi = 1.5;

/// Default true-positive thresholds: 0.7 for BEV, 3D and CS-ABS; 0.5 for CS-BEV,
/// which rarely reaches 0.7.
double default_threshold(MetricKind kind);

struct MetricConfig {
  MetricKind kind = MetricKind::Bev;
  double alpha = kDefaultAlpha;
  double iou_threshold = 0.7;
  RecallMode recall_mode = RecallMode::R40;
  /// Permissive floor on the metric value for recording matched pairs.
  double match_floor = 0.1;
  MatchRule match_rule = MatchRule::SameMetric;

  /// Config for `kind` with its default threshold and every other field at
  /// its default.
  static MetricConfig for_kind(MetricKind kind);

  /// Throws UsageError when alpha < 0, threshold outside (0,1] or floor
  /// outside [0,1).
  void validate() const;
};

/// 1 / (1 + alpha * G_cs).
double cs_abs_score(const BevBox& pred, const BevBox& gt, double alpha = kDefaultAlpha);

/// BEV IoU / (1 + alpha * G_cs); never exceeds the plain BEV IoU.
double cs_bev_score(const BevBox& pred, const BevBox& gt, double alpha = kDefaultAlpha);

/// Dispatches on cfg.kind. The closer-surfaces scores use the BEV projections.
double metric_score(const MetricConfig& cfg, const Box3D& pred, const Box3D& gt);

}  // namespace csm
