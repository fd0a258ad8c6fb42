#pragma once

// Greedy per-frame matching, precision-recall accumulation and interpolated
// average precision under any MetricKind.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csm/dataset.hpp"
#include "csm/metrics.hpp"

namespace csm {

enum class Difficulty { Easy, Moderate, Hard, Ignored };

/// Evaluation level; a level includes ground truths of every easier tier.
enum class DifficultyLevel { Easy, Moderate, Hard, All };

std::string_view difficulty_name(DifficultyLevel level);
std::optional<DifficultyLevel> parse_difficulty(std::string_view name);

/// KITTI tiers:
///   Easy      height >= 40 px, occlusion <= 0, truncation <= 0.15
///   Moderate  height >= 25 px, occlusion <= 1, truncation <= 0.30
///   Hard      height >= 25 px, occlusion <= 2, truncation <= 0.50
/// Returns nullopt when the attributes are absent (always included).
std::optional<Difficulty> kitti_difficulty(const GroundTruth& gt);

bool included_at(const GroundTruth& gt, DifficultyLevel level);

enum class Outcome { TruePositive, FalsePositive, Ignored };

struct ScoredDetection {
  double score = 0.0;
  Outcome outcome = Outcome::FalsePositive;

  bool is_tp() const { return outcome == Outcome::TruePositive; }
};

/// A detection/ground-truth pair above the match floor, kept for G_cs
/// distributions. Indices refer to the spans passed to match_frame.
struct MatchedPair {
  std::size_t detection = 0;
  std::size_t ground_truth = 0;
  double metric_value = 0.0;
  double gap = 0.0;
};

struct MatchResult {
  /// Same order as the input detections.
  std::vector<ScoredDetection> detections;
  std::size_t gt_count = 0;  // ground truths included at the evaluated level
  std::size_t fn_count = 0;
  std::vector<MatchedPair> matched_pairs;

  std::size_t tp_count() const;
  std::size_t fp_count() const;
};

/// Detections are visited in descending score (ties in input order); each one
/// claims the unmatched ground truth with the highest metric value and is a
/// true positive iff that value reaches cfg.iou_threshold. A detection that
/// only reaches the threshold against a ground truth excluded by `level` is
/// ignored rather than counted as a false positive.
///
/// matched_pairs comes from an independent greedy pass at cfg.match_floor.
///
/// Throws UsageError if the inputs span more than one frame or class.
MatchResult match_frame(std::span<const Detection> detections,
                        std::span<const GroundTruth> ground_truths, const MetricConfig& cfg,
                        DifficultyLevel level = DifficultyLevel::All);

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
};

/// One point per distinct score cutoff, in descending score order.
struct PrCurve {
  std::vector<PrPoint> points;
  std::size_t gt_count = 0;
};

PrCurve build_pr_curve(std::span<const MatchResult> frames);

/// Interpolated AP: the mean over recall positions r of the best precision at
/// recall >= r. R40 uses r = 1/40..40/40, R11 uses r = 0, 0.1, ..., 1.
/// Returns nullopt when the curve has no ground truths.
std::optional<double> average_precision(const PrCurve& curve, RecallMode mode);

struct ReportEntry {
  std::string class_label;
  DifficultyLevel difficulty = DifficultyLevel::All;
  MetricConfig config;
  std::optional<double> ap;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct EvalReport {
  std::vector<ReportEntry> entries;

  const ReportEntry* find(std::string_view class_label, MetricKind kind) const;
};

struct EvalOptions {
  DifficultyLevel difficulty = DifficultyLevel::All;
  /// Worker threads; 0 selects the hardware concurrency. Output never
  /// depends on this value.
  unsigned jobs = 1;
};

/// Class labels seen in detections or ground truths, sorted.
std::vector<std::string> class_labels(const Dataset& dataset);

/// Matches every frame of `dataset` for one class, in frame-id order.
std::vector<MatchResult> match_dataset(const Dataset& dataset, const std::string& class_label,
                                       const MetricConfig& cfg, const EvalOptions& opts = {});

/// Per class (sorted) and per config (in the given order): match all frames,
/// accumulate the PR curve and emit AP.
EvalReport evaluate(const Dataset& dataset, std::span<const MetricConfig> cfgs,
                    const EvalOptions& opts = {});

/// G_cs values of every matched pair of `class_label`, in frame order.
std::vector<double> matched_gaps(const Dataset& dataset, const std::string& class_label,
                                 const MetricConfig& cfg, const EvalOptions& opts = {});

}  // namespace csm
