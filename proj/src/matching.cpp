#include "csm/matching.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "csm/parallel.hpp"

namespace csm {

namespace {

constexpr double kUnassigned = -1.0;

struct Assignment {
  std::size_t gt = 0;
  bool found = false;
};

// Greedy claim of the best unclaimed ground truth among `candidates`.
Assignment best_unclaimed(const std::vector<double>& values, const std::vector<bool>& claimed,
                          const std::vector<bool>& candidates) {
  Assignment best;
  double best_value = kUnassigned;
  for (std::size_t g = 0; g < values.size(); ++g) {
    if (claimed[g] || !candidates[g]) continue;
    if (values[g] > best_value) {
      best_value = values[g];
      best = {g, true};
    }
  }
  return best;
}

void require_single_group(std::span<const Detection> dets, std::span<const GroundTruth> gts) {
  const std::string* frame = nullptr;
  const std::string* label = nullptr;
  auto check = [&](const std::string& f, const std::string& c) {
    if (frame == nullptr) {
      frame = &f;
      label = &c;
      return;
    }
    if (f != *frame) throw UsageError("match_frame: mixed frame ids '" + *frame + "' and '" + f + "'");
    if (c != *label) throw UsageError("match_frame: mixed classes '" + *label + "' and '" + c + "'");
  };
  for (const auto& d : dets) check(d.frame_id, d.class_label);
  for (const auto& g : gts) check(g.frame_id, g.class_label);
}

}  // namespace

std::string_view difficulty_name(DifficultyLevel level) {
  switch (level) {
    case DifficultyLevel::Easy:
      return "easy";
    case DifficultyLevel::Moderate:
      return "moderate";
    case DifficultyLevel::Hard:
      return "hard";
    case DifficultyLevel::All:
      return "all";
  }
  return "?";
}

std::optional<DifficultyLevel> parse_difficulty(std::string_view name) {
  for (auto level : {DifficultyLevel::Easy, DifficultyLevel::Moderate, DifficultyLevel::Hard,
                     DifficultyLevel::All}) {
    if (name == difficulty_name(level)) return level;
  }
  return std::nullopt;
}

std::optional<Difficulty> kitti_difficulty(const GroundTruth& gt) {
  if (!gt.attrs) return std::nullopt;
  const auto& a = *gt.attrs;
  if (a.bbox_height_px >= 40.0 && a.occlusion <= 0 && a.truncation <= 0.15) {
    return Difficulty::Easy;
  }
  if (a.bbox_height_px >= 25.0 && a.occlusion <= 1 && a.truncation <= 0.30) {
    return Difficulty::Moderate;
  }
  if (a.bbox_height_px >= 25.0 && a.occlusion <= 2 && a.truncation <= 0.50) {
    return Difficulty::Hard;
  }
  return Difficulty::Ignored;
}

bool included_at(const GroundTruth& gt, DifficultyLevel level) {
  const auto d = kitti_difficulty(gt);
  if (!d || level == DifficultyLevel::All) return true;
  if (*d == Difficulty::Ignored) return false;
  return static_cast<int>(*d) <= static_cast<int>(level);
}

std::size_t MatchResult::tp_count() const {
  return static_cast<std::size_t>(
      std::count_if(detections.begin(), detections.end(), [](auto& d) { return d.is_tp(); }));
}

std::size_t MatchResult::fp_count() const {
  return static_cast<std::size_t>(std::count_if(detections.begin(), detections.end(), [](auto& d) {
    return d.outcome == Outcome::FalsePositive;
  }));
}

MatchResult match_frame(std::span<const Detection> detections,
                        std::span<const GroundTruth> ground_truths, const MetricConfig& cfg,
                        DifficultyLevel level) {
  cfg.validate();
  require_single_group(detections, ground_truths);

  const std::size_t nd = detections.size();
  const std::size_t ng = ground_truths.size();

  // metric[d][g] is the evaluated score; assign[d][g] drives the greedy claim.
  std::vector<std::vector<double>> metric(nd, std::vector<double>(ng));
  std::vector<std::vector<double>> assign_storage;
  for (std::size_t d = 0; d < nd; ++d) {
    for (std::size_t g = 0; g < ng; ++g) {
      metric[d][g] = metric_score(cfg, detections[d].box, ground_truths[g].box);
    }
  }
  if (cfg.match_rule == MatchRule::BevAssign && cfg.kind != MetricKind::Bev) {
    assign_storage.assign(nd, std::vector<double>(ng));
    for (std::size_t d = 0; d < nd; ++d) {
      for (std::size_t g = 0; g < ng; ++g) {
        assign_storage[d][g] = bev_iou(detections[d].box.bev(), ground_truths[g].box.bev());
      }
    }
  }
  const auto& assign = assign_storage.empty() ? metric : assign_storage;

  std::vector<std::size_t> order(nd);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detections[a].score > detections[b].score;
  });

  std::vector<bool> included(ng);
  std::vector<bool> excluded(ng);
  for (std::size_t g = 0; g < ng; ++g) {
    included[g] = included_at(ground_truths[g], level);
    excluded[g] = !included[g];
  }

  MatchResult result;
  result.detections.resize(nd);
  result.gt_count = static_cast<std::size_t>(std::count(included.begin(), included.end(), true));

  std::vector<bool> claimed(ng, false);
  std::size_t tp = 0;
  for (std::size_t d : order) {
    result.detections[d].score = detections[d].score;
    const Assignment a = best_unclaimed(assign[d], claimed, included);
    if (a.found && metric[d][a.gt] >= cfg.iou_threshold) {
      claimed[a.gt] = true;
      result.detections[d].outcome = Outcome::TruePositive;
      ++tp;
      continue;
    }
    const Assignment dont_care = best_unclaimed(assign[d], claimed, excluded);
    if (dont_care.found && metric[d][dont_care.gt] >= cfg.iou_threshold) {
      claimed[dont_care.gt] = true;
      result.detections[d].outcome = Outcome::Ignored;
      continue;
    }
    result.detections[d].outcome = Outcome::FalsePositive;
  }
  result.fn_count = result.gt_count - tp;

  std::vector<bool> paired(ng, false);
  for (std::size_t d : order) {
    const Assignment a = best_unclaimed(assign[d], paired, included);
    if (!a.found || assign[d][a.gt] < cfg.match_floor) continue;
    paired[a.gt] = true;
    result.matched_pairs.push_back(
        {d, a.gt, metric[d][a.gt],
         closer_surfaces_gap(detections[d].box.bev(), ground_truths[a.gt].box.bev())});
  }
  return result;
}

PrCurve build_pr_curve(std::span<const MatchResult> frames) {
  PrCurve curve;
  std::vector<ScoredDetection> all;
  for (const auto& f : frames) {
    curve.gt_count += f.gt_count;
    for (const auto& d : f.detections) {
      if (d.outcome != Outcome::Ignored) all.push_back(d);
    }
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const auto& a, const auto& b) { return a.score > b.score; });

  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    (all[i].is_tp() ? tp : fp)++;
    // Equal scores form one cutoff; only its end is a point on the curve.
    if (i + 1 < all.size() && all[i + 1].score == all[i].score) continue;
    PrPoint p;
    p.tp = tp;
    p.fp = fp;
    p.recall = curve.gt_count == 0 ? 0.0 : static_cast<double>(tp) / curve.gt_count;
    p.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    curve.points.push_back(p);
  }
  return curve;
}

std::optional<double> average_precision(const PrCurve& curve, RecallMode mode) {
  if (curve.gt_count == 0) return std::nullopt;
  const std::size_t steps = mode == RecallMode::R40 ? 40 : 10;
  const std::size_t first = mode == RecallMode::R40 ? 1 : 0;

  // Running max from the tail gives the best precision at recall >= r.
  std::vector<double> best_tail(curve.points.size() + 1, 0.0);
  for (std::size_t i = curve.points.size(); i-- > 0;) {
    best_tail[i] = std::max(best_tail[i + 1], curve.points[i].precision);
  }

  double sum = 0.0;
  std::size_t k = 0;
  for (std::size_t i = first; i <= steps; ++i) {
    // recall >= i/steps  <=>  tp * steps >= i * gt_count, in exact integers.
    while (k < curve.points.size() && curve.points[k].tp * steps < i * curve.gt_count) ++k;
    sum += best_tail[k];
  }
  return sum / static_cast<double>(steps - first + 1);
}

const ReportEntry* EvalReport::find(std::string_view class_label, MetricKind kind) const {
  for (const auto& e : entries) {
    if (e.class_label == class_label && e.config.kind == kind) return &e;
  }
  return nullptr;
}

std::vector<std::string> class_labels(const Dataset& dataset) {
  std::set<std::string> labels;
  for (const auto& [id, f] : dataset.frames) {
    for (const auto& d : f.detections) labels.insert(d.class_label);
    for (const auto& g : f.ground_truths) labels.insert(g.class_label);
  }
  return {labels.begin(), labels.end()};
}

std::vector<MatchResult> match_dataset(const Dataset& dataset, const std::string& class_label,
                                       const MetricConfig& cfg, const EvalOptions& opts) {
  std::vector<const Frame*> frames;
  frames.reserve(dataset.frames.size());
  for (const auto& [id, f] : dataset.frames) frames.push_back(&f);

  std::vector<MatchResult> results(frames.size());
  parallel_for(frames.size(), opts.jobs, [&](std::size_t i) {
    std::vector<Detection> dets;
    std::vector<GroundTruth> gts;
    for (const auto& d : frames[i]->detections) {
      if (d.class_label == class_label) dets.push_back(d);
    }
    for (const auto& g : frames[i]->ground_truths) {
      if (g.class_label == class_label) gts.push_back(g);
    }
    results[i] = match_frame(dets, gts, cfg, opts.difficulty);
  });
  return results;
}

EvalReport evaluate(const Dataset& dataset, std::span<const MetricConfig> cfgs,
                    const EvalOptions& opts) {
  EvalReport report;
  for (const auto& cfg : cfgs) cfg.validate();
  for (const auto& label : class_labels(dataset)) {
    for (const auto& cfg : cfgs) {
      const auto frames = match_dataset(dataset, label, cfg, opts);
      const PrCurve curve = build_pr_curve(frames);
      ReportEntry entry;
      entry.class_label = label;
      entry.difficulty = opts.difficulty;
      entry.config = cfg;
      entry.ap = average_precision(curve, cfg.recall_mode);
      for (const auto& f : frames) {
        entry.tp += f.tp_count();
        entry.fp += f.fp_count();
        entry.fn += f.fn_count;
      }
      report.entries.push_back(std::move(entry));
    }
  }
  return report;
}

std::vector<double> matched_gaps(const Dataset& dataset, const std::string& class_label,
                                 const MetricConfig& cfg, const EvalOptions& opts) {
  std::vector<double> gaps;
  for (const auto& f : match_dataset(dataset, class_label, cfg, opts)) {
    for (const auto& p : f.matched_pairs) gaps.push_back(p.gap);
  }
  return gaps;
}

}  // namespace csm
