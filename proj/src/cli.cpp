#include "csm/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "csm/dataio.hpp"
#include "csm/edgehead.hpp"
#include "csm/matching.hpp"
#include "csm/reports.hpp"
#include "csm/synth.hpp"

namespace csm {

namespace fs = std::filesystem;

namespace {

struct Options {
  // metric flags
  std::vector<std::string> metrics;
  double alpha = kDefaultAlpha;
  std::optional<double> iou_thresh;
  int recall = 40;
  double match_floor = 0.1;
  std::string match_rule = "same";
  // I/O
  std::string format = "jsonl";
  std::string gt, pred, pred_b, out, svg_out, diff_csv, input, out_dir;
  std::string difficulty = "auto";
  bool range_filter = false;
  std::vector<double> range;
  std::size_t bins = kDefaultBins;
  std::vector<double> interval{kDefaultIntervalLo, kDefaultIntervalHi};
  std::string targets = "edge";
  unsigned jobs = 0;
  SynthConfig synth;
};

unsigned default_jobs() {
  if (const char* env = std::getenv("CSM_JOBS")) {
    try {
      return static_cast<unsigned>(std::stoul(env));
    } catch (const std::exception&) {
    }
  }
  return 0;
}

void require(bool present, const char* flag, const std::string& command) {
  if (!present) throw UsageError(command + ": missing required option " + flag);
}

std::vector<MetricConfig> metric_configs(const Options& o) {
  std::vector<std::string> names = o.metrics;
  if (names.empty()) names = {"BEV", "3D", "CS-ABS", "CS-BEV"};
  std::vector<MetricConfig> cfgs;
  for (const auto& n : names) {
    const auto kind = parse_metric_name(n);
    if (!kind) throw UsageError("unknown metric '" + n + "' (use BEV, 3D, CS-ABS or CS-BEV)");
    MetricConfig cfg = MetricConfig::for_kind(*kind);
    cfg.alpha = o.alpha;
    if (o.iou_thresh) cfg.iou_threshold = *o.iou_thresh;
    cfg.recall_mode = o.recall == 11 ? RecallMode::R11 : RecallMode::R40;
    cfg.match_floor = o.match_floor;
    cfg.match_rule = o.match_rule == "bev" ? MatchRule::BevAssign : MatchRule::SameMetric;
    cfg.validate();
    cfgs.push_back(cfg);
  }
  return cfgs;
}

Dataset load_dataset(const Options& o, const std::string& pred_path, std::ostream& err) {
  Dataset ds;
  if (o.format == "kitti") {
    std::vector<std::string> warnings;
    ds = read_kitti_labels(o.gt, pred_path.empty() ? std::nullopt
                                                   : std::optional<fs::path>(pred_path),
                           &warnings);
    for (const auto& w : warnings) err << "warning: " << w << '\n';
  } else {
    ds = read_jsonl(o.gt);
    if (!pred_path.empty()) ds.merge(read_jsonl(pred_path));
  }
  if (o.range_filter) {
    RangeFilter r;
    if (!o.range.empty()) {
      if (o.range.size() != 6) throw UsageError("--range needs 6 values");
      r = {o.range[0], o.range[1], o.range[2], o.range[3], o.range[4], o.range[5]};
    }
    ds = apply_range_filter(ds, r);
  }
  return ds;
}

DifficultyLevel difficulty_for(const Options& o, const Dataset& ds) {
  if (o.difficulty == "auto") {
    return ds.has_difficulty_attrs() ? DifficultyLevel::Moderate : DifficultyLevel::All;
  }
  return *parse_difficulty(o.difficulty);
}

// Writes to --out when given, otherwise to the report stream.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

Histogram histogram_for(const Dataset& ds, const Options& o, const EvalOptions& eo) {
  if (o.interval.size() != 2) throw UsageError("--interval needs two values: lo hi");
  MetricConfig cfg = MetricConfig::for_kind(MetricKind::Bev);
  cfg.match_floor = o.match_floor;
  cfg.validate();
  std::vector<double> gaps;
  for (const auto& label : class_labels(ds)) {
    const auto g = matched_gaps(ds, label, cfg, eo);
    gaps.insert(gaps.end(), g.begin(), g.end());
  }
  return gcs_histogram(gaps, o.interval[0], o.interval[1], o.bins);
}

int cmd_evaluate(const Options& o, std::ostream& out, std::ostream& err) {
  require(!o.gt.empty(), "--gt", "evaluate");
  require(!o.pred.empty(), "--pred", "evaluate");
  const auto cfgs = metric_configs(o);
  const Dataset ds = load_dataset(o, o.pred, err);
  const EvalOptions eo{difficulty_for(o, ds), o.jobs};
  std::ostringstream csv;
  write_report_csv(evaluate(ds, cfgs, eo), csv);
  emit(o.out, csv.str(), out);
  return kExitOk;
}

int cmd_compare(const Options& o, std::ostream& out, std::ostream& err) {
  require(!o.gt.empty(), "--gt", "compare");
  require(!o.pred.empty(), "--pred", "compare");
  require(!o.pred_b.empty(), "--pred-b", "compare");
  const auto cfgs = metric_configs(o);
  const Dataset a = load_dataset(o, o.pred, err);
  const Dataset b = load_dataset(o, o.pred_b, err);
  const EvalOptions eo{difficulty_for(o, a), o.jobs};

  std::ostringstream table;
  write_comparison_csv(evaluate(a, cfgs, eo), evaluate(b, cfgs, eo), table);
  emit(o.out, table.str(), out);

  if (!o.svg_out.empty() || !o.diff_csv.empty()) {
    const Histogram ha = histogram_for(a, o, eo);
    const Histogram hb = histogram_for(b, o, eo);
    if (ha.total_pairs == 0 || hb.total_pairs == 0) {
      throw UsageError("compare: no matched pairs to build G_cs distributions");
    }
    if (!o.svg_out.empty()) {
      SvgStyle style;
      style.title = "G_cs proportion difference (B - A)";
      write_text_file(o.svg_out, render_svg(proportion_difference(ha, hb), style));
    }
    std::string diff_path = o.diff_csv;
    if (diff_path.empty()) diff_path = fs::path(o.svg_out).replace_extension(".csv").string();
    std::ostringstream diff;
    write_diff_csv(ha, hb, diff);
    write_text_file(diff_path, diff.str());
  }
  return kExitOk;
}

int cmd_gcs_hist(const Options& o, std::ostream& out, std::ostream& err) {
  require(!o.gt.empty(), "--gt", "gcs-hist");
  require(!o.pred.empty(), "--pred", "gcs-hist");
  const Dataset ds = load_dataset(o, o.pred, err);
  const EvalOptions eo{difficulty_for(o, ds), o.jobs};
  const Histogram h = histogram_for(ds, o, eo);
  std::ostringstream csv;
  write_histogram_csv(h, csv);
  emit(o.out, csv.str(), out);
  if (!o.svg_out.empty()) {
    SvgStyle style;
    style.title = "G_cs distribution";
    write_text_file(o.svg_out, render_svg(h, style));
  }
  return kExitOk;
}

int cmd_encode(const Options& o, std::ostream& out) {
  require(!o.input.empty(), "--input", "encode");
  std::ifstream in(o.input);
  if (!in) throw IoError("cannot open " + o.input);
  std::ostringstream lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = o.input + ":" + std::to_string(line_no);
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
      if (!rec.is_object() || !rec.contains("anchor") || !rec.contains("gt")) {
        throw ParseError("record needs 'anchor' and 'gt' boxes");
      }
      const Box3D anchor = box_from_json(rec["anchor"]);
      const Box3D gt = box_from_json(rec["gt"]);
      nlohmann::json result;
      if (o.targets == "center") {
        const CenterTargets t = control_group_targets(anchor, gt);
        result = {{"dx_c", t.dx_c}, {"dy_c", t.dy_c}, {"dtheta", t.dtheta}};
      } else {
        const EdgeTargets t = encode_targets(anchor, gt);
        result = {{"dx_cv", t.dx_cv}, {"dy_cv", t.dy_cv}, {"dtheta", t.dtheta}};
      }
      lines << result.dump() << '\n';
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw ParseError(where + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  emit(o.out, lines.str(), out);
  return kExitOk;
}

int cmd_synth(const Options& o) {
  require(!o.out_dir.empty(), "--out-dir", "synth");
  const SynthScene scene = make_synth_scene(o.synth);
  std::error_code ec;
  fs::create_directories(o.out_dir, ec);
  if (ec) throw IoError("cannot create " + o.out_dir + ": " + ec.message());
  auto dump = [&](const Dataset& ds, const char* name) {
    std::ostringstream s;
    write_jsonl(ds, s);
    write_text_file(fs::path(o.out_dir) / name, s.str());
  };
  dump(scene.ground_truth, "gt.jsonl");
  dump(scene.center_anchored, "pred_center.jsonl");
  dump(scene.vertex_anchored, "pred_vertex.jsonl");
  return kExitOk;
}

void add_metric_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--metric", o.metrics,
                  "Metric to evaluate (BEV, 3D, CS-ABS, CS-BEV); repeatable. Default: all four")
      ->take_all();
  cmd->add_option("--alpha", o.alpha, "Closer-surfaces penalty ratio (practical range 0.5-1.5)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--iou-thresh", o.iou_thresh,
                  "True-positive threshold for every metric. Default: 0.7, and 0.5 for CS-BEV")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--recall", o.recall, "Interpolated recall positions: 11 or 40")
      ->capture_default_str()
      ->check(CLI::IsMember({11, 40}));
  cmd->add_option("--match-floor", o.match_floor,
                  "Floor on the match value for pairs kept in G_cs distributions")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--match-rule", o.match_rule,
                  "same: assign by the evaluated metric; bev: assign by BEV IoU, then score")
      ->capture_default_str()
      ->check(CLI::IsMember({"same", "bev"}));
}

void add_input_flags(CLI::App* cmd, Options& o, bool second_pred) {
  cmd->add_option("--gt", o.gt, "Ground truth: JSONL file, or label directory with --format kitti");
  cmd->add_option("--pred", o.pred, "Predictions: JSONL file, or label directory");
  if (second_pred) cmd->add_option("--pred-b", o.pred_b, "Second prediction set (model B)");
  cmd->add_option("--format", o.format, "Input format")
      ->capture_default_str()
      ->check(CLI::IsMember({"jsonl", "kitti"}));
  cmd->add_option("--difficulty", o.difficulty,
                  "KITTI difficulty level; auto = moderate when difficulty attributes exist, "
                  "all otherwise")
      ->capture_default_str()
      ->check(CLI::IsMember({"auto", "easy", "moderate", "hard", "all"}));
  cmd->add_flag("--range-filter", o.range_filter,
                "Drop boxes whose center lies outside the range box (see --range)");
  cmd->add_option("--range", o.range,
                  "Range box x_min y_min z_min x_max y_max z_max. "
                  "Default: -75.2 -75.2 -2 75.2 75.2 4")
      ->expected(6);
  cmd->add_option("--jobs", o.jobs,
                  "Worker threads; 0 = all cores. Default from CSM_JOBS, else 0. "
                  "Output does not depend on it");
}

void add_hist_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--bins", o.bins, "Histogram bins")->capture_default_str()->check(
      CLI::PositiveNumber);
  cmd->add_option("--interval", o.interval, "Histogram interval lo hi in meters")
      ->expected(2)
      ->capture_default_str();
  cmd->add_option("--match-floor", o.match_floor,
                  "BEV IoU floor for prediction/ground-truth pairs entering the distribution")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  o.jobs = default_jobs();

  CLI::App app{"Closer-surfaces evaluation metrics for bird's-eye-view 3D detection", "csm"};
  app.require_subcommand(1);

  auto* evaluate_cmd = app.add_subcommand(
      "evaluate", "Write the AP report (BEV, 3D, CS-ABS, CS-BEV) as CSV");
  add_input_flags(evaluate_cmd, o, false);
  add_metric_flags(evaluate_cmd, o);
  evaluate_cmd->add_option("--out", o.out, "Report CSV path (default: stdout)");

  auto* compare_cmd = app.add_subcommand(
      "compare", "Compare two prediction sets: per-metric AP and improvement %, plus the G_cs "
                 "proportion difference");
  add_input_flags(compare_cmd, o, true);
  add_metric_flags(compare_cmd, o);
  compare_cmd->add_option("--out", o.out, "Comparison CSV path (default: stdout)");
  compare_cmd->add_option("--svg-out", o.svg_out, "Proportion-difference SVG path");
  compare_cmd->add_option("--diff-csv", o.diff_csv,
                          "Proportion-difference CSV path (default: next to --svg-out)");
  compare_cmd->add_option("--bins", o.bins, "Histogram bins")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  compare_cmd->add_option("--interval", o.interval, "Histogram interval lo hi in meters")
      ->expected(2)
      ->capture_default_str();

  auto* hist_cmd = app.add_subcommand("gcs-hist", "Write one model's G_cs histogram");
  add_input_flags(hist_cmd, o, false);
  add_hist_flags(hist_cmd, o);
  hist_cmd->add_option("--out", o.out, "Histogram CSV path (default: stdout)");
  hist_cmd->add_option("--svg-out", o.svg_out, "Histogram SVG path");

  auto* encode_cmd = app.add_subcommand(
      "encode", "Encode closest-vertex regression targets for {\"anchor\",\"gt\"} JSONL pairs");
  encode_cmd->add_option("--input", o.input, "JSONL file of {\"anchor\": box, \"gt\": box}");
  encode_cmd->add_option("--out", o.out, "Output JSONL path (default: stdout)");
  encode_cmd->add_option("--targets", o.targets,
                         "edge: closest-vertex targets; center: center-offset control group")
      ->capture_default_str()
      ->check(CLI::IsMember({"edge", "center"}));

  auto* synth_cmd = app.add_subcommand(
      "synth", "Generate a seeded synthetic scene with center- and vertex-anchored predictions");
  auto& s = o.synth;
  synth_cmd->add_option("--out-dir", o.out_dir,
                        "Directory for gt.jsonl, pred_center.jsonl, pred_vertex.jsonl");
  synth_cmd->add_option("--seed", s.seed, "RNG seed")->capture_default_str();
  synth_cmd->add_option("--frames", s.n_frames, "Number of frames")->capture_default_str();
  synth_cmd->add_option("--objects", s.objects_per_frame, "Objects per frame")
      ->capture_default_str();
  synth_cmd->add_option("--scale", s.scale_factor, "Predicted-to-true size ratio")
      ->capture_default_str();
  synth_cmd->add_option("--r-min", s.r_min, "Inner radius of the object annulus (m)")
      ->capture_default_str();
  synth_cmd->add_option("--r-max", s.r_max, "Outer radius of the object annulus (m)")
      ->capture_default_str();
  synth_cmd->add_option("--pos-noise", s.position_noise_sd, "Position noise sd (m)")
      ->capture_default_str();
  synth_cmd->add_option("--yaw-noise", s.heading_noise_sd, "Heading noise sd (rad)")
      ->capture_default_str();
  synth_cmd->add_option("--score-noise", s.score_noise_sd, "Score noise sd")
      ->capture_default_str();
  synth_cmd->add_option("--class", s.class_label, "Class label")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (evaluate_cmd->parsed()) return cmd_evaluate(o, out, err);
    if (compare_cmd->parsed()) return cmd_compare(o, out, err);
    if (hist_cmd->parsed()) return cmd_gcs_hist(o, out, err);
    if (encode_cmd->parsed()) return cmd_encode(o, out);
    if (synth_cmd->parsed()) return cmd_synth(o);
  } catch (const UsageError& e) {
    const auto active = app.get_subcommands();
    err << "error: " << e.what() << "\n\n" << (active.empty() ? app.help() : active.front()->help());
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace csm
