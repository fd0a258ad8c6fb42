// Acceptance checks, one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "csm/cli.hpp"
#include "csm/dataio.hpp"
#include "csm/edgehead.hpp"
#include "csm/matching.hpp"
#include "csm/reports.hpp"
#include "csm/synth.hpp"
#include "oracles.hpp"
#include "random_dataset.hpp"
#include "test_support.hpp"

using namespace csm;
using csm::testing::kPi;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      detail += pass ? "failed: " : "; ";
      detail += what;
      pass = false;
    }
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Verdict geometry_oracles() {
  Verdict o;
  const auto t0 = Clock::now();
  std::mt19937_64 gen(2024);
  double worst_area = 0.0;
  for (int i = 0; i < 100; ++i) {
    const BevBox a = csm::testing::random_box(gen, 20.0);
    // Half the pairs overlap heavily, the rest are arbitrary neighbours.
    const BevBox b =
        i % 2 ? csm::testing::jittered(a, gen, 0.6, 0.5)
              : BevBox(a.cx() + 3.0 * (gen() % 1000 / 1000.0 - 0.5),
                       a.cy() + 3.0 * (gen() % 1000 / 1000.0 - 0.5), 0.5 + (gen() % 50) / 10.0,
                       0.5 + (gen() % 25) / 10.0, (gen() % 628) / 100.0);
    const double exact = convex_intersection_area(a, b);
    const double mc = oracle::monte_carlo_intersection(a, b, 1000000, 7 + i);
    worst_area = std::max(worst_area, std::abs(exact - mc));
  }
  o.require(worst_area < 1e-2, "intersection area off by " + fmt("%.3g", worst_area));

  std::uniform_real_distribution<double> u(-30, 30);
  double worst_line = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Point2 p{u(gen), u(gen)};
    const Edge e{{u(gen), u(gen)}, {u(gen), u(gen)}};
    worst_line = std::max(
        worst_line, std::abs(point_to_edge_distance(p, e) - oracle::dense_line_distance(p, e)));
  }
  o.require(worst_line < 1e-6, "line distance off by " + fmt("%.3g", worst_line));
  const double secs = seconds_since(t0);
  o.require(secs < 60.0, "took " + fmt("%.1f", secs) + " s");
  if (o.pass) {
    o.detail = "max area err " + fmt("%.2e", worst_area) + ", max line err " +
               fmt("%.2e", worst_line) + ", " + fmt("%.1f", secs) + " s";
  }
  return o;
}

Verdict gap_fixtures() {
  Verdict o;
  const BevBox gt(3, 10, 4, 2, 0);
  o.require(std::abs(closer_surfaces_gap(gt, gt)) <= 1e-12, "identity fixture");
  o.require(std::abs(closer_surfaces_gap(BevBox(3, 10.5, 4, 2, 0), gt) - 1.0) <= 1e-12,
            "shifted fixture");
  o.require(std::abs(closer_surfaces_gap(BevBox(3, 9.75, 4, 1.5, 0), gt)) <= 1e-12,
            "near-side shrink fixture");

  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  int bad_identity = 0, bad_scale = 0, bad_reflect = 0;
  for (int i = 0; i < 1000; ++i) {
    const BevBox g = csm::testing::random_box(gen);
    const BevBox p = csm::testing::jittered(g, gen);
    if (std::abs(closer_surfaces_gap(g, g)) >= 1e-12) ++bad_identity;
    const double base = closer_surfaces_gap(p, g);
    const double s = scale(gen);
    auto scaled = [s](const BevBox& b) {
      return BevBox(s * b.cx(), s * b.cy(), s * b.length(), s * b.width(), b.yaw());
    };
    const double gs = closer_surfaces_gap(scaled(p), scaled(g));
    if (std::abs(gs - s * base) > 1e-9 * std::max(1e-12, s * base) &&
        std::abs(gs - s * base) > 1e-12) {
      ++bad_scale;
    }
    auto mirror = [](const BevBox& b) {
      return BevBox(-b.cx(), b.cy(), b.length(), b.width(), kPi - b.yaw());
    };
    if (std::abs(closer_surfaces_gap(mirror(p), mirror(g)) - base) > 1e-12) ++bad_reflect;
  }
  o.require(bad_identity == 0, std::to_string(bad_identity) + " identity violations");
  o.require(bad_scale == 0, std::to_string(bad_scale) + " scaling violations");
  o.require(bad_reflect == 0, std::to_string(bad_reflect) + " reflection violations");
  if (o.pass) o.detail = "fixtures 0.0/1.0/0.0 exact; 1000 random boxes";
  return o;
}

Verdict metric_identities() {
  Verdict o;
  std::mt19937_64 gen(7);
  const std::vector<double> grid{0.0, 0.5, 1.0, 1.5, 2.0};
  int above_bev = 0, not_decreasing = 0, threshold_mismatch = 0;
  for (int i = 0; i < 5000; ++i) {
    const BevBox g = csm::testing::random_box(gen);
    const BevBox p = csm::testing::jittered(g, gen, 0.3, 0.1);
    const double iou = bev_iou(p, g);
    const double gap = closer_surfaces_gap(p, g);
    for (double alpha : grid) {
      if (cs_bev_score(p, g, alpha) > iou + 1e-15) ++above_bev;
    }
    if (gap > 0.0) {
      for (std::size_t k = 1; k < grid.size(); ++k) {
        if (!(cs_abs_score(p, g, grid[k]) < cs_abs_score(p, g, grid[k - 1]))) ++not_decreasing;
        if (iou > 0.0 && !(cs_bev_score(p, g, grid[k]) < cs_bev_score(p, g, grid[k - 1]))) {
          ++not_decreasing;
        }
      }
    }
    if (std::abs(gap - 3.0 / 7.0) > 1e-12 &&
        ((cs_abs_score(p, g, 1.0) >= 0.7) != (gap <= 3.0 / 7.0))) {
      ++threshold_mismatch;
    }
  }
  // The documented practical alpha band keeps the near-side shrink ahead.
  const BevBox gt(3, 10, 4, 2, 0), centered(3, 10.25, 4, 1.5, 0), anchored(3, 9.75, 4, 1.5, 0);
  bool band_ok = kPracticalAlphaLo == 0.5 && kPracticalAlphaHi == 1.5;
  for (double alpha = kPracticalAlphaLo; alpha <= kPracticalAlphaHi + 1e-12; alpha += 0.25) {
    band_ok = band_ok && cs_bev_score(anchored, gt, alpha) > cs_bev_score(centered, gt, alpha);
  }
  o.require(above_bev == 0, std::to_string(above_bev) + " CS-BEV > BEV");
  o.require(not_decreasing == 0, std::to_string(not_decreasing) + " alpha monotonicity breaks");
  o.require(threshold_mismatch == 0, std::to_string(threshold_mismatch) + " 3/7 mismatches");
  o.require(band_ok, "practical alpha band");
  if (o.pass) o.detail = "5000 random pairs, alpha grid {0,0.5,1,1.5,2}";
  return o;
}

Verdict ap_oracle() {
  Verdict o;
  int compared = 0;
  double worst = 0.0;
  for (auto kind : {MetricKind::Bev, MetricKind::Iou3d, MetricKind::CsAbs, MetricKind::CsBev}) {
    for (auto mode : {RecallMode::R11, RecallMode::R40}) {
      MetricConfig cfg = MetricConfig::for_kind(kind);
      cfg.recall_mode = mode;
      if (kind != MetricKind::CsBev) cfg.iou_threshold = 0.5;
      std::mt19937_64 gen(500 + 10 * static_cast<int>(kind) + static_cast<int>(mode));
      for (int trial = 0; trial < 500; ++trial) {
        const auto rd = csm::testing::random_dataset(gen, cfg);
        const auto report = evaluate(rd.dataset, std::span(&cfg, 1));
        if (report.entries.empty() || !report.entries[0].ap) continue;
        const double expect = oracle::brute_force_ap(rd.oracle_frames, cfg.iou_threshold, mode);
        worst = std::max(worst, std::abs(*report.entries[0].ap - expect));
        ++compared;
      }
    }
  }
  o.require(worst <= 1e-9, "AP differs from brute force by " + fmt("%.3g", worst));

  Dataset fixture;
  auto box = [](double x) { return Box3D(BevBox(x, 0, 4, 2, 0), -1, 1.5); };
  fixture.add(GroundTruth{"f", "Car", box(10), std::nullopt});
  fixture.add(GroundTruth{"f", "Car", box(30), std::nullopt});
  fixture.add(Detection{"f", "Car", box(10), 0.9});
  fixture.add(Detection{"f", "Car", box(60), 0.8});
  const MetricConfig bev = MetricConfig::for_kind(MetricKind::Bev);
  const auto ap = evaluate(fixture, std::span(&bev, 1)).entries.at(0).ap;
  o.require(ap && *ap == 0.5,
            "2-gt fixture AP " + (ap ? fmt("%.17g", *ap) : std::string("absent")));
  if (o.pass) {
    o.detail = std::to_string(compared) + " datasets, max err " + fmt("%.1e", worst) +
               ", fixture R40 AP 0.5";
  }
  return o;
}

Verdict edgehead_round_trip() {
  Verdict o;
  std::mt19937_64 gen(31337);
  std::uniform_real_distribution<double> z(-2, 1), h(0.5, 3);
  double worst_vertex = 0.0, worst_yaw = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Box3D anchor(csm::testing::random_box(gen), z(gen), h(gen));
    const Box3D gt(csm::testing::random_box(gen), z(gen), h(gen));
    const Box3D out = decode_box(anchor, encode_targets(anchor, gt));
    worst_vertex =
        std::max(worst_vertex, norm(closest_vertex(out.bev()) - closest_vertex(gt.bev())));
    worst_yaw = std::max(worst_yaw, std::abs(wrap_angle(out.bev().yaw() - gt.bev().yaw())));
  }
  o.require(worst_vertex <= 1e-9, "closest vertex off by " + fmt("%.3g", worst_vertex));
  o.require(worst_yaw <= 1e-9, "heading off by " + fmt("%.3g", worst_yaw));

  const Box3D anchor(BevBox(2, 6, 4, 2, 0), -1, 1.5);
  const Box3D gt(BevBox(2, 6, 4, 2, kPi / 2), -1, 1.5);
  const EdgeTargets t = encode_targets(anchor, gt);
  const EdgeTargets naive = naive_vertex_targets(anchor, gt);
  o.require(std::abs(t.dx_cv) < 1e-12 && std::abs(t.dy_cv) < 1e-12 &&
                std::abs(t.dtheta - kPi / 2) < 1e-12,
            "quarter-turn targets");
  o.require(std::abs(naive.dx_cv - 1.0) < 1e-12 && std::abs(naive.dy_cv + 1.0) < 1e-12,
            "naive residual is not (1, -1)");

  double worst_grad = 0.0;
  const double step = 1e-6;
  for (double beta : {0.25, 1.0, 3.0}) {
    for (double x = -5.0; x <= 5.0; x += 0.01) {
      if (std::abs(std::abs(x) - beta) < 1e-3) continue;
      const double numeric = (smooth_l1(x + step, beta) - smooth_l1(x - step, beta)) / (2 * step);
      worst_grad = std::max(worst_grad, std::abs(numeric - smooth_l1_grad(x, beta)));
    }
  }
  o.require(worst_grad <= 1e-6, "gradient off by " + fmt("%.3g", worst_grad));
  if (o.pass) {
    o.detail = "1000 pairs, max vertex err " + fmt("%.1e", worst_vertex) + ", max grad err " +
               fmt("%.1e", worst_grad);
  }
  return o;
}

Verdict dataset_discrimination() {
  Verdict o;
  const auto t0 = Clock::now();
  SynthConfig cfg;  // 200 frames, scale 0.8, seed 42
  const SynthScene scene = make_synth_scene(cfg);
  Dataset center = scene.ground_truth, vertex = scene.ground_truth;
  center.merge(scene.center_anchored);
  vertex.merge(scene.vertex_anchored);

  // Scale 0.8 puts every BEV IoU near 0.64, under the 0.7 default; the 0.5
  // column is reported alongside so the comparison is not only between zeros.
  MetricConfig bev_half = MetricConfig::for_kind(MetricKind::Bev);
  bev_half.iou_threshold = 0.5;
  const std::vector<MetricConfig> cfgs{MetricConfig::for_kind(MetricKind::Bev),
                                       MetricConfig::for_kind(MetricKind::CsBev), bev_half};
  const EvalOptions opts{DifficultyLevel::All, 0};
  const auto rc = evaluate(center, cfgs, opts);
  const auto rv = evaluate(vertex, cfgs, opts);
  const double bev_c = rc.find(cfg.class_label, MetricKind::Bev)->ap.value_or(0.0);
  const double bev_v = rv.find(cfg.class_label, MetricKind::Bev)->ap.value_or(0.0);
  const double cs_c = rc.find(cfg.class_label, MetricKind::CsBev)->ap.value_or(0.0);
  const double cs_v = rv.find(cfg.class_label, MetricKind::CsBev)->ap.value_or(0.0);
  const double half_c = rc.entries.at(2).ap.value_or(0.0);
  const double half_v = rv.entries.at(2).ap.value_or(0.0);
  o.require(std::abs(bev_c - bev_v) * 100.0 < 0.5,
            "BEV AP gap " + fmt("%.2f", std::abs(bev_c - bev_v) * 100.0) + " points");
  o.require((cs_v - cs_c) * 100.0 > 10.0,
            "CS-BEV AP gain " + fmt("%.2f", (cs_v - cs_c) * 100.0) + " points");

  MetricConfig pairing = MetricConfig::for_kind(MetricKind::Bev);
  const Histogram hc = gcs_histogram(matched_gaps(center, cfg.class_label, pairing, opts));
  const Histogram hv = gcs_histogram(matched_gaps(vertex, cfg.class_label, pairing, opts));
  const DiffSeries diff = proportion_difference(hc, hv);
  for (std::size_t i = 0; i < diff.bins(); ++i) {
    if (diff.bin_hi(i) <= 0.2 + 1e-12 && !(diff.values[i] > 0.0)) {
      o.require(false, "bin " + fmt("%.2f", diff.bin_lo(i)) + " not positive");
    }
    if (diff.bin_lo(i) >= 1.0 - 1e-12 && diff.values[i] > 0.0) {
      o.require(false, "bin " + fmt("%.2f", diff.bin_lo(i)) + " positive");
    }
  }
  const double secs = seconds_since(t0);
  o.require(secs < 30.0, "took " + fmt("%.1f", secs) + " s");
  if (o.pass) {
    o.detail = "BEV AP " + fmt("%.4f", bev_c) + " vs " + fmt("%.4f", bev_v) + ", CS-BEV AP " +
               fmt("%.4f", cs_c) + " vs " + fmt("%.4f", cs_v) + " (BEV@0.5 " + fmt("%.4f", half_c) +
               " vs " + fmt("%.4f", half_v) + "), " + fmt("%.2f", secs) + " s";
  }
  return o;
}

Verdict published_numbers() {
  Verdict o;
  auto one_decimal = [](std::optional<double> v) {
    return v ? std::round(*v * 10.0) / 10.0 : std::nan("");
  };
  const double a = one_decimal(improvement_percent(19.0, 23.7));
  const double b = one_decimal(improvement_percent(10.9, 14.7));
  o.require(a == 24.7, "19.0 -> 23.7 gives " + fmt("%.1f", a));
  o.require(b == 34.9, "10.9 -> 14.7 gives " + fmt("%.1f", b));
  o.require(default_threshold(MetricKind::Bev) == 0.7 &&
                default_threshold(MetricKind::Iou3d) == 0.7 &&
                default_threshold(MetricKind::CsAbs) == 0.7 &&
                default_threshold(MetricKind::CsBev) == 0.5,
            "default thresholds");
  o.require(MetricConfig{}.alpha == 1.0 && kDefaultAlpha == 1.0, "default alpha");
  if (o.pass) o.detail = "24.7% and 34.9%; thresholds 0.7/0.7/0.7/0.5; alpha 1";
  return o;
}

Verdict cli_determinism() {
  Verdict o;
  const fs::path dir = fs::temp_directory_path() / ("csm_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto cli = [&](std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    if (code != 0)
      o.require(false, args.front() + " exited " + std::to_string(code) + ": " + err.str());
    return out.str();
  };
  auto p = [&](const std::string& name) { return (dir / name).string(); };

  // One full pipeline per (run, jobs) setting; every artifact concatenated.
  auto pipeline = [&](const std::string& tag, const std::string& jobs) {
    const std::string scene = p(tag + "_scene");
    cli({"synth", "--out-dir", scene, "--seed", "42", "--frames", "60"});
    const std::string gt = scene + "/gt.jsonl";
    const std::string pc = scene + "/pred_center.jsonl";
    const std::string pv = scene + "/pred_vertex.jsonl";
    cli({"evaluate", "--gt", gt, "--pred", pv, "--jobs", jobs, "--out", p(tag + "_eval.csv")});
    cli({"compare", "--gt", gt, "--pred", pc, "--pred-b", pv, "--jobs", jobs, "--out",
         p(tag + "_cmp.csv"), "--svg-out", p(tag + "_diff.svg")});
    cli({"gcs-hist", "--gt", gt, "--pred", pc, "--jobs", jobs, "--out", p(tag + "_hist.csv"),
         "--svg-out", p(tag + "_hist.svg")});
    std::string all;
    for (const char* f : {"gt.jsonl", "pred_center.jsonl", "pred_vertex.jsonl"}) {
      all += read_text_file(fs::path(scene) / f);
    }
    for (const char* f :
         {"_eval.csv", "_cmp.csv", "_diff.svg", "_diff.csv", "_hist.csv", "_hist.svg"}) {
      all += read_text_file(p(tag + f));
    }
    return all;
  };

  try {
    const std::string first = pipeline("a", "1");
    const std::string second = pipeline("b", "1");
    const std::string threaded = pipeline("c", "4");
    const std::string all_cores = pipeline("d", "0");
    o.require(first == second, "repeat run differs");
    o.require(first == threaded, "--jobs 4 differs");
    o.require(first == all_cores, "--jobs 0 differs");
    if (o.pass)
      o.detail = std::to_string(first.size()) + " bytes identical across 4 runs, jobs 1/1/4/0";
  } catch (const std::exception& e) {
    o.require(false, e.what());
  }
  fs::remove_all(dir);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"geometry oracles", geometry_oracles},
      {"G_cs fixtures and invariances", gap_fixtures},
      {"metric identities", metric_identities},
      {"AP brute-force equivalence", ap_oracle},
      {"EdgeHead round trip and gradient", edgehead_round_trip},
      {"discrimination on synthetic scene", dataset_discrimination},
      {"published improvement numbers and defaults", published_numbers},
      {"CLI determinism", cli_determinism},
  };
  int failed = 0;
  int n = 0;
  for (const auto& [name, check] : criteria) {
    ++n;
    Verdict r;
    try {
      r = check();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s %d %s: %s\n", r.pass ? "PASS" : "FAIL", n, name, r.detail.c_str());
    std::fflush(stdout);
    if (!r.pass) ++failed;
  }
  return failed;
}
