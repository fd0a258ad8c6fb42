#include "csm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "csm/edgehead.hpp"

namespace csm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr int kPlacementRetries = 100;
constexpr std::uint64_t kObjectStreamTag = 0x6f626a6563747321ULL;

double positive_gaussian(Rng& rng, double mean, double sd) {
  return std::max(rng.normal(mean, sd), 0.05 * mean);
}

std::string frame_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06d", index);
  return buf;
}

double noisy_score(const BevBox& pred, const BevBox& gt, Rng& rng, double sd) {
  const double noise = sd > 0.0 ? rng.normal(0.0, sd) : 0.0;
  return std::clamp(bev_iou(pred, gt) + noise, 0.0, 1.0);
}

struct Draws {
  double dx, dy, dyaw;
};

// Both perturbations consume the stream in the same order.
Draws draw_pose_noise(Rng& rng, const PerturbNoise& noise) {
  Draws d{0.0, 0.0, 0.0};
  if (noise.position_sd > 0.0) {
    d.dx = rng.normal(0.0, noise.position_sd);
    d.dy = rng.normal(0.0, noise.position_sd);
  }
  if (noise.heading_sd > 0.0) d.dyaw = rng.normal(0.0, noise.heading_sd);
  return d;
}

void require_scale(SizeScale s) {
  if (!(s.length > 0.0) || !(s.width > 0.0)) throw UsageError("perturbation scale must be > 0");
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

Rng Rng::split(std::uint64_t key) const { return Rng(splitmix64(seed_ ^ splitmix64(key))); }

double Rng::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double Rng::normal(double mean, double sd) {
  return std::normal_distribution<double>(mean, sd)(engine_);
}

void SynthConfig::validate() const {
  if (n_frames < 0 || objects_per_frame < 0) throw UsageError("frame/object counts must be >= 0");
  if (!(r_min >= 0.0)) throw UsageError("r_min must be >= 0");
  if (!(r_min <= r_max)) throw UsageError("r_min must not exceed r_max");
  for (double sd :
       {size_sd.l, size_sd.w, size_sd.h, position_noise_sd, heading_noise_sd, score_noise_sd}) {
    if (!(sd >= 0.0)) throw UsageError("standard deviations must be >= 0");
  }
  if (!(size_mean.l > 0.0 && size_mean.w > 0.0 && size_mean.h > 0.0)) {
    throw UsageError("mean sizes must be > 0");
  }
  if (!(scale_factor > 0.0)) throw UsageError("scale_factor must be > 0");
}

Dataset generate_scene(const SynthConfig& cfg) {
  cfg.validate();
  constexpr double kPi = std::numbers::pi;
  constexpr double kSensorHeight = 1.73;
  const Rng root(cfg.seed);

  Dataset ds;
  for (int f = 0; f < cfg.n_frames; ++f) {
    Rng rng = root.split(static_cast<std::uint64_t>(f));
    const std::string frame = frame_name(f);
    Frame& out = ds.frames[frame];
    std::vector<BevBox> placed;
    for (int k = 0; k < cfg.objects_per_frame; ++k) {
      std::optional<Box3D> box;
      for (int attempt = 0; attempt < kPlacementRetries; ++attempt) {
        const double r2 = rng.uniform(cfg.r_min * cfg.r_min, cfg.r_max * cfg.r_max);
        const double bearing = rng.uniform(-kPi, kPi);
        const double yaw = wrap_angle(rng.uniform(-kPi, kPi));
        const double l = positive_gaussian(rng, cfg.size_mean.l, cfg.size_sd.l);
        const double w = positive_gaussian(rng, cfg.size_mean.w, cfg.size_sd.w);
        const double h = positive_gaussian(rng, cfg.size_mean.h, cfg.size_sd.h);
        const double r = std::sqrt(r2);
        const BevBox bev(r * std::cos(bearing), r * std::sin(bearing), l, w, yaw);
        box.emplace(bev, -kSensorHeight + 0.5 * h, h);
        const bool overlaps = std::any_of(placed.begin(), placed.end(), [&](const BevBox& p) {
          return convex_intersection_area(p, bev) > 0.0;
        });
        if (!overlaps) break;
      }
      placed.push_back(box->bev());
      out.ground_truths.push_back(GroundTruth{frame, cfg.class_label, *box, std::nullopt});
    }
  }
  return ds;
}

Detection perturb_center_anchored(const GroundTruth& gt, SizeScale scale, Rng& rng,
                                  const PerturbNoise& noise) {
  require_scale(scale);
  const BevBox& g = gt.box.bev();
  const Draws d = draw_pose_noise(rng, noise);
  const BevBox bev(g.cx() + d.dx, g.cy() + d.dy, g.length() * scale.length, g.width() * scale.width,
                   g.yaw() + d.dyaw);
  const double score = noisy_score(bev, g, rng, noise.score_sd);
  return Detection{gt.frame_id, gt.class_label, gt.box.with_bev(bev), score};
}

Detection perturb_vertex_anchored(const GroundTruth& gt, SizeScale scale, Rng& rng,
                                  const PerturbNoise& noise) {
  require_scale(scale);
  const BevBox& g = gt.box.bev();
  const Draws d = draw_pose_noise(rng, noise);
  const BevBox resized =
      g.with_size(g.length() * scale.length, g.width() * scale.width).with_yaw(g.yaw() + d.dyaw);
  // Keep the same physical corner pinned. Pinning whichever corner ends up
  // closest can throw the box off the object when the near edge faces the
  // sensor almost head on.
  const Point2 anchor = closest_vertex(g);
  const auto corners = bev_vertices(g);
  std::size_t k = 0;
  for (std::size_t i = 1; i < corners.size(); ++i)
    if (norm(corners[i] - anchor) < norm(corners[k] - anchor)) k = i;
  const Point2 target = anchor + Point2{d.dx, d.dy};
  const Point2 offset = bev_vertices(resized)[k] - resized.center();
  const BevBox bev = resized.with_center(target - offset);
  const double score = noisy_score(bev, g, rng, noise.score_sd);
  return Detection{gt.frame_id, gt.class_label, gt.box.with_bev(bev), score};
}

SynthScene make_synth_scene(const SynthConfig& cfg) {
  SynthScene scene;
  scene.ground_truth = generate_scene(cfg);
  const PerturbNoise noise{cfg.position_noise_sd, cfg.heading_noise_sd, cfg.score_noise_sd};
  const Rng root = Rng(cfg.seed).split(kObjectStreamTag);
  std::uint64_t object_index = 0;
  for (const auto& [id, frame] : scene.ground_truth.frames) {
    scene.center_anchored.frames[id];
    scene.vertex_anchored.frames[id];
    for (const auto& gt : frame.ground_truths) {
      const Rng stream = root.split(object_index++);
      Rng a = stream;
      Rng b = stream;
      scene.center_anchored.add(perturb_center_anchored(gt, cfg.scale_factor, a, noise));
      scene.vertex_anchored.add(perturb_vertex_anchored(gt, cfg.scale_factor, b, noise));
    }
  }
  return scene;
}

}  // namespace csm
