#pragma once

// Seeded synthetic scenes: ground-truth boxes around the sensor plus two kinds
// of size-biased predictions. Center-anchored predictions keep the object's
// center and get the size wrong symmetrically; vertex-anchored predictions get
// the same size wrong but keep the corner nearest the sensor in place.

#include <cstdint>
#include <random>

#include "csm/dataset.hpp"

namespace csm {

/// Seeded generator threaded through all sampling. split() derives an
/// independent stream from a key, so frames and objects can be generated in
/// any order with identical results.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  Rng split(std::uint64_t key) const;

  double uniform(double lo, double hi);
  double normal(double mean, double sd);

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

struct Size3 {
  double l = 0.0, w = 0.0, h = 0.0;
};

struct SynthConfig {
  int n_frames = 200;
  int objects_per_frame = 8;
  double r_min = 5.0;
  double r_max = 50.0;
  Size3 size_mean{3.9, 1.6, 1.56};
  Size3 size_sd{0.2, 0.1, 0.1};
  /// Predicted-to-true size ratio emulating a source/target domain gap.
  double scale_factor = 0.8;
  double position_noise_sd = 0.03;
  double heading_noise_sd = 0.01;
  double score_noise_sd = 0.05;
  std::uint64_t seed = 42;
  std::string class_label = "Car";

  /// Throws UsageError on r_min < 0, r_min > r_max, negative sds or counts,
  /// or scale_factor <= 0.
  void validate() const;
};

/// Ground truths only. Centers are uniform over the annulus area, sizes are
/// Gaussian clamped to stay positive, headings uniform in (-pi, pi]. Boxes of
/// one frame are re-drawn (bounded retries) to avoid overlaps.
Dataset generate_scene(const SynthConfig& cfg);

struct SizeScale {
  double length = 1.0;
  double width = 1.0;

  SizeScale() = default;
  SizeScale(double uniform) : length(uniform), width(uniform) {}  // NOLINT
  SizeScale(double l, double w) : length(l), width(w) {}
};

struct PerturbNoise {
  double position_sd = 0.0;
  double heading_sd = 0.0;
  double score_sd = 0.0;
};

/// Same center and heading (plus noise), length/width scaled. The score is
/// clamp(BEV IoU + N(0, score_sd), 0, 1).
Detection perturb_center_anchored(const GroundTruth& gt, SizeScale scale, Rng& rng,
                                  const PerturbNoise& noise = {});

/// Length/width scaled about the ground truth's closest corner, which stays
/// put (plus noise). Heading preserved (plus noise). Usually the result's
/// closest vertex is that corner too; with a nearly head-on near edge and a
/// shrink, the other end of that edge can overtake it.
Detection perturb_vertex_anchored(const GroundTruth& gt, SizeScale scale, Rng& rng,
                                  const PerturbNoise& noise = {});

struct SynthScene {
  Dataset ground_truth;
  Dataset center_anchored;
  Dataset vertex_anchored;
};

/// generate_scene plus both prediction sets. Each object's noise stream is
/// shared by its two predictions so they differ only in anchoring.
SynthScene make_synth_scene(const SynthConfig& cfg);

}  // namespace csm
