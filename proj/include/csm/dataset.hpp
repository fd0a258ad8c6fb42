#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "csm/geometry.hpp"

namespace csm {

struct Detection {
  std::string frame_id;
  std::string class_label;
  Box3D box;
  double score = 0.0;  // [0, 1]
};

/// KITTI difficulty attributes; present together or not at all.
struct DifficultyAttrs {
  double bbox_height_px = 0.0;
  int occlusion = 0;  // 0..3
  double truncation = 0.0;
};

struct GroundTruth {
  std::string frame_id;
  std::string class_label;
  Box3D box;
  std::optional<DifficultyAttrs> attrs;
};

struct Frame {
  std::vector<Detection> detections;
  std::vector<GroundTruth> ground_truths;
};

enum class FramePlane { LidarXY, CameraXZ };

/// Frames keyed (and therefore iterated) by frame id.
struct Dataset {
  std::map<std::string, Frame> frames;
  FramePlane frame_plane = FramePlane::LidarXY;

  bool empty() const { return frames.empty(); }
  std::size_t detection_count() const;
  std::size_t ground_truth_count() const;
  bool has_difficulty_attrs() const;

  void add(Detection d);
  void add(GroundTruth g);

  /// Appends every record of `other`, frame by frame in id order.
  void merge(const Dataset& other);
};

/// Keeps only boxes whose center lies inside [x_min, x_max] x [y_min, y_max]
/// x [z_min, z_max].
struct RangeFilter {
  double x_min = -75.2, y_min = -75.2, z_min = -2.0;
  double x_max = 75.2, y_max = 75.2, z_max = 4.0;

  bool contains(const Box3D& box) const;
};

Dataset apply_range_filter(const Dataset& dataset, const RangeFilter& range);

}  // namespace csm
