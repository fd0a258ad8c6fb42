#include "csm/dataset.hpp"

#include <algorithm>

namespace csm {

std::size_t Dataset::detection_count() const {
  std::size_t n = 0;
  for (const auto& [id, f] : frames) n += f.detections.size();
  return n;
}

std::size_t Dataset::ground_truth_count() const {
  std::size_t n = 0;
  for (const auto& [id, f] : frames) n += f.ground_truths.size();
  return n;
}

bool Dataset::has_difficulty_attrs() const {
  for (const auto& [id, f] : frames) {
    if (std::any_of(f.ground_truths.begin(), f.ground_truths.end(),
                    [](const GroundTruth& g) { return g.attrs.has_value(); })) {
      return true;
    }
  }
  return false;
}

void Dataset::add(Detection d) {
  auto& frame = frames[d.frame_id];
  frame.detections.push_back(std::move(d));
}

void Dataset::add(GroundTruth g) {
  auto& frame = frames[g.frame_id];
  frame.ground_truths.push_back(std::move(g));
}

void Dataset::merge(const Dataset& other) {
  for (const auto& [id, f] : other.frames) {
    auto& mine = frames[id];
    mine.detections.insert(mine.detections.end(), f.detections.begin(), f.detections.end());
    mine.ground_truths.insert(mine.ground_truths.end(), f.ground_truths.begin(),
                              f.ground_truths.end());
  }
}

bool RangeFilter::contains(const Box3D& box) const {
  const double x = box.bev().cx();
  const double y = box.bev().cy();
  const double z = box.cz();
  return x >= x_min && x <= x_max && y >= y_min && y <= y_max && z >= z_min && z <= z_max;
}

Dataset apply_range_filter(const Dataset& dataset, const RangeFilter& range) {
  Dataset out;
  out.frame_plane = dataset.frame_plane;
  for (const auto& [id, f] : dataset.frames) {
    Frame& dst = out.frames[id];
    for (const auto& d : f.detections) {
      if (range.contains(d.box)) dst.detections.push_back(d);
    }
    for (const auto& g : f.ground_truths) {
      if (range.contains(g.box)) dst.ground_truths.push_back(g);
    }
  }
  return out;
}

}  // namespace csm
