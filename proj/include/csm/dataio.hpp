#pragma once

// Readers and writers for the interchange formats:
//
//   JSONL  one record per line:
//          {"frame": str, "class": str, "score": num (predictions only),
//           "box": {"x","y","z","l","w","h","yaw"},
//           "bbox_height": px, "occlusion": int, "truncation": ratio (optional,
//           all three or none)}
//          Boxes are in the canonical frame. Unknown keys are ignored.
//
//   KITTI  one file per frame, whitespace separated:
//          type trunc occ alpha x1 y1 x2 y2 h w l x y z rotation_y [score]
//
//   CSV    class,difficulty,metric,ap,tp,fp,fn  (LF, AP with 4 decimals,
//          empty AP when undefined)

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "csm/dataset.hpp"
#include "csm/matching.hpp"
#include "json.hpp"

namespace csm {

nlohmann::json box_to_json(const Box3D& box);
/// Throws ParseError (missing or non-numeric field) or InvalidGeometry.
Box3D box_from_json(const nlohmann::json& j);

/// Parses JSONL records from `in`; `source` names the input in diagnostics.
Dataset parse_jsonl(std::istream& in, const std::string& source);
Dataset read_jsonl(const std::filesystem::path& path);

void write_jsonl(const Dataset& dataset, std::ostream& out);

/// Box in KITTI camera coordinates: location is the bottom-face center, y
/// points down, rotation_y is about the camera y axis.
struct KittiCameraBox {
  double h = 0.0, w = 0.0, l = 0.0;
  double x = 0.0, y = 0.0, z = 0.0;
  double rotation_y = 0.0;
};

/// x = z_cam, y = -x_cam, yaw = wrap(-rotation_y - pi/2), cz = y_cam - h/2.
Box3D kitti_to_canonical(const KittiCameraBox& k);
KittiCameraBox canonical_to_kitti(const Box3D& box);

/// Reads `<frame>.txt` files from gt_dir and, when given, pred_dir. Unknown
/// object types are skipped with a message appended to `warnings`; DontCare
/// rows are skipped silently.
Dataset read_kitti_labels(const std::filesystem::path& gt_dir,
                          const std::optional<std::filesystem::path>& pred_dir,
                          std::vector<std::string>* warnings = nullptr);

/// Parses one label line. Returns nullopt for skipped types.
struct KittiRecord {
  std::string type;
  double truncation = 0.0;
  int occlusion = 0;
  double bbox_height_px = 0.0;
  Box3D box;
  std::optional<double> score;
};
std::optional<KittiRecord> parse_kitti_line(const std::string& line, const std::string& where,
                                            std::vector<std::string>* warnings);

inline constexpr const char* kReportCsvHeader = "class,difficulty,metric,ap,tp,fp,fn";

/// Rows ordered by class, then difficulty; metrics keep report order.
void write_report_csv(const EvalReport& report, std::ostream& out);
EvalReport read_report_csv(std::istream& in, const std::string& source);

void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace csm
