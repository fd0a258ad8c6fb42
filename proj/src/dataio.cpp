#include "csm/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

namespace csm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double number_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing field '") + key + "'");
  if (!it->is_number()) throw ParseError(std::string("field '") + key + "' is not a number");
  return it->get<double>();
}

std::string string_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing field '") + key + "'");
  if (!it->is_string()) throw ParseError(std::string("field '") + key + "' is not a string");
  return it->get<std::string>();
}

double checked_score(double score) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw ParseError("score " + std::to_string(score) + " outside [0, 1]");
  }
  return score;
}

std::optional<DifficultyAttrs> difficulty_fields(const json& obj) {
  const int present = static_cast<int>(obj.contains("bbox_height")) +
                      static_cast<int>(obj.contains("occlusion")) +
                      static_cast<int>(obj.contains("truncation"));
  if (present == 0) return std::nullopt;
  if (present != 3) {
    throw ParseError("bbox_height, occlusion and truncation must be given together");
  }
  DifficultyAttrs a;
  a.bbox_height_px = number_field(obj, "bbox_height");
  a.occlusion = static_cast<int>(number_field(obj, "occlusion"));
  a.truncation = number_field(obj, "truncation");
  return a;
}

const std::set<std::string>& kitti_types() {
  static const std::set<std::string> types{"Car",     "Van",  "Truck", "Pedestrian",
                                           "Person_sitting", "Cyclist", "Tram", "Misc"};
  return types;
}

std::string format_fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

int difficulty_rank(DifficultyLevel d) { return static_cast<int>(d); }

}  // namespace

json box_to_json(const Box3D& box) {
  const BevBox& b = box.bev();
  return json{{"x", b.cx()},      {"y", b.cy()},        {"z", box.cz()}, {"l", b.length()},
              {"w", b.width()},   {"h", box.height()},  {"yaw", b.yaw()}};
}

Box3D box_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("box is not an object");
  return Box3D(BevBox(number_field(j, "x"), number_field(j, "y"), number_field(j, "l"),
                      number_field(j, "w"), number_field(j, "yaw")),
               number_field(j, "z"), number_field(j, "h"));
}

Dataset parse_jsonl(std::istream& in, const std::string& source) {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      const json rec = json::parse(line);
      if (!rec.is_object()) throw ParseError("record is not an object");
      auto box_it = rec.find("box");
      if (box_it == rec.end()) throw ParseError("missing field 'box'");
      Box3D box = box_from_json(*box_it);
      std::string frame = string_field(rec, "frame");
      std::string label = string_field(rec, "class");
      if (rec.contains("score")) {
        ds.add(Detection{std::move(frame), std::move(label), box,
                         checked_score(number_field(rec, "score"))});
      } else {
        ds.add(GroundTruth{std::move(frame), std::move(label), box, difficulty_fields(rec)});
      }
    } catch (const json::exception& e) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (in.bad()) throw IoError(source + ": read failure");
  return ds;
}

Dataset read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_jsonl(in, path.string());
}

void write_jsonl(const Dataset& dataset, std::ostream& out) {
  for (const auto& [id, frame] : dataset.frames) {
    for (const auto& g : frame.ground_truths) {
      json rec{{"frame", g.frame_id}, {"class", g.class_label}, {"box", box_to_json(g.box)}};
      if (g.attrs) {
        rec["bbox_height"] = g.attrs->bbox_height_px;
        rec["occlusion"] = g.attrs->occlusion;
        rec["truncation"] = g.attrs->truncation;
      }
      out << rec.dump() << '\n';
    }
    for (const auto& d : frame.detections) {
      json rec{{"frame", d.frame_id},
               {"class", d.class_label},
               {"score", d.score},
               {"box", box_to_json(d.box)}};
      out << rec.dump() << '\n';
    }
  }
  if (!out) throw IoError("write failure");
}

Box3D kitti_to_canonical(const KittiCameraBox& k) {
  const double yaw = wrap_angle(-k.rotation_y - 0.5 * std::numbers::pi);
  return Box3D(BevBox(k.z, -k.x, k.l, k.w, yaw), k.y - 0.5 * k.h, k.h);
}

KittiCameraBox canonical_to_kitti(const Box3D& box) {
  const BevBox& b = box.bev();
  KittiCameraBox k;
  k.h = box.height();
  k.w = b.width();
  k.l = b.length();
  k.x = -b.cy();
  k.y = box.cz() + 0.5 * box.height();
  k.z = b.cx();
  k.rotation_y = wrap_angle(-b.yaw() - 0.5 * std::numbers::pi);
  return k;
}

std::optional<KittiRecord> parse_kitti_line(const std::string& line, const std::string& where,
                                            std::vector<std::string>* warnings) {
  std::istringstream ss(line);
  std::vector<std::string> tok;
  for (std::string t; ss >> t;) tok.push_back(t);
  if (tok.empty()) return std::nullopt;
  if (tok[0] == "DontCare") return std::nullopt;
  if (tok.size() != 15 && tok.size() != 16) {
    throw ParseError(where + ": expected 15 or 16 fields, got " + std::to_string(tok.size()));
  }
  if (!kitti_types().contains(tok[0])) {
    if (warnings) warnings->push_back(where + ": skipping unknown type '" + tok[0] + "'");
    return std::nullopt;
  }
  std::vector<double> v(tok.size(), 0.0);
  for (std::size_t i = 1; i < tok.size(); ++i) {
    std::size_t used = 0;
    try {
      v[i] = std::stod(tok[i], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok[i].size()) {
      throw ParseError(where + ": field " + std::to_string(i + 1) + " is not a number: '" +
                       tok[i] + "'");
    }
  }
  KittiCameraBox cam;
  cam.h = v[8];
  cam.w = v[9];
  cam.l = v[10];
  cam.x = v[11];
  cam.y = v[12];
  cam.z = v[13];
  cam.rotation_y = v[14];
  try {
    std::optional<double> score;
    if (tok.size() == 16) score = checked_score(v[15]);
    return KittiRecord{tok[0], v[1], static_cast<int>(v[2]), v[7] - v[5],
                       kitti_to_canonical(cam), score};
  } catch (const std::invalid_argument& e) {
    throw ParseError(where + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(where + ": " + e.what());
  }
}

Dataset read_kitti_labels(const fs::path& gt_dir, const std::optional<fs::path>& pred_dir,
                          std::vector<std::string>* warnings) {
  Dataset ds;
  ds.frame_plane = FramePlane::CameraXZ;

  auto label_files = [](const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".txt") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    return files;
  };

  auto read_dir = [&](const fs::path& dir, bool predictions) {
    for (const auto& file : label_files(dir)) {
      std::ifstream in(file);
      if (!in) throw IoError("cannot open " + file.string());
      const std::string frame = file.stem().string();
      ds.frames[frame];
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        const std::string where = file.string() + ":" + std::to_string(line_no);
        auto rec = parse_kitti_line(line, where, warnings);
        if (!rec) continue;
        if (predictions) {
          if (!rec->score) throw ParseError(where + ": prediction without score");
          ds.add(Detection{frame, rec->type, rec->box, *rec->score});
        } else {
          if (rec->score) throw ParseError(where + ": ground truth with a score field");
          ds.add(GroundTruth{frame, rec->type, rec->box,
                             DifficultyAttrs{rec->bbox_height_px, rec->occlusion, rec->truncation}});
        }
      }
    }
  };

  read_dir(gt_dir, false);
  if (pred_dir) read_dir(*pred_dir, true);
  return ds;
}

void write_report_csv(const EvalReport& report, std::ostream& out) {
  std::vector<const ReportEntry*> rows;
  for (const auto& e : report.entries) rows.push_back(&e);
  std::stable_sort(rows.begin(), rows.end(), [](const ReportEntry* a, const ReportEntry* b) {
    if (a->class_label != b->class_label) return a->class_label < b->class_label;
    return difficulty_rank(a->difficulty) < difficulty_rank(b->difficulty);
  });
  out << kReportCsvHeader << '\n';
  for (const ReportEntry* e : rows) {
    out << e->class_label << ',' << difficulty_name(e->difficulty) << ','
        << metric_name(e->config.kind) << ',' << (e->ap ? format_fixed4(*e->ap) : "") << ','
        << e->tp << ',' << e->fp << ',' << e->fn << '\n';
  }
  if (!out) throw IoError("report write failure");
}

EvalReport read_report_csv(std::istream& in, const std::string& source) {
  EvalReport report;
  std::string line;
  if (!std::getline(in, line) || line != kReportCsvHeader) {
    throw ParseError(source + ":1: missing report header");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto f = split_csv(line);
    if (f.size() != 7) throw ParseError(where + ": expected 7 columns");
    ReportEntry e;
    e.class_label = f[0];
    const auto level = parse_difficulty(f[1]);
    const auto kind = parse_metric_name(f[2]);
    if (!level) throw ParseError(where + ": unknown difficulty '" + f[1] + "'");
    if (!kind) throw ParseError(where + ": unknown metric '" + f[2] + "'");
    e.difficulty = *level;
    e.config = MetricConfig::for_kind(*kind);
    try {
      if (!f[3].empty()) e.ap = std::stod(f[3]);
      e.tp = std::stoul(f[4]);
      e.fp = std::stoul(f[5]);
      e.fn = std::stoul(f[6]);
    } catch (const std::exception&) {
      throw ParseError(where + ": malformed number");
    }
    report.entries.push_back(std::move(e));
  }
  return report;
}

void write_text_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << contents;
  out.flush();
  if (!out) throw IoError("write failure on " + path.string());
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace csm
