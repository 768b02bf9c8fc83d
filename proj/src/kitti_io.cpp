// Copyright 2026 The monogeo Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "monogeo/kitti_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace monogeo {
namespace {

constexpr const char* kTypes[] = {"Car",     "Van",  "Truck", "Pedestrian", "Person_sitting",
                                  "Cyclist", "Tram", "Misc"};

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
T parse_number(std::string_view s, std::size_t line, const char* field) {
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw KittiParseError(line, fmt::format("bad {} value '{}'", field, s));
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) {
      throw KittiParseError(line, fmt::format("non-finite {} value '{}'", field, s));
    }
  }
  return value;
}

}  // namespace

KittiParseError::KittiParseError(std::size_t line, const std::string& what)
    : std::runtime_error(fmt::format("line {}: {}", line, what)), line_(line) {}

std::vector<KittiLabel> parse_label_file(const std::string& text, LabelKind kind) {
  std::vector<KittiLabel> labels;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto f = split_ws(line);
    if (f.empty()) continue;
    if (f.size() != 15 && f.size() != 16) {
      throw KittiParseError(number, fmt::format("expected 15 or 16 fields, got {}", f.size()));
    }
    if (kind == LabelKind::kGroundTruth && f.size() == 16) {
      throw KittiParseError(number, "ground-truth labels must not carry a score");
    }
    if (kind == LabelKind::kPrediction && f.size() == 15) {
      throw KittiParseError(number, "prediction labels need a score column");
    }
    KittiLabel l;
    l.type = std::string(f[0]);
    l.truncated = parse_number<double>(f[1], number, "truncated");
    l.occluded = parse_number<int>(f[2], number, "occluded");
    l.alpha = parse_number<double>(f[3], number, "alpha");
    for (int i = 0; i < 4; ++i) l.bbox[i] = parse_number<double>(f[4 + i], number, "bbox");
    for (int i = 0; i < 3; ++i) {
      l.dimensions[i] = parse_number<double>(f[8 + i], number, "dimensions");
      l.location[i] = parse_number<double>(f[11 + i], number, "location");
    }
    l.rotation_y = parse_number<double>(f[14], number, "rotation_y");
    if (f.size() == 16) l.score = parse_number<double>(f[15], number, "score");
    if (l.type != "DontCare" && (l.bbox[2] < l.bbox[0] || l.bbox[3] < l.bbox[1])) {
      throw KittiParseError(number, "bbox extents are inverted");
    }
    labels.push_back(std::move(l));
  }
  return labels;
}

std::string emit_label_file(const std::vector<KittiLabel>& labels) {
  std::string out;
  for (const KittiLabel& l : labels) {
    out += fmt::format("{} {:.6f} {} {:.6f} {:.6f} {:.6f} {:.6f} {:.6f} {:.6f} {:.6f} {:.6f} "
                       "{:.6f} {:.6f} {:.6f} {:.6f}",
                       l.type, l.truncated, l.occluded, l.alpha, l.bbox[0], l.bbox[1], l.bbox[2],
                       l.bbox[3], l.dimensions[0], l.dimensions[1], l.dimensions[2],
                       l.location[0], l.location[1], l.location[2], l.rotation_y);
    if (l.score) out += fmt::format(" {:.6f}", *l.score);
    out += "\n";
  }
  return out;
}

const std::vector<double>* KittiCalib::find(const std::string& key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return &v;
  }
  return nullptr;
}

CameraIntrinsicsd KittiCalib::intrinsics() const {
  const std::vector<double>* p2 = find("P2");
  if (!p2 || p2->size() != 12) throw std::runtime_error("calibration has no 3x4 P2 matrix");
  return {(*p2)[0], (*p2)[5], (*p2)[2], (*p2)[6]};
}

KittiCalib parse_calib_file(const std::string& text) {
  KittiCalib calib;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto f = split_ws(line);
    if (f.empty()) continue;
    std::string_view key = f[0];
    if (key.empty() || key.back() != ':') throw KittiParseError(number, "expected 'KEY: values'");
    key.remove_suffix(1);
    std::vector<double> values;
    for (std::size_t i = 1; i < f.size(); ++i) {
      values.push_back(parse_number<double>(f[i], number, "matrix"));
    }
    calib.entries.emplace_back(std::string(key), std::move(values));
  }
  const std::vector<double>* p2 = calib.find("P2");
  if (!p2) throw std::runtime_error("calibration is missing the P2 entry");
  if (p2->size() != 12) throw std::runtime_error("P2 must hold 12 values");
  calib.intrinsics();
  return calib;
}

std::string emit_calib_file(const KittiCalib& calib) {
  std::string out;
  for (const auto& [key, values] : calib.entries) {
    out += key + ":";
    for (double v : values) out += fmt::format(" {:.12e}", v);
    out += "\n";
  }
  return out;
}

KittiCalib make_calib(const CameraIntrinsicsd& K) {
  const std::vector<double> p = {K.fu, 0, K.pu, 0, 0, K.fv, K.pv, 0, 0, 0, 1, 0};
  KittiCalib calib;
  for (const char* key : {"P0", "P1", "P2", "P3"}) calib.entries.emplace_back(key, p);
  calib.entries.emplace_back("R0_rect", std::vector<double>{1, 0, 0, 0, 1, 0, 0, 0, 1});
  const std::vector<double> rt = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0};
  calib.entries.emplace_back("Tr_velo_to_cam", rt);
  calib.entries.emplace_back("Tr_imu_to_velo", rt);
  return calib;
}

double alpha_from_yaw(double yaw, const Point3d& location) {
  return normalize_angle(yaw - std::atan2(location.x(), location.z()));
}

double yaw_from_alpha(double alpha, const Point3d& location) {
  return normalize_angle(alpha + std::atan2(location.x(), location.z()));
}

int class_id_from_type(const std::string& type) {
  for (std::size_t i = 0; i < std::size(kTypes); ++i) {
    if (type == kTypes[i]) return static_cast<int>(i) + 1;
  }
  return 0;
}

std::string type_from_class_id(int class_id) {
  if (class_id < 1 || class_id > static_cast<int>(std::size(kTypes))) return "Misc";
  return kTypes[class_id - 1];
}

Box3Dd label_to_box3d(const KittiLabel& label) {
  Box3Dd b;
  const double h = label.dimensions[0];
  b.center = {label.location[0], label.location[1] - h / 2, label.location[2]};
  b.size = {label.dimensions[2], label.dimensions[1], h};
  b.yaw = normalize_angle(label.rotation_y);
  b.class_id = class_id_from_type(label.type);
  b.score = label.score.value_or(1.0);
  return b;
}

KittiLabel box3d_to_label(const Box3Dd& box, const std::string& type, const CameraIntrinsicsd& K,
                          bool with_score) {
  KittiLabel l;
  l.type = type;
  const Box2Dd b2 = box3d_to_box2d(box, K);
  l.bbox = {b2.left(), b2.top(), b2.right(), b2.bottom()};
  l.dimensions = {box.size.height, box.size.width, box.size.length};
  l.location = {box.center.x(), box.center.y() + box.size.height / 2, box.center.z()};
  l.rotation_y = normalize_angle(box.yaw);
  l.alpha = alpha_from_yaw(l.rotation_y, box.center);
  if (with_score) l.score = box.score;
  return l;
}

EvalObject to_eval_object(const KittiLabel& label) {
  EvalObject o;
  o.box = label_to_box3d(label);
  o.type = label.type;
  o.height_2d = label.bbox[3] - label.bbox[1];
  o.truncation = label.truncated;
  o.occlusion = label.occluded;
  return o;
}

std::vector<EvalObject> to_eval_objects(const std::vector<KittiLabel>& labels) {
  std::vector<EvalObject> out;
  for (const KittiLabel& l : labels) {
    if (l.type != "DontCare") out.push_back(to_eval_object(l));
  }
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", tmp.string()));
    out << text;
    if (!out.flush()) throw std::runtime_error(fmt::format("write failed for '{}'", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

std::vector<std::string> list_frames(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw std::runtime_error(fmt::format("'{}' is not a directory", dir.string()));
  }
  std::vector<std::string> frames;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      frames.push_back(entry.path().stem().string());
    }
  }
  std::sort(frames.begin(), frames.end());
  return frames;
}

}  // namespace monogeo
