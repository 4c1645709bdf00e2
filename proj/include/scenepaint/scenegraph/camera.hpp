#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "scenepaint/core/error.hpp"
#include "scenepaint/core/text_io.hpp"
#include "scenepaint/scenegraph/geometry.hpp"

namespace scenepaint {

/// Pinhole camera. Camera frame: x right, y down, z forward. `pose` maps
/// camera coordinates to world coordinates.
struct Camera {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.5;
  double cy = 0.5;
  Mat4 pose = Mat4::Identity();
  int width = 1;
  int height = 1;

  Mat3 rotation() const { return pose.topLeftCorner<3, 3>(); }
  Vec3 center() const { return pose.topRightCorner<3, 1>(); }

  void validate() const {
    if (width <= 0 || height <= 0) throw ValidationError("camera resolution must be positive");
    if (!(fx > 0.0) || !(fy > 0.0)) throw ValidationError("camera focal lengths must be positive");
    if (!(cx > 0.0 && cx < width) || !(cy > 0.0 && cy < height)) {
      throw ValidationError("camera principal point must lie inside the image");
    }
    if (!is_rigid(pose, false)) throw ValidationError("camera pose must be a rigid transform");
  }

  bool operator==(const Camera&) const = default;
};

/// Symmetric pinhole camera with the given horizontal field of view.
inline Camera make_camera(int width, int height, double hfov_degrees, const Mat4& pose) {
  Camera cam;
  cam.width = width;
  cam.height = height;
  cam.fx = cam.fy = 0.5 * width / std::tan(0.5 * hfov_degrees * std::numbers::pi / 180.0);
  cam.cx = 0.5 * width;
  cam.cy = 0.5 * height;
  cam.pose = pose;
  return cam;
}

/// World-from-camera pose looking from `eye` towards `target`, with the image
/// y axis pointing away from `up`.
inline Mat4 look_at(const Vec3& eye, const Vec3& target, const Vec3& up = Vec3::UnitY()) {
  const Vec3 z = (target - eye).normalized();
  Vec3 x = z.cross(up);
  if (x.squaredNorm() < 1e-20) x = z.cross(Vec3::UnitX());
  x.normalize();
  const Vec3 y = z.cross(x);
  Mat4 pose = Mat4::Identity();
  pose.block<3, 1>(0, 0) = x;
  pose.block<3, 1>(0, 1) = y;
  pose.block<3, 1>(0, 2) = z;
  pose.topRightCorner<3, 1>() = eye;
  return pose;
}

// Camera list format, version 1:
//
//   scenepaint-cameras 1
//   camera <W> <H> <fx> <fy> <cx> <cy> <12 numbers: pose rows 0..2, row-major>

inline std::vector<Camera> parse_cameras(const std::string& name, std::string_view content) {
  TextReader reader(name, content);
  const int version = reader.expect_header("scenepaint-cameras");
  if (version != 1) throw ValidationError(name + ": unsupported camera format version " + std::to_string(version));
  std::vector<Camera> cams;
  while (const TextLine* line = reader.next()) {
    if (line->tokens[0] != "camera") reader.fail(*line, "unknown record '" + line->tokens[0] + "'");
    if (line->tokens.size() != 19) reader.fail(*line, "expected 'camera W H fx fy cx cy' followed by 12 pose numbers");
    Camera cam;
    cam.width = reader.parse_int(*line, 1);
    cam.height = reader.parse_int(*line, 2);
    cam.fx = reader.parse_double(*line, 3);
    cam.fy = reader.parse_double(*line, 4);
    cam.cx = reader.parse_double(*line, 5);
    cam.cy = reader.parse_double(*line, 6);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) cam.pose(r, c) = reader.parse_double(*line, 7 + 4 * r + c);
    }
    try {
      cam.validate();
    } catch (const ValidationError& e) {
      reader.fail(*line, e.what());
    }
    cams.push_back(cam);
  }
  if (cams.empty()) throw ValidationError(name + ": no cameras");
  return cams;
}

inline std::vector<Camera> load_cameras(const std::filesystem::path& path) {
  return parse_cameras(path.string(), read_text(path));
}

inline std::string format_cameras(const std::vector<Camera>& cams) {
  std::string out = "scenepaint-cameras 1\n";
  for (const auto& c : cams) {
    out += "camera " + std::to_string(c.width) + " " + std::to_string(c.height) + " " + format_number(c.fx) + " " +
           format_number(c.fy) + " " + format_number(c.cx) + " " + format_number(c.cy);
    for (int r = 0; r < 3; ++r) {
      for (int k = 0; k < 4; ++k) out += " " + format_number(c.pose(r, k));
    }
    out += "\n";
  }
  return out;
}

inline void save_cameras(const std::vector<Camera>& cams, const std::filesystem::path& path) {
  write_text_file(path, format_cameras(cams));
}

}  // namespace scenepaint
