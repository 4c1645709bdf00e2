#pragma once

#include "scenepaint/core/error.hpp"
#include "scenepaint/scenegraph/camera.hpp"
#include "scenepaint/scenegraph/geometry.hpp"

namespace scenepaint {

struct Projection {
  Vec2 pixel;
  double depth = 0.0;
};

/// Continuous pixel coordinates; pixel (i, j) has its center at (i+0.5, j+0.5).
inline Projection project(const Vec3& world, const Camera& camera) {
  const Vec3 c = camera.rotation().transpose() * (world - camera.center());
  if (!(c.z() > 0.0)) throw ValidationError("project: point is behind the camera");
  return {Vec2(camera.fx * c.x() / c.z() + camera.cx, camera.fy * c.y() / c.z() + camera.cy), c.z()};
}

/// Camera-frame direction of the ray through `pixel`, scaled so z = 1.
inline Vec3 camera_ray(const Vec2& pixel, const Camera& camera) {
  return {(pixel.x() - camera.cx) / camera.fx, (pixel.y() - camera.cy) / camera.fy, 1.0};
}

/// World point at camera-space depth `depth` along the ray through `pixel`.
inline Vec3 unproject(const Vec2& pixel, double depth, const Camera& camera) {
  if (!(depth > 0.0)) throw ValidationError("unproject: depth must be positive");
  return transform_point(camera.pose, depth * camera_ray(pixel, camera));
}

}  // namespace scenepaint
