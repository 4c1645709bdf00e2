#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include "scenepaint/raster/frame_maps.hpp"
#include "scenepaint/raster/projection.hpp"
#include "scenepaint/scenegraph/camera.hpp"
#include "scenepaint/scenegraph/scene.hpp"

namespace scenepaint {

struct RayHit {
  double t = 0.0;  ///< ray parameter; equals camera-space depth for camera rays
  double u = 0.0;  ///< barycentric weight of vertex b
  double v = 0.0;  ///< barycentric weight of vertex c
};

/// Barycentric slack that keeps shared edges watertight.
inline constexpr double kEdgeTolerance = 1e-9;
inline constexpr double kMinHitDistance = 1e-9;

/// Moller-Trumbore ray/triangle test, two-sided.
inline std::optional<RayHit> intersect_ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a, const Vec3& b,
                                                    const Vec3& c) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 p = dir.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-18) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 s = origin - a;
  const double u = s.dot(p) * inv;
  if (u < -kEdgeTolerance || u > 1.0 + kEdgeTolerance) return std::nullopt;
  const Vec3 q = s.cross(e1);
  const double v = dir.dot(q) * inv;
  if (v < -kEdgeTolerance || u + v > 1.0 + kEdgeTolerance) return std::nullopt;
  const double t = e2.dot(q) * inv;
  if (!(t > kMinHitDistance)) return std::nullopt;
  return RayHit{t, u, v};
}

/// World-space direction of the camera ray through the center of pixel (x, y).
inline Vec3 pixel_ray_direction(const Camera& camera, int x, int y) {
  return camera.rotation() * camera_ray(Vec2(x + 0.5, y + 0.5), camera);
}

struct RasterOptions {
  /// Row bands processed in parallel. Output does not depend on this value.
  int workers = 1;
};

namespace detail {

struct RasterTriangle {
  Vec3 a, b, c;
  int class_id = 0;
  int x0 = 0, x1 = -1, y0 = 0, y1 = -1;  // inclusive pixel bounds
};

inline std::vector<RasterTriangle> setup_triangles(const Scene& scene, const Camera& camera) {
  std::vector<RasterTriangle> tris;
  const Mat3 rt = camera.rotation().transpose();
  const Vec3 center = camera.center();
  for (std::size_t oi = 0; oi < scene.objects().size(); ++oi) {
    const auto& obj = scene.objects()[oi];
    const auto world = scene.world_vertices(oi);
    for (const auto& t : scene.mesh_of(obj).triangles) {
      RasterTriangle rt_tri{world[t[0]], world[t[1]], world[t[2]], obj.class_id};
      if (is_degenerate(rt_tri.a, rt_tri.b, rt_tri.c)) continue;
      const Vec3 cam[3] = {rt * (rt_tri.a - center), rt * (rt_tri.b - center), rt * (rt_tri.c - center)};
      if (cam[0].z() <= 0.0 && cam[1].z() <= 0.0 && cam[2].z() <= 0.0) continue;
      rt_tri.x0 = 0;
      rt_tri.x1 = camera.width - 1;
      rt_tri.y0 = 0;
      rt_tri.y1 = camera.height - 1;
      if (cam[0].z() > 1e-6 && cam[1].z() > 1e-6 && cam[2].z() > 1e-6) {
        double umin = std::numeric_limits<double>::infinity(), umax = -umin, vmin = umin, vmax = -umin;
        for (const auto& p : cam) {
          const double u = camera.fx * p.x() / p.z() + camera.cx;
          const double v = camera.fy * p.y() / p.z() + camera.cy;
          umin = std::min(umin, u);
          umax = std::max(umax, u);
          vmin = std::min(vmin, v);
          vmax = std::max(vmax, v);
        }
        // one pixel of slack on each side absorbs the edge tolerance
        auto lo = [](double v, int hi) { return static_cast<int>(std::clamp(std::floor(v - 0.5) - 1.0, 0.0, double(hi))); };
        auto up = [](double v, int hi) { return static_cast<int>(std::clamp(std::ceil(v - 0.5) + 1.0, -1.0, double(hi))); };
        if (umax < -2.0 || vmax < -2.0 || umin > camera.width + 2.0 || vmin > camera.height + 2.0) continue;
        rt_tri.x0 = lo(umin, camera.width - 1);
        rt_tri.x1 = up(umax, camera.width - 1);
        rt_tri.y0 = lo(vmin, camera.height - 1);
        rt_tri.y1 = up(vmax, camera.height - 1);
      }
      tris.push_back(rt_tri);
    }
  }
  return tris;
}

inline void raster_rows(const std::vector<RasterTriangle>& tris, const Camera& camera, int row_begin, int row_end,
                        std::vector<double>& zbuf, FrameMaps& out) {
  const Vec3 origin = camera.center();
  for (const auto& tri : tris) {
    const int y0 = std::max(tri.y0, row_begin);
    const int y1 = std::min(tri.y1, row_end - 1);
    for (int y = y0; y <= y1; ++y) {
      for (int x = tri.x0; x <= tri.x1; ++x) {
        const auto hit = intersect_ray_triangle(origin, pixel_ray_direction(camera, x, y), tri.a, tri.b, tri.c);
        if (!hit) continue;
        const std::size_t i = out.index(x, y);
        // strict comparison: on equal depth the earlier (object, triangle) wins
        if (!(hit->t < zbuf[i])) continue;
        zbuf[i] = hit->t;
        const Vec3 p = (1.0 - hit->u - hit->v) * tri.a + hit->u * tri.b + hit->v * tri.c;
        out.label[i] = static_cast<std::int16_t>(tri.class_id);
        out.depth[i] = static_cast<float>(hit->t);
        out.coord[3 * i] = static_cast<float>(p.x());
        out.coord[3 * i + 1] = static_cast<float>(p.y());
        out.coord[3 * i + 2] = static_cast<float>(p.z());
      }
    }
  }
}

}  // namespace detail

/// Renders label, depth and world-coordinate maps for one view. Each pixel
/// center takes the closest two-sided triangle hit along its camera ray; the
/// hit position is the barycentric interpolation of the triangle's world
/// vertices.
inline FrameMaps rasterize_view(const Scene& scene, const Camera& camera, RasterOptions options = {}) {
  camera.validate();
  if (scene.class_count() > std::numeric_limits<std::int16_t>::max()) {
    throw ValidationError("class count does not fit the 16-bit label map");
  }
  FrameMaps out(camera.width, camera.height, scene.class_count());
  const auto tris = detail::setup_triangles(scene, camera);
  std::vector<double> zbuf(out.pixel_count(), std::numeric_limits<double>::infinity());
  const int workers = std::clamp(options.workers, 1, camera.height);
  if (workers == 1) {
    detail::raster_rows(tris, camera, 0, camera.height, zbuf, out);
    return out;
  }
  std::vector<std::jthread> pool;
  const int band = (camera.height + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int begin = w * band;
    const int end = std::min(camera.height, begin + band);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] { detail::raster_rows(tris, camera, begin, end, zbuf, out); });
  }
  pool.clear();
  return out;
}

}  // namespace scenepaint
