#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "scenepaint/core/error.hpp"

namespace scenepaint {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Axis-aligned box in world units.
struct AABB {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  static AABB empty() { return {}; }

  void expand(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }

  bool is_empty() const { return (min.array() > max.array()).any(); }
  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
  bool has_positive_extent() const { return !is_empty() && (extent().array() > 0.0).all(); }

  bool contains(const Vec3& p, double tol = 0.0) const {
    return (p.array() >= min.array() - tol).all() && (p.array() <= max.array() + tol).all();
  }

  bool contains(const AABB& other, double tol = 0.0) const {
    return contains(other.min, tol) && contains(other.max, tol);
  }

  bool overlaps(const AABB& other) const {
    return (min.array() <= other.max.array()).all() && (other.min.array() <= max.array()).all();
  }

  bool operator==(const AABB&) const = default;
};

inline Vec3 transform_point(const Mat4& m, const Vec3& p) {
  return m.topLeftCorner<3, 3>() * p + m.topRightCorner<3, 1>();
}

/// Rigid (rotation + translation) with optional uniform scale, positive
/// determinant and an affine last row.
inline bool is_rigid(const Mat4& m, bool allow_uniform_scale = true, double tol = 1e-9) {
  if (!m.allFinite()) return false;
  if (std::abs(m(3, 0)) > tol || std::abs(m(3, 1)) > tol || std::abs(m(3, 2)) > tol ||
      std::abs(m(3, 3) - 1.0) > tol) {
    return false;
  }
  const Mat3 a = m.topLeftCorner<3, 3>();
  const double det = a.determinant();
  if (!(det > 0.0)) return false;
  const double scale = std::cbrt(det);
  if (!allow_uniform_scale && std::abs(scale - 1.0) > tol) return false;
  const Mat3 r = a / scale;
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol * 10.0;
}

/// Uniform scale factor of a rigid-with-scale transform.
inline double uniform_scale(const Mat4& m) { return std::cbrt(m.topLeftCorner<3, 3>().determinant()); }

inline Mat4 translation(const Vec3& t) {
  Mat4 m = Mat4::Identity();
  m.topRightCorner<3, 1>() = t;
  return m;
}

/// Rotation by `degrees` about a world axis (0 = x, 1 = y, 2 = z).
inline Mat4 rotation_about_axis(int axis, double degrees) {
  Mat4 m = Mat4::Identity();
  const Vec3 dir = Vec3::Unit(axis);
  m.topLeftCorner<3, 3>() = Eigen::AngleAxisd(degrees * std::numbers::pi / 180.0, dir).toRotationMatrix();
  return m;
}

/// Exact quarter-turn rotation about `axis` (entries are 0 or +-1).
inline Mat4 quarter_turn(int axis, int turns) {
  Mat4 m = Mat4::Identity();
  turns = ((turns % 4) + 4) % 4;
  const int i = (axis + 1) % 3;
  const int j = (axis + 2) % 3;
  for (int t = 0; t < turns; ++t) {
    Mat4 q = Mat4::Identity();
    q(i, i) = 0.0;
    q(j, j) = 0.0;
    q(i, j) = -1.0;
    q(j, i) = 1.0;
    m = q * m;
  }
  return m;
}

/// Inverse of a rigid-with-uniform-scale transform.
inline Mat4 rigid_inverse(const Mat4& m) {
  const double s = uniform_scale(m);
  const Mat3 a = m.topLeftCorner<3, 3>();
  const Mat3 inv = a.transpose() / (s * s);
  Mat4 out = Mat4::Identity();
  out.topLeftCorner<3, 3>() = inv;
  out.topRightCorner<3, 1>() = -inv * m.topRightCorner<3, 1>();
  return out;
}

/// Affine map sending bounds.min to (-1,-1,-1) and bounds.max to (1,1,1).
inline Vec3 normalize_coord(const Vec3& x, const AABB& bounds) {
  const Vec3 ext = bounds.extent();
  if (bounds.is_empty() || !(ext.array() > 0.0).all()) {
    throw ValidationError("normalize_coord: bounds have zero extent on some axis");
  }
  return (2.0 * (x - bounds.min).array() / ext.array() - 1.0).matrix();
}

inline Vec3 unnormalize_coord(const Vec3& n, const AABB& bounds) {
  const Vec3 ext = bounds.extent();
  if (bounds.is_empty() || !(ext.array() > 0.0).all()) {
    throw ValidationError("unnormalize_coord: bounds have zero extent on some axis");
  }
  return (bounds.min.array() + (n.array() + 1.0) * 0.5 * ext.array()).matrix();
}

}  // namespace scenepaint
