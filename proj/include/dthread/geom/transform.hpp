#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>

namespace dthread::geom {

using Vec3 = Eigen::Vector3d;

/// Rigid placement: p' = rotation * p + translation.
struct Transform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Vec3 translation = Vec3::Zero();

  static Transform identity() { return {}; }
  static Transform translate(const Vec3& t) { return {Eigen::Matrix3d::Identity(), t}; }
  /// Rotation about the z axis by `degrees`.
  static Transform rotate_z(double degrees);

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 apply_direction(const Vec3& d) const { return rotation * d; }
  Transform inverse() const;
  /// Orthonormal rotation and determinant +1, each within `tol`.
  bool is_rigid(double tol = 1e-6) const;
};

/// Applies `chain` in order: the first transform acts on the point first.
/// Throws Errc::kNonRigidTransform when any element is not rigid.
Transform compose_transforms(std::span<const Transform> chain);

/// Placement frame from an AXIS2_PLACEMENT_3D: location, axis (z) and
/// reference direction (x), each normalized; x is re-orthogonalized
/// against z. Throws Errc::kNonRigidTransform for degenerate directions.
Transform placement_frame(const Vec3& location, const Vec3& axis, const Vec3& ref_direction);

/// Axis-aligned box in millimetres. The default value is Empty.
class Aabb {
 public:
  Aabb() = default;
  Aabb(const Vec3& min, const Vec3& max);
  static Aabb empty() { return {}; }

  bool is_empty() const { return empty_; }
  const Vec3& min() const { return min_; }
  const Vec3& max() const { return max_; }
  static constexpr const char* unit() { return "mm"; }

  void extend(const Vec3& p);
  void extend(const Aabb& other);
  Aabb inflated(double by) const;
  bool contains(const Aabb& other, double tol = 0.0) const;
  /// Closed boxes: touching faces intersect. Empty never intersects.
  bool intersects(const Aabb& other) const;
  /// Largest per-axis separation, 0 when the boxes overlap on every axis.
  double chebyshev_gap(const Aabb& other) const;
  /// Euclidean distance between the closest points, 0 when intersecting.
  double distance(const Aabb& other) const;
  /// Box of the eight transformed corners.
  Aabb transformed(const Transform& t) const;

  friend bool operator==(const Aabb& a, const Aabb& b) {
    return a.empty_ == b.empty_ && (a.empty_ || (a.min_ == b.min_ && a.max_ == b.max_));
  }

 private:
  bool empty_ = true;
  Vec3 min_ = Vec3::Zero();
  Vec3 max_ = Vec3::Zero();
};

}  // namespace dthread::geom
