#include "dthread/geom/transform.hpp"

#include <cmath>
#include <numbers>

#include "dthread/core/error.hpp"

namespace dthread::geom {

Transform Transform::rotate_z(double degrees) {
  const double r = degrees * std::numbers::pi / 180.0;
  Transform t;
  t.rotation = Eigen::AngleAxisd(r, Vec3::UnitZ()).toRotationMatrix();
  return t;
}

Transform Transform::inverse() const {
  Transform t;
  t.rotation = rotation.transpose();
  t.translation = -(t.rotation * translation);
  return t;
}

bool Transform::is_rigid(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  const Eigen::Matrix3d gram = rotation.transpose() * rotation;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(rotation.determinant() - 1.0) <= tol;
}

Transform compose_transforms(std::span<const Transform> chain) {
  Transform out;
  for (const auto& t : chain) {
    if (!t.is_rigid()) throw Error(Errc::kNonRigidTransform, "transform is not rigid");
    out.translation = t.rotation * out.translation + t.translation;
    out.rotation = t.rotation * out.rotation;
  }
  return out;
}

Transform placement_frame(const Vec3& location, const Vec3& axis, const Vec3& ref_direction) {
  if (axis.norm() < 1e-12 || ref_direction.norm() < 1e-12) {
    throw Error(Errc::kNonRigidTransform, "placement direction has zero length");
  }
  const Vec3 z = axis.normalized();
  Vec3 x = ref_direction - ref_direction.dot(z) * z;
  if (x.norm() < 1e-9) throw Error(Errc::kNonRigidTransform, "placement ref_direction is parallel to its axis");
  x.normalize();
  const Vec3 y = z.cross(x);
  Transform t;
  t.rotation.col(0) = x;
  t.rotation.col(1) = y;
  t.rotation.col(2) = z;
  t.translation = location;
  return t;
}

Aabb::Aabb(const Vec3& min, const Vec3& max) : empty_(false), min_(min), max_(max) {
  if ((min.array() > max.array()).any()) throw Error(Errc::kInvalidArgument, "AABB min exceeds max");
}

void Aabb::extend(const Vec3& p) {
  if (empty_) {
    min_ = max_ = p;
    empty_ = false;
    return;
  }
  min_ = min_.cwiseMin(p);
  max_ = max_.cwiseMax(p);
}

void Aabb::extend(const Aabb& other) {
  if (other.empty_) return;
  extend(other.min_);
  extend(other.max_);
}

Aabb Aabb::inflated(double by) const {
  if (empty_) return *this;
  return Aabb(min_ - Vec3::Constant(by), max_ + Vec3::Constant(by));
}

bool Aabb::contains(const Aabb& other, double tol) const {
  if (other.empty_) return true;
  if (empty_) return false;
  return (min_.array() <= other.min_.array() + tol).all() && (max_.array() + tol >= other.max_.array()).all();
}

bool Aabb::intersects(const Aabb& other) const {
  if (empty_ || other.empty_) return false;
  return (min_.array() <= other.max_.array()).all() && (other.min_.array() <= max_.array()).all();
}

namespace {
Vec3 axis_gaps(const Vec3& amin, const Vec3& amax, const Vec3& bmin, const Vec3& bmax) {
  Vec3 g;
  for (int i = 0; i < 3; ++i) g[i] = std::max({0.0, bmin[i] - amax[i], amin[i] - bmax[i]});
  return g;
}
}  // namespace

double Aabb::chebyshev_gap(const Aabb& other) const {
  if (empty_ || other.empty_) return std::numeric_limits<double>::infinity();
  return axis_gaps(min_, max_, other.min_, other.max_).maxCoeff();
}

double Aabb::distance(const Aabb& other) const {
  if (empty_ || other.empty_) return std::numeric_limits<double>::infinity();
  return axis_gaps(min_, max_, other.min_, other.max_).norm();
}

Aabb Aabb::transformed(const Transform& t) const {
  if (empty_) return *this;
  Aabb out;
  for (int corner = 0; corner < 8; ++corner) {
    const Vec3 p((corner & 1) ? max_.x() : min_.x(), (corner & 2) ? max_.y() : min_.y(),
                 (corner & 4) ? max_.z() : min_.z());
    out.extend(t.apply(p));
  }
  return out;
}

}  // namespace dthread::geom
