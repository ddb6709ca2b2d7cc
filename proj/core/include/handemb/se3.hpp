#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace handemb {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

/// Rigid transform in SE(3).
///
/// Active convention: `apply(p)` maps a point expressed in the child frame into
/// the parent frame, and `a * b` applies `b` first, then `a`. A transform named
/// `world_hand` therefore maps hand coordinates to world coordinates.
class Transform {
 public:
  Transform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  Transform(const Mat3& rotation, const Vec3& translation)
      : rotation_(rotation), translation_(translation) {}

  static Transform identity() { return {}; }
  static Transform from_translation(const Vec3& t) { return {Mat3::Identity(), t}; }
  static Transform from_rotation(const Mat3& r) { return {r, Vec3::Zero()}; }
  static Transform from_axis_angle(const Vec3& axis, double angle,
                                   const Vec3& t = Vec3::Zero());
  /// Normalizes `q` before use. Throws DegenerateFrame on a zero quaternion.
  static Transform from_quaternion(const Quat& q, const Vec3& t = Vec3::Zero());
  /// Fixed-axis roll/pitch/yaw, R = Rz(yaw) * Ry(pitch) * Rx(roll).
  static Transform from_xyz_rpy(const Vec3& xyz, const Vec3& rpy);
  /// Validating constructor for data read from files.
  static Transform checked(const Mat3& rotation, const Vec3& translation,
                           double tolerance = 1e-9);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  /// Unit quaternion with non-negative w.
  Quat quaternion() const;
  Eigen::Matrix4d matrix() const;

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  Vec3 apply_direction(const Vec3& v) const { return rotation_ * v; }

  Transform operator*(const Transform& rhs) const {
    return {rotation_ * rhs.rotation_, rotation_ * rhs.translation_ + translation_};
  }
  Transform inverse() const {
    Mat3 rt = rotation_.transpose();
    return {rt, -(rt * translation_)};
  }

  bool operator==(const Transform& other) const {
    return rotation_ == other.rotation_ && translation_ == other.translation_;
  }

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

/// Applies `b`, then `a`.
inline Transform compose(const Transform& a, const Transform& b) { return a * b; }
inline Transform invert(const Transform& t) { return t.inverse(); }

/// Rotation about a coordinate axis.
Mat3 rotation_x(double angle);
Mat3 rotation_y(double angle);
Mat3 rotation_z(double angle);

/// Two-vector frame construction. Rotation columns are [n, o, a] with
/// a = normalize(approach), o = orientation orthogonalized against a, n = o x a.
/// Throws DegenerateFrame if either vector is zero or they are parallel
/// within 1e-6 rad.
Transform frame_from_two_vectors(const Vec3& approach, const Vec3& orientation,
                                 const Vec3& origin);

/// True when R^T R = I within `tolerance` per entry and det(R) > 0.
bool is_rotation(const Mat3& r, double tolerance = 1e-9);

/// Geodesic angle between two rotations, radians.
double rotation_distance(const Mat3& a, const Mat3& b);

}  // namespace handemb
