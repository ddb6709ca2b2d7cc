#include "handemb/se3.hpp"

#include <cmath>

#include "handemb/errors.hpp"

namespace handemb {

namespace {
constexpr double kParallelTolerance = 1e-6;
}

Transform Transform::from_axis_angle(const Vec3& axis, double angle, const Vec3& t) {
  return {Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix(), t};
}

Transform Transform::from_quaternion(const Quat& q, const Vec3& t) {
  const double norm = q.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw DegenerateFrame("quaternion has zero or non-finite norm");
  }
  return {q.normalized().toRotationMatrix(), t};
}

Transform Transform::from_xyz_rpy(const Vec3& xyz, const Vec3& rpy) {
  return {rotation_z(rpy.z()) * rotation_y(rpy.y()) * rotation_x(rpy.x()), xyz};
}

Transform Transform::checked(const Mat3& rotation, const Vec3& translation,
                             double tolerance) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw DegenerateFrame("transform has non-finite entries");
  }
  if (!is_rotation(rotation, tolerance)) {
    throw DegenerateFrame("rotation matrix is not orthonormal with det +1");
  }
  return {rotation, translation};
}

Quat Transform::quaternion() const {
  Quat q(rotation_);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  return q;
}

Eigen::Matrix4d Transform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Mat3 rotation_x(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

Mat3 rotation_y(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

Mat3 rotation_z(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

Transform frame_from_two_vectors(const Vec3& approach, const Vec3& orientation,
                                 const Vec3& origin) {
  const double na = approach.norm();
  const double no = orientation.norm();
  if (!(na > 0.0) || !(no > 0.0) || !std::isfinite(na) || !std::isfinite(no)) {
    throw DegenerateFrame("approach and orientation vectors must be non-zero and finite");
  }
  const Vec3 a = approach / na;
  const Vec3 o_dir = orientation / no;
  // sin of the angle between the two directions
  if (a.cross(o_dir).norm() < std::sin(kParallelTolerance)) {
    throw DegenerateFrame("approach and orientation vectors are parallel");
  }
  const Vec3 o = (o_dir - o_dir.dot(a) * a).normalized();
  const Vec3 n = o.cross(a);
  Mat3 r;
  r.col(0) = n;
  r.col(1) = o;
  r.col(2) = a;
  return {r, origin};
}

bool is_rotation(const Mat3& r, double tolerance) {
  if (!r.allFinite()) return false;
  const Mat3 gram = r.transpose() * r;
  if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > tolerance) return false;
  return r.determinant() > 0.0;
}

double rotation_distance(const Mat3& a, const Mat3& b) {
  const Mat3 rel = a.transpose() * b;
  const Vec3 skew(rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0), rel(1, 0) - rel(0, 1));
  const double s = 0.5 * skew.norm();
  const double c = 0.5 * (rel.trace() - 1.0);
  return std::atan2(s, c);
}

}  // namespace handemb
