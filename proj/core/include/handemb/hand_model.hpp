#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "handemb/mesh.hpp"
#include "handemb/se3.hpp"

namespace handemb {

enum class FingerId : int { thumb = 1, index = 2, middle = 3, ring = 4, little = 5 };

inline constexpr std::array<FingerId, 5> kFingers{FingerId::thumb, FingerId::index,
                                                  FingerId::middle, FingerId::ring,
                                                  FingerId::little};

constexpr std::size_t finger_slot(FingerId f) { return static_cast<std::size_t>(f) - 1; }
std::string_view finger_name(FingerId f);
std::optional<FingerId> finger_from_name(std::string_view name);

inline constexpr int kShapeSize = 10;
inline constexpr int kFingerDof = 9;
inline constexpr int kSegments = 3;

using Beta = Eigen::Matrix<double, kShapeSize, 1>;
using FingerAngles = Eigen::Matrix<double, kFingerDof, 1>;

/// Attachment of a virtual marker to one phalanx: a point `fraction` of the
/// way along the segment, pushed `dorsal` radii toward the back of the finger.
struct MarkerPlacement {
  int segment = 0;
  double fraction = 1.0;
  double dorsal = 0.0;
};

/// Per-finger affine shape model. Parameter vector layout:
/// [0..2] base joint position (m), [3..5] segment lengths (m), [6..8] radii (m).
struct FingerShapeBasis {
  Mat3 base_rotation = Mat3::Identity();
  Eigen::Matrix<double, 9, 1> mean = Eigen::Matrix<double, 9, 1>::Zero();
  Eigen::Matrix<double, 9, kShapeSize> coefficients = Eigen::Matrix<double, 9, kShapeSize>::Zero();
  std::array<MarkerPlacement, 2> markers{MarkerPlacement{1, 0.5, 1.0}, MarkerPlacement{2, 1.0, 0.0}};
};

/// Finger dimensions resolved for one beta.
struct FingerGeometry {
  Transform base;  // hand-model base <- finger base joint frame
  std::array<double, kSegments> lengths{};
  std::array<double, kSegments> radii{};
  std::array<MarkerPlacement, 2> markers{};

  double reach() const { return lengths[0] + lengths[1] + lengths[2]; }
};

/// Skeletal intermediate hand: three segments per finger, each preceded by a
/// flexion (x), abduction (z), twist (y) joint triplet. Fingers point along +y
/// of their base frame, +z is palmar.
class HandShape {
 public:
  HandShape() = default;
  /// Throws SchemaError if any length or radius can become non-positive for
  /// beta in [-3, 3]^10, or if marker placements are out of range.
  HandShape(const Beta& beta, const std::array<FingerShapeBasis, 5>& basis);

  const Beta& beta() const { return beta_; }
  const std::array<FingerShapeBasis, 5>& basis() const { return basis_; }
  const FingerGeometry& finger(FingerId f) const { return geometry_[finger_slot(f)]; }
  HandShape with_beta(const Beta& beta) const { return {beta, basis_}; }

 private:
  Beta beta_ = Beta::Zero();
  std::array<FingerShapeBasis, 5> basis_{};
  std::array<FingerGeometry, 5> geometry_{};
};

/// Intermediate hand state: global pose plus nine joint angles per finger.
struct HandState {
  Transform pose;  // world <- hand-model base
  std::array<FingerAngles, 5> finger_q{FingerAngles::Zero(), FingerAngles::Zero(),
                                        FingerAngles::Zero(), FingerAngles::Zero(),
                                        FingerAngles::Zero()};

  FingerAngles& q(FingerId f) { return finger_q[finger_slot(f)]; }
  const FingerAngles& q(FingerId f) const { return finger_q[finger_slot(f)]; }

  /// Interactive parameterization: 45 finger angles (thumb..little, 9 each)
  /// and a 3-vector global orientation (axis * angle).
  static constexpr int kParameterCount = 48;
  static HandState from_parameters(const Vec3& translation, const Vec3& global_orientation,
                                   const std::array<double, 45>& finger_angles);
  Vec3 global_orientation() const;
};

struct TimedHandState {
  double timestamp = 0.0;
  HandState state;
};

using MarkerPair = std::array<Vec3, 2>;

/// Segment frames (hand-model base <- segment frame) of one finger.
std::array<Transform, kSegments> finger_segment_frames(const FingerGeometry& finger,
                                                       const FingerAngles& q);

/// Mid-phalanx (p1) and fingertip (p2) virtual markers in the hand-model base frame.
MarkerPair finger_forward_kinematics(const HandShape& shape, FingerId finger,
                                     const FingerAngles& q);
MarkerPair finger_forward_kinematics(const FingerGeometry& finger, const FingerAngles& q);

/// All ten virtual markers in the world frame, indexed by finger slot.
std::array<MarkerPair, 5> hand_markers(const HandShape& shape, const HandState& state);

/// Capsule surface of a finger (one capsule per phalanx) in the hand-model base frame.
TriangleMesh finger_surface_mesh(const HandShape& shape, FingerId finger, const FingerAngles& q,
                                 int segments_per_capsule, bool contact_only = false);

}  // namespace handemb
