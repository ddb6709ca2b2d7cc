#include "handemb/hand_model.hpp"

#include <cmath>
#include <string>

#include "handemb/errors.hpp"

namespace handemb {

namespace {
constexpr std::array<std::string_view, 5> kFingerNames{"thumb", "index", "middle", "ring",
                                                       "little"};
constexpr double kBetaRange = 3.0;
}  // namespace

std::string_view finger_name(FingerId f) { return kFingerNames.at(finger_slot(f)); }

std::optional<FingerId> finger_from_name(std::string_view name) {
  for (FingerId f : kFingers) {
    if (finger_name(f) == name) return f;
  }
  return std::nullopt;
}

HandShape::HandShape(const Beta& beta, const std::array<FingerShapeBasis, 5>& basis)
    : beta_(beta), basis_(basis) {
  if (!beta_.allFinite()) throw SchemaError("shape parameters must be finite");
  for (FingerId f : kFingers) {
    const FingerShapeBasis& b = basis_[finger_slot(f)];
    const std::string name(finger_name(f));
    if (!b.mean.allFinite() || !b.coefficients.allFinite()) {
      throw SchemaError("finger '" + name + "': shape basis must be finite");
    }
    if (!is_rotation(b.base_rotation)) {
      throw SchemaError("finger '" + name + "': base rotation is not orthonormal");
    }
    // Lengths and radii must stay positive over the whole admissible beta box.
    for (int k = 3; k < 9; ++k) {
      const double worst = b.mean[k] - kBetaRange * b.coefficients.row(k).cwiseAbs().sum();
      if (!(worst > 0.0)) {
        throw SchemaError("finger '" + name + "': segment " +
                          std::string(k < 6 ? "length" : "radius") +
                          " can become non-positive for beta in [-3, 3]");
      }
    }
    for (const MarkerPlacement& m : b.markers) {
      if (m.segment < 0 || m.segment >= kSegments || !(m.fraction >= 0.0 && m.fraction <= 1.0) ||
          !std::isfinite(m.dorsal)) {
        throw SchemaError("finger '" + name + "': invalid marker placement");
      }
    }

    const Eigen::Matrix<double, 9, 1> p = b.mean + b.coefficients * beta_;
    FingerGeometry& g = geometry_[finger_slot(f)];
    g.base = Transform(b.base_rotation, p.head<3>());
    for (int s = 0; s < kSegments; ++s) {
      g.lengths[s] = p[3 + s];
      g.radii[s] = p[6 + s];
      if (!(g.lengths[s] > 0.0) || !(g.radii[s] > 0.0)) {
        throw SchemaError("finger '" + name + "': resolved dimensions must be positive");
      }
    }
    g.markers = b.markers;
  }
}

HandState HandState::from_parameters(const Vec3& translation, const Vec3& global_orientation,
                                     const std::array<double, 45>& finger_angles) {
  HandState state;
  const double angle = global_orientation.norm();
  state.pose = angle > 0.0 ? Transform::from_axis_angle(global_orientation / angle, angle, translation)
                           : Transform::from_translation(translation);
  for (std::size_t f = 0; f < 5; ++f) {
    for (int k = 0; k < kFingerDof; ++k) state.finger_q[f][k] = finger_angles[f * kFingerDof + k];
  }
  return state;
}

Vec3 HandState::global_orientation() const {
  const Eigen::AngleAxisd aa(pose.rotation());
  return aa.axis() * aa.angle();
}

std::array<Transform, kSegments> finger_segment_frames(const FingerGeometry& finger,
                                                       const FingerAngles& q) {
  std::array<Transform, kSegments> frames;
  Mat3 r = finger.base.rotation();
  Vec3 t = finger.base.translation();
  for (int s = 0; s < kSegments; ++s) {
    if (s > 0) t += r.col(1) * finger.lengths[s - 1];
    r = r * rotation_x(q[3 * s]) * rotation_z(q[3 * s + 1]) * rotation_y(q[3 * s + 2]);
    frames[s] = Transform(r, t);
  }
  return frames;
}

MarkerPair finger_forward_kinematics(const FingerGeometry& finger, const FingerAngles& q) {
  const auto frames = finger_segment_frames(finger, q);
  MarkerPair out;
  for (int j = 0; j < 2; ++j) {
    const MarkerPlacement& m = finger.markers[j];
    out[j] = frames[m.segment].apply(
        Vec3(0.0, m.fraction * finger.lengths[m.segment], -m.dorsal * finger.radii[m.segment]));
  }
  return out;
}

MarkerPair finger_forward_kinematics(const HandShape& shape, FingerId finger,
                                     const FingerAngles& q) {
  return finger_forward_kinematics(shape.finger(finger), q);
}

std::array<MarkerPair, 5> hand_markers(const HandShape& shape, const HandState& state) {
  std::array<MarkerPair, 5> out;
  for (FingerId f : kFingers) {
    const MarkerPair local = finger_forward_kinematics(shape, f, state.q(f));
    out[finger_slot(f)] = {state.pose.apply(local[0]), state.pose.apply(local[1])};
  }
  return out;
}

TriangleMesh finger_surface_mesh(const HandShape& shape, FingerId finger, const FingerAngles& q,
                                 int segments_per_capsule, bool contact_only) {
  const FingerGeometry& g = shape.finger(finger);
  const auto frames = finger_segment_frames(g, q);
  TriangleMesh mesh;
  for (int s = 0; s < kSegments; ++s) {
    mesh.append(capsule_mesh(g.lengths[s], g.radii[s], segments_per_capsule,
                             contact_only ? CapsulePart::palmar : CapsulePart::full),
                frames[s]);
  }
  return mesh;
}

}  // namespace handemb
