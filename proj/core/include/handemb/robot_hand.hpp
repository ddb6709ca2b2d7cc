#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "handemb/hand_model.hpp"
#include "handemb/kinematic_tree.hpp"

namespace handemb {

/// driven = ratio * source (joints share one motor).
struct MirrorRule {
  std::string source;
  std::string driven;
  double ratio = 1.0;
};

/// One commanded DOF c in [0, upper(first) + upper(second)] drives two joints:
/// first = min(c, upper(first)), second = max(0, c - upper(first)).
struct SequentialRule {
  std::string command;
  std::string first;
  std::string second;
};

using CouplingRule = std::variant<MirrorRule, SequentialRule>;

struct MarkerAttachment {
  std::string link;
  Vec3 offset = Vec3::Zero();  // in the link frame
};

struct RobotFinger {
  /// Actuated channels optimized for this finger (N_i entries).
  std::vector<std::string> channels;
  std::array<MarkerAttachment, 2> markers;  // mid, tip
};

struct ContactCapsule {
  FingerId finger = FingerId::thumb;
  std::string link;
  Vec3 start = Vec3::Zero();
  Vec3 end = Vec3::Zero();
  double radius = 0.0;
  Vec3 palmar = Vec3::UnitZ();
};

/// Plain description of a robot hand as stored in a hand-config file.
struct RobotHandSpec {
  std::string name;
  std::string description;
  double control_rate = 0.0;  // Hz, informative
  KinematicTree tree;
  std::vector<std::string> actuated;
  std::map<std::string, double> fixed;    // actuated channels held constant
  std::map<std::string, double> neutral;  // default values of the other channels
  std::vector<CouplingRule> couplings;
  std::map<FingerId, RobotFinger> fingers;
  std::vector<ContactCapsule> contact_surfaces;
};

/// Fingers sharing actuated channels; they are optimized together.
struct SolveGroup {
  std::vector<FingerId> fingers;
  std::vector<std::string> channels;
};

struct ChannelInfo {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
  double neutral = 0.0;
  bool fixed = false;
};

/// Validated, immutable robot hand model.
class RobotHandModel {
 public:
  RobotHandModel() = default;
  /// Throws SchemaError, DanglingReference or CouplingCycle.
  explicit RobotHandModel(RobotHandSpec spec);

  const RobotHandSpec& spec() const { return spec_; }
  const std::string& name() const { return spec_.name; }
  const KinematicTree& tree() const { return spec_.tree; }
  const std::vector<ChannelInfo>& channels() const { return channels_; }
  const ChannelInfo& channel(const std::string& name) const;
  /// Actuated channels that are not fixed, in declaration order.
  std::vector<std::string> command_channels() const;
  const std::vector<SolveGroup>& solve_groups() const { return groups_; }
  bool has_finger(FingerId f) const { return spec_.fingers.count(f) != 0; }
  const RobotFinger& finger(FingerId f) const;

  /// Resolves couplings into values for every revolute joint.
  ///
  /// Fixed channels default to their fixed value. A missing sequential command
  /// is reconstructed as first + second when both joints are given, so the
  /// output can be fed back in unchanged. Out-of-range values are clamped and
  /// reported through `clamped`. Throws MissingJointValue or UnknownJoint.
  JointValues apply_coupling(const std::map<std::string, double>& actuated_values,
                             bool* clamped = nullptr) const;

  /// Mid and tip marker positions in the hand base frame for the finger's
  /// channel values `r` (other channels at their neutral values).
  MarkerPair finger_marker_points(FingerId finger, std::span<const double> r) const;

  /// Marker positions of several fingers that share the channel vector
  /// `values`, ordered like `channels`.
  void group_marker_points(const SolveGroup& group, std::span<const double> values,
                           std::vector<MarkerPair>& out) const;

  /// Link poses in the hand base frame for channel values (missing channels
  /// take their neutral value).
  std::map<std::string, Transform> link_poses(const std::map<std::string, double>& values) const;

 private:
  struct JointSource {
    enum class Kind { none, channel, mirror, sequential_first, sequential_second };
    Kind kind = Kind::none;
    std::size_t index = 0;  // channel index, or source joint index for mirror
    double ratio = 1.0;
    double split = 0.0;  // upper limit of the first joint of a sequential pair
  };
  struct Chain {
    std::vector<std::size_t> channel_of_value;  // position in r -> channel index
    std::vector<std::size_t> resolve;           // joints to evaluate, dependency order
    std::vector<std::size_t> joints;            // joints to compose, topological order
  };

  void resolve_joints(std::span<const double> channel_values, std::span<const std::size_t> order,
                      std::vector<double>& joint_values, bool* clamped) const;
  Chain build_chain(const std::vector<std::string>& channel_names,
                    const std::vector<FingerId>& fingers) const;
  void evaluate_chain(const Chain& chain, std::span<const double> r,
                      std::vector<Transform>& poses) const;
  MarkerPair finger_markers(FingerId finger, const std::vector<Transform>& poses) const;

  RobotHandSpec spec_;
  std::vector<ChannelInfo> channels_;
  std::unordered_map<std::string, std::size_t> channel_lookup_;
  std::vector<JointSource> sources_;        // per tree joint
  std::vector<std::size_t> joint_parent_;   // link index per joint
  std::vector<std::size_t> joint_child_;
  std::map<FingerId, std::array<std::size_t, 2>> marker_links_;
  std::vector<std::size_t> resolve_order_;  // revolute joints, sources first
  std::vector<double> neutral_values_;      // per channel
  std::vector<SolveGroup> groups_;
  std::map<FingerId, Chain> finger_chains_;
  std::vector<Chain> group_chains_;
};

/// Parses and validates a hand-config document.
RobotHandModel load_hand_config(std::istream& in);
RobotHandModel load_hand_config_file(const std::string& path);
void write_hand_config(const RobotHandModel& model, std::ostream& out);

}  // namespace handemb
