#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "handemb/se3.hpp"

namespace handemb {

enum class JointType { revolute, fixed };

struct Joint {
  std::string name;
  std::string parent;
  std::string child;
  Transform origin;  // parent link frame <- joint frame at zero angle
  JointType type = JointType::fixed;
  Vec3 axis = Vec3::UnitZ();  // unit vector in the joint frame, revolute only
  double lower = 0.0;
  double upper = 0.0;
};

/// Joint angles by name, radians.
using JointValues = std::map<std::string, double>;

/// Immutable kinematic tree of links connected by revolute or fixed joints.
///
/// Construction validates the structure: one root link, every non-root link is
/// the child of exactly one joint, no cycles, unit revolute axes within 1e-9
/// and lower <= upper.
class KinematicTree {
 public:
  KinematicTree() = default;
  KinematicTree(std::vector<std::string> links, std::vector<Joint> joints);

  const std::vector<std::string>& links() const { return links_; }
  const std::vector<Joint>& joints() const { return joints_; }
  const std::string& root() const { return links_[root_]; }
  std::size_t root_index() const { return root_; }

  std::optional<std::size_t> link_index(const std::string& name) const;
  std::optional<std::size_t> joint_index(const std::string& name) const;
  const Joint& joint(const std::string& name) const;

  /// Joint indices with parents before children.
  const std::vector<std::size_t>& topological_order() const { return order_; }
  /// Index of the joint whose child is `link`, empty for the root.
  std::optional<std::size_t> parent_joint(std::size_t link) const;
  /// Joint indices on the path root -> link, root side first.
  std::vector<std::size_t> path_to(std::size_t link) const;

  /// Local transform of a joint at angle `q` (ignored for fixed joints).
  Transform joint_transform(std::size_t joint, double q) const;

  /// Link poses in the frame of `root_pose`, indexed like links(). `positions`
  /// is indexed like joints(); entries of fixed joints are ignored.
  std::vector<Transform> link_poses(std::span<const double> positions,
                                    const Transform& root_pose = Transform{}) const;

 private:
  std::vector<std::string> links_;
  std::vector<Joint> joints_;
  std::unordered_map<std::string, std::size_t> link_lookup_;
  std::unordered_map<std::string, std::size_t> joint_lookup_;
  std::vector<std::optional<std::size_t>> parent_joint_;
  std::vector<std::size_t> order_;
  std::size_t root_ = 0;
};

/// Pose of every link in the tree's root frame (or `root_pose` when given).
/// Throws MissingJointValue if a revolute joint has no value and UnknownJoint
/// for names that are not joints of the tree.
std::map<std::string, Transform> forward_kinematics(const KinematicTree& tree,
                                                    const JointValues& q,
                                                    const Transform& root_pose = Transform{});

}  // namespace handemb
