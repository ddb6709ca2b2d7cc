#include "handemb/kinematic_tree.hpp"

#include <cmath>
#include <deque>

#include "handemb/errors.hpp"

namespace handemb {

KinematicTree::KinematicTree(std::vector<std::string> links, std::vector<Joint> joints)
    : links_(std::move(links)), joints_(std::move(joints)) {
  if (links_.empty()) throw SchemaError("kinematic tree has no links");

  for (std::size_t i = 0; i < links_.size(); ++i) {
    if (!link_lookup_.emplace(links_[i], i).second) {
      throw SchemaError("duplicate link '" + links_[i] + "'");
    }
  }
  parent_joint_.assign(links_.size(), std::nullopt);

  std::vector<std::vector<std::size_t>> children(links_.size());
  for (std::size_t j = 0; j < joints_.size(); ++j) {
    const Joint& joint = joints_[j];
    if (!joint_lookup_.emplace(joint.name, j).second) {
      throw SchemaError("duplicate joint '" + joint.name + "'");
    }
    auto parent = link_lookup_.find(joint.parent);
    if (parent == link_lookup_.end()) {
      throw DanglingReference("joint '" + joint.name + "' references unknown parent link '" +
                              joint.parent + "'");
    }
    auto child = link_lookup_.find(joint.child);
    if (child == link_lookup_.end()) {
      throw DanglingReference("joint '" + joint.name + "' references unknown child link '" +
                              joint.child + "'");
    }
    if (parent_joint_[child->second]) {
      throw SchemaError("link '" + joint.child + "' is the child of more than one joint");
    }
    parent_joint_[child->second] = j;
    children[parent->second].push_back(j);

    if (joint.type == JointType::revolute) {
      if (std::abs(joint.axis.norm() - 1.0) > 1e-9) {
        throw SchemaError("joint '" + joint.name + "' axis is not a unit vector");
      }
      if (!(joint.lower <= joint.upper)) {
        throw SchemaError("joint '" + joint.name + "' has lower limit above upper limit");
      }
    }
    if (!is_rotation(joint.origin.rotation())) {
      throw SchemaError("joint '" + joint.name + "' origin rotation is not orthonormal");
    }
  }

  std::optional<std::size_t> root;
  for (std::size_t i = 0; i < links_.size(); ++i) {
    if (parent_joint_[i]) continue;
    if (root) throw SchemaError("kinematic tree has more than one root link");
    root = i;
  }
  if (!root) throw SchemaError("kinematic tree has no root link (cycle)");
  root_ = *root;

  // Breadth-first from the root; links not reached sit on a cycle.
  std::deque<std::size_t> frontier{root_};
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const std::size_t link = frontier.front();
    frontier.pop_front();
    for (std::size_t j : children[link]) {
      order_.push_back(j);
      frontier.push_back(link_lookup_.at(joints_[j].child));
      ++reached;
    }
  }
  if (reached != links_.size()) throw SchemaError("kinematic tree contains a cycle");
}

std::optional<std::size_t> KinematicTree::link_index(const std::string& name) const {
  auto it = link_lookup_.find(name);
  if (it == link_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> KinematicTree::joint_index(const std::string& name) const {
  auto it = joint_lookup_.find(name);
  if (it == joint_lookup_.end()) return std::nullopt;
  return it->second;
}

const Joint& KinematicTree::joint(const std::string& name) const {
  auto index = joint_index(name);
  if (!index) throw UnknownJoint("unknown joint '" + name + "'");
  return joints_[*index];
}

std::optional<std::size_t> KinematicTree::parent_joint(std::size_t link) const {
  return parent_joint_.at(link);
}

std::vector<std::size_t> KinematicTree::path_to(std::size_t link) const {
  std::vector<std::size_t> path;
  for (auto j = parent_joint_.at(link); j; j = parent_joint_[link_lookup_.at(joints_[*j].parent)]) {
    path.push_back(*j);
  }
  return {path.rbegin(), path.rend()};
}

Transform KinematicTree::joint_transform(std::size_t joint, double q) const {
  const Joint& j = joints_[joint];
  if (j.type == JointType::fixed) return j.origin;
  return j.origin * Transform::from_axis_angle(j.axis, q);
}

std::vector<Transform> KinematicTree::link_poses(std::span<const double> positions,
                                                 const Transform& root_pose) const {
  std::vector<Transform> poses(links_.size());
  poses[root_] = root_pose;
  for (std::size_t j : order_) {
    const Joint& joint = joints_[j];
    const std::size_t parent = link_lookup_.at(joint.parent);
    const std::size_t child = link_lookup_.at(joint.child);
    poses[child] = poses[parent] * joint_transform(j, positions[j]);
  }
  return poses;
}

std::map<std::string, Transform> forward_kinematics(const KinematicTree& tree,
                                                    const JointValues& q,
                                                    const Transform& root_pose) {
  for (const auto& [name, value] : q) {
    if (!tree.joint_index(name)) throw UnknownJoint("unknown joint '" + name + "'");
  }
  std::vector<double> positions(tree.joints().size(), 0.0);
  for (std::size_t j = 0; j < tree.joints().size(); ++j) {
    const Joint& joint = tree.joints()[j];
    if (joint.type != JointType::revolute) continue;
    auto it = q.find(joint.name);
    if (it == q.end()) throw MissingJointValue("no value for revolute joint '" + joint.name + "'");
    positions[j] = it->second;
  }
  const auto poses = tree.link_poses(positions, root_pose);
  std::map<std::string, Transform> out;
  for (std::size_t i = 0; i < poses.size(); ++i) out.emplace(tree.links()[i], poses[i]);
  return out;
}

}  // namespace handemb
