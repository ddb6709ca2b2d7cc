#include "handemb/robot_hand.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <ostream>
#include <set>

#include "handemb/errors.hpp"
#include "json_io.hpp"

namespace handemb {

namespace {

const Joint* find_revolute(const KinematicTree& tree, const std::string& name,
                           const std::string& context) {
  auto idx = tree.joint_index(name);
  if (!idx) throw DanglingReference(context + " references unknown joint '" + name + "'");
  const Joint& j = tree.joints()[*idx];
  if (j.type != JointType::revolute)
    throw SchemaError(context + ": joint '" + name + "' is not revolute");
  return &j;
}

}  // namespace

RobotHandModel::RobotHandModel(RobotHandSpec spec) : spec_(std::move(spec)) {
  const KinematicTree& tree = spec_.tree;
  if (tree.links().empty()) throw SchemaError("robot hand has no links");
  const std::string ctx = "hand '" + spec_.name + "'";

  for (const Joint& j : tree.joints()) {
    joint_parent_.push_back(*tree.link_index(j.parent));
    joint_child_.push_back(*tree.link_index(j.child));
  }

  // Sequential commands are channels without a joint of their own.
  std::map<std::string, const SequentialRule*> commands;
  for (const auto& rule : spec_.couplings) {
    if (const auto* s = std::get_if<SequentialRule>(&rule)) {
      if (tree.joint_index(s->command))
        throw SchemaError(ctx + ": sequential command '" + s->command + "' clashes with a joint");
      if (!commands.emplace(s->command, s).second)
        throw SchemaError(ctx + ": duplicate sequential command '" + s->command + "'");
    }
  }

  for (const auto& name : spec_.actuated) {
    if (channel_lookup_.count(name)) throw SchemaError(ctx + ": duplicate actuated '" + name + "'");
    ChannelInfo info;
    info.name = name;
    if (auto it = commands.find(name); it != commands.end()) {
      const Joint* first = find_revolute(tree, it->second->first, ctx);
      const Joint* second = find_revolute(tree, it->second->second, ctx);
      info.lower = 0.0;
      info.upper = first->upper + second->upper;
    } else {
      const Joint* j = find_revolute(tree, name, ctx + " actuated list");
      info.lower = j->lower;
      info.upper = j->upper;
    }
    channel_lookup_.emplace(name, channels_.size());
    channels_.push_back(info);
  }

  sources_.assign(tree.joints().size(), JointSource{});
  std::vector<int> drivers(tree.joints().size(), 0);
  auto assign = [&](const std::string& joint, JointSource src) {
    std::size_t j = *tree.joint_index(joint);
    sources_[j] = src;
    ++drivers[j];
  };
  for (const auto& [name, idx] : channel_lookup_) {
    if (tree.joint_index(name)) assign(name, {JointSource::Kind::channel, idx, 1.0, 0.0});
  }
  for (const auto& rule : spec_.couplings) {
    if (const auto* m = std::get_if<MirrorRule>(&rule)) {
      find_revolute(tree, m->source, ctx + " mirror rule");
      find_revolute(tree, m->driven, ctx + " mirror rule");
      if (!std::isfinite(m->ratio)) throw SchemaError(ctx + ": mirror ratio must be finite");
      assign(m->driven,
             {JointSource::Kind::mirror, *tree.joint_index(m->source), m->ratio, 0.0});
    } else {
      const auto& s = std::get<SequentialRule>(rule);
      const Joint* first = find_revolute(tree, s.first, ctx + " sequential rule");
      const Joint* second = find_revolute(tree, s.second, ctx + " sequential rule");
      if (s.first == s.second) throw SchemaError(ctx + ": sequential rule drives one joint twice");
      if (first->lower != 0.0 || second->lower != 0.0)
        throw SchemaError(ctx + ": sequential joints '" + s.first + "', '" + s.second +
                          "' must have lower limit 0");
      auto cmd = channel_lookup_.find(s.command);
      if (cmd == channel_lookup_.end())
        throw SchemaError(ctx + ": sequential command '" + s.command + "' is not actuated");
      assign(s.first, {JointSource::Kind::sequential_first, cmd->second, 1.0, first->upper});
      assign(s.second, {JointSource::Kind::sequential_second, cmd->second, 1.0, first->upper});
    }
  }
  for (std::size_t j = 0; j < tree.joints().size(); ++j) {
    const Joint& joint = tree.joints()[j];
    if (joint.type == JointType::fixed) continue;
    if (drivers[j] == 0)
      throw SchemaError(ctx + ": joint '" + joint.name + "' is neither actuated nor coupled");
    if (drivers[j] > 1)
      throw SchemaError(ctx + ": joint '" + joint.name + "' is driven more than once");
  }

  // Mirror sources resolve before the joints they drive.
  std::vector<int> state(tree.joints().size(), 0);  // 0 new, 1 visiting, 2 done
  std::function<void(std::size_t)> visit = [&](std::size_t j) {
    if (state[j] == 2) return;
    if (state[j] == 1)
      throw CouplingCycle(ctx + ": coupling cycle through joint '" + tree.joints()[j].name + "'");
    state[j] = 1;
    if (sources_[j].kind == JointSource::Kind::mirror) visit(sources_[j].index);
    state[j] = 2;
    resolve_order_.push_back(j);
  };
  for (std::size_t j : tree.topological_order()) {
    if (tree.joints()[j].type == JointType::revolute) visit(j);
  }

  for (const auto& [name, value] : spec_.fixed) {
    auto it = channel_lookup_.find(name);
    if (it == channel_lookup_.end())
      throw SchemaError(ctx + ": fixed value for non-actuated '" + name + "'");
    ChannelInfo& c = channels_[it->second];
    if (!(value >= c.lower && value <= c.upper))
      throw SchemaError(ctx + ": fixed value of '" + name + "' is outside its limits");
    c.fixed = true;
    c.neutral = value;
  }
  for (auto& c : channels_) {
    if (!c.fixed) c.neutral = std::clamp(0.0, c.lower, c.upper);
  }
  for (const auto& [name, value] : spec_.neutral) {
    auto it = channel_lookup_.find(name);
    if (it == channel_lookup_.end())
      throw SchemaError(ctx + ": neutral value for non-actuated '" + name + "'");
    ChannelInfo& c = channels_[it->second];
    if (c.fixed) throw SchemaError(ctx + ": neutral value given for fixed '" + name + "'");
    if (!(value >= c.lower && value <= c.upper))
      throw SchemaError(ctx + ": neutral value of '" + name + "' is outside its limits");
    c.neutral = value;
  }
  for (const auto& c : channels_) neutral_values_.push_back(c.neutral);

  for (const auto& [f, finger] : spec_.fingers) {
    const std::string fctx = ctx + " finger '" + std::string(finger_name(f)) + "'";
    if (finger.channels.empty()) throw SchemaError(fctx + " has no channels");
    std::set<std::string> seen;
    for (const auto& ch : finger.channels) {
      auto it = channel_lookup_.find(ch);
      if (it == channel_lookup_.end())
        throw SchemaError(fctx + ": channel '" + ch + "' is not actuated");
      if (channels_[it->second].fixed)
        throw SchemaError(fctx + ": channel '" + ch + "' is fixed");
      if (!seen.insert(ch).second) throw SchemaError(fctx + ": duplicate channel '" + ch + "'");
    }
    std::array<std::size_t, 2> links{};
    for (int m = 0; m < 2; ++m) {
      auto idx = tree.link_index(finger.markers[m].link);
      if (!idx)
        throw DanglingReference(fctx + " marker references unknown link '" +
                                finger.markers[m].link + "'");
      if (!finger.markers[m].offset.allFinite()) throw SchemaError(fctx + ": bad marker offset");
      links[m] = *idx;
    }
    marker_links_[f] = links;
  }

  for (const auto& c : spec_.contact_surfaces) {
    if (!tree.link_index(c.link))
      throw DanglingReference(ctx + " contact surface references unknown link '" + c.link + "'");
    if (!(c.radius > 0.0) || !std::isfinite(c.radius))
      throw SchemaError(ctx + ": contact capsule radius must be positive");
    if (!c.start.allFinite() || !c.end.allFinite() || (c.end - c.start).norm() <= 0.0)
      throw SchemaError(ctx + ": contact capsule on '" + c.link + "' has zero length");
  }

  // Fingers sharing a channel form one solve group.
  std::vector<FingerId> fingers;
  for (const auto& [f, finger] : spec_.fingers) fingers.push_back(f);
  std::vector<std::size_t> parent(fingers.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> root = [&](std::size_t i) {
    return parent[i] == i ? i : parent[i] = root(parent[i]);
  };
  for (std::size_t a = 0; a < fingers.size(); ++a) {
    for (std::size_t b = a + 1; b < fingers.size(); ++b) {
      const auto& ca = spec_.fingers.at(fingers[a]).channels;
      const auto& cb = spec_.fingers.at(fingers[b]).channels;
      bool shared = std::any_of(ca.begin(), ca.end(), [&](const std::string& c) {
        return std::find(cb.begin(), cb.end(), c) != cb.end();
      });
      if (shared) parent[root(b)] = root(a);
    }
  }
  for (std::size_t i = 0; i < fingers.size(); ++i) {
    if (root(i) != i) continue;
    SolveGroup g;
    for (std::size_t k = 0; k < fingers.size(); ++k) {
      if (root(k) != i) continue;
      g.fingers.push_back(fingers[k]);
      for (const auto& c : spec_.fingers.at(fingers[k]).channels) {
        if (std::find(g.channels.begin(), g.channels.end(), c) == g.channels.end())
          g.channels.push_back(c);
      }
    }
    groups_.push_back(std::move(g));
  }

  for (const auto& [f, finger] : spec_.fingers) finger_chains_[f] = build_chain(finger.channels, {f});
  for (const auto& g : groups_) group_chains_.push_back(build_chain(g.channels, g.fingers));
}

RobotHandModel::Chain RobotHandModel::build_chain(const std::vector<std::string>& channel_names,
                                                  const std::vector<FingerId>& fingers) const {
  const KinematicTree& tree = spec_.tree;
  Chain chain;
  for (const auto& c : channel_names) chain.channel_of_value.push_back(channel_lookup_.at(c));

  std::vector<char> on_path(tree.joints().size(), 0);
  for (FingerId f : fingers) {
    for (std::size_t link : marker_links_.at(f)) {
      for (std::size_t j : tree.path_to(link)) on_path[j] = 1;
    }
  }
  for (std::size_t j : tree.topological_order()) {
    if (on_path[j]) chain.joints.push_back(j);
  }

  std::vector<char> needed(tree.joints().size(), 0);
  std::function<void(std::size_t)> need = [&](std::size_t j) {
    if (needed[j] || tree.joints()[j].type != JointType::revolute) return;
    needed[j] = 1;
    if (sources_[j].kind == JointSource::Kind::mirror) need(sources_[j].index);
  };
  for (std::size_t j : chain.joints) need(j);
  for (std::size_t j : resolve_order_) {
    if (needed[j]) chain.resolve.push_back(j);
  }
  return chain;
}

const ChannelInfo& RobotHandModel::channel(const std::string& name) const {
  auto it = channel_lookup_.find(name);
  if (it == channel_lookup_.end()) throw UnknownJoint("unknown channel '" + name + "'");
  return channels_[it->second];
}

std::vector<std::string> RobotHandModel::command_channels() const {
  std::vector<std::string> out;
  for (const auto& c : channels_) {
    if (!c.fixed) out.push_back(c.name);
  }
  return out;
}

const RobotFinger& RobotHandModel::finger(FingerId f) const {
  auto it = spec_.fingers.find(f);
  if (it == spec_.fingers.end())
    throw SchemaError("hand '" + spec_.name + "' has no " + std::string(finger_name(f)) + " finger");
  return it->second;
}

void RobotHandModel::resolve_joints(std::span<const double> channel_values,
                                    std::span<const std::size_t> order,
                                    std::vector<double>& joint_values, bool* clamped) const {
  const auto& joints = spec_.tree.joints();
  for (std::size_t j : order) {
    const JointSource& src = sources_[j];
    double v = 0.0;
    switch (src.kind) {
      case JointSource::Kind::channel:
        v = channel_values[src.index];
        break;
      case JointSource::Kind::mirror:
        v = src.ratio * joint_values[src.index];
        break;
      case JointSource::Kind::sequential_first:
      case JointSource::Kind::sequential_second: {
        const ChannelInfo& c = channels_[src.index];
        double cmd = channel_values[src.index];
        double cc = std::clamp(cmd, c.lower, c.upper);
        if (clamped && cc != cmd) *clamped = true;
        v = src.kind == JointSource::Kind::sequential_first ? std::min(cc, src.split)
                                                            : std::max(0.0, cc - src.split);
        break;
      }
      case JointSource::Kind::none:
        break;
    }
    double vc = std::clamp(v, joints[j].lower, joints[j].upper);
    if (clamped && vc != v) *clamped = true;
    joint_values[j] = vc;
  }
}

JointValues RobotHandModel::apply_coupling(const std::map<std::string, double>& actuated_values,
                                           bool* clamped) const {
  const KinematicTree& tree = spec_.tree;
  std::vector<double> cv = neutral_values_;
  std::vector<char> given(channels_.size(), 0);
  for (const auto& [name, value] : actuated_values) {
    if (auto it = channel_lookup_.find(name); it != channel_lookup_.end()) {
      cv[it->second] = value;
      given[it->second] = 1;
    } else if (!tree.joint_index(name) ||
               tree.joints()[*tree.joint_index(name)].type != JointType::revolute) {
      throw UnknownJoint("hand '" + spec_.name + "' has no joint or channel '" + name + "'");
    }
  }
  for (const auto& rule : spec_.couplings) {
    const auto* s = std::get_if<SequentialRule>(&rule);
    if (!s) continue;
    std::size_t idx = channel_lookup_.at(s->command);
    if (given[idx] || channels_[idx].fixed) continue;
    auto a = actuated_values.find(s->first);
    auto b = actuated_values.find(s->second);
    if (a != actuated_values.end() && b != actuated_values.end()) {
      cv[idx] = a->second + b->second;
      given[idx] = 1;
    }
  }
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    if (!given[i] && !channels_[i].fixed)
      throw MissingJointValue("no value for channel '" + channels_[i].name + "'");
  }
  if (clamped) *clamped = false;
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    if (clamped && (cv[i] < channels_[i].lower || cv[i] > channels_[i].upper)) *clamped = true;
  }
  std::vector<double> jv(tree.joints().size(), 0.0);
  resolve_joints(cv, resolve_order_, jv, clamped);
  JointValues out;
  for (std::size_t j : resolve_order_) out.emplace(tree.joints()[j].name, jv[j]);
  return out;
}

void RobotHandModel::evaluate_chain(const Chain& chain, std::span<const double> r,
                                    std::vector<Transform>& poses) const {
  const KinematicTree& tree = spec_.tree;
  std::vector<double> cv = neutral_values_;
  for (std::size_t k = 0; k < chain.channel_of_value.size(); ++k) cv[chain.channel_of_value[k]] = r[k];
  std::vector<double> jv(tree.joints().size(), 0.0);
  resolve_joints(cv, chain.resolve, jv, nullptr);
  poses.assign(tree.links().size(), Transform{});
  for (std::size_t j : chain.joints)
    poses[joint_child_[j]] = poses[joint_parent_[j]] * tree.joint_transform(j, jv[j]);
}

MarkerPair RobotHandModel::finger_markers(FingerId finger,
                                          const std::vector<Transform>& poses) const {
  const auto& links = marker_links_.at(finger);
  const auto& markers = spec_.fingers.at(finger).markers;
  return {poses[links[0]].apply(markers[0].offset), poses[links[1]].apply(markers[1].offset)};
}

MarkerPair RobotHandModel::finger_marker_points(FingerId finger, std::span<const double> r) const {
  auto it = finger_chains_.find(finger);
  if (it == finger_chains_.end()) this->finger(finger);  // throws
  if (r.size() != it->second.channel_of_value.size())
    throw SchemaError("wrong number of channel values for finger");
  std::vector<Transform> poses;
  evaluate_chain(it->second, r, poses);
  return finger_markers(finger, poses);
}

void RobotHandModel::group_marker_points(const SolveGroup& group, std::span<const double> values,
                                         std::vector<MarkerPair>& out) const {
  const Chain* chain = nullptr;
  for (std::size_t i = 0; i < groups_.size(); ++i) {
    if (groups_[i].fingers == group.fingers && groups_[i].channels == group.channels)
      chain = &group_chains_[i];
  }
  if (!chain) throw SchemaError("solve group does not belong to hand '" + spec_.name + "'");
  if (values.size() != chain->channel_of_value.size())
    throw SchemaError("wrong number of channel values for solve group");
  std::vector<Transform> poses;
  evaluate_chain(*chain, values, poses);
  out.clear();
  for (FingerId f : group.fingers) out.push_back(finger_markers(f, poses));
}

std::map<std::string, Transform> RobotHandModel::link_poses(
    const std::map<std::string, double>& values) const {
  std::map<std::string, double> full = values;
  for (const auto& c : channels_) {
    if (!full.count(c.name)) full.emplace(c.name, c.neutral);
  }
  return forward_kinematics(spec_.tree, apply_coupling(full));
}

// ---------------------------------------------------------------------------
// Config files

namespace {

using detail::json;

FingerId parse_finger(const std::string& name, const std::string& ctx) {
  auto f = finger_from_name(name);
  if (!f) throw SchemaError(ctx + ": unknown finger '" + name + "'");
  return *f;
}

std::vector<std::string> as_strings(const json& j, const std::string& ctx) {
  if (!j.is_array()) throw SchemaError(ctx + ": expected an array of strings");
  std::vector<std::string> out;
  for (const auto& e : j) out.push_back(detail::as_string(e, ctx));
  return out;
}

std::map<std::string, double> as_value_map(const json& j, const std::string& ctx) {
  if (!j.is_object()) throw SchemaError(ctx + ": expected an object");
  std::map<std::string, double> out;
  for (const auto& [k, v] : j.items()) out.emplace(k, detail::as_number(v, ctx + "." + k));
  return out;
}

}  // namespace

RobotHandModel load_hand_config(std::istream& in) {
  json doc = detail::parse_json(in, "hand config");
  const std::string ctx = "hand config";
  detail::check_schema_version(doc, 1, ctx);

  RobotHandSpec spec;
  spec.name = detail::as_string(detail::require(doc, "name", ctx), ctx + ".name");
  if (doc.contains("description")) spec.description = detail::as_string(doc["description"], ctx);
  if (doc.contains("control_rate")) {
    spec.control_rate = detail::as_number(doc["control_rate"], ctx + ".control_rate");
    if (!(spec.control_rate > 0.0)) throw SchemaError(ctx + ".control_rate must be positive");
  }

  auto links = as_strings(detail::require(doc, "links", ctx), ctx + ".links");
  std::vector<Joint> joints;
  const json& jj = detail::require(doc, "joints", ctx);
  if (!jj.is_array()) throw SchemaError(ctx + ".joints: expected an array");
  for (std::size_t i = 0; i < jj.size(); ++i) {
    const json& e = jj[i];
    const std::string jctx = ctx + ".joints[" + std::to_string(i) + "]";
    Joint j;
    j.name = detail::as_string(detail::require(e, "name", jctx), jctx + ".name");
    j.parent = detail::as_string(detail::require(e, "parent", jctx), jctx + ".parent");
    j.child = detail::as_string(detail::require(e, "child", jctx), jctx + ".child");
    std::string type = e.contains("type") ? detail::as_string(e["type"], jctx + ".type") : "revolute";
    if (type == "revolute") {
      j.type = JointType::revolute;
    } else if (type == "fixed") {
      j.type = JointType::fixed;
    } else {
      throw SchemaError(jctx + ": unknown joint type '" + type + "'");
    }
    if (e.contains("origin")) j.origin = detail::as_pose(e["origin"], jctx + ".origin");
    if (j.type == JointType::revolute) {
      j.axis = detail::as_vec3(detail::require(e, "axis", jctx), jctx + ".axis");
      auto lim = detail::as_numbers(detail::require(e, "limits", jctx), jctx + ".limits");
      if (lim.size() != 2) throw SchemaError(jctx + ".limits: expected [lower, upper]");
      j.lower = lim[0];
      j.upper = lim[1];
    }
    joints.push_back(std::move(j));
  }
  spec.tree = KinematicTree(std::move(links), std::move(joints));

  spec.actuated = as_strings(detail::require(doc, "actuated", ctx), ctx + ".actuated");
  if (doc.contains("fixed")) spec.fixed = as_value_map(doc["fixed"], ctx + ".fixed");
  if (doc.contains("neutral")) spec.neutral = as_value_map(doc["neutral"], ctx + ".neutral");

  if (doc.contains("couplings")) {
    const json& cc = doc["couplings"];
    if (!cc.is_array()) throw SchemaError(ctx + ".couplings: expected an array");
    for (std::size_t i = 0; i < cc.size(); ++i) {
      const std::string cctx = ctx + ".couplings[" + std::to_string(i) + "]";
      const json& e = cc[i];
      std::string kind = detail::as_string(detail::require(e, "kind", cctx), cctx + ".kind");
      if (kind == "mirror") {
        MirrorRule m;
        m.source = detail::as_string(detail::require(e, "source", cctx), cctx + ".source");
        m.driven = detail::as_string(detail::require(e, "driven", cctx), cctx + ".driven");
        if (e.contains("ratio")) m.ratio = detail::as_number(e["ratio"], cctx + ".ratio");
        spec.couplings.emplace_back(m);
      } else if (kind == "sequential") {
        SequentialRule s;
        s.command = detail::as_string(detail::require(e, "command", cctx), cctx + ".command");
        s.first = detail::as_string(detail::require(e, "first", cctx), cctx + ".first");
        s.second = detail::as_string(detail::require(e, "second", cctx), cctx + ".second");
        spec.couplings.emplace_back(s);
      } else {
        throw SchemaError(cctx + ": unknown coupling kind '" + kind + "'");
      }
    }
  }

  const json& ff = detail::require(doc, "fingers", ctx);
  if (!ff.is_object()) throw SchemaError(ctx + ".fingers: expected an object");
  for (const auto& [fname, e] : ff.items()) {
    const std::string fctx = ctx + ".fingers." + fname;
    FingerId f = parse_finger(fname, fctx);
    RobotFinger finger;
    finger.channels = as_strings(detail::require(e, "joints", fctx), fctx + ".joints");
    const json& mm = detail::require(e, "markers", fctx);
    if (!mm.is_array() || mm.size() != 2)
      throw SchemaError(fctx + ".markers: expected [mid, tip]");
    for (int m = 0; m < 2; ++m) {
      finger.markers[m].link = detail::as_string(detail::require(mm[m], "link", fctx), fctx);
      if (mm[m].contains("offset"))
        finger.markers[m].offset = detail::as_vec3(mm[m]["offset"], fctx + ".offset");
    }
    spec.fingers.emplace(f, std::move(finger));
  }

  if (doc.contains("contact_surfaces")) {
    const json& cs = doc["contact_surfaces"];
    if (!cs.is_array()) throw SchemaError(ctx + ".contact_surfaces: expected an array");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const std::string sctx = ctx + ".contact_surfaces[" + std::to_string(i) + "]";
      const json& e = cs[i];
      ContactCapsule c;
      c.finger = parse_finger(detail::as_string(detail::require(e, "finger", sctx), sctx), sctx);
      c.link = detail::as_string(detail::require(e, "link", sctx), sctx + ".link");
      c.start = detail::as_vec3(detail::require(e, "start", sctx), sctx + ".start");
      c.end = detail::as_vec3(detail::require(e, "end", sctx), sctx + ".end");
      c.radius = detail::as_number(detail::require(e, "radius", sctx), sctx + ".radius");
      if (e.contains("palmar")) c.palmar = detail::as_vec3(e["palmar"], sctx + ".palmar");
      spec.contact_surfaces.push_back(c);
    }
  }
  return RobotHandModel(std::move(spec));
}

RobotHandModel load_hand_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open hand config " + path);
  return load_hand_config(in);
}

void write_hand_config(const RobotHandModel& model, std::ostream& out) {
  const RobotHandSpec& spec = model.spec();
  json doc;
  doc["schema_version"] = 1;
  doc["name"] = spec.name;
  if (!spec.description.empty()) doc["description"] = spec.description;
  if (spec.control_rate > 0.0) doc["control_rate"] = spec.control_rate;
  doc["links"] = spec.tree.links();
  json joints = json::array();
  for (const Joint& j : spec.tree.joints()) {
    json e{{"name", j.name}, {"parent", j.parent}, {"child", j.child},
           {"type", j.type == JointType::revolute ? "revolute" : "fixed"},
           {"origin", detail::pose_json(j.origin)}};
    if (j.type == JointType::revolute) {
      e["axis"] = detail::vec3_json(j.axis);
      e["limits"] = json::array({j.lower, j.upper});
    }
    joints.push_back(std::move(e));
  }
  doc["joints"] = std::move(joints);
  doc["actuated"] = spec.actuated;
  if (!spec.fixed.empty()) doc["fixed"] = spec.fixed;
  if (!spec.neutral.empty()) doc["neutral"] = spec.neutral;
  json couplings = json::array();
  for (const auto& rule : spec.couplings) {
    if (const auto* m = std::get_if<MirrorRule>(&rule)) {
      couplings.push_back(
          {{"kind", "mirror"}, {"source", m->source}, {"driven", m->driven}, {"ratio", m->ratio}});
    } else {
      const auto& s = std::get<SequentialRule>(rule);
      couplings.push_back(
          {{"kind", "sequential"}, {"command", s.command}, {"first", s.first}, {"second", s.second}});
    }
  }
  doc["couplings"] = std::move(couplings);
  json fingers = json::object();
  for (const auto& [f, finger] : spec.fingers) {
    json markers = json::array();
    for (const auto& m : finger.markers)
      markers.push_back({{"link", m.link}, {"offset", detail::vec3_json(m.offset)}});
    fingers[std::string(finger_name(f))] = {{"joints", finger.channels}, {"markers", markers}};
  }
  doc["fingers"] = std::move(fingers);
  json surfaces = json::array();
  for (const auto& c : spec.contact_surfaces) {
    surfaces.push_back({{"finger", std::string(finger_name(c.finger))},
                        {"link", c.link},
                        {"start", detail::vec3_json(c.start)},
                        {"end", detail::vec3_json(c.end)},
                        {"radius", c.radius},
                        {"palmar", detail::vec3_json(c.palmar)}});
  }
  doc["contact_surfaces"] = std::move(surfaces);
  out << doc.dump(2) << '\n';
}

}  // namespace handemb
