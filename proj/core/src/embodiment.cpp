#include "handemb/embodiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <span>

#include "handemb/errors.hpp"

namespace handemb {

Transform embody_pose(const Transform& model_pose, const EmbodimentConfig& config) {
  return compose(model_pose, invert(config.t_robot_model));
}

double group_objective(const RobotHandModel& hand, const SolveGroup& group,
                       const std::vector<MarkerPair>& targets, const boxopt::Vector& values) {
  thread_local std::vector<MarkerPair> points;
  hand.group_marker_points(group, std::span<const double>(values.data(), values.size()), points);
  double sum = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    sum += (points[i][0] - targets[i][0]).squaredNorm() + (points[i][1] - targets[i][1]).squaredNorm();
  }
  return sum;
}

namespace {

boxopt::Bounds channel_bounds(const RobotHandModel& hand, const std::vector<std::string>& channels) {
  boxopt::Vector lo(channels.size()), hi(channels.size());
  for (std::size_t k = 0; k < channels.size(); ++k) {
    const ChannelInfo& c = hand.channel(channels[k]);
    lo[k] = c.lower;
    hi[k] = c.upper;
  }
  return {lo, hi};
}

}  // namespace

GroupFit embody_group(const SolveGroup& group, const std::vector<MarkerPair>& targets,
                      const EmbodimentConfig& config, const boxopt::Vector& warm_start) {
  for (const auto& t : targets) {
    if (!t[0].allFinite() || !t[1].allFinite())
      throw NonFiniteObjective("embodiment targets are not finite");
  }
  if (targets.size() != group.fingers.size())
    throw SchemaError("one target pair per solve-group finger is required");
  const RobotHandModel& hand = config.hand;
  auto f = [&](const boxopt::Vector& x) { return group_objective(hand, group, targets, x); };
  const boxopt::Bounds bounds = channel_bounds(hand, group.channels);
  boxopt::Vector x0 = bounds.clamp(warm_start);
  auto result = boxopt::minimize(f, x0, bounds, config.solver);
  GroupFit fit;
  fit.values = result.x;
  fit.objective = result.objective;
  fit.warm_objective = result.trace.empty() ? result.objective : result.trace.front();
  fit.iterations = result.iterations;
  fit.converged = result.converged;
  return fit;
}

boxopt::Vector embody_finger(const MarkerPair& targets, FingerId finger,
                             const EmbodimentConfig& config, const boxopt::Vector& warm_start) {
  if (!targets[0].allFinite() || !targets[1].allFinite())
    throw NonFiniteObjective("embodiment targets are not finite");
  const RobotHandModel& hand = config.hand;
  auto f = [&](const boxopt::Vector& x) {
    MarkerPair p = hand.finger_marker_points(finger, std::span<const double>(x.data(), x.size()));
    return (p[0] - targets[0]).squaredNorm() + (p[1] - targets[1]).squaredNorm();
  };
  const boxopt::Bounds bounds = channel_bounds(hand, hand.finger(finger).channels);
  return boxopt::minimize(f, bounds.clamp(warm_start), bounds, config.solver).x;
}

std::array<MarkerPair, 5> embodiment_targets(const HandState& state, const HandShape& shape,
                                             const EmbodimentConfig& config) {
  std::array<MarkerPair, 5> out;
  for (FingerId f : kFingers) {
    const MarkerPair m = finger_forward_kinematics(shape, f, state.q(f));
    out[finger_slot(f)] = {config.t_robot_model.apply(m[0]), config.t_robot_model.apply(m[1])};
  }
  return out;
}

std::map<FingerId, double> command_residuals(const std::array<MarkerPair, 5>& targets,
                                             const EmbodimentConfig& config,
                                             const std::map<std::string, double>& values) {
  std::map<FingerId, double> out;
  for (const auto& [f, finger] : config.hand.spec().fingers) {
    std::vector<double> r;
    for (const auto& c : finger.channels) r.push_back(values.at(c));
    const MarkerPair p = config.hand.finger_marker_points(f, r);
    const MarkerPair& t = targets[finger_slot(f)];
    out[f] = std::sqrt((p[0] - t[0]).squaredNorm() + (p[1] - t[1]).squaredNorm());
  }
  return out;
}

namespace {

// Radical inverse of i in base b, the k-th coordinate of a Halton point.
double radical_inverse(std::size_t i, std::size_t b) {
  double f = 1.0, r = 0.0;
  for (; i > 0; i /= b) {
    f /= static_cast<double>(b);
    r += f * static_cast<double>(i % b);
  }
  return r;
}

std::vector<std::size_t> first_primes(std::size_t n) {
  std::vector<std::size_t> primes;
  for (std::size_t c = 2; primes.size() < n; ++c) {
    if (std::none_of(primes.begin(), primes.end(), [c](std::size_t p) { return c % p == 0; }))
      primes.push_back(c);
  }
  return primes;
}

constexpr std::size_t kHaltonSeeds = 24;

}  // namespace

std::vector<boxopt::Vector> group_restart_seeds(const RobotHandModel& hand, const SolveGroup& group) {
  const auto n = static_cast<Eigen::Index>(group.channels.size());
  boxopt::Vector neutral(n), lower(n), upper(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const ChannelInfo& c = hand.channel(group.channels[static_cast<std::size_t>(k)]);
    neutral[k] = c.neutral;
    lower[k] = c.lower;
    upper[k] = c.upper;
  }
  std::vector<boxopt::Vector> seeds{neutral, 0.5 * (lower + upper)};
  for (double fraction : {0.5, 0.9}) seeds.push_back(neutral + fraction * (upper - neutral));
  // then a low-discrepancy cover of the box
  const auto primes = first_primes(static_cast<std::size_t>(n));
  for (std::size_t i = 1; i <= kHaltonSeeds; ++i) {
    boxopt::Vector x(n);
    for (Eigen::Index k = 0; k < n; ++k)
      x[k] = lower[k] + radical_inverse(i, primes[static_cast<std::size_t>(k)]) * (upper[k] - lower[k]);
    seeds.push_back(x);
  }
  return seeds;
}

namespace {

double worst_finger_residual(const RobotHandModel& hand, const SolveGroup& group,
                             const std::vector<MarkerPair>& targets, const boxopt::Vector& values) {
  std::vector<MarkerPair> points;
  hand.group_marker_points(group, std::span<const double>(values.data(), values.size()), points);
  double worst = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double r = std::sqrt((points[i][0] - targets[i][0]).squaredNorm() +
                               (points[i][1] - targets[i][1]).squaredNorm());
    worst = std::max(worst, r);
  }
  return worst;
}

}  // namespace

GroupFit embody_group_with_restarts(const SolveGroup& group, const std::vector<MarkerPair>& targets,
                                    const EmbodimentConfig& config,
                                    const boxopt::Vector& warm_start, bool* restarted) {
  GroupFit best = embody_group(group, targets, config, warm_start);
  const bool poor = std::isfinite(config.restart_residual) &&
                    worst_finger_residual(config.hand, group, targets, best.values) >
                        config.restart_residual;
  if (restarted) *restarted = poor;
  if (!poor) return best;
  for (const boxopt::Vector& seed : group_restart_seeds(config.hand, group)) {
    GroupFit fit = embody_group(group, targets, config, seed);
    if (fit.objective < best.objective) {
      fit.warm_objective = best.warm_objective;
      best = std::move(fit);
      if (worst_finger_residual(config.hand, group, targets, best.values) <= config.restart_residual) break;
    }
  }
  return best;
}

RobotCommand embody_frame(const HandState& state, const HandShape& shape,
                          const EmbodimentConfig& config,
                          const std::optional<RobotCommand>& previous, double timestamp) {
  const RobotHandModel& hand = config.hand;
  RobotCommand cmd;
  cmd.timestamp = timestamp;
  cmd.base_pose = embody_pose(state.pose, config);
  const auto targets = embodiment_targets(state, shape, config);

  for (const SolveGroup& group : hand.solve_groups()) {
    boxopt::Vector warm(group.channels.size());
    for (std::size_t k = 0; k < group.channels.size(); ++k) {
      const std::string& c = group.channels[k];
      auto it = previous ? previous->actuated_values.find(c) : cmd.actuated_values.end();
      warm[k] = previous && it != previous->actuated_values.end() ? it->second
                                                                  : hand.channel(c).neutral;
    }
    std::vector<MarkerPair> group_targets;
    for (FingerId f : group.fingers) group_targets.push_back(targets[finger_slot(f)]);
    const GroupFit fit = embody_group_with_restarts(group, group_targets, config, warm);
    for (std::size_t k = 0; k < group.channels.size(); ++k)
      cmd.actuated_values[group.channels[k]] = fit.values[k];
  }
  for (const ChannelInfo& c : hand.channels()) {
    if (c.fixed) {
      cmd.fixed_values[c.name] = c.neutral;
    } else if (!cmd.actuated_values.count(c.name)) {
      cmd.actuated_values[c.name] = c.neutral;  // channel not used by any finger
    }
  }
  cmd.residuals = command_residuals(targets, config, cmd.actuated_values);
  return cmd;
}

EmbodiedTrajectory embody_trajectory(const std::vector<TimedHandState>& states,
                                     const HandShape& shape, const EmbodimentConfig& config) {
  if (states.empty()) throw EmptyInput("no hand states to embody");
  for (std::size_t i = 1; i < states.size(); ++i) {
    if (!(states[i].timestamp > states[i - 1].timestamp))
      throw NonMonotoneTimestamps("hand-state timestamps must increase");
  }
  EmbodiedTrajectory out;
  out.commands.reserve(states.size());
  out.durations.reserve(states.size());
  std::optional<RobotCommand> previous;
  for (const auto& s : states) {
    auto t0 = std::chrono::steady_clock::now();
    RobotCommand cmd = embody_frame(s.state, shape, config, previous, s.timestamp);
    auto t1 = std::chrono::steady_clock::now();
    out.durations.push_back(std::chrono::duration<double>(t1 - t0).count());
    previous = cmd;
    out.commands.push_back(std::move(cmd));
  }
  return out;
}

RobotHandModel make_hand_model_clone(const RecordConfig& record, const std::string& name) {
  static const char* kAxisName[3] = {"flex", "abd", "twist"};
  const Vec3 axes[3] = {Vec3::UnitX(), Vec3::UnitZ(), Vec3::UnitY()};
  const HandShape& shape = record.shape;

  RobotHandSpec spec;
  spec.name = name;
  spec.description = "intermediate hand kinematics as a robot hand";
  std::vector<std::string> links{"base"};
  std::vector<Joint> joints;
  for (FingerId f : kFingers) {
    const std::string fn(finger_name(f));
    const FingerGeometry& g = shape.finger(f);
    const FingerRecordConfig& fc = record.finger(f);
    std::string parent = "base";
    for (int s = 0; s < kSegments; ++s) {
      for (int a = 0; a < 3; ++a) {
        const int k = 3 * s + a;
        Joint j;
        j.name = fn + "_" + std::to_string(s) + "_" + kAxisName[a];
        j.type = JointType::revolute;
        j.parent = parent;
        j.child = a == 2 ? fn + "_seg" + std::to_string(s) : j.name + "_link";
        if (a == 0) {
          j.origin = s == 0 ? g.base
                            : Transform::from_translation(Vec3(0.0, g.lengths[s - 1], 0.0));
        }
        j.axis = axes[a];
        j.lower = fc.q_min[k];
        j.upper = fc.q_max[k];
        links.push_back(j.child);
        spec.actuated.push_back(j.name);
        parent = j.child;
        joints.push_back(std::move(j));
      }
    }
    RobotFinger finger;
    for (int k = 0; k < kFingerDof; ++k)
      finger.channels.push_back(joints[joints.size() - kFingerDof + k].name);
    for (int m = 0; m < 2; ++m) {
      const MarkerPlacement& p = g.markers[m];
      finger.markers[m].link = fn + "_seg" + std::to_string(p.segment);
      finger.markers[m].offset =
          Vec3(0.0, p.fraction * g.lengths[p.segment], -p.dorsal * g.radii[p.segment]);
    }
    spec.fingers.emplace(f, std::move(finger));
    for (int s = 0; s < kSegments; ++s) {
      ContactCapsule c;
      c.finger = f;
      c.link = fn + "_seg" + std::to_string(s);
      c.start = Vec3::Zero();
      c.end = Vec3(0.0, g.lengths[s], 0.0);
      c.radius = g.radii[s];
      c.palmar = Vec3::UnitZ();
      spec.contact_surfaces.push_back(c);
    }
  }
  spec.tree = KinematicTree(std::move(links), std::move(joints));
  return RobotHandModel(std::move(spec));
}

}  // namespace handemb
