#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "handemb/boxopt.hpp"
#include "handemb/hand_model.hpp"
#include "handemb/record_mapping.hpp"
#include "handemb/robot_hand.hpp"

namespace handemb {

struct EmbodimentConfig {
  Transform t_robot_model;  // robot hand base <- hand-model base
  RobotHandModel hand;
  boxopt::SolveOptions solver;
  /// embody_frame refits a solve group from fixed seeds when one of its
  /// finger residuals (m) exceeds this after the warm-started fit. Meant for
  /// hands that can match the hand model closely; infinity disables it.
  double restart_residual = std::numeric_limits<double>::infinity();
};

struct RobotCommand {
  double timestamp = 0.0;
  Transform base_pose;  // world <- robot hand base
  /// Free actuated channels (fixed channels are listed separately).
  std::map<std::string, double> actuated_values;
  std::map<std::string, double> fixed_values;
  /// sqrt of the summed squared marker distances, per robot finger, meters.
  std::map<FingerId, double> residuals;

  bool operator==(const RobotCommand&) const = default;
};

/// world <- robot base: model_pose * inverse(t_robot_model).
Transform embody_pose(const Transform& model_pose, const EmbodimentConfig& config);

/// Sum over the group's fingers of squared distances between targets (robot
/// base frame, ordered like group.fingers) and the robot markers.
double group_objective(const RobotHandModel& hand, const SolveGroup& group,
                       const std::vector<MarkerPair>& targets, const boxopt::Vector& values);

struct GroupFit {
  boxopt::Vector values;  // ordered like group.channels
  double objective = 0.0;
  double warm_objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Solves the channels of a solve group against all of its fingers' targets.
GroupFit embody_group(const SolveGroup& group, const std::vector<MarkerPair>& targets,
                      const EmbodimentConfig& config, const boxopt::Vector& warm_start);

/// Seeds tried after a poor group fit: neutral, box centre, the neutral
/// values moved half and 0.9 of the way to the upper limits, then 24 Halton
/// points spread over the channel box.
std::vector<boxopt::Vector> group_restart_seeds(const RobotHandModel& hand, const SolveGroup& group);

/// embody_group from `warm_start`, then from the restart seeds in order while
/// a finger residual stays above config.restart_residual. Keeps the lowest
/// objective.
GroupFit embody_group_with_restarts(const SolveGroup& group, const std::vector<MarkerPair>& targets,
                                    const EmbodimentConfig& config,
                                    const boxopt::Vector& warm_start, bool* restarted = nullptr);

/// Channel values of one finger (ordered like its channel list) that bring
/// its two markers closest to `targets` (robot base frame).
boxopt::Vector embody_finger(const MarkerPair& targets, FingerId finger,
                             const EmbodimentConfig& config, const boxopt::Vector& warm_start);

/// Hand-model markers of every finger mapped into the robot base frame.
std::array<MarkerPair, 5> embodiment_targets(const HandState& state, const HandShape& shape,
                                             const EmbodimentConfig& config);

/// Per-finger residuals recomputed from channel values.
std::map<FingerId, double> command_residuals(const std::array<MarkerPair, 5>& targets,
                                             const EmbodimentConfig& config,
                                             const std::map<std::string, double>& values);

/// Maps one hand state. Solve groups run independently, each warm-started from
/// `previous` (or the neutral channel values).
RobotCommand embody_frame(const HandState& state, const HandShape& shape,
                          const EmbodimentConfig& config,
                          const std::optional<RobotCommand>& previous = std::nullopt,
                          double timestamp = 0.0);

struct EmbodiedTrajectory {
  std::vector<RobotCommand> commands;
  std::vector<double> durations;  // seconds of mapping time per frame
};

/// embody_frame over a trajectory with warm-start chaining.
/// Throws EmptyInput for no states, NonMonotoneTimestamps otherwise.
EmbodiedTrajectory embody_trajectory(const std::vector<TimedHandState>& states,
                                     const HandShape& shape, const EmbodimentConfig& config);

/// Robot hand whose kinematics, bounds and palmar contact capsules equal the
/// intermediate hand of `record` (nine actuated joints per finger).
RobotHandModel make_hand_model_clone(const RecordConfig& record, const std::string& name = "model_clone");

}  // namespace handemb
