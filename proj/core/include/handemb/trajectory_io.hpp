#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "handemb/embodiment.hpp"
#include "handemb/hand_model.hpp"

namespace handemb {

enum class TrajectoryKind { hand_state, robot_command };

struct Provenance {
  std::string source;
  std::map<std::string, std::string> config_digests;

  bool operator==(const Provenance&) const = default;
};

struct HandStateTrajectory {
  Provenance provenance;
  std::vector<TimedHandState> frames;
};

struct RobotCommandTrajectory {
  Provenance provenance;
  std::string hand;
  std::vector<RobotCommand> frames;
};

bool operator==(const HandState& a, const HandState& b);
bool operator==(const HandStateTrajectory& a, const HandStateTrajectory& b);
bool operator==(const RobotCommandTrajectory& a, const RobotCommandTrajectory& b);

/// Kind recorded in a trajectory file. Throws SchemaError for anything else.
TrajectoryKind read_trajectory_kind(std::istream& in);

void write_trajectory(const HandStateTrajectory& t, std::ostream& out);
void write_trajectory(const RobotCommandTrajectory& t, std::ostream& out);
/// Throw SchemaError on malformed files or a kind mismatch and
/// NonMonotoneTimestamps when timestamps do not increase.
HandStateTrajectory read_hand_state_trajectory(std::istream& in);
RobotCommandTrajectory read_robot_command_trajectory(std::istream& in);

}  // namespace handemb
