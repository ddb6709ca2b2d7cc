#include "handemb/record_mapping.hpp"

#include <cmath>
#include <string>

#include "handemb/errors.hpp"

namespace handemb {

FingerRecordConfig default_finger_record_config() {
  FingerRecordConfig c;
  for (int s = 0; s < kSegments; ++s) {
    c.q_min.segment<3>(3 * s) << -0.26, -0.35, -0.17;
    c.q_max.segment<3>(3 * s) << 1.75, 0.35, 0.17;
  }
  return c;
}

void RecordConfig::validate() const {
  for (FingerId f : kFingers) {
    const FingerRecordConfig& c = finger(f);
    const std::string name(finger_name(f));
    if (!(c.q_min.array() <= c.q_max.array()).all()) {
      throw SchemaError("finger '" + name + "': q_min exceeds q_max");
    }
    if (!(c.w_plus.array() >= 0.0).all() || !(c.w_minus.array() >= 0.0).all()) {
      throw SchemaError("finger '" + name + "': penalty weights must be non-negative");
    }
  }
  if (!(restart_residual >= 0.0)) throw SchemaError("restart_residual must be non-negative");
  solver.validate();
}

double regularizer(const FingerAngles& q, const FingerAngles& w_plus, const FingerAngles& w_minus) {
  return w_plus.cwiseProduct(q).cwiseMax(0.0).squaredNorm() +
         w_minus.cwiseProduct(q).cwiseMin(0.0).squaredNorm();
}

Transform estimate_model_pose(const MarkerFrame& frame, const RecordConfig& config) {
  return estimate_hand_frame(frame) * config.t_hand_model;
}

double finger_record_objective(FingerId finger, const MarkerPair& targets,
                               const RecordConfig& config, const FingerAngles& q) {
  const FingerRecordConfig& c = config.finger(finger);
  const MarkerPair p = finger_forward_kinematics(config.shape, finger, q);
  return (targets[0] - p[0]).squaredNorm() + (targets[1] - p[1]).squaredNorm() +
         regularizer(q, c.w_plus, c.w_minus);
}

FingerFit fit_finger(FingerId finger, const MarkerPair& targets, const RecordConfig& config,
                     const FingerAngles& warm_start) {
  const FingerRecordConfig& c = config.finger(finger);
  const FingerGeometry& geometry = config.shape.finger(finger);
  const boxopt::Objective objective = [&](const boxopt::Vector& x) {
    const FingerAngles q = x;
    const MarkerPair p = finger_forward_kinematics(geometry, q);
    return (targets[0] - p[0]).squaredNorm() + (targets[1] - p[1]).squaredNorm() +
           regularizer(q, c.w_plus, c.w_minus);
  };
  const boxopt::Bounds bounds(c.q_min, c.q_max);
  const boxopt::Vector start = bounds.clamp(warm_start);
  const boxopt::SolveResult solved = boxopt::minimize(objective, start, bounds, config.solver);

  FingerFit fit;
  fit.q = solved.x;
  fit.objective = solved.objective;
  fit.warm_objective = solved.trace.front();
  fit.iterations = solved.iterations;
  fit.converged = solved.converged;
  return fit;
}

std::vector<FingerAngles> restart_seeds(const FingerRecordConfig& config) {
  std::vector<FingerAngles> seeds;
  const auto clamp = [&](const FingerAngles& q) -> FingerAngles {
    return q.cwiseMax(config.q_min).cwiseMin(config.q_max);
  };
  seeds.push_back(clamp(FingerAngles::Zero()));
  seeds.push_back(clamp(0.5 * (config.q_min + config.q_max)));
  for (double fraction : {0.5, 0.9}) {
    FingerAngles q = FingerAngles::Zero();
    for (int s = 0; s < 3; ++s) q[3 * s] = fraction * config.q_max[3 * s];
    seeds.push_back(clamp(q));
  }
  return seeds;
}

double finger_marker_error(FingerId finger, const MarkerPair& targets, const RecordConfig& config,
                           const FingerAngles& q) {
  const MarkerPair p = finger_forward_kinematics(config.shape.finger(finger), q);
  return std::sqrt((targets[0] - p[0]).squaredNorm() + (targets[1] - p[1]).squaredNorm());
}

FingerFit fit_finger_with_restarts(FingerId finger, const MarkerPair& targets,
                                   const RecordConfig& config, const FingerAngles& warm_start,
                                   bool* restarted) {
  FingerFit best = fit_finger(finger, targets, config, warm_start);
  const bool poor = finger_marker_error(finger, targets, config, best.q) > config.restart_residual;
  if (restarted) *restarted = poor;
  if (!poor) return best;
  for (const FingerAngles& seed : restart_seeds(config.finger(finger))) {
    FingerFit fit = fit_finger(finger, targets, config, seed);
    // strict improvement only, so ties keep the temporally coherent answer
    if (fit.objective < best.objective) {
      fit.warm_objective = best.warm_objective;
      best = fit;
    }
  }
  return best;
}

HandState record_frame(const MarkerFrame& frame, const RecordConfig& config,
                       const std::optional<HandState>& previous, RecordFrameInfo* info) {
  RecordFrameInfo local;
  HandState state;
  const bool has_hand = frame[MarkerLabel::hand_front] && frame[MarkerLabel::hand_left] &&
                        frame[MarkerLabel::hand_right];
  if (has_hand) {
    state.pose = estimate_model_pose(frame, config);
  } else if (previous) {
    state.pose = previous->pose;
    local.pose_carried = true;
  } else {
    throw NoPoseAvailable("back-of-hand markers missing and no previous state");
  }

  const Transform model_world = state.pose.inverse();
  for (FingerId f : kFingers) {
    const std::size_t slot = finger_slot(f);
    const FingerRecordConfig& c = config.finger(f);
    const FingerAngles warm = previous ? previous->finger_q[slot]
                                       : FingerAngles(FingerAngles::Zero().cwiseMax(c.q_min).cwiseMin(c.q_max));
    const auto& mid = frame[finger_marker(f, 0)];
    const auto& tip = frame[finger_marker(f, 1)];
    if (!mid || !tip) {
      state.finger_q[slot] = warm;
      local.finger_carried[slot] = true;
      continue;
    }
    const MarkerPair targets{model_world.apply(*mid), model_world.apply(*tip)};
    const FingerFit fit =
        fit_finger_with_restarts(f, targets, config, warm, &local.restarted[slot]);
    state.finger_q[slot] = fit.q;
    local.objective[slot] = fit.objective;
  }
  if (info) *info = local;
  return state;
}

RecordedSequence record_sequence(const MarkerSequence& sequence, const RecordConfig& config) {
  RecordedSequence out;
  std::optional<HandState> previous;
  for (const MarkerFrame& frame : sequence.frames) {
    RecordFrameInfo info;
    try {
      previous = record_frame(frame, config, previous, &info);
    } catch (const NoPoseAvailable&) {
      ++out.skipped_head;
      continue;
    }
    out.frames.push_back({frame.timestamp, *previous});
    out.info.push_back(info);
  }
  if (out.frames.empty()) {
    throw EmptyUsableSequence("no frame of the sequence produced a hand state");
  }
  return out;
}

}  // namespace handemb
