#pragma once

#include <array>
#include <optional>
#include <vector>

#include "handemb/boxopt.hpp"
#include "handemb/hand_model.hpp"
#include "handemb/mocap.hpp"

namespace handemb {

struct FingerRecordConfig {
  FingerAngles w_plus = FingerAngles::Constant(0.01);
  FingerAngles w_minus = FingerAngles::Constant(0.01);
  FingerAngles q_min;
  FingerAngles q_max;
};

/// Default per-joint bounds for one finger: flexion [-0.26, 1.75],
/// abduction [-0.35, 0.35], twist [-0.17, 0.17] radians for every triplet.
FingerRecordConfig default_finger_record_config();

struct RecordConfig {
  Transform t_hand_model;  // hand frame <- hand-model base
  HandShape shape;
  std::array<FingerRecordConfig, 5> fingers{
      default_finger_record_config(), default_finger_record_config(),
      default_finger_record_config(), default_finger_record_config(),
      default_finger_record_config()};
  boxopt::SolveOptions solver;
  /// record_frame refits a finger from fixed seeds when the marker error
  /// (root of the summed squared distances, m) of the warm fit exceeds this.
  /// Infinity disables the restarts.
  double restart_residual = 1e-4;

  const FingerRecordConfig& finger(FingerId f) const { return fingers[finger_slot(f)]; }
  /// Throws SchemaError if q_min > q_max or a weight is negative somewhere.
  void validate() const;
};

/// ||max(w+ o q, 0)||^2 + ||min(w- o q, 0)||^2 with elementwise products.
double regularizer(const FingerAngles& q, const FingerAngles& w_plus, const FingerAngles& w_minus);

/// World <- hand-model base: estimate_hand_frame(frame) * t_hand_model.
Transform estimate_model_pose(const MarkerFrame& frame, const RecordConfig& config);

/// Sum of squared marker distances plus the regularizer, for targets in the
/// hand-model base frame.
double finger_record_objective(FingerId finger, const MarkerPair& targets,
                               const RecordConfig& config, const FingerAngles& q);

struct FingerFit {
  FingerAngles q;
  double objective = 0.0;
  double warm_objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Fits one finger's nine angles to two observed markers (hand-model base
/// frame) within the configured bounds, starting from `warm_start`.
FingerFit fit_finger(FingerId finger, const MarkerPair& targets, const RecordConfig& config,
                     const FingerAngles& warm_start);

/// Start points tried after a poor warm fit: zero, box centre, and the
/// flexion joints at half and 0.9 of their upper bound. All clamped.
std::vector<FingerAngles> restart_seeds(const FingerRecordConfig& config);

/// Marker part of the fit error, sqrt(sum ||p - t||^2).
double finger_marker_error(FingerId finger, const MarkerPair& targets, const RecordConfig& config,
                           const FingerAngles& q);

/// fit_finger from `warm_start`, then from every restart seed if the marker
/// error stays above config.restart_residual. Keeps the lowest objective.
FingerFit fit_finger_with_restarts(FingerId finger, const MarkerPair& targets,
                                   const RecordConfig& config, const FingerAngles& warm_start,
                                   bool* restarted = nullptr);

struct RecordFrameInfo {
  bool pose_carried = false;
  std::array<bool, 5> restarted{};
  std::array<bool, 5> finger_carried{};
  std::array<double, 5> objective{};
};

/// Full hand state for one frame. Without back-of-hand markers the pose of
/// `previous` is kept; fingers missing either marker keep their previous
/// angles. Throws NoPoseAvailable if there is no pose and no previous state.
HandState record_frame(const MarkerFrame& frame, const RecordConfig& config,
                       const std::optional<HandState>& previous,
                       RecordFrameInfo* info = nullptr);

struct RecordedSequence {
  std::vector<TimedHandState> frames;
  std::vector<RecordFrameInfo> info;
  /// Leading frames dropped because no pose could be established yet.
  std::size_t skipped_head = 0;
};

/// record_frame over a sequence, each frame warm-started by the previous
/// output. Throws EmptyUsableSequence if no frame yields a state.
RecordedSequence record_sequence(const MarkerSequence& sequence, const RecordConfig& config);

}  // namespace handemb
