#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "handemb/hand_model.hpp"
#include "handemb/mocap.hpp"
#include "handemb/record_mapping.hpp"

namespace handemb {

/// Back-of-hand marker positions in the hand frame. Any layout whose
/// estimate_hand_frame is the identity works.
struct GloveLayout {
  Vec3 front{0.02, 0.0, 0.04};
  Vec3 left{-0.04, 0.0, -0.02};
  Vec3 right{0.02, 0.0, -0.02};
};

/// Exact marker frame for a hand state: back-of-hand markers through
/// t_hand_model, finger markers from the hand model.
MarkerFrame markers_from_state(const HandState& state, const RecordConfig& config,
                               double timestamp, const GloveLayout& layout = {});

MarkerSequence markers_from_states(const std::vector<TimedHandState>& states,
                                   const RecordConfig& config, double nominal_rate,
                                   const GloveLayout& layout = {});

/// Uniform in-bounds finger angles and a random rigid pose (translation in
/// [-extent, extent]^3, uniformly distributed rotation).
HandState random_hand_state(const RecordConfig& config, std::mt19937_64& rng, double extent = 0.5);

/// Independent random states at `rate` Hz.
std::vector<TimedHandState> random_hand_states(const RecordConfig& config, std::size_t frames,
                                               double rate, std::uint64_t seed);

/// Smooth motion: every angle oscillates within its bounds and the hand
/// drifts and turns slowly. Deterministic for a seed.
std::vector<TimedHandState> synthetic_motion(const RecordConfig& config, std::size_t frames,
                                             double rate, std::uint64_t seed);

}  // namespace handemb
