#include "handemb/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "random.hpp"

namespace handemb {

MarkerFrame markers_from_state(const HandState& state, const RecordConfig& config,
                               double timestamp, const GloveLayout& layout) {
  MarkerFrame frame;
  frame.timestamp = timestamp;
  const Transform world_hand = state.pose * config.t_hand_model.inverse();
  frame[MarkerLabel::hand_front] = world_hand.apply(layout.front);
  frame[MarkerLabel::hand_left] = world_hand.apply(layout.left);
  frame[MarkerLabel::hand_right] = world_hand.apply(layout.right);
  const auto markers = hand_markers(config.shape, state);
  for (FingerId f : kFingers) {
    frame[finger_marker(f, 0)] = markers[finger_slot(f)][0];
    frame[finger_marker(f, 1)] = markers[finger_slot(f)][1];
  }
  return frame;
}

MarkerSequence markers_from_states(const std::vector<TimedHandState>& states,
                                   const RecordConfig& config, double nominal_rate,
                                   const GloveLayout& layout) {
  MarkerSequence seq;
  seq.nominal_rate = nominal_rate;
  for (const auto& s : states) seq.frames.push_back(markers_from_state(s.state, config, s.timestamp, layout));
  return seq;
}

HandState random_hand_state(const RecordConfig& config, std::mt19937_64& rng, double extent) {
  HandState s;
  for (FingerId f : kFingers) {
    const auto& fc = config.finger(f);
    for (int k = 0; k < kFingerDof; ++k) s.q(f)[k] = detail::uniform(rng, fc.q_min[k], fc.q_max[k]);
  }
  // Uniform rotation from a normalized Gaussian quaternion (Box-Muller).
  Eigen::Vector4d g;
  for (int i = 0; i < 4; ++i) {
    const double u1 = 1.0 - detail::uniform01(rng);
    const double u2 = detail::uniform01(rng);
    g[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  Vec3 t(detail::uniform(rng, -extent, extent), detail::uniform(rng, -extent, extent),
         detail::uniform(rng, -extent, extent));
  s.pose = Transform::from_quaternion(Quat(g[0], g[1], g[2], g[3]), t);
  return s;
}

std::vector<TimedHandState> random_hand_states(const RecordConfig& config, std::size_t frames,
                                               double rate, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<TimedHandState> out;
  for (std::size_t i = 0; i < frames; ++i)
    out.push_back({static_cast<double>(i) / rate, random_hand_state(config, rng)});
  return out;
}

std::vector<TimedHandState> synthetic_motion(const RecordConfig& config, std::size_t frames,
                                             double rate, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  constexpr double kTau = 2.0 * std::numbers::pi;
  struct Wave {
    double mid, amp, freq, phase;
  };
  std::array<std::array<Wave, kFingerDof>, 5> waves{};
  for (FingerId f : kFingers) {
    const auto& fc = config.finger(f);
    for (int k = 0; k < kFingerDof; ++k) {
      const double half = 0.5 * (fc.q_max[k] - fc.q_min[k]);
      waves[finger_slot(f)][k] = {fc.q_min[k] + half, 0.8 * half * detail::uniform(rng, 0.3, 1.0),
                                  detail::uniform(rng, 0.1, 0.6), detail::uniform(rng, 0.0, kTau)};
    }
  }
  const Vec3 axis = Vec3(detail::uniform(rng, -1, 1), detail::uniform(rng, -1, 1), 1.0).normalized();
  const double spin = detail::uniform(rng, 0.2, 0.5);
  const Vec3 centre(detail::uniform(rng, -0.2, 0.2), detail::uniform(rng, -0.2, 0.2), 1.0);

  std::vector<TimedHandState> out;
  out.reserve(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const double t = static_cast<double>(i) / rate;
    HandState s;
    for (FingerId f : kFingers) {
      for (int k = 0; k < kFingerDof; ++k) {
        const Wave& w = waves[finger_slot(f)][k];
        s.q(f)[k] = w.mid + w.amp * std::sin(kTau * w.freq * t + w.phase);
      }
    }
    const Vec3 offset(0.1 * std::cos(0.3 * t), 0.1 * std::sin(0.3 * t), 0.05 * std::sin(0.7 * t));
    s.pose = Transform::from_axis_angle(axis, spin * std::sin(0.5 * t), centre + offset);
    out.push_back({t, s});
  }
  return out;
}

}  // namespace handemb
