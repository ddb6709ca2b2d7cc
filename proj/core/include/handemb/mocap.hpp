#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "handemb/hand_model.hpp"
#include "handemb/se3.hpp"

namespace handemb {

/// The 13 glove markers: three on the back of the hand, two per finger.
enum class MarkerLabel : int {
  hand_front,
  hand_left,
  hand_right,
  thumb_mid,
  thumb_tip,
  index_mid,
  index_tip,
  middle_mid,
  middle_tip,
  ring_mid,
  ring_tip,
  little_mid,
  little_tip,
};

inline constexpr std::size_t kMarkerCount = 13;

std::string_view marker_name(MarkerLabel label);
std::optional<MarkerLabel> marker_from_name(std::string_view name);
/// `which` is 0 for the mid-phalanx marker, 1 for the fingertip marker.
MarkerLabel finger_marker(FingerId finger, int which);

struct MarkerFrame {
  double timestamp = 0.0;
  std::array<std::optional<Vec3>, kMarkerCount> markers{};

  std::optional<Vec3>& operator[](MarkerLabel l) { return markers[static_cast<std::size_t>(l)]; }
  const std::optional<Vec3>& operator[](MarkerLabel l) const {
    return markers[static_cast<std::size_t>(l)];
  }
  bool operator==(const MarkerFrame&) const = default;
};

struct MarkerSequence {
  std::vector<MarkerFrame> frames;
  double nominal_rate = 0.0;  // Hz

  /// Throws NonMonotoneTimestamps unless timestamps strictly increase.
  void validate() const;
  bool operator==(const MarkerSequence&) const = default;
};

struct MocapParseOptions {
  /// Reject malformed rows (and report them) instead of throwing.
  bool lenient = false;
  /// Foreign label -> canonical label, applied to MARKER_NAMES before lookup.
  std::map<std::string, std::string> label_map;
};

struct RejectedRow {
  std::size_t line = 0;  // 1-based line number in the input
  std::string reason;
};

struct MocapParseResult {
  MarkerSequence sequence;
  std::size_t rows_in = 0;
  std::vector<RejectedRow> rejected;
};

/// Parses a tab-separated marker export.
///
/// Header lines are `KEY<TAB>value...`; FREQUENCY and MARKER_NAMES are
/// required. An optional `Frame<TAB>Time<TAB>...` column header follows. Each
/// data row holds a frame number, a time in seconds and X/Y/Z per marker in
/// millimeters (rows without the frame/time columns are accepted, time is then
/// derived from FREQUENCY). Empty cells or an exact 0,0,0 triplet mark an
/// occluded marker. Coordinates are converted to meters.
///
/// Throws MalformedHeader, UnknownMarkerLabel, and (unless lenient)
/// RowArityMismatch, MalformedRow or NonMonotoneTimestamps. An input without
/// any content yields an empty sequence.
MocapParseResult parse_mocap_tsv(std::istream& in, const MocapParseOptions& options = {});

/// Writes the format read by parse_mocap_tsv. parse(write(s)) == s bit-exactly.
void write_mocap_tsv(const MarkerSequence& sequence, std::ostream& out);

/// Linearly interpolates (in time) every marker gap of at most `max_gap`
/// frames that has an observation on both sides. Other gaps are left alone.
MarkerSequence fill_gaps(const MarkerSequence& sequence, std::size_t max_gap = 10);

/// Hand frame from the three back-of-hand markers: approach = front - right,
/// orientation = normal of the marker plane, origin = marker centroid.
/// Throws MissingHandMarkers or DegenerateFrame.
Transform estimate_hand_frame(const MarkerFrame& frame);

}  // namespace handemb
