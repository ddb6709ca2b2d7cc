#include "handemb/mocap.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "decimal.hpp"
#include "handemb/errors.hpp"

namespace handemb {

namespace {

constexpr std::array<std::string_view, kMarkerCount> kMarkerNames{
    "hand_front", "hand_left",  "hand_right", "thumb_mid",  "thumb_tip",
    "index_mid",  "index_tip",  "middle_mid", "middle_tip", "ring_mid",
    "ring_tip",   "little_mid", "little_tip"};

constexpr int kMillimeterShift = -3;

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.emplace_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

bool is_header_key(std::string_view field) {
  if (field.empty() || !std::isupper(static_cast<unsigned char>(field.front()))) return false;
  return std::all_of(field.begin(), field.end(), [](char c) {
    return std::isupper(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) ||
           c == '_';
  });
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

std::optional<double> parse_number(std::string_view text, int shift = 0) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  return detail::parse_scaled_decimal(text, shift);
}

struct Header {
  std::optional<double> frequency;
  std::vector<MarkerLabel> columns;
  std::optional<std::size_t> declared_markers;
};

void apply_header_line(Header& header, const std::vector<std::string>& fields,
                       const MocapParseOptions& options) {
  const std::string& key = fields.front();
  if (key == "FREQUENCY") {
    auto value = fields.size() >= 2 ? parse_number(fields[1]) : std::nullopt;
    if (!value || !(*value > 0.0)) throw MalformedHeader("FREQUENCY must be a positive number");
    header.frequency = *value;
  } else if (key == "NO_OF_MARKERS") {
    auto value = fields.size() >= 2 ? parse_number(fields[1]) : std::nullopt;
    if (!value || *value < 0.0 || *value != std::floor(*value)) {
      throw MalformedHeader("NO_OF_MARKERS must be a non-negative integer");
    }
    header.declared_markers = static_cast<std::size_t>(*value);
  } else if (key == "MARKER_NAMES") {
    if (!header.columns.empty()) throw MalformedHeader("MARKER_NAMES given twice");
    for (std::size_t i = 1; i < fields.size(); ++i) {
      std::string name = fields[i];
      if (name.empty()) continue;
      if (auto mapped = options.label_map.find(name); mapped != options.label_map.end()) {
        name = mapped->second;
      }
      auto label = marker_from_name(name);
      if (!label) throw UnknownMarkerLabel("unknown marker label '" + fields[i] + "'");
      if (std::find(header.columns.begin(), header.columns.end(), *label) != header.columns.end()) {
        throw MalformedHeader("marker label '" + name + "' appears twice");
      }
      header.columns.push_back(*label);
    }
    if (header.columns.empty()) throw MalformedHeader("MARKER_NAMES lists no markers");
  }
  // Other vendor keys (NO_OF_FRAMES, NO_OF_CAMERAS, DESCRIPTION, ...) are informative.
}

MarkerFrame parse_row(const std::vector<std::string>& fields, const Header& header,
                      std::size_t row_index) {
  const std::size_t coords = 3 * header.columns.size();
  std::size_t offset = 0;
  MarkerFrame frame;
  if (fields.size() == coords + 2) {
    auto time = parse_number(fields[1]);
    if (!time) throw MalformedRow("time column '" + fields[1] + "' is not a number");
    frame.timestamp = *time;
    offset = 2;
  } else if (fields.size() == coords) {
    frame.timestamp = static_cast<double>(row_index) / *header.frequency;
  } else {
    throw RowArityMismatch("expected " + std::to_string(coords + 2) + " fields, got " +
                           std::to_string(fields.size()));
  }

  for (std::size_t m = 0; m < header.columns.size(); ++m) {
    std::array<std::optional<double>, 3> xyz;
    bool empty = false;
    for (std::size_t k = 0; k < 3; ++k) {
      const std::string& cell = fields[offset + 3 * m + k];
      if (is_blank(cell)) {
        empty = true;
        continue;
      }
      xyz[k] = parse_number(cell, kMillimeterShift);
      if (!xyz[k]) throw MalformedRow("coordinate '" + cell + "' is not a number");
    }
    if (empty) continue;
    const Vec3 p(*xyz[0], *xyz[1], *xyz[2]);
    if (p.isZero(0.0)) continue;
    frame[header.columns[m]] = p;
  }
  return frame;
}

}  // namespace

std::string_view marker_name(MarkerLabel label) {
  return kMarkerNames.at(static_cast<std::size_t>(label));
}

std::optional<MarkerLabel> marker_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kMarkerCount; ++i) {
    if (kMarkerNames[i] == name) return static_cast<MarkerLabel>(i);
  }
  return std::nullopt;
}

MarkerLabel finger_marker(FingerId finger, int which) {
  return static_cast<MarkerLabel>(3 + 2 * static_cast<int>(finger_slot(finger)) + which);
}

void MarkerSequence::validate() const {
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (!(frames[i].timestamp > frames[i - 1].timestamp)) {
      throw NonMonotoneTimestamps("timestamp of frame " + std::to_string(i) +
                                  " does not increase");
    }
  }
}

MocapParseResult parse_mocap_tsv(std::istream& in, const MocapParseOptions& options) {
  MocapParseResult result;
  Header header;
  bool in_data = false;
  bool any_content = false;
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;
    any_content = true;
    const auto fields = split_tabs(line);

    if (!in_data) {
      if (fields.front() == "Frame") {
        in_data = true;
        continue;
      }
      if (is_header_key(fields.front())) {
        apply_header_line(header, fields, options);
        continue;
      }
      in_data = true;  // first numeric row ends the header
    }

    if (!header.frequency) throw MalformedHeader("missing FREQUENCY header");
    if (header.columns.empty()) throw MalformedHeader("missing MARKER_NAMES header");
    if (header.declared_markers && *header.declared_markers != header.columns.size()) {
      throw MalformedHeader("NO_OF_MARKERS does not match MARKER_NAMES");
    }

    ++result.rows_in;
    try {
      MarkerFrame frame = parse_row(fields, header, result.sequence.frames.size());
      if (!std::isfinite(frame.timestamp)) throw MalformedRow("time is not finite");
      if (!result.sequence.frames.empty() &&
          !(frame.timestamp > result.sequence.frames.back().timestamp)) {
        throw NonMonotoneTimestamps("time " + detail::format_double(frame.timestamp) +
                                    " does not increase");
      }
      result.sequence.frames.push_back(std::move(frame));
    } catch (const Error& e) {
      if (!options.lenient) {
        throw;
      }
      result.rejected.push_back({line_no, e.what()});
    }
  }

  if (!any_content) return result;
  if (!header.frequency) throw MalformedHeader("missing FREQUENCY header");
  if (header.columns.empty()) throw MalformedHeader("missing MARKER_NAMES header");
  result.sequence.nominal_rate = *header.frequency;
  return result;
}

void write_mocap_tsv(const MarkerSequence& sequence, std::ostream& out) {
  out << "NO_OF_FRAMES\t" << sequence.frames.size() << '\n';
  out << "NO_OF_MARKERS\t" << kMarkerCount << '\n';
  out << "FREQUENCY\t" << detail::format_double(sequence.nominal_rate) << '\n';
  out << "DATA_INCLUDED\t3D\n";
  out << "MARKER_NAMES";
  for (auto name : kMarkerNames) out << '\t' << name;
  out << "\nFrame\tTime";
  for (auto name : kMarkerNames) out << '\t' << name << " X\t" << name << " Y\t" << name << " Z";
  out << '\n';
  for (std::size_t i = 0; i < sequence.frames.size(); ++i) {
    const MarkerFrame& frame = sequence.frames[i];
    out << (i + 1) << '\t' << detail::format_double(frame.timestamp);
    for (const auto& marker : frame.markers) {
      if (!marker) {
        out << "\t\t\t";
        continue;
      }
      for (int k = 0; k < 3; ++k) out << '\t' << detail::format_scaled_decimal((*marker)[k], 3);
    }
    out << '\n';
  }
}

MarkerSequence fill_gaps(const MarkerSequence& sequence, std::size_t max_gap) {
  MarkerSequence out = sequence;
  const std::size_t n = out.frames.size();
  for (std::size_t m = 0; m < kMarkerCount; ++m) {
    std::optional<std::size_t> last_seen;
    for (std::size_t i = 0; i < n; ++i) {
      if (!sequence.frames[i].markers[m]) continue;
      if (last_seen && i - *last_seen > 1 && i - *last_seen - 1 <= max_gap) {
        const MarkerFrame& a = sequence.frames[*last_seen];
        const MarkerFrame& b = sequence.frames[i];
        const Vec3& pa = *a.markers[m];
        const Vec3& pb = *b.markers[m];
        for (std::size_t k = *last_seen + 1; k < i; ++k) {
          const double s = (out.frames[k].timestamp - a.timestamp) / (b.timestamp - a.timestamp);
          out.frames[k].markers[m] = pa + s * (pb - pa);
        }
      }
      last_seen = i;
    }
  }
  return out;
}

Transform estimate_hand_frame(const MarkerFrame& frame) {
  const auto& front = frame[MarkerLabel::hand_front];
  const auto& left = frame[MarkerLabel::hand_left];
  const auto& right = frame[MarkerLabel::hand_right];
  if (!front || !left || !right) {
    throw MissingHandMarkers("hand_front, hand_left and hand_right must all be present");
  }
  const Vec3 approach = *front - *right;
  const Vec3 normal = (*left - *right).cross(*front - *right);
  if (!(normal.norm() > 0.0)) throw DegenerateFrame("hand markers are collinear");
  const Vec3 origin = (*front + *left + *right) / 3.0;
  return frame_from_two_vectors(approach, normal.normalized(), origin);
}

}  // namespace handemb
