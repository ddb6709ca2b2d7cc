#include "handemb/app/cli.hpp"

#include <signal.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cxxabi.h>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <typeinfo>

#include <CLI11.hpp>

#include "handemb/app/server.hpp"
#include "handemb/app/service.hpp"
#include "handemb/config_io.hpp"
#include "handemb/embodiment.hpp"
#include "handemb/errors.hpp"
#include "handemb/metrics.hpp"
#include "handemb/mocap.hpp"
#include "handemb/record_mapping.hpp"
#include "handemb/synthetic.hpp"
#include "handemb/trajectory_io.hpp"

namespace handemb::app {

namespace {

/// Bad arguments or inputs of the wrong kind.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string error_name(const std::exception& e) {
  int status = 0;
  std::unique_ptr<char, void (*)(void*)> name(
      abi::__cxa_demangle(typeid(e).name(), nullptr, nullptr, &status), std::free);
  std::string s = status == 0 && name ? name.get() : typeid(e).name();
  if (auto pos = s.rfind("::"); pos != std::string::npos) s = s.substr(pos + 2);
  return s;
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string read_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open input " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_output(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write output " + path);
  out << text;
  if (!out) throw UsageError("failed writing " + path);
}

MarkerSequence load_markers(const std::string& path, const PipelineConfig& config, bool lenient,
                            std::size_t* rows_in = nullptr, std::size_t* rejected = nullptr) {
  std::istringstream in(read_input(path));
  MocapParseOptions options;
  options.lenient = lenient;
  options.label_map = config.label_map;
  MocapParseResult parsed = parse_mocap_tsv(in, options);
  if (rows_in) *rows_in = parsed.rows_in;
  if (rejected) *rejected = parsed.rejected.size();
  return fill_gaps(parsed.sequence, config.max_gap);
}

double reprojection_rms(const MarkerSequence& seq, const RecordedSequence& rec, const HandShape& shape) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < rec.frames.size(); ++i) {
    const MarkerFrame& frame = seq.frames[rec.skipped_head + i];
    const auto markers = hand_markers(shape, rec.frames[i].state);
    for (FingerId f : kFingers) {
      for (int j = 0; j < 2; ++j) {
        const auto& obs = frame[finger_marker(f, j)];
        if (!obs) continue;
        sum += (*obs - markers[finger_slot(f)][j]).squaredNorm();
        ++count;
      }
    }
  }
  return count ? std::sqrt(sum / static_cast<double>(count)) : 0.0;
}

HandStateTrajectory load_states(const std::string& path) {
  const std::string text = read_input(path);
  std::istringstream probe(text);
  if (read_trajectory_kind(probe) != TrajectoryKind::hand_state)
    throw UsageError(path + " is a robot_command trajectory, expected hand_state");
  std::istringstream in(text);
  return read_hand_state_trajectory(in);
}

RobotCommandTrajectory load_commands(const std::string& path) {
  const std::string text = read_input(path);
  std::istringstream probe(text);
  if (read_trajectory_kind(probe) != TrajectoryKind::robot_command)
    throw UsageError(path + " is a hand_state trajectory, expected robot_command");
  std::istringstream in(text);
  return read_robot_command_trajectory(in);
}

const EmbodimentConfig& pick_hand(const PipelineConfig& config, const std::string& hand) {
  const std::string id = hand.empty() ? config.default_hand : hand;
  auto it = config.embodiments.find(id);
  if (it == config.embodiments.end()) throw UsageError("hand '" + id + "' is not configured");
  return it->second;
}

void print_timing(std::ostream& out, const std::string& label, const TimingStats& s) {
  out << pad(label, 24) << pad(std::to_string(s.frames), 10) << pad(fmt("%.1f", s.mean_hz), 12)
      << fmt("%.1f", s.min_hz) << '\n';
}

void print_timing_header(std::ostream& out) {
  out << pad("mapping", 24) << pad("frames", 10) << pad("mean_hz", 12) << "min_hz\n";
}

// ---------------------------------------------------------------------------

struct RecordArgs {
  std::string config, input, output;
  bool lenient = false;
};

int cmd_record(const RecordArgs& a, std::ostream& out) {
  const PipelineConfig config = load_pipeline_config(a.config);
  std::size_t rows = 0, rejected = 0;
  const MarkerSequence seq = load_markers(a.input, config, a.lenient, &rows, &rejected);
  const RecordedSequence rec = record_sequence(seq, config.record);
  HandStateTrajectory traj;
  traj.provenance = {a.input, config.digests};
  traj.frames = rec.frames;
  std::ostringstream text;
  write_trajectory(traj, text);
  write_output(a.output, text.str());

  std::size_t carried = 0;
  for (const auto& info : rec.info)
    for (bool c : info.finger_carried) carried += c;
  out << "frames: " << rec.frames.size() << '\n'
      << "skipped: " << rec.skipped_head << '\n'
      << "rejected rows: " << rejected << " of " << rows << '\n'
      << "carried fingers: " << carried << '\n'
      << "reprojection rms: " << fmt("%.3e", reprojection_rms(seq, rec, config.shape)) << " m\n";
  return kSuccess;
}

struct EmbodyArgs {
  std::string config, hand, input, output;
};

int cmd_embody(const EmbodyArgs& a, std::ostream& out) {
  const PipelineConfig config = load_pipeline_config(a.config);
  const std::string id = a.hand.empty() ? config.default_hand : a.hand;
  const EmbodimentConfig& emb = pick_hand(config, id);
  const HandStateTrajectory states = load_states(a.input);
  const EmbodiedTrajectory result = embody_trajectory(states.frames, config.shape, emb);

  RobotCommandTrajectory traj;
  traj.provenance = {a.input, config.digests};
  traj.hand = id;
  traj.frames = result.commands;
  std::ostringstream text;
  write_trajectory(traj, text);
  write_output(a.output, text.str());

  const auto channels = emb.hand.command_channels();
  out << "hand: " << id << '\n' << "frames: " << result.commands.size() << '\n';
  out << "actuated channels: " << channels.size() << " (";
  for (std::size_t i = 0; i < channels.size(); ++i) out << (i ? ", " : "") << channels[i];
  out << ")\n";
  for (const ChannelInfo& c : emb.hand.channels()) {
    if (c.fixed) out << "fixed: " << c.name << " = " << fmt("%.4f", c.neutral) << " rad\n";
  }
  out << pad("finger", 10) << "mean residual (mm)\n";
  for (FingerId f : kFingers) {
    out << pad(std::string(finger_name(f)), 10);
    if (!emb.hand.has_finger(f)) {
      out << "-\n";
      continue;
    }
    double sum = 0.0;
    for (const auto& c : result.commands) sum += c.residuals.at(f);
    out << fmt("%.4f", 1e3 * sum / static_cast<double>(result.commands.size())) << '\n';
  }
  print_timing_header(out);
  print_timing(out, "embodiment[" + id + "]", timing_stats(result.durations));
  return kSuccess;
}

struct EvalArgs {
  std::string config, hand, input, states, frames = "0";
  std::size_t samples = 100;
  std::optional<std::uint64_t> seed;
  int segments = 16;
  bool grid = false;
};

std::vector<std::size_t> parse_indices(const std::string& text, std::size_t count) {
  std::vector<std::size_t> out;
  if (text == "all") {
    for (std::size_t i = 0; i < count; ++i) out.push_back(i);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    long long v = -1;
    try {
      v = std::stoll(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || v < 0) throw UsageError("bad frame index '" + item + "'");
    if (static_cast<std::size_t>(v) >= count)
      throw UsageError("frame index " + item + " out of range (" + std::to_string(count) + " frames)");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw UsageError("no frame indices given");
  return out;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const PipelineConfig config = load_pipeline_config(a.config);
  const RobotCommandTrajectory commands = load_commands(a.input);
  const HandStateTrajectory states = load_states(a.states);
  const std::string id = !a.hand.empty() ? a.hand : !commands.hand.empty() ? commands.hand : config.default_hand;
  if (!commands.hand.empty() && commands.hand != id)
    throw UsageError("trajectory was embodied for '" + commands.hand + "', not '" + id + "'");
  const EmbodimentConfig& emb = pick_hand(config, id);
  if (commands.frames.size() != states.frames.size())
    throw UsageError("robot and hand-state trajectories differ in length");
  const auto indices = parse_indices(a.frames, commands.frames.size());
  const std::uint64_t seed = a.seed.value_or(config.seed);

  std::set<FingerId> with_surface;
  for (const auto& c : emb.hand.spec().contact_surfaces) with_surface.insert(c.finger);

  out << "mean surface distance (mm), " << indices.size() << " frame(s), " << a.samples
      << " samples, seed " << seed << '\n';
  out << pad("hand", 16);
  for (FingerId f : kFingers) out << pad(std::string(finger_name(f)), 10);
  out << '\n' << pad(id, 16);
  for (FingerId f : kFingers) {
    if (!with_surface.count(f)) {
      out << pad("-", 10);
      continue;
    }
    double sum = 0.0;
    for (std::size_t i : indices) {
      const RobotCommand& cmd = commands.frames[i];
      std::map<std::string, double> values = cmd.actuated_values;
      values.insert(cmd.fixed_values.begin(), cmd.fixed_values.end());
      const ContactSurface robot = robot_contact_surface(emb.hand, f, values, a.segments);
      ContactSurface model = model_contact_surface(config.shape, f, states.frames[i].state.q(f), a.segments);
      model.mesh = model.mesh.transformed(emb.t_robot_model);
      sum += surface_distance(robot, model, a.samples, seed,
                              a.grid ? DistanceMethod::grid : DistanceMethod::brute_force);
    }
    out << pad(fmt("%.3f", 1e3 * sum / static_cast<double>(indices.size())), 10);
  }
  out << '\n';
  return kSuccess;
}

struct BenchArgs {
  std::string config, input;
  std::vector<std::string> hands;
  std::size_t frames = 1000;
  int repetitions = 1;
  std::optional<std::uint64_t> seed;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  const PipelineConfig config = load_pipeline_config(a.config);
  MarkerSequence seq;
  if (!a.input.empty()) {
    seq = load_markers(a.input, config, false);
  } else {
    seq = markers_from_states(synthetic_motion(config.record, a.frames, 100.0, a.seed.value_or(config.seed)),
                              config.record, 100.0);
  }
  if (a.repetitions < 1) throw UsageError("--repetitions must be at least 1");
  std::vector<std::string> hands = a.hands;
  if (hands.empty()) hands.push_back(config.default_hand);

  using clock = std::chrono::steady_clock;
  std::vector<double> record_durations;
  std::vector<TimedHandState> states;
  for (int rep = 0; rep < a.repetitions; ++rep) {
    std::optional<HandState> previous;
    for (const MarkerFrame& frame : seq.frames) {
      const auto t0 = clock::now();
      try {
        previous = record_frame(frame, config.record, previous);
      } catch (const NoPoseAvailable&) {
        continue;
      }
      record_durations.push_back(std::chrono::duration<double>(clock::now() - t0).count());
      if (rep == 0) states.push_back({frame.timestamp, *previous});
    }
  }
  if (states.empty()) throw EmptyUsableSequence("no frame of the benchmark input produced a hand state");

  print_timing_header(out);
  print_timing(out, "record", timing_stats(record_durations));
  for (const auto& id : hands) {
    const EmbodimentConfig& emb = pick_hand(config, id);
    std::vector<double> durations;
    for (int rep = 0; rep < a.repetitions; ++rep) {
      std::optional<RobotCommand> previous;
      for (const auto& s : states) {
        const auto t0 = clock::now();
        previous = embody_frame(s.state, config.shape, emb, previous, s.timestamp);
        durations.push_back(std::chrono::duration<double>(clock::now() - t0).count());
      }
    }
    print_timing(out, "embodiment[" + id + "]", timing_stats(durations));
  }
  return kSuccess;
}

struct ServeArgs {
  std::string config, address = "127.0.0.1", static_dir;
  std::uint16_t port = 8080;
};

int cmd_serve(const ServeArgs& a, std::ostream& out) {
  EmbodimentService service(load_pipeline_config(a.config));
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  Server server(service, a.static_dir);
  const std::uint16_t port = server.start(a.address, a.port);
  out << "listening on http://" << a.address << ':' << port << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  server.stop();
  out << "stopped" << std::endl;
  return kSuccess;
}

struct SynthArgs {
  std::string config, output, states;
  std::size_t frames = 200;
  double rate = 100.0;
  std::optional<std::uint64_t> seed;
  bool random = false;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const PipelineConfig config = load_pipeline_config(a.config);
  if (!(a.rate > 0.0)) throw UsageError("--rate must be positive");
  const std::uint64_t seed = a.seed.value_or(config.seed);
  const auto states = a.random ? random_hand_states(config.record, a.frames, a.rate, seed)
                               : synthetic_motion(config.record, a.frames, a.rate, seed);
  std::ostringstream tsv;
  write_mocap_tsv(markers_from_states(states, config.record, a.rate), tsv);
  write_output(a.output, tsv.str());
  if (!a.states.empty()) {
    HandStateTrajectory truth;
    truth.provenance = {"synthetic seed " + std::to_string(seed), config.digests};
    truth.frames = states;
    std::ostringstream text;
    write_trajectory(truth, text);
    write_output(a.states, text.str());
  }
  out << "frames: " << states.size() << '\n';
  return kSuccess;
}

struct CloneArgs {
  std::string shape, record, output, name = "model_clone";
};

int cmd_clone(const CloneArgs& a, std::ostream& out) {
  const RecordConfig record = load_record_config_file(a.record, load_hand_shape_file(a.shape));
  std::ostringstream text;
  write_hand_config(make_hand_model_clone(record, a.name), text);
  write_output(a.output, text.str());
  out << "wrote " << a.output << '\n';
  return kSuccess;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hand-motion record and embodiment mapping", "handemb"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "handemb 0.1.0");

  RecordArgs rec;
  auto* record = app.add_subcommand("record", "Fit hand states to a motion-capture file");
  record->add_option("-c,--config", rec.config, "Pipeline config")->required();
  record->add_option("-i,--input", rec.input, "Marker TSV file")->required();
  record->add_option("-o,--output", rec.output, "Hand-state trajectory to write")->required();
  record->add_flag("--lenient", rec.lenient, "Skip malformed rows instead of failing");

  EmbodyArgs emb;
  auto* embody = app.add_subcommand("embody", "Map a hand-state trajectory onto a robot hand");
  embody->add_option("-c,--config", emb.config, "Pipeline config")->required();
  embody->add_option("--hand", emb.hand, "Robot hand id (default from the config)");
  embody->add_option("-i,--input", emb.input, "Hand-state trajectory")->required();
  embody->add_option("-o,--output", emb.output, "Robot-command trajectory to write")->required();

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval-distance", "Contact-surface distance between robot and hand model");
  eval->add_option("-c,--config", ev.config, "Pipeline config")->required();
  eval->add_option("--hand", ev.hand, "Robot hand id (default from the trajectory)");
  eval->add_option("-i,--input", ev.input, "Robot-command trajectory")->required();
  eval->add_option("--states", ev.states, "Hand-state trajectory the commands came from")->required();
  eval->add_option("--frames", ev.frames, "Comma-separated frame indices or 'all'");
  eval->add_option("-n,--samples", ev.samples, "Points sampled per robot surface")->check(CLI::PositiveNumber);
  eval->add_option("--seed", ev.seed, "Sampling seed (default from the config)");
  eval->add_option("--segments", ev.segments, "Capsule tessellation");
  eval->add_flag("--grid", ev.grid, "Use the grid-accelerated distance query");

  BenchArgs be;
  auto* bench = app.add_subcommand("bench", "Mapping throughput in Hz");
  bench->add_option("-c,--config", be.config, "Pipeline config")->required();
  bench->add_option("-i,--input", be.input, "Marker TSV (default: synthetic motion)");
  bench->add_option("--hand", be.hands, "Robot hand id, repeatable");
  bench->add_option("--frames", be.frames, "Synthetic frame count");
  bench->add_option("--repetitions", be.repetitions, "Passes over the input");
  bench->add_option("--seed", be.seed, "Synthetic motion seed");

  ServeArgs sv;
  auto* serve = app.add_subcommand("serve", "HTTP and WebSocket service for the explorer");
  serve->add_option("-c,--config", sv.config, "Pipeline config")->required();
  serve->add_option("--address", sv.address, "Bind address");
  serve->add_option("-p,--port", sv.port, "Port (0 picks a free one)");
  serve->add_option("--static", sv.static_dir, "Directory with the explorer bundle");

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Write a synthetic marker file from known hand states");
  synth->add_option("-c,--config", sy.config, "Pipeline config")->required();
  synth->add_option("-o,--output", sy.output, "Marker TSV to write")->required();
  synth->add_option("--states", sy.states, "Also write the generating hand states");
  synth->add_option("--frames", sy.frames, "Frame count");
  synth->add_option("--rate", sy.rate, "Frame rate in Hz");
  synth->add_option("--seed", sy.seed, "Random seed (default from the config)");
  synth->add_flag("--random", sy.random, "Independent random states instead of smooth motion");

  CloneArgs cl;
  auto* clone = app.add_subcommand("clone-hand", "Write a robot-hand config equal to the hand model");
  clone->add_option("--shape", cl.shape, "Hand-shape file")->required();
  clone->add_option("--record", cl.record, "Record config with the joint bounds")->required();
  clone->add_option("-o,--output", cl.output, "Hand config to write")->required();
  clone->add_option("--name", cl.name, "Hand name");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (*record) return cmd_record(rec, out);
    if (*embody) return cmd_embody(emb, out);
    if (*eval) return cmd_eval(ev, out);
    if (*bench) return cmd_bench(be, out);
    if (*serve) return cmd_serve(sv, out);
    if (*synth) return cmd_synth(sy, out);
    if (*clone) return cmd_clone(cl, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const SchemaError& e) {
    err << "error: " << error_name(e) << ": " << e.what() << '\n';
    return kUsageError;
  } catch (const DanglingReference& e) {
    err << "error: " << error_name(e) << ": " << e.what() << '\n';
    return kUsageError;
  } catch (const CouplingCycle& e) {
    err << "error: " << error_name(e) << ": " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << error_name(e) << ": " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}

}  // namespace handemb::app
