// Acceptance run: one PASS/FAIL line per headline property, exit status 1 if
// any of them fails. Every check uses the shipped configs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "handemb/app/cli.hpp"
#include "handemb/boxopt.hpp"
#include "handemb/config_io.hpp"
#include "handemb/embodiment.hpp"
#include "handemb/metrics.hpp"
#include "handemb/record_mapping.hpp"
#include "handemb/synthetic.hpp"
#include "handemb/trajectory_io.hpp"
#include "oracles.hpp"

using namespace handemb;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back((ok ? "ok   " : "FAIL ") + what);
  }
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

std::string pipeline_path() { return testenv::config_path("pipeline.json"); }

const PipelineConfig& config() {
  static const PipelineConfig c = load_pipeline_config(pipeline_path());
  return c;
}

int cli(std::vector<std::string> args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = app::run_cli(args, o, e);
  if (out) *out = o.str();
  if (code != 0) std::fprintf(stderr, "%s", e.str().c_str());
  return code;
}

std::vector<std::string> words(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// ---------------------------------------------------------------------------

Outcome round_trip() {
  Outcome o;
  const RecordConfig& rc = config().record;
  bool weights_ok = true;
  for (const auto& f : rc.fingers)
    weights_ok &= (f.w_plus.array() == 1e-3).all() && (f.w_minus.array() == 1e-3).all();
  o.require(weights_ok, "record config uses weights 1e-3");

  const auto truth = random_hand_states(rc, 200, 100.0, 2024);
  const MarkerSequence seq = markers_from_states(truth, rc, 100.0);
  const auto t0 = Clock::now();
  const RecordedSequence rec = record_sequence(seq, rc);
  const double seconds = elapsed(t0);

  double sum = 0.0, pos = 0.0, rot = 0.0;
  std::size_t points = 0;
  for (std::size_t i = 0; i < rec.frames.size(); ++i) {
    const auto a = hand_markers(rc.shape, rec.frames[i].state);
    const auto b = hand_markers(rc.shape, truth[i].state);
    for (std::size_t k = 0; k < 5; ++k)
      for (int j = 0; j < 2; ++j, ++points) sum += (a[k][j] - b[k][j]).squaredNorm();
    pos = std::max(pos, (rec.frames[i].state.pose.translation() - truth[i].state.pose.translation()).norm());
    rot = std::max(rot, rotation_distance(rec.frames[i].state.pose.rotation(), truth[i].state.pose.rotation()));
  }
  const double rms = std::sqrt(sum / static_cast<double>(points));
  o.require(rec.frames.size() == 200, fmt("%.0f of 200 frames recovered", static_cast<double>(rec.frames.size())));
  o.require(rms < 1e-4, fmt("marker reprojection rms %.3e m < 1e-4 m", rms));
  o.require(pos < 1e-9, fmt("pose translation error %.2e m < 1e-9 m", pos));
  o.require(rot < 1e-9, fmt("pose rotation error %.2e rad < 1e-9 rad", rot));
  o.require(seconds < 30.0, fmt("runtime %.2f s < 30 s", seconds));
  return o;
}

Outcome self_embodiment() {
  Outcome o;
  const RecordConfig& rc = config().record;
  const EmbodimentConfig& clone = config().embodiment("model_clone");
  const std::string dir = testenv::scratch_dir("acceptance_self");

  // recorded states: synthetic markers through the record mapping
  const std::string markers = dir + "/motion.tsv", states = dir + "/states.json", commands = dir + "/clone.json";
  o.require(cli({"synth", "-c", pipeline_path(), "-o", markers, "--frames", "200", "--random", "--seed", "11"}) == 0,
            "synth fixture written");
  o.require(cli({"record", "-c", pipeline_path(), "-i", markers, "-o", states}) == 0, "record fixture");
  o.require(cli({"embody", "-c", pipeline_path(), "--hand", "model_clone", "-i", states, "-o", commands}) == 0,
            "embody on the cloned hand");

  std::istringstream in(testenv::read_file(states));
  const HandStateTrajectory recorded = read_hand_state_trajectory(in);
  std::istringstream cin(testenv::read_file(commands));
  const RobotCommandTrajectory embodied = read_robot_command_trajectory(cin);

  double worst = 0.0;
  for (std::size_t i = 0; i < recorded.frames.size(); ++i) {
    const RobotCommand& cmd = embodied.frames[i];
    const auto targets = embodiment_targets(recorded.frames[i].state, rc.shape, clone);
    for (FingerId f : kFingers) {
      std::vector<double> r;
      for (const auto& ch : clone.hand.finger(f).channels) r.push_back(cmd.actuated_values.at(ch));
      const MarkerPair p = clone.hand.finger_marker_points(f, r);
      for (int j = 0; j < 2; ++j) worst = std::max(worst, (p[j] - targets[finger_slot(f)][j]).norm());
    }
  }
  o.require(embodied.frames.size() == recorded.frames.size() && !recorded.frames.empty(),
            fmt("%.0f frames embodied", static_cast<double>(embodied.frames.size())));
  o.require(worst < 1e-4, fmt("worst marker distance %.3e m < 1e-4 m", worst));

  std::string report;
  o.require(cli({"eval-distance", "-c", pipeline_path(), "-i", commands, "--states", states, "--frames",
                 "0,25,50,75,100,125,150,175,199"},
                &report) == 0,
            "eval-distance ran");
  const auto rows = lines(report);
  const auto row = rows.size() > 2 ? words(rows[2]) : std::vector<std::string>{};
  bool below = row.size() == 6;
  double max_mm = 0.0;
  for (std::size_t i = 1; i < row.size(); ++i) {
    const double v = std::stod(row[i]);
    max_mm = std::max(max_mm, v);
    below &= v < 0.5;
  }
  o.require(below, fmt("eval-distance per finger at most %.4f mm < 0.5 mm", max_mm));
  return o;
}

Outcome mia_degradation() {
  Outcome o;
  const EmbodimentConfig& mia = config().embodiment("mia");
  const RecordConfig& rc = config().record;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> base(0.0, 0.7), index_flex(0.0, 1.2);
  std::map<FingerId, double> sums;
  bool limits = true;
  int above = 0;
  const int n = 200;
  for (int trial = 0; trial < n; ++trial) {
    HandState s = random_hand_state(rc, rng);
    for (FingerId f : kFingers) s.q(f).setZero();
    const double b = base(rng);
    // middle, ring and little flexions 0.5 rad apart, every joint of a finger alike
    const std::array<std::pair<FingerId, double>, 4> flex{
        {{FingerId::index, index_flex(rng)}, {FingerId::middle, b}, {FingerId::ring, b + 0.5},
         {FingerId::little, b + 1.0}}};
    for (const auto& [f, v] : flex)
      for (int seg = 0; seg < 3; ++seg) s.q(f)[3 * seg] = v;
    const RobotCommand cmd = embody_frame(s, rc.shape, mia);
    for (const auto& [f, r] : cmd.residuals) sums[f] += r;
    const double worst_coupled = std::min({cmd.residuals.at(FingerId::middle), cmd.residuals.at(FingerId::ring),
                                           cmd.residuals.at(FingerId::little)});
    above += worst_coupled > cmd.residuals.at(FingerId::index);

    for (const auto& [name, v] : cmd.actuated_values) {
      const ChannelInfo& ch = mia.hand.channel(name);
      limits &= v >= ch.lower && v <= ch.upper;
    }
    bool clamped = false;
    std::map<std::string, double> values = cmd.actuated_values;
    values.insert(cmd.fixed_values.begin(), cmd.fixed_values.end());
    const JointValues q = mia.hand.apply_coupling(values, &clamped);
    limits &= !clamped;
    for (const Joint& j : mia.hand.tree().joints())
      if (j.type == JointType::revolute) limits &= q.at(j.name) >= j.lower && q.at(j.name) <= j.upper;
  }
  const double index_mean = sums[FingerId::index] / n;
  for (FingerId f : {FingerId::middle, FingerId::ring, FingerId::little}) {
    const double mean = sums[f] / n;
    o.require(mean > index_mean, std::string(finger_name(f)) +
                                     fmt(" mean residual %.2f mm > index %.2f mm", 1e3 * mean, 1e3 * index_mean));
  }
  o.notes.push_back(fmt("info coupled fingers all above index in %.0f of %.0f states", above, n));
  o.require(limits, "all channel and joint limits satisfied");
  return o;
}

Outcome throughput() {
  Outcome o;
  std::string report;
  const auto t0 = Clock::now();
  o.require(cli({"bench", "-c", pipeline_path(), "--frames", "10000", "--hand", "mia", "--hand", "shadow"},
                &report) == 0,
            "bench ran");
  const auto rows = lines(report);
  for (const auto& r : rows) o.notes.push_back("     | " + r);
  o.require(rows.size() == 4 && words(rows[0]) == std::vector<std::string>{"mapping", "frames", "mean_hz", "min_hz"},
            "report has mean and min Hz columns");
  const std::map<std::string, double> targets{{"record", 30.0}, {"embodiment[mia]", 100.0},
                                              {"embodiment[shadow]", 50.0}};
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto w = words(rows[i]);
    if (w.size() != 4 || !targets.count(w[0])) continue;
    const double mean = std::stod(w[2]), min = std::stod(w[3]);
    o.require(std::stoul(w[1]) == 10000, w[0] + " over 10000 frames");
    o.require(mean >= targets.at(w[0]), w[0] + fmt(" mean %.1f Hz >= %.0f Hz", mean, targets.at(w[0])));
    o.require(min <= mean, w[0] + " min <= mean");
  }
  o.notes.push_back(fmt("info wall time %.1f s", elapsed(t0)));
  return o;
}

Outcome optimizer() {
  Outcome o;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0), start(-3.0, 3.0);
  int infeasible = 0, mismatched = 0, nonmonotone = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + trial % 4;
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = g(rng);
    const Eigen::MatrixXd a = m * m.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
    boxopt::Vector b(n), lo(n), hi(n), x0(n);
    for (int i = 0; i < n; ++i) {
      b[i] = 2.0 * g(rng);
      const double p = u(rng), q = u(rng);
      lo[i] = std::min(p, q) - 0.05;
      hi[i] = std::max(p, q) + 0.05;
      x0[i] = start(rng);
    }
    const auto f = [&](const boxopt::Vector& x) { return 0.5 * x.dot(a * x) - b.dot(x); };
    boxopt::SolveOptions opts;
    opts.max_iterations = 500;
    opts.objective_tolerance = 1e-15;
    opts.step_tolerance = 1e-11;
    const boxopt::Bounds box(lo, hi);
    const auto r = boxopt::minimize(f, x0, box, opts);
    if (!((r.x.array() >= lo.array()).all() && (r.x.array() <= hi.array()).all())) ++infeasible;
    const double diff = (r.x - oracle::box_qp(a, b, lo, hi)).cwiseAbs().maxCoeff();
    worst = std::max(worst, diff);
    if (diff > 1e-6) ++mismatched;
    for (std::size_t k = 1; k < r.trace.size(); ++k) nonmonotone += r.trace[k] > r.trace[k - 1];
  }
  o.require(infeasible == 0, fmt("%.0f of 1000 solutions outside the box", infeasible));
  o.require(mismatched == 0, fmt("%.0f of 1000 differ from the active-set oracle by > 1e-6 (worst %.1e)",
                                 mismatched, worst));
  o.require(nonmonotone == 0, fmt("%.0f increasing steps in objective traces", nonmonotone));

  const auto rosen = [](const boxopt::Vector& x) {
    return (1.0 - x[0]) * (1.0 - x[0]) + 100.0 * std::pow(x[1] - x[0] * x[0], 2);
  };
  boxopt::SolveOptions opts;
  opts.max_iterations = 1000;
  boxopt::Vector x0(2), lo(2), hi(2);
  x0 << -1.2, 1.0;
  lo << -2.0, -2.0;
  hi << 2.0, 2.0;
  const auto r = boxopt::minimize(rosen, x0, boxopt::Bounds(lo, hi), opts);
  const double err = (r.x - boxopt::Vector::Ones(2)).norm();
  o.require(err < 1e-3, fmt("Rosenbrock distance to (1, 1) %.2e < 1e-3", err));
  return o;
}

Outcome metrics() {
  Outcome o;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> tri(0.0, 0.05), pt(-0.025, 0.075);
  int cases = 0, bad = 0;
  double worst = 0.0;
  const auto t0 = Clock::now();
  while (cases < 10000) {
    const Vec3 a(tri(rng), tri(rng), tri(rng)), b(tri(rng), tri(rng), tri(rng)), c(tri(rng), tri(rng), tri(rng));
    if ((b - a).cross(c - a).norm() < 1e-6) continue;
    const Vec3 p(pt(rng), pt(rng), pt(rng));
    const double d = point_triangle_distance(p, a, b, c);
    const double dense = oracle::dense_triangle_distance(p, a, b, c);
    worst = std::max(worst, std::abs(d - dense));
    bad += std::abs(d - dense) >= 1e-4;
    ++cases;
  }
  o.require(bad == 0, fmt("point-triangle vs dense oracle on 10000 cases, worst %.2e m < 1e-4 m (%.0f s)", worst,
                          elapsed(t0)));

  const TriangleMesh capsule = capsule_mesh(0.04, 0.01, 16, CapsulePart::palmar);
  const double self = surface_distance({capsule, FingerId::index}, {capsule, FingerId::index}, 100, 1);
  // exact up to the rounding of barycentric sample points
  o.require(self < 1e-12, fmt("self distance %.1e, zero within rounding (1e-12)", self));

  TriangleMesh lower, upper;
  lower.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  lower.triangles = {{0, 1, 2}, {0, 2, 3}};
  upper = lower.transformed(Transform::from_translation(Vec3(0, 0, 0.01)));
  const double planes = surface_distance({upper, FingerId::index}, {lower, FingerId::index}, 100, 2);
  o.require(std::abs(planes - 0.01) < 1e-6, fmt("parallel planes %.9f m, 0.01 within 1e-6", planes));

  bool deterministic = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s1 = poisson_sample(capsule, 100, seed);
    const auto s2 = poisson_sample(capsule, 100, seed);
    for (std::size_t i = 0; i < s1.size(); ++i) deterministic &= s1[i].point == s2[i].point;
  }
  o.require(deterministic, "Poisson samples identical per seed");
  return o;
}

Outcome coupling() {
  Outcome o;
  const RobotHandModel& shadow = config().embodiment("shadow").hand;
  std::map<std::string, double> cmd;
  for (const auto& c : shadow.command_channels()) cmd[c] = 0.0;
  const double lim1 = shadow.tree().joint("FFJ2").upper;
  o.require(lim1 == 1.571, fmt("first joint limit %.17g", lim1));

  cmd["FFJ0"] = 1.0;
  JointValues q = shadow.apply_coupling(cmd);
  o.require(q.at("FFJ2") == 1.0 && q.at("FFJ1") == 0.0, fmt("(1.0, 1.571) -> (%.17g, %.17g)", q.at("FFJ2"), q.at("FFJ1")));
  cmd["FFJ0"] = 2.0;
  q = shadow.apply_coupling(cmd);
  // the exact result of c - lim1 in double precision, 1 ulp from the decimal 0.429
  o.require(q.at("FFJ2") == 1.571 && q.at("FFJ1") == 2.0 - 1.571,
            fmt("(2.0, 1.571) -> (%.17g, %.17g)", q.at("FFJ2"), q.at("FFJ1")));

  const RobotHandModel& mia = config().embodiment("mia").hand;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  bool mirrors = true;
  for (int i = 0; i < 1000; ++i) {
    const ChannelInfo& ch = mia.channel("j_mrl_fle");
    const double v = ch.lower + u(rng) * (ch.upper - ch.lower);
    const JointValues m = mia.apply_coupling({{"j_thumb_fle", 0.0}, {"j_index_fle", 0.0}, {"j_mrl_fle", v}});
    mirrors &= m.at("j_ring_fle") == v && m.at("j_little_fle") == v && m.at("j_mrl_fle") == v;
  }
  o.require(mirrors, "Mia mirror joints equal the motor exactly on 1000 values");
  return o;
}

Outcome determinism() {
  Outcome o;
  const std::string dir = testenv::scratch_dir("acceptance_determinism");
  const std::string markers = dir + "/motion.tsv", states = dir + "/states.json";
  o.require(cli({"synth", "-c", pipeline_path(), "-o", markers, "--frames", "150"}) == 0, "fixture written");
  for (const std::string hand : {"mia", "shadow"}) {
    std::vector<std::string> s, c;
    for (int run = 0; run < 2; ++run) {
      cli({"record", "-c", pipeline_path(), "-i", markers, "-o", states});
      cli({"embody", "-c", pipeline_path(), "--hand", hand, "-i", states, "-o", dir + "/commands.json"});
      s.push_back(testenv::read_file(states));
      c.push_back(testenv::read_file(dir + "/commands.json"));
    }
    o.require(!s[0].empty() && s[0] == s[1], "record output bit-identical across runs");
    o.require(!c[0].empty() && c[0] == c[1], hand + " embody output bit-identical across runs");
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"round-trip record mapping", round_trip},
      {"self-embodiment oracle", self_embodiment},
      {"Mia coupling degradation", mia_degradation},
      {"throughput", throughput},
      {"optimizer suite", optimizer},
      {"metric suite", metrics},
      {"coupling suite", coupling},
      {"pipeline determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::printf("%s %s\n", o.pass ? "PASS" : "FAIL", name.c_str());
    for (const auto& n : o.notes) std::printf("     %s\n", n.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
