#include <random>

#include <benchmark/benchmark.h>

#include "handemb/config_io.hpp"
#include "handemb/embodiment.hpp"
#include "handemb/metrics.hpp"
#include "handemb/record_mapping.hpp"
#include "handemb/synthetic.hpp"

using namespace handemb;

namespace {

const PipelineConfig& config() {
  static const PipelineConfig c = load_pipeline_config(std::string(HANDEMB_CONFIG_DIR) + "/pipeline.json");
  return c;
}

const std::vector<TimedHandState>& motion() {
  static const auto m = synthetic_motion(config().record, 512, 100.0, 1);
  return m;
}

void BM_FingerForwardKinematics(benchmark::State& state) {
  const HandShape& shape = config().shape;
  FingerAngles q;
  q << 0.4, 0.1, -0.05, 0.7, 0.0, 0.1, 0.3, -0.1, 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(finger_forward_kinematics(shape, FingerId::index, q));
}
BENCHMARK(BM_FingerForwardKinematics);

void BM_FitFingerWarm(benchmark::State& state) {
  const RecordConfig& rc = config().record;
  const auto& frames = motion();
  std::size_t i = 1;
  for (auto _ : state) {
    const MarkerPair targets = finger_forward_kinematics(rc.shape, FingerId::index, frames[i].state.q(FingerId::index));
    benchmark::DoNotOptimize(fit_finger(FingerId::index, targets, rc, frames[i - 1].state.q(FingerId::index)));
    i = i + 1 < frames.size() ? i + 1 : 1;
  }
}
BENCHMARK(BM_FitFingerWarm);

void BM_RecordFrame(benchmark::State& state) {
  const RecordConfig& rc = config().record;
  const MarkerSequence seq = markers_from_states(motion(), rc, 100.0);
  std::optional<HandState> previous;
  std::size_t i = 0;
  for (auto _ : state) {
    previous = record_frame(seq.frames[i], rc, previous);
    i = (i + 1) % seq.frames.size();
  }
}
BENCHMARK(BM_RecordFrame);

void embody(benchmark::State& state, const char* hand) {
  const EmbodimentConfig& emb = config().embodiment(hand);
  const auto& frames = motion();
  std::optional<RobotCommand> previous;
  std::size_t i = 0;
  for (auto _ : state) {
    previous = embody_frame(frames[i].state, config().shape, emb, previous);
    i = (i + 1) % frames.size();
  }
}
BENCHMARK_CAPTURE(embody, mia, "mia");
BENCHMARK_CAPTURE(embody, shadow, "shadow");

void BM_PointTriangleDistance(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  std::vector<Vec3> points(1024);
  for (auto& p : points) p = Vec3(u(rng), u(rng), u(rng));
  const Vec3 a(0, 0, 0), b(0.03, 0, 0), c(0, 0.02, 0.01);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(point_triangle_distance(points[i], a, b, c));
    i = (i + 1) & 1023;
  }
}
BENCHMARK(BM_PointTriangleDistance);

void BM_PoissonSample(benchmark::State& state) {
  const TriangleMesh mesh = capsule_mesh(0.04, 0.01, 16, CapsulePart::palmar);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(poisson_sample(mesh, static_cast<std::size_t>(state.range(0)), seed++));
}
BENCHMARK(BM_PoissonSample)->Arg(100)->Arg(400);

void BM_SurfaceDistance(benchmark::State& state) {
  const TriangleMesh a = capsule_mesh(0.04, 0.01, 16, CapsulePart::palmar);
  const TriangleMesh b = a.transformed(Transform::from_translation(Vec3(0.002, 0.001, 0.003)));
  const auto method = state.range(0) ? DistanceMethod::grid : DistanceMethod::brute_force;
  for (auto _ : state)
    benchmark::DoNotOptimize(surface_distance({a, FingerId::index}, {b, FingerId::index}, 100, 1, method));
}
BENCHMARK(BM_SurfaceDistance)->Arg(0)->Arg(1);

}  // namespace
BENCHMARK_MAIN();
