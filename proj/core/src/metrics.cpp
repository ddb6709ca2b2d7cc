#include "handemb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

#include "handemb/errors.hpp"
#include "random.hpp"

namespace handemb {

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);

  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const double longest =
      std::max({(b - a).squaredNorm(), (c - b).squaredNorm(), (a - c).squaredNorm()});
  const double twice_area = (b - a).cross(c - a).norm();
  if (!(twice_area > 1e-12 * longest) || !(longest > 0.0))
    throw DegenerateTriangle("triangle has no area");
  return (p - closest_point_on_triangle(p, a, b, c)).norm();
}

double point_triangle_distance(const Vec3& p, const std::array<Vec3, 3>& tri) {
  return point_triangle_distance(p, tri[0], tri[1], tri[2]);
}

double poisson_disk_radius(double area, std::size_t n) {
  return std::sqrt(area / (2.0 * std::sqrt(3.0) * static_cast<double>(n)));
}

namespace {

double mesh_area_checked(const TriangleMesh& mesh) {
  if (mesh.triangles.empty()) throw EmptyMesh("mesh has no triangles");
  const double area = mesh.area();
  if (!(area > 0.0)) throw EmptyMesh("mesh has no area");
  return area;
}

}  // namespace

std::vector<SurfaceSample> poisson_sample(const TriangleMesh& mesh, std::size_t n,
                                          std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("poisson_sample needs n >= 1");
  const double area = mesh_area_checked(mesh);

  std::vector<double> cumulative;
  cumulative.reserve(mesh.triangles.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    acc += mesh.triangle_area(t);
    cumulative.push_back(acc);
  }

  std::mt19937_64 rng(seed);
  const std::size_t m = 4 * n;
  std::vector<SurfaceSample> candidates(m);
  for (auto& s : candidates) {
    const double pick = detail::uniform01(rng) * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    std::size_t t = std::min<std::size_t>(it - cumulative.begin(), mesh.triangles.size() - 1);
    while (mesh.triangle_area(t) <= 0.0 && t > 0) --t;
    const double r1 = std::sqrt(detail::uniform01(rng));
    const double r2 = detail::uniform01(rng);
    const Vec3 bary(1.0 - r1, r1 * (1.0 - r2), r1 * r2);
    const auto& tri = mesh.triangles[t];
    s.triangle = static_cast<std::uint32_t>(t);
    s.barycentric = bary;
    s.point = bary[0] * mesh.vertices[tri[0]] + bary[1] * mesh.vertices[tri[1]] +
              bary[2] * mesh.vertices[tri[2]];
  }
  if (n >= m) return candidates;

  // Weighted sample elimination.
  constexpr double kAlpha = 8.0;
  constexpr double kBeta = 0.65;
  constexpr double kGamma = 1.5;
  const double r_max = poisson_disk_radius(area, n);
  const double r_min =
      r_max * (1.0 - std::pow(static_cast<double>(n) / static_cast<double>(m), kGamma)) * kBeta;
  const double d_max = 2.0 * r_max;
  auto pair_weight = [&](double d) {
    const double dh = std::max(d, 2.0 * r_min);
    return std::pow(1.0 - dh / d_max, kAlpha);
  };

  std::vector<std::vector<std::pair<std::size_t, double>>> neighbors(m);
  std::vector<double> weight(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double d = (candidates[i].point - candidates[j].point).norm();
      if (d >= d_max) continue;
      const double w = pair_weight(d);
      neighbors[i].emplace_back(j, w);
      neighbors[j].emplace_back(i, w);
      weight[i] += w;
      weight[j] += w;
    }
  }

  std::set<std::pair<double, std::size_t>> heap;  // largest weight last
  for (std::size_t i = 0; i < m; ++i) heap.emplace(weight[i], i);
  std::vector<char> removed(m, 0);
  std::size_t remaining = m;
  while (remaining > n) {
    auto top = std::prev(heap.end());
    const std::size_t i = top->second;
    heap.erase(top);
    removed[i] = 1;
    --remaining;
    for (const auto& [j, w] : neighbors[i]) {
      if (removed[j]) continue;
      heap.erase({weight[j], j});
      weight[j] -= w;
      heap.emplace(weight[j], j);
    }
  }
  std::vector<SurfaceSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < m; ++i) {
    if (!removed[i]) out.push_back(candidates[i]);
  }
  return out;
}

double min_distance_to_mesh(const Vec3& p, const TriangleMesh& mesh) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : mesh.triangles) {
    best = std::min(best, point_triangle_distance(p, mesh.vertices[t[0]], mesh.vertices[t[1]],
                                                  mesh.vertices[t[2]]));
  }
  return best;
}

TriangleGrid::TriangleGrid(const TriangleMesh& mesh, double cell_size) : mesh_(&mesh) {
  mesh_area_checked(mesh);
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& t : mesh.triangles) {
    for (auto v : t) {
      lo = lo.cwiseMin(mesh.vertices[v]);
      hi = hi.cwiseMax(mesh.vertices[v]);
    }
  }
  const Vec3 extent = (hi - lo).cwiseMax(1e-9);
  if (!(cell_size > 0.0)) {
    const double volume_cells = std::max<double>(1.0, static_cast<double>(mesh.triangles.size()));
    cell_size = std::cbrt(extent.prod() / volume_cells);
    cell_size = std::max(cell_size, extent.maxCoeff() / 64.0);
  }
  cell_ = cell_size;
  const double pad = 1e-9 * std::max(1.0, extent.maxCoeff());
  origin_ = lo - Vec3::Constant(pad);
  for (int a = 0; a < 3; ++a)
    dims_[a] = std::max<long>(1, static_cast<long>(std::ceil((extent[a] + 2 * pad) / cell_)) + 1);
  cells_.assign(static_cast<std::size_t>(dims_[0] * dims_[1] * dims_[2]), {});
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    Vec3 tlo = mesh.vertices[mesh.triangles[t][0]];
    Vec3 thi = tlo;
    for (auto v : mesh.triangles[t]) {
      tlo = tlo.cwiseMin(mesh.vertices[v]);
      thi = thi.cwiseMax(mesh.vertices[v]);
    }
    std::array<long, 3> c0{}, c1{};
    for (int a = 0; a < 3; ++a) {
      c0[a] = std::clamp(static_cast<long>(std::floor((tlo[a] - pad - origin_[a]) / cell_)), 0L,
                         dims_[a] - 1);
      c1[a] = std::clamp(static_cast<long>(std::floor((thi[a] + pad - origin_[a]) / cell_)), 0L,
                         dims_[a] - 1);
    }
    for (long x = c0[0]; x <= c1[0]; ++x)
      for (long y = c0[1]; y <= c1[1]; ++y)
        for (long z = c0[2]; z <= c1[2]; ++z)
          cells_[static_cast<std::size_t>((x * dims_[1] + y) * dims_[2] + z)].push_back(
              static_cast<std::uint32_t>(t));
  }
  stamp_.assign(mesh.triangles.size(), 0);
}

double TriangleGrid::min_distance(const Vec3& p) const {
  const TriangleMesh& mesh = *mesh_;
  if (++query_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    query_ = 1;
  }
  std::array<long, 3> pc{};
  long start = 0;
  long stop = 0;
  for (int a = 0; a < 3; ++a) {
    pc[a] = static_cast<long>(std::floor((p[a] - origin_[a]) / cell_));
    const long outside = pc[a] < 0 ? -pc[a] : (pc[a] >= dims_[a] ? pc[a] - dims_[a] + 1 : 0);
    start = std::max(start, outside);
    stop = std::max(stop, std::max(std::abs(pc[a]), std::abs(pc[a] - dims_[a] + 1)));
  }
  double best = std::numeric_limits<double>::infinity();
  const double slack = 1e-9 * cell_;
  for (long k = start; k <= stop; ++k) {
    // Unvisited cells lie at least (k - 1) cells away from p.
    if (k > start && best <= static_cast<double>(k - 1) * cell_ - slack) break;
    std::array<long, 3> lo{}, hi{};
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::max(0L, pc[a] - k);
      hi[a] = std::min(dims_[a] - 1, pc[a] + k);
    }
    for (long x = lo[0]; x <= hi[0]; ++x) {
      for (long y = lo[1]; y <= hi[1]; ++y) {
        for (long z = lo[2]; z <= hi[2]; ++z) {
          const long ring = std::max({std::abs(x - pc[0]), std::abs(y - pc[1]), std::abs(z - pc[2])});
          if (ring != k) continue;
          for (std::uint32_t t : cells_[static_cast<std::size_t>((x * dims_[1] + y) * dims_[2] + z)]) {
            if (stamp_[t] == query_) continue;
            stamp_[t] = query_;
            const auto& tri = mesh.triangles[t];
            best = std::min(best, point_triangle_distance(p, mesh.vertices[tri[0]],
                                                          mesh.vertices[tri[1]],
                                                          mesh.vertices[tri[2]]));
          }
        }
      }
    }
  }
  return best;
}

double surface_distance(const ContactSurface& robot, const ContactSurface& model, std::size_t n,
                        std::uint64_t seed, DistanceMethod method) {
  mesh_area_checked(model.mesh);
  const auto samples = poisson_sample(robot.mesh, n, seed);
  double sum = 0.0;
  if (method == DistanceMethod::grid) {
    TriangleGrid grid(model.mesh);
    for (const auto& s : samples) sum += grid.min_distance(s.point);
  } else {
    for (const auto& s : samples) sum += min_distance_to_mesh(s.point, model.mesh);
  }
  return sum / static_cast<double>(samples.size());
}

TimingStats timing_stats(std::span<const double> durations) {
  if (durations.empty()) throw EmptyInput("no durations");
  TimingStats stats;
  stats.frames = durations.size();
  stats.min_hz = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (double d : durations) {
    if (!(d > 0.0) || !std::isfinite(d)) throw NonPositiveDuration("durations must be positive");
    const double hz = 1.0 / d;
    sum += hz;
    stats.min_hz = std::min(stats.min_hz, hz);
  }
  stats.mean_hz = sum / static_cast<double>(durations.size());
  return stats;
}

ContactSurface model_contact_surface(const HandShape& shape, FingerId finger,
                                     const FingerAngles& q, int segments) {
  return {finger_surface_mesh(shape, finger, q, segments, true), finger};
}

ContactSurface robot_contact_surface(const RobotHandModel& hand, FingerId finger,
                                     const std::map<std::string, double>& values, int segments) {
  const auto poses = hand.link_poses(values);
  ContactSurface out;
  out.finger = finger;
  for (const auto& c : hand.spec().contact_surfaces) {
    if (c.finger != finger) continue;
    const TriangleMesh capsule =
        capsule_mesh((c.end - c.start).norm(), c.radius, segments, CapsulePart::palmar);
    out.mesh.append(capsule, poses.at(c.link) * capsule_frame(c.start, c.end, c.palmar));
  }
  if (out.mesh.triangles.empty())
    throw EmptyMesh("hand '" + hand.name() + "' has no contact surface for " +
                    std::string(finger_name(finger)));
  return out;
}

}  // namespace handemb
