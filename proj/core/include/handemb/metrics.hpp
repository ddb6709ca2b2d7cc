#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "handemb/hand_model.hpp"
#include "handemb/mesh.hpp"
#include "handemb/robot_hand.hpp"

namespace handemb {

struct ContactSurface {
  TriangleMesh mesh;
  FingerId finger = FingerId::thumb;
};

struct TimingStats {
  std::size_t frames = 0;
  double mean_hz = 0.0;
  double min_hz = 0.0;
};

/// Closest point of the closed triangle abc to p (Voronoi-region classification).
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Distance from p to triangle abc. Throws DegenerateTriangle for (near) zero area.
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);
double point_triangle_distance(const Vec3& p, const std::array<Vec3, 3>& tri);

struct SurfaceSample {
  Vec3 point = Vec3::Zero();
  std::uint32_t triangle = 0;
  Vec3 barycentric = Vec3::Zero();
};

/// n well-spaced points on the mesh by weighted sample elimination from 4n
/// area-uniform candidates. Deterministic for a given seed.
/// Throws EmptyMesh for a mesh without area and std::invalid_argument for n == 0.
std::vector<SurfaceSample> poisson_sample(const TriangleMesh& mesh, std::size_t n,
                                          std::uint64_t seed);

/// Expected Poisson-disk radius sqrt(A / (2 sqrt(3) n)) of n samples on area A.
double poisson_disk_radius(double area, std::size_t n);

/// Uniform grid over a mesh for nearest-triangle distance queries.
class TriangleGrid {
 public:
  explicit TriangleGrid(const TriangleMesh& mesh, double cell_size = 0.0);
  /// Same value as the minimum of point_triangle_distance over all triangles.
  double min_distance(const Vec3& p) const;

 private:
  const TriangleMesh* mesh_;
  Vec3 origin_;
  double cell_;
  std::array<long, 3> dims_{};
  std::vector<std::vector<std::uint32_t>> cells_;
  mutable std::vector<std::uint32_t> stamp_;
  mutable std::uint32_t query_ = 0;
};

/// Minimum distance from p to any triangle of the mesh, brute force.
double min_distance_to_mesh(const Vec3& p, const TriangleMesh& mesh);

enum class DistanceMethod { brute_force, grid };

/// Mean over n points sampled on `robot` of the distance to the closest
/// triangle of `model` (robot -> model only).
double surface_distance(const ContactSurface& robot, const ContactSurface& model, std::size_t n,
                        std::uint64_t seed, DistanceMethod method = DistanceMethod::brute_force);

/// Throws EmptyInput or NonPositiveDuration.
TimingStats timing_stats(std::span<const double> durations);

/// Palmar capsule surface of a hand-model finger in the hand-model base frame.
ContactSurface model_contact_surface(const HandShape& shape, FingerId finger,
                                     const FingerAngles& q, int segments = 16);

/// Palmar capsules of a robot finger in the robot base frame for channel values.
ContactSurface robot_contact_surface(const RobotHandModel& hand, FingerId finger,
                                     const std::map<std::string, double>& values,
                                     int segments = 16);

}  // namespace handemb
