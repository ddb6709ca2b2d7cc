#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "handemb/se3.hpp"

namespace handemb {

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;

  /// Throws SchemaError for out-of-range indices or triangles with area <= 1e-12 m^2.
  void validate() const;
  double area() const;
  double triangle_area(std::size_t t) const;
  /// Appends `other` with its vertices mapped through `pose`.
  void append(const TriangleMesh& other, const Transform& pose = Transform{});
  TriangleMesh transformed(const Transform& pose) const;
};

enum class CapsulePart { full, palmar };

/// Capsule around the segment from the origin to (0, length, 0) in its local
/// frame. `segments` vertices per ring, segments / 4 latitude bands per
/// hemisphere. The palmar part keeps triangles on the +z side of the axis.
/// Requires segments >= 8 and a multiple of 4; throws std::invalid_argument otherwise.
TriangleMesh capsule_mesh(double length, double radius, int segments,
                          CapsulePart part = CapsulePart::full);

/// Local frame of a capsule between two points: y along end - start, z toward
/// `palmar` orthogonalized against the axis.
Transform capsule_frame(const Vec3& start, const Vec3& end, const Vec3& palmar);

}  // namespace handemb
