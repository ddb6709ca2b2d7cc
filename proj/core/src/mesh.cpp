#include "handemb/mesh.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "handemb/errors.hpp"

namespace handemb {

void TriangleMesh::validate() const {
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    for (auto index : triangles[t]) {
      if (index >= vertices.size()) {
        throw SchemaError("triangle " + std::to_string(t) + " references vertex out of range");
      }
    }
    if (!(triangle_area(t) > 1e-12)) {
      throw SchemaError("triangle " + std::to_string(t) + " is degenerate");
    }
  }
}

double TriangleMesh::triangle_area(std::size_t t) const {
  const auto& tri = triangles[t];
  const Vec3& a = vertices[tri[0]];
  return 0.5 * (vertices[tri[1]] - a).cross(vertices[tri[2]] - a).norm();
}

double TriangleMesh::area() const {
  double total = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) total += triangle_area(t);
  return total;
}

void TriangleMesh::append(const TriangleMesh& other, const Transform& pose) {
  const auto offset = static_cast<std::uint32_t>(vertices.size());
  vertices.reserve(vertices.size() + other.vertices.size());
  for (const Vec3& v : other.vertices) vertices.push_back(pose.apply(v));
  for (const auto& tri : other.triangles) {
    triangles.push_back({tri[0] + offset, tri[1] + offset, tri[2] + offset});
  }
}

TriangleMesh TriangleMesh::transformed(const Transform& pose) const {
  TriangleMesh out;
  out.append(*this, pose);
  return out;
}

TriangleMesh capsule_mesh(double length, double radius, int segments, CapsulePart part) {
  if (segments < 8 || segments % 4 != 0) {
    throw std::invalid_argument("capsule_mesh: segments must be >= 8 and a multiple of 4");
  }
  if (!(length >= 0.0) || !(radius > 0.0)) {
    throw std::invalid_argument("capsule_mesh: length must be >= 0 and radius > 0");
  }
  const int bands = segments / 4;
  const double pi = std::numbers::pi;

  TriangleMesh mesh;
  // Rings from the bottom pole to the top pole. Ring k of the bottom hemisphere
  // has polar angle k * (pi/2) / bands measured from -y.
  std::vector<std::pair<double, double>> rings;  // (y, ring radius)
  for (int k = 1; k <= bands; ++k) {
    const double phi = 0.5 * pi * k / bands;
    rings.emplace_back(-radius * std::cos(phi), radius * std::sin(phi));
  }
  for (int k = bands; k >= 1; --k) {
    const double phi = 0.5 * pi * k / bands;
    rings.emplace_back(length + radius * std::cos(phi), radius * std::sin(phi));
  }

  mesh.vertices.emplace_back(0.0, -radius, 0.0);
  for (const auto& [y, rho] : rings) {
    for (int i = 0; i < segments; ++i) {
      const double psi = 2.0 * pi * i / segments;
      mesh.vertices.emplace_back(rho * std::cos(psi), y, rho * std::sin(psi));
    }
  }
  mesh.vertices.emplace_back(0.0, length + radius, 0.0);
  const auto top = static_cast<std::uint32_t>(mesh.vertices.size() - 1);
  const auto ring_vertex = [segments](std::size_t ring, int i) {
    return static_cast<std::uint32_t>(1 + ring * segments + (i % segments));
  };

  // Outward orientation: counter-clockwise seen from outside.
  for (int i = 0; i < segments; ++i) {
    mesh.triangles.push_back({0, ring_vertex(0, i), ring_vertex(0, i + 1)});
  }
  for (std::size_t r = 0; r + 1 < rings.size(); ++r) {
    if (rings[r].first == rings[r + 1].first && rings[r].second == rings[r + 1].second) continue;
    for (int i = 0; i < segments; ++i) {
      const auto a = ring_vertex(r, i), b = ring_vertex(r, i + 1);
      const auto c = ring_vertex(r + 1, i), d = ring_vertex(r + 1, i + 1);
      mesh.triangles.push_back({a, c, d});
      mesh.triangles.push_back({a, d, b});
    }
  }
  const std::size_t last = rings.size() - 1;
  for (int i = 0; i < segments; ++i) {
    mesh.triangles.push_back({top, ring_vertex(last, i + 1), ring_vertex(last, i)});
  }

  if (part == CapsulePart::palmar) {
    std::vector<std::array<std::uint32_t, 3>> kept;
    for (const auto& tri : mesh.triangles) {
      const double z = mesh.vertices[tri[0]].z() + mesh.vertices[tri[1]].z() +
                       mesh.vertices[tri[2]].z();
      if (z > 0.0) kept.push_back(tri);
    }
    mesh.triangles = std::move(kept);
  }
  return mesh;
}

Transform capsule_frame(const Vec3& start, const Vec3& end, const Vec3& palmar) {
  const Vec3 axis = end - start;
  if (axis.norm() == 0.0) {
    // Sphere: any frame whose z points palmar.
    const Vec3 z = palmar.normalized();
    const Vec3 helper = std::abs(z.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    const Vec3 y = (helper - helper.dot(z) * z).normalized();
    Mat3 r;
    r.col(0) = y.cross(z);
    r.col(1) = y;
    r.col(2) = z;
    return {r, start};
  }
  const Vec3 y = axis.normalized();
  const Vec3 z = (palmar - palmar.dot(y) * y).normalized();
  Mat3 r;
  r.col(0) = y.cross(z);
  r.col(1) = y;
  r.col(2) = z;
  return {r, start};
}

}  // namespace handemb
