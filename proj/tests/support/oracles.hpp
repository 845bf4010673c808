#pragma once

// Independent reference implementations used as test oracles.

#include "geofuse/geom/types.hpp"

#include <filesystem>
#include <random>

namespace oracle {

using geofuse::Vec3;

// Exact rational determinants (GMP).
int orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);
// +1 when e is strictly inside the circumsphere, regardless of orientation.
int in_sphere(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e);

// Random helpers with fixed seeds.
std::vector<Vec3> uniform_box(std::size_t n, std::uint64_t seed, double half = 1.0);
std::vector<Vec3> uniform_sphere(std::size_t n, std::uint64_t seed, double radius = 1.0,
                                 const Vec3& center = Vec3::Zero());

// Axis-aligned cube [lo, hi]^3 with 12 outward triangles.
geofuse::TriangleMesh cube_mesh(double lo = 0.0, double hi = 1.0);
// Icosphere with outward faces.
geofuse::TriangleMesh icosphere(int subdivisions, double radius = 1.0, const Vec3& center = Vec3::Zero());

// Edge/vertex topology of a triangle mesh, computed by brute force.
struct MeshTopology {
  bool closed = false;        // every directed edge has its reverse
  bool edge_manifold = false; // every undirected edge has exactly two faces, opposite orientation
  bool vertex_manifold = false;  // each used vertex has a single-cycle link
  int components = 0;
  long euler = 0;             // V - E + F over used vertices
  [[nodiscard]] bool closed_manifold() const { return closed && edge_manifold && vertex_manifold; }
  [[nodiscard]] long genus() const { return (2 * components - euler) / 2; }
};
MeshTopology mesh_topology(const geofuse::TriangleMesh& mesh);

// Moller-Trumbore over every face; nearest t > t_min, -1 when nothing is hit.
struct BruteHit {
  double t = -1.0;
  int face = -1;
};
BruteHit brute_ray(const geofuse::TriangleMesh& mesh, const Vec3& o, const Vec3& d, double t_min);

// Scratch directory removed on destruction.
struct TempDir {
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::filesystem::path path;
  [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

}  // namespace oracle
