#include "specmatch/shapes.hpp"

#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "specmatch/error.hpp"

namespace specmatch {

namespace {

struct Builder {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;

  TriMesh finish() const {
    TriMesh mesh;
    mesh.vertices.resize(static_cast<int>(vertices.size()), 3);
    for (std::size_t i = 0; i < vertices.size(); ++i) mesh.vertices.row(static_cast<int>(i)) = vertices[i];
    mesh.faces.resize(static_cast<int>(faces.size()), 3);
    for (std::size_t i = 0; i < faces.size(); ++i) {
      mesh.faces(static_cast<int>(i), 0) = faces[i][0];
      mesh.faces(static_cast<int>(i), 1) = faces[i][1];
      mesh.faces(static_cast<int>(i), 2) = faces[i][2];
    }
    mesh.validate();
    return mesh;
  }
};

}  // namespace

TriMesh make_icosphere(int subdivisions, double radius) {
  require(subdivisions >= 0 && subdivisions <= 7, ErrorCode::InvalidArgument,
          "icosphere subdivisions must be in [0, 7]");
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;

  Builder b;
  b.vertices = {
      {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
  };
  b.faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
  };

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int u, int v) {
      const auto key = std::minmax(u, v);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const int idx = static_cast<int>(b.vertices.size());
      b.vertices.push_back(0.5 * (b.vertices[u] + b.vertices[v]));
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(b.faces.size() * 4);
    for (const auto& f : b.faces) {
      const int ab = mid(f[0], f[1]);
      const int bc = mid(f[1], f[2]);
      const int ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    b.faces = std::move(next);
  }

  for (auto& v : b.vertices) v = radius * v.normalized();
  return b.finish();
}

TriMesh make_cylinder_tube(int segments, int rings, double radius, double height) {
  require(segments >= 3 && rings >= 2, ErrorCode::InvalidArgument, "cylinder needs >=3 segments, >=2 rings");
  Builder b;
  for (int r = 0; r < rings; ++r) {
    const double z = height * r / (rings - 1);
    for (int s = 0; s < segments; ++s) {
      const double theta = 2.0 * M_PI * s / segments;
      b.vertices.emplace_back(radius * std::cos(theta), radius * std::sin(theta), z);
    }
  }
  for (int r = 0; r + 1 < rings; ++r) {
    for (int s = 0; s < segments; ++s) {
      const int a = r * segments + s;
      const int c = r * segments + (s + 1) % segments;
      const int d = (r + 1) * segments + s;
      const int e = (r + 1) * segments + (s + 1) % segments;
      b.faces.push_back({a, c, e});
      b.faces.push_back({a, e, d});
    }
  }
  return b.finish();
}

TriMesh make_strip(int quads, double dx, double dy) {
  require(quads >= 1, ErrorCode::InvalidArgument, "strip needs at least one quad");
  Builder b;
  for (int i = 0; i <= quads; ++i) {
    b.vertices.emplace_back(i * dx, 0.0, 0.0);
    b.vertices.emplace_back(i * dx, dy, 0.0);
  }
  for (int i = 0; i < quads; ++i) {
    const int a = 2 * i, bot = 2 * i + 2, top = 2 * i + 1, e = 2 * i + 3;
    b.faces.push_back({a, bot, e});
    b.faces.push_back({a, e, top});
  }
  return b.finish();
}

}  // namespace specmatch
