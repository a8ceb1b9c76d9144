#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace specmatch {

// Triangle mesh: vertex positions and ordered index triples. Immutable by
// convention once validated; all downstream stages share it by const ref.
struct TriMesh {
  Eigen::MatrixX3d vertices;                    // n x 3 positions
  Eigen::Matrix<int, Eigen::Dynamic, 3> faces;  // f x 3 vertex indices

  int vertex_count() const { return static_cast<int>(vertices.rows()); }
  int face_count() const { return static_cast<int>(faces.rows()); }

  double face_area(int f) const;
  double mean_edge_length() const;

  // Throws IndexOutOfRange / DegenerateFace when an invariant fails:
  // indices in range, no repeated index within a face, no (near-)zero-area
  // face relative to the squared mean edge length.
  void validate() const;
};

// Order-independent digest of the geometry, used to key descriptor caches.
std::uint64_t mesh_content_hash(const TriMesh& mesh);

}  // namespace specmatch
