#pragma once

#include <Eigen/Core>
#include <vector>

#include "specmatch/mesh.hpp"

namespace specmatch {

// Dijkstra distances over the edge graph with Euclidean edge lengths.
// Unreachable vertices hold +infinity and all_reached is false.
struct GeodesicField {
  int source = 0;
  Eigen::VectorXd distances;
  bool all_reached = true;
};

// Precomputed edge adjacency (CSR) so repeated source queries share the
// graph. Queries from distinct sources are independent and may run in
// parallel.
class GeodesicSolver {
public:
  explicit GeodesicSolver(const TriMesh& mesh);

  GeodesicField distances_from(int source) const;

  // Double-sweep diameter estimate: farthest vertex from `start`, then the
  // max distance from that vertex. Throws DisconnectedMesh if any vertex is
  // unreachable.
  double shape_diameter(int start = 0) const;

  int vertex_count() const { return static_cast<int>(offsets_.size()) - 1; }

private:
  std::vector<int> offsets_;
  std::vector<int> neighbors_;
  std::vector<double> weights_;  // integer quanta counts (see geodesics.cpp)
  double quantum_ = 1.0;
};

GeodesicField geodesic_distances(const TriMesh& mesh, int source);
double shape_diameter(const TriMesh& mesh);

}  // namespace specmatch
