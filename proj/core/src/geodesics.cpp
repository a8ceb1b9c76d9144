#include "specmatch/geodesics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "specmatch/error.hpp"

namespace specmatch {

GeodesicSolver::GeodesicSolver(const TriMesh& mesh) {
  const int n = mesh.vertex_count();
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(mesh.face_count()) * 3);
  for (int f = 0; f < mesh.face_count(); ++f) {
    for (int e = 0; e < 3; ++e) {
      int u = mesh.faces(f, e), v = mesh.faces(f, (e + 1) % 3);
      if (u > v) std::swap(u, v);
      edges.emplace_back(u, v);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::vector<double> lengths;
  lengths.reserve(edges.size());
  double max_length = 0.0;
  for (const auto& [u, v] : edges) {
    const double w = (mesh.vertices.row(u) - mesh.vertices.row(v)).norm();
    lengths.push_back(w);
    max_length = std::max(max_length, w);
  }

  // Edge lengths are quantized to integers so that path sums are exact and
  // therefore independent of accumulation order: d(u->v) == d(v->u) to the
  // bit. The quantum is sized so the longest possible path (n-1 edges of
  // maximal length) stays below 2^52 quanta.
  const int bits = std::bit_width(static_cast<unsigned>(std::max(n, 2)));
  quantum_ = max_length > 0.0 ? std::ldexp(max_length, bits - 52) : 1.0;

  std::vector<int> degree(n, 0);
  for (const auto& [u, v] : edges) {
    ++degree[u];
    ++degree[v];
  }
  offsets_.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) offsets_[i + 1] = offsets_[i] + degree[i];
  neighbors_.resize(offsets_[n]);
  weights_.resize(offsets_[n]);
  std::vector<int> cursor(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [u, v] = edges[e];
    const double quanta = std::max(1.0, std::round(lengths[e] / quantum_));
    neighbors_[cursor[u]] = v;
    weights_[cursor[u]++] = quanta;
    neighbors_[cursor[v]] = u;
    weights_[cursor[v]++] = quanta;
  }
}

GeodesicField GeodesicSolver::distances_from(int source) const {
  const int n = vertex_count();
  require(source >= 0 && source < n, ErrorCode::IndexOutOfRange,
          "geodesic source " + std::to_string(source));

  GeodesicField field;
  field.source = source;
  field.distances = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());

  std::vector<double> quanta_dist(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  quanta_dist[static_cast<std::size_t>(source)] = 0.0;

  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  heap.emplace(0.0, source);
  std::vector<char> settled(static_cast<std::size_t>(n), 0);
  int reached = 0;
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (settled[static_cast<std::size_t>(u)]) continue;
    settled[static_cast<std::size_t>(u)] = 1;
    ++reached;
    for (int k = offsets_[u]; k < offsets_[u + 1]; ++k) {
      const int v = neighbors_[k];
      const double nd = d + weights_[k];  // integer-valued: exact
      if (nd < quanta_dist[static_cast<std::size_t>(v)]) {
        quanta_dist[static_cast<std::size_t>(v)] = nd;
        heap.emplace(nd, v);
      }
    }
  }
  for (int v = 0; v < n; ++v) {
    if (std::isfinite(quanta_dist[static_cast<std::size_t>(v)])) {
      field.distances[v] = quanta_dist[static_cast<std::size_t>(v)] * quantum_;
    }
  }
  field.all_reached = (reached == n);
  return field;
}

double GeodesicSolver::shape_diameter(int start) const {
  const GeodesicField first = distances_from(start);
  require(first.all_reached, ErrorCode::DisconnectedMesh, "mesh has unreachable vertices");
  int farthest = 0;
  first.distances.maxCoeff(&farthest);
  const GeodesicField second = distances_from(farthest);
  return second.distances.maxCoeff();
}

GeodesicField geodesic_distances(const TriMesh& mesh, int source) {
  return GeodesicSolver(mesh).distances_from(source);
}

double shape_diameter(const TriMesh& mesh) { return GeodesicSolver(mesh).shape_diameter(); }

}  // namespace specmatch
