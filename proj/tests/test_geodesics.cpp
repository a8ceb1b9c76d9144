#include <doctest.h>

#include <cmath>

#include "specmatch/error.hpp"
#include "specmatch/geodesics.hpp"
#include "specmatch/shapes.hpp"
#include "test_util.hpp"

using namespace specmatch;

namespace {

// Exact graph diameter by Dijkstra from every vertex.
double all_pairs_diameter(const TriMesh& mesh) {
  const GeodesicSolver solver(mesh);
  double best = 0.0;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const GeodesicField field = solver.distances_from(v);
    REQUIRE(field.all_reached);
    best = std::max(best, field.distances.maxCoeff());
  }
  return best;
}

}  // namespace

TEST_SUITE_BEGIN("geodesics");

TEST_CASE("collinear bottom edge of a strip gives distances 0,1,2") {
  // bottom row (0,0),(1,0),(2,0); top row offset by y=1
  const TriMesh strip = make_strip(2, 1.0, 1.0);
  const GeodesicField field = geodesic_distances(strip, 0);
  CHECK(field.distances[0] == doctest::Approx(0.0));
  CHECK(field.distances[2] == doctest::Approx(1.0));  // (1,0) is vertex 2 in strip layout
  CHECK(field.distances[4] == doctest::Approx(2.0));  // (2,0) is vertex 4
}

TEST_CASE("equilateral triangle distances") {
  TriMesh tri;
  tri.vertices.resize(3, 3);
  tri.vertices << 0, 0, 0, 1, 0, 0, 0.5, std::sqrt(3.0) / 2.0, 0;
  tri.faces.resize(1, 3);
  tri.faces << 0, 1, 2;
  const GeodesicField field = geodesic_distances(tri, 0);
  CHECK(field.distances[0] == doctest::Approx(0.0));
  CHECK(field.distances[1] == doctest::Approx(1.0));
  CHECK(field.distances[2] == doctest::Approx(1.0));
}

TEST_CASE("unit icosphere diameter approximates pi") {
  const TriMesh sphere = make_icosphere(3);
  const GeodesicSolver solver(sphere);
  const GeodesicField field = solver.distances_from(0);
  const double max_distance = field.distances.maxCoeff();
  CHECK(max_distance >= 0.9 * M_PI);
  CHECK(max_distance <= 1.1 * M_PI);
  const double diameter = solver.shape_diameter();
  CHECK(diameter >= 0.9 * M_PI);
  CHECK(diameter <= 1.1 * M_PI);
}

TEST_CASE("geodesic distances are symmetric on small meshes") {
  const TriMesh mesh = make_icosphere(1);  // 42 vertices
  REQUIRE(mesh.vertex_count() <= 200);
  const GeodesicSolver solver(mesh);
  std::vector<Eigen::VectorXd> all;
  for (int v = 0; v < mesh.vertex_count(); ++v) all.push_back(solver.distances_from(v).distances);
  for (int u = 0; u < mesh.vertex_count(); ++u) {
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      CHECK(all[u][v] == all[v][u]);  // identical edge graph: exact equality
    }
  }
}

TEST_CASE("triangle inequality holds along every edge") {
  const TriMesh mesh = make_icosphere(2);
  const GeodesicField field = geodesic_distances(mesh, 7);
  for (int f = 0; f < mesh.face_count(); ++f) {
    for (int e = 0; e < 3; ++e) {
      const int u = mesh.faces(f, e), v = mesh.faces(f, (e + 1) % 3);
      const double edge = (mesh.vertices.row(u) - mesh.vertices.row(v)).norm();
      CHECK(std::abs(field.distances[u] - field.distances[v]) <= edge * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("double sweep lands between half and full graph diameter") {
  for (const TriMesh& mesh : {make_icosphere(2), make_cylinder_tube(12, 14, 0.5, 3.0), make_strip(9, 1.0, 0.7)}) {
    REQUIRE(mesh.vertex_count() <= 500);
    const double exact = all_pairs_diameter(mesh);
    const double sweep = shape_diameter(mesh);
    CHECK(sweep <= exact * (1.0 + 1e-12));
    CHECK(sweep >= 0.5 * exact);
  }
}

TEST_CASE("thin cylinder diameter matches the unrolled estimate") {
  const TriMesh tube = make_cylinder_tube(16, 24, 0.1, 4.0);
  const double expected = 4.0 + M_PI * 0.1;
  const double sweep = shape_diameter(tube);
  CHECK(sweep >= 0.9 * expected);
  CHECK(sweep <= 1.1 * expected);
  const double exact = all_pairs_diameter(tube);
  CHECK(sweep <= exact * (1.0 + 1e-12));
  CHECK(sweep >= 0.5 * exact);
}

TEST_CASE("long thin strip diameter approximates its length") {
  const TriMesh strip = make_strip(10, 1.0, 0.05);
  CHECK(shape_diameter(strip) == doctest::Approx(10.0).epsilon(0.01));
}

TEST_CASE("disconnected mesh reports unreachable vertices") {
  // two far-apart triangles in one mesh
  TriMesh mesh;
  mesh.vertices.resize(6, 3);
  mesh.vertices << 0, 0, 0, 1, 0, 0, 0, 1, 0, 10, 0, 0, 11, 0, 0, 10, 1, 0;
  mesh.faces.resize(2, 3);
  mesh.faces << 0, 1, 2, 3, 4, 5;
  const GeodesicField field = geodesic_distances(mesh, 0);
  CHECK_FALSE(field.all_reached);
  CHECK(std::isinf(field.distances[3]));
  CHECK_THROWS_AS(shape_diameter(mesh), Error);
}

TEST_SUITE_END();
