#pragma once

#include "specmatch/mesh.hpp"

namespace specmatch {

// Icosahedron with `subdivisions` rounds of midpoint subdivision, projected
// onto a sphere of the given radius. Vertex count is 10*4^s + 2.
TriMesh make_icosphere(int subdivisions, double radius = 1.0);

// Open cylinder tube: `rings` vertex rows along +z over [0, height],
// `segments` vertices per ring. Not closed (no caps).
TriMesh make_cylinder_tube(int segments, int rings, double radius, double height);

// Chain of triangles along the x axis; handy asymmetric strip for tiny tests.
TriMesh make_strip(int quads, double dx = 1.0, double dy = 1.0);

}  // namespace specmatch
