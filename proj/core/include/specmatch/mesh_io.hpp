#pragma once

#include <filesystem>
#include <string>

#include "specmatch/mesh.hpp"

namespace specmatch {

enum class MeshFormat { Auto, Obj, Off, PlyAscii };

// Reads OBJ (v/f lines), OFF, or ASCII PLY. Faces with more than three
// vertices are fan-triangulated from the first vertex. The result is
// validated before being returned. Binary PLY is rejected.
TriMesh load_mesh(const std::filesystem::path& path, MeshFormat format = MeshFormat::Auto);

// Parses mesh text directly (same formats); used for round-trip tests and
// in-memory corpora.
TriMesh parse_mesh_text(const std::string& text, MeshFormat format);

// Writes an OBJ with full double precision so a round trip preserves
// coordinates to 1e-12 and indices exactly.
void save_obj(const TriMesh& mesh, const std::filesystem::path& path);

std::string mesh_to_obj_text(const TriMesh& mesh);

}  // namespace specmatch
