#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "specmatch/mesh.hpp"

namespace specmatch {

// Registered synthetic corpus: every model deforms the same base shape (a
// stretched icosphere with several off-axis protrusions), so topology is
// shared and equal vertex indices correspond. Subjects apply non-uniform
// scaling fields (metric-distorting); poses apply smooth bends and twists
// (near-isometric).
struct SynthOptions {
  int subjects = 6;
  int poses = 5;
  int subdivisions = 4;           // icosphere resolution; 4 -> 2562 vertices
  double subject_strength = 1.0;  // scales the per-subject metric distortion
  double pose_strength = 1.0;     // scales the per-pose bend/twist angles
  std::uint64_t seed = 7;
};

struct SynthCorpus {
  TriMesh base;
  std::vector<TriMesh> meshes;                 // subject-major order
  std::vector<std::pair<int, int>> ids;        // (subject, pose) per mesh
  std::vector<int> protrusion_apices;          // base-vertex index of each bump apex
  std::string manifest_text;                   // ready-to-write manifest
};

std::string synth_mesh_filename(int subject, int pose);

SynthCorpus make_synth_corpus(const SynthOptions& options);

// Writes every mesh as OBJ plus manifest.txt into `directory` (created if
// missing). Returns the manifest path.
std::filesystem::path write_synth_corpus(const SynthCorpus& corpus, const std::filesystem::path& directory);

}  // namespace specmatch
