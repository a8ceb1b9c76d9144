#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "specmatch/descriptors.hpp"
#include "specmatch/mesh.hpp"
#include "specmatch/rng.hpp"

namespace specmatch {

// One registered model: all models in a corpus share topology, and equal
// vertex indices correspond geometrically (the ground truth).
struct CorpusModel {
  std::string name;
  int subject = 0;
  int pose = 0;
  std::filesystem::path source_path;  // empty for in-memory models; enables caching
  TriMesh mesh;
  std::map<DescriptorKind, DescriptorField> descriptors;
};

struct Corpus {
  std::vector<CorpusModel> models;
  int vertex_count = 0;
  std::vector<std::uint8_t> rigid_mask;  // 1 = excluded from evaluation; empty = no mask

  int model_count() const { return static_cast<int>(models.size()); }
  bool has_descriptors(DescriptorKind kind) const;
  const DescriptorField& descriptors(int model, DescriptorKind kind) const;  // DescriptorMissing when absent
};

// Manifest: one "mesh-path subject-id pose-id" record per line, whitespace
// separated, '#' comments. Paths resolve relative to the manifest directory.
// Cached DSC1 files next to each mesh are attached when their recorded mesh
// hash matches.
Corpus build_corpus(const std::filesystem::path& manifest_path);

// Vertex-index list (one index per line, '#' comments) marking vertices to
// exclude from evaluation sampling.
std::vector<std::uint8_t> load_rigid_mask(const std::filesystem::path& path, int vertex_count);

struct DescriptorParams {
  int k_modes = 300;
  int samples = 100;       // hks / wks bands
  int gps_components = 25;
  double wks_sigma_multiple = 7.0;
  bool wks_normalize = true;
};

// Computes (or loads from valid caches) the requested descriptor for every
// model. Cache files live next to the meshes as <stem>.<kind>.dsc keyed by
// mesh content hash + parameters; spectra cache as <stem>.lbs validated by
// eigen-residual against freshly assembled operators.
void ensure_descriptors(Corpus& corpus, DescriptorKind kind, const DescriptorParams& params = {},
                        bool write_cache = true);

// Cache naming shared with the CLI.
std::filesystem::path descriptor_cache_path(const std::filesystem::path& mesh_path, DescriptorKind kind);
std::filesystem::path spectrum_cache_path(const std::filesystem::path& mesh_path);

// Canonical params blob for descriptor caches (includes the mesh hash).
std::string descriptor_cache_key(DescriptorKind kind, const DescriptorParams& params, std::uint64_t mesh_hash);

// Training pair batch: the first half are corresponding vertices of two
// models (label 1), the second half are mismatched vertex pairs with soft
// labels in [0, soft_label_max].
struct PairBatch {
  Eigen::MatrixXd rows_f, rows_g;  // batch x d
  Eigen::VectorXd labels;
  struct Provenance {
    int model_f = 0, vertex_f = 0;
    int model_g = 0, vertex_g = 0;
  };
  std::vector<Provenance> provenance;

  int size() const { return static_cast<int>(labels.size()); }
  bool pair_is_match(int k) const { return provenance[k].vertex_f == provenance[k].vertex_g; }

  static PairBatch concatenate(const std::vector<PairBatch>& batches);
};

PairBatch sample_batch(const Corpus& corpus, DescriptorKind kind, int size, Rng& rng,
                       double soft_label_max = 0.2);

}  // namespace specmatch
