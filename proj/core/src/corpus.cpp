#include "specmatch/corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "specmatch/error.hpp"
#include "specmatch/laplace.hpp"
#include "specmatch/mesh_io.hpp"

namespace specmatch {

namespace {

using nlohmann::json;

std::string hash_hex(std::uint64_t h) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::filesystem::path mesh_stem_path(const std::filesystem::path& mesh_path) {
  std::filesystem::path p = mesh_path;
  p.replace_extension();
  return p;
}

}  // namespace

bool Corpus::has_descriptors(DescriptorKind kind) const {
  int with = 0;
  for (const auto& model : models) with += model.descriptors.count(kind) ? 1 : 0;
  return with == model_count() && with > 0;
}

const DescriptorField& Corpus::descriptors(int model, DescriptorKind kind) const {
  require(model >= 0 && model < model_count(), ErrorCode::IndexOutOfRange, "model index");
  const auto it = models[model].descriptors.find(kind);
  require(it != models[model].descriptors.end(), ErrorCode::DescriptorMissing,
          models[model].name + " has no " + descriptor_kind_name(kind) + " field");
  return it->second;
}

std::filesystem::path descriptor_cache_path(const std::filesystem::path& mesh_path, DescriptorKind kind) {
  std::filesystem::path p = mesh_stem_path(mesh_path);
  p += std::string(".") + descriptor_kind_name(kind) + ".dsc";
  return p;
}

std::filesystem::path spectrum_cache_path(const std::filesystem::path& mesh_path) {
  std::filesystem::path p = mesh_stem_path(mesh_path);
  p += ".lbs";
  return p;
}

std::string descriptor_cache_key(DescriptorKind kind, const DescriptorParams& params, std::uint64_t mesh_hash) {
  json j;
  j["kind"] = descriptor_kind_name(kind);
  j["mesh_hash"] = hash_hex(mesh_hash);
  switch (kind) {
    case DescriptorKind::Gps:
      j["components"] = params.gps_components;
      break;
    case DescriptorKind::Hks:
      j["k_modes"] = params.k_modes;
      j["samples"] = params.samples;
      break;
    case DescriptorKind::Wks:
      j["k_modes"] = params.k_modes;
      j["samples"] = params.samples;
      j["sigma_multiple"] = params.wks_sigma_multiple;
      j["normalize"] = params.wks_normalize;
      break;
    case DescriptorKind::Embedded:
      break;
  }
  return j.dump();
}

namespace {

struct ManifestEntry {
  std::filesystem::path mesh_path;
  int subject = 0;
  int pose = 0;
};

std::vector<ManifestEntry> parse_manifest(const std::filesystem::path& manifest_path) {
  require(std::filesystem::exists(manifest_path), ErrorCode::MissingFile, manifest_path.string());
  std::ifstream in(manifest_path);
  require(in.good(), ErrorCode::IoError, "cannot open " + manifest_path.string());

  const std::filesystem::path root = manifest_path.parent_path();
  std::vector<ManifestEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string path_token, subject_token, pose_token;
    if (!(ss >> path_token)) continue;  // blank line
    require(static_cast<bool>(ss >> subject_token >> pose_token), ErrorCode::ManifestParseError,
            manifest_path.string() + ":" + std::to_string(line_no) + ": expected 'path subject pose'");
    std::string extra;
    require(!(ss >> extra), ErrorCode::ManifestParseError,
            manifest_path.string() + ":" + std::to_string(line_no) + ": trailing tokens");
    ManifestEntry entry;
    const std::filesystem::path token_path(path_token);
    entry.mesh_path = token_path.is_absolute() ? token_path : root / token_path;
    try {
      entry.subject = std::stoi(subject_token);
      entry.pose = std::stoi(pose_token);
    } catch (...) {
      fail(ErrorCode::ManifestParseError,
           manifest_path.string() + ":" + std::to_string(line_no) + ": subject/pose must be integers");
    }
    entries.push_back(std::move(entry));
  }
  require(!entries.empty(), ErrorCode::ManifestParseError, manifest_path.string() + ": no models listed");
  return entries;
}

// Attach an on-disk descriptor cache when its recorded mesh hash matches.
void try_attach_cache(CorpusModel& model, const std::filesystem::path& mesh_path, DescriptorKind kind,
                      std::uint64_t mesh_hash) {
  const auto cache = descriptor_cache_path(mesh_path, kind);
  if (!std::filesystem::exists(cache)) return;
  DescriptorField field;
  try {
    field = load_descriptors(cache);
  } catch (const Error&) {
    return;  // unreadable cache: treat as absent
  }
  if (field.kind != kind || field.vertex_count() != model.mesh.vertex_count()) return;
  try {
    const json j = json::parse(field.params_json);
    if (j.value("mesh_hash", "") != hash_hex(mesh_hash)) return;
  } catch (...) {
    return;
  }
  model.descriptors[kind] = std::move(field);
}

}  // namespace

Corpus build_corpus(const std::filesystem::path& manifest_path) {
  const auto entries = parse_manifest(manifest_path);

  Corpus corpus;
  std::set<std::pair<int, int>> seen_ids;
  for (const auto& entry : entries) {
    CorpusModel model;
    model.name = entry.mesh_path.stem().string();
    model.subject = entry.subject;
    model.pose = entry.pose;
    model.source_path = entry.mesh_path;
    require(seen_ids.emplace(entry.subject, entry.pose).second, ErrorCode::ManifestParseError,
            "duplicate subject/pose pair " + std::to_string(entry.subject) + "/" + std::to_string(entry.pose));
    model.mesh = load_mesh(entry.mesh_path);
    if (corpus.models.empty()) {
      corpus.vertex_count = model.mesh.vertex_count();
    } else {
      require(model.mesh.vertex_count() == corpus.vertex_count, ErrorCode::VertexCountMismatch,
              model.name + " has " + std::to_string(model.mesh.vertex_count()) + " vertices, corpus has " +
                  std::to_string(corpus.vertex_count));
    }
    const std::uint64_t hash = mesh_content_hash(model.mesh);
    for (const auto kind : {DescriptorKind::Gps, DescriptorKind::Hks, DescriptorKind::Wks}) {
      try_attach_cache(model, entry.mesh_path, kind, hash);
    }
    corpus.models.push_back(std::move(model));
  }

  // attached caches must agree on dimensionality per kind
  for (const auto kind : {DescriptorKind::Gps, DescriptorKind::Hks, DescriptorKind::Wks}) {
    int d = -1;
    for (const auto& model : corpus.models) {
      const auto it = model.descriptors.find(kind);
      if (it == model.descriptors.end()) continue;
      if (d < 0) d = it->second.dimension();
      require(it->second.dimension() == d, ErrorCode::DimensionMismatch,
              model.name + ": cached " + descriptor_kind_name(kind) + " dimension differs across corpus");
    }
  }
  return corpus;
}

std::vector<std::uint8_t> load_rigid_mask(const std::filesystem::path& path, int vertex_count) {
  require(std::filesystem::exists(path), ErrorCode::MissingFile, path.string());
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(vertex_count), 0);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    long idx;
    while (ss >> idx) {
      require(idx >= 0 && idx < vertex_count, ErrorCode::IndexOutOfRange,
              "mask index " + std::to_string(idx) + " out of range");
      mask[static_cast<std::size_t>(idx)] = 1;
    }
  }
  return mask;
}

void ensure_descriptors(Corpus& corpus, DescriptorKind kind, const DescriptorParams& params, bool write_cache) {
  require(corpus.model_count() > 0, ErrorCode::EmptyCorpus, "corpus has no models");
  require(kind != DescriptorKind::Embedded, ErrorCode::InvalidArgument,
          "embedded fields come from a model, not from ensure_descriptors");

  for (auto& model : corpus.models) {
    const std::uint64_t hash = mesh_content_hash(model.mesh);
    const std::string wanted_key = descriptor_cache_key(kind, params, hash);

    const auto it = model.descriptors.find(kind);
    if (it != model.descriptors.end() && it->second.params_json == wanted_key) continue;

    // (re)compute: spectrum first, reusing the .lbs cache when it still
    // matches the mesh operators
    const OperatorPair ops = build_operators(model.mesh);
    const int needed_modes =
        kind == DescriptorKind::Gps ? params.gps_components + 1 : params.k_modes;
    require(needed_modes <= corpus.vertex_count, ErrorCode::InsufficientVertices,
            model.name + ": " + std::to_string(needed_modes) + " modes on " +
                std::to_string(corpus.vertex_count) + " vertices");

    LaplaceSpectrum spectrum;
    bool have_spectrum = false;
    if (!model.source_path.empty()) {
      const auto cache = spectrum_cache_path(model.source_path);
      if (std::filesystem::exists(cache)) {
        try {
          LaplaceSpectrum cached = load_spectrum(cache);
          if (cached.mode_count() >= needed_modes && spectrum_consistent(cached, ops)) {
            spectrum = std::move(cached);
            have_spectrum = true;
          }
        } catch (const Error&) {
        }
      }
    }
    if (!have_spectrum) {
      spectrum = compute_spectrum(ops, needed_modes);
      if (write_cache && !model.source_path.empty()) {
        save_spectrum(spectrum, spectrum_cache_path(model.source_path));
      }
    }

    DescriptorField field;
    switch (kind) {
      case DescriptorKind::Gps:
        field = gps(spectrum, params.gps_components);
        break;
      case DescriptorKind::Hks:
        field = hks(spectrum, HksSchedule::from_spectrum(spectrum, params.samples, params.k_modes));
        break;
      case DescriptorKind::Wks:
        field = wks(spectrum, WksSchedule::from_spectrum(spectrum, params.samples, params.k_modes,
                                                         params.wks_sigma_multiple, params.wks_normalize));
        break;
      case DescriptorKind::Embedded:
        break;
    }
    field.params_json = wanted_key;
    if (write_cache && !model.source_path.empty()) {
      save_descriptors(field, descriptor_cache_path(model.source_path, kind));
    }
    model.descriptors[kind] = std::move(field);
  }

  // identical dimensionality across models
  const int d = corpus.descriptors(0, kind).dimension();
  for (int i = 1; i < corpus.model_count(); ++i) {
    require(corpus.descriptors(i, kind).dimension() == d, ErrorCode::DimensionMismatch,
            "descriptor dimensionality differs across corpus");
  }
}

PairBatch PairBatch::concatenate(const std::vector<PairBatch>& batches) {
  require(!batches.empty(), ErrorCode::InvalidArgument, "nothing to concatenate");
  int total = 0;
  for (const auto& b : batches) total += b.size();
  PairBatch out;
  out.rows_f.resize(total, batches.front().rows_f.cols());
  out.rows_g.resize(total, batches.front().rows_g.cols());
  out.labels.resize(total);
  out.provenance.reserve(static_cast<std::size_t>(total));
  int at = 0;
  for (const auto& b : batches) {
    out.rows_f.middleRows(at, b.size()) = b.rows_f;
    out.rows_g.middleRows(at, b.size()) = b.rows_g;
    out.labels.segment(at, b.size()) = b.labels;
    out.provenance.insert(out.provenance.end(), b.provenance.begin(), b.provenance.end());
    at += b.size();
  }
  return out;
}

PairBatch sample_batch(const Corpus& corpus, DescriptorKind kind, int size, Rng& rng, double soft_label_max) {
  require(size >= 2 && size % 2 == 0, ErrorCode::InvalidArgument, "batch size must be even and >= 2");
  int with_kind = 0;
  for (const auto& model : corpus.models) with_kind += model.descriptors.count(kind) ? 1 : 0;
  require(with_kind >= 2, ErrorCode::EmptyCorpus,
          std::string("need at least 2 models with ") + descriptor_kind_name(kind) + " descriptors");
  require(with_kind == corpus.model_count(), ErrorCode::DescriptorMissing,
          "some models lack the requested descriptor kind");

  const int model_count = corpus.model_count();
  const int n = corpus.vertex_count;
  const int model_f = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(model_count)));
  int model_g = model_f;
  while (model_g == model_f) model_g = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(model_count)));

  const Eigen::MatrixXd& field_f = corpus.descriptors(model_f, kind).values;
  const Eigen::MatrixXd& field_g = corpus.descriptors(model_g, kind).values;

  PairBatch batch;
  batch.rows_f.resize(size, field_f.cols());
  batch.rows_g.resize(size, field_g.cols());
  batch.labels.resize(size);
  batch.provenance.resize(static_cast<std::size_t>(size));

  const int half = size / 2;
  for (int k = 0; k < half; ++k) {
    const int v = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
    batch.rows_f.row(k) = field_f.row(v);
    batch.rows_g.row(k) = field_g.row(v);
    batch.labels[k] = 1.0;
    batch.provenance[static_cast<std::size_t>(k)] = {model_f, v, model_g, v};
  }
  for (int k = half; k < size; ++k) {
    const int i = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
    int j = i;
    while (j == i) j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
    batch.rows_f.row(k) = field_f.row(i);
    batch.rows_g.row(k) = field_g.row(j);
    batch.labels[k] = rng.uniform(0.0, soft_label_max);
    batch.provenance[static_cast<std::size_t>(k)] = {model_f, i, model_g, j};
  }
  return batch;
}

}  // namespace specmatch
