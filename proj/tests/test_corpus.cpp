#include <doctest.h>

#include <fstream>

#include "specmatch/corpus.hpp"
#include "specmatch/error.hpp"
#include "specmatch/mesh_io.hpp"
#include "specmatch/shapes.hpp"
#include "specmatch/synth.hpp"
#include "test_util.hpp"

using namespace specmatch;

namespace {

// small on-disk corpus: two subjects x two poses at low resolution
std::filesystem::path write_small_corpus(const testutil::TempDir& dir, int subjects = 2, int poses = 2) {
  SynthOptions options;
  options.subjects = subjects;
  options.poses = poses;
  options.subdivisions = 1;  // 42 vertices
  options.seed = 17;
  return write_synth_corpus(make_synth_corpus(options), dir.path());
}

DescriptorParams small_params() {
  DescriptorParams params;
  params.k_modes = 30;
  params.samples = 20;
  params.gps_components = 10;
  return params;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_SUITE_BEGIN("corpus");

TEST_CASE("manifest round trip with caching") {
  testutil::TempDir dir("corpus");
  const auto manifest = write_small_corpus(dir);

  Corpus corpus = build_corpus(manifest);
  CHECK(corpus.model_count() == 4);
  CHECK(corpus.vertex_count == 42);
  CHECK_FALSE(corpus.has_descriptors(DescriptorKind::Hks));

  ensure_descriptors(corpus, DescriptorKind::Hks, small_params());
  CHECK(corpus.has_descriptors(DescriptorKind::Hks));
  CHECK(corpus.descriptors(0, DescriptorKind::Hks).dimension() == 20);
  CHECK(std::filesystem::exists(dir.path() / "s0_p0.hks.dsc"));
  CHECK(std::filesystem::exists(dir.path() / "s0_p0.lbs"));

  // caches are attached on rebuild without recomputation
  Corpus again = build_corpus(manifest);
  CHECK(again.has_descriptors(DescriptorKind::Hks));
  CHECK(again.descriptors(1, DescriptorKind::Hks).values ==
        corpus.descriptors(1, DescriptorKind::Hks).values);

  // a stale cache (mesh changed in place) is ignored
  TriMesh tweaked = corpus.models[0].mesh;
  tweaked.vertices *= 1.01;
  save_obj(tweaked, dir.path() / "s0_p0.obj");
  Corpus changed = build_corpus(manifest);
  CHECK(changed.models[0].descriptors.count(DescriptorKind::Hks) == 0);
  CHECK(changed.models[1].descriptors.count(DescriptorKind::Hks) == 1);
}

TEST_CASE("two identical meshes under different ids form a valid corpus") {
  testutil::TempDir dir("twin");
  const TriMesh mesh = make_icosphere(1);
  save_obj(mesh, dir.path() / "a.obj");
  save_obj(mesh, dir.path() / "b.obj");
  write_text(dir.path() / "manifest.txt", "a.obj 0 0\nb.obj 1 0\n");
  const Corpus corpus = build_corpus(dir.path() / "manifest.txt");
  CHECK(corpus.model_count() == 2);
  CHECK(corpus.vertex_count == 42);
}

TEST_CASE("manifest errors carry specific codes") {
  testutil::TempDir dir("bad");
  const TriMesh small = make_icosphere(1);
  const TriMesh big = make_icosphere(2);
  save_obj(small, dir.path() / "small.obj");
  save_obj(big, dir.path() / "big.obj");

  write_text(dir.path() / "mismatch.txt", "small.obj 0 0\nbig.obj 1 0\n");
  try {
    build_corpus(dir.path() / "mismatch.txt");
    FAIL("expected VertexCountMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::VertexCountMismatch);
  }

  write_text(dir.path() / "missing.txt", "small.obj 0 0\nnot_there.obj 1 0\n");
  try {
    build_corpus(dir.path() / "missing.txt");
    FAIL("expected MissingFile");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingFile);
  }

  write_text(dir.path() / "short.txt", "small.obj 0\n");
  try {
    build_corpus(dir.path() / "short.txt");
    FAIL("expected ManifestParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ManifestParseError);
  }

  write_text(dir.path() / "dup.txt", "small.obj 0 0\nsmall.obj 0 0\n");
  try {
    build_corpus(dir.path() / "dup.txt");
    FAIL("expected ManifestParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ManifestParseError);
  }
}

TEST_CASE("rigid mask files list excluded vertex indices") {
  testutil::TempDir dir("mask");
  write_text(dir.path() / "mask.txt", "# excluded\n0 3\n5\n");
  const auto mask = load_rigid_mask(dir.path() / "mask.txt", 8);
  CHECK(mask == std::vector<std::uint8_t>{1, 0, 0, 1, 0, 1, 0, 0});
  CHECK_THROWS_AS(load_rigid_mask(dir.path() / "mask.txt", 4), Error);
}

TEST_CASE("sampled batches have the documented composition") {
  testutil::TempDir dir("batch");
  const auto manifest = write_small_corpus(dir);
  Corpus corpus = build_corpus(manifest);
  ensure_descriptors(corpus, DescriptorKind::Hks, small_params(), false);

  Rng rng(99);
  const PairBatch tiny = sample_batch(corpus, DescriptorKind::Hks, 2, rng);
  CHECK(tiny.size() == 2);
  CHECK(tiny.labels[0] == 1.0);
  CHECK(tiny.labels[1] <= 0.2);
  CHECK(tiny.pair_is_match(0));
  CHECK_FALSE(tiny.pair_is_match(1));

  const PairBatch batch = sample_batch(corpus, DescriptorKind::Hks, 64, rng);
  for (int k = 0; k < 32; ++k) {
    CHECK(batch.labels[k] == 1.0);
    CHECK(batch.provenance[k].vertex_f == batch.provenance[k].vertex_g);
    CHECK(batch.provenance[k].model_f != batch.provenance[k].model_g);
    // rows really come from the named model fields
    const auto& prov = batch.provenance[k];
    CHECK(batch.rows_f.row(k) ==
          corpus.descriptors(prov.model_f, DescriptorKind::Hks).values.row(prov.vertex_f));
  }
  for (int k = 32; k < 64; ++k) {
    CHECK(batch.labels[k] >= 0.0);
    CHECK(batch.labels[k] <= 0.2);
    CHECK(batch.provenance[k].vertex_f != batch.provenance[k].vertex_g);
  }

  // soft labels are uniform on [0, 0.2]: mean over many draws is 0.1
  double label_sum = 0.0;
  int non_matching = 0;
  Rng stat_rng(7);
  for (int b = 0; b < 40; ++b) {
    const PairBatch big = sample_batch(corpus, DescriptorKind::Hks, 512, stat_rng);
    for (int k = 256; k < 512; ++k) {
      label_sum += big.labels[k];
      ++non_matching;
    }
  }
  CHECK(non_matching == 10240);
  CHECK(label_sum / non_matching == doctest::Approx(0.1).epsilon(0.1));
  CHECK(std::abs(label_sum / non_matching - 0.1) < 0.01);

  // identical rng state reproduces the identical batch
  Rng r1(123), r2(123);
  const PairBatch b1 = sample_batch(corpus, DescriptorKind::Hks, 32, r1);
  const PairBatch b2 = sample_batch(corpus, DescriptorKind::Hks, 32, r2);
  CHECK(b1.rows_f == b2.rows_f);
  CHECK(b1.rows_g == b2.rows_g);
  CHECK(b1.labels == b2.labels);

  // errors
  CHECK_THROWS_AS(sample_batch(corpus, DescriptorKind::Wks, 8, rng), Error);
  CHECK_THROWS_AS(sample_batch(corpus, DescriptorKind::Hks, 7, rng), Error);
}

TEST_SUITE_END();
