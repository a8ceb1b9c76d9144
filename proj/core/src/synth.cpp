#include "specmatch/synth.hpp"

#include <cmath>
#include <fstream>

#include "specmatch/error.hpp"
#include "specmatch/mesh_io.hpp"
#include "specmatch/rng.hpp"
#include "specmatch/shapes.hpp"

namespace specmatch {

namespace {

struct Bump {
  Eigen::Vector3d direction;
  double amplitude;
  double width;  // angular Gaussian width in radians
};

// Fixed, deliberately asymmetric bump set; distinct amplitudes keep the base
// free of exact self-symmetries.
const std::vector<Bump>& bump_set() {
  static const std::vector<Bump> bumps = {
      {Eigen::Vector3d(1.0, 0.15, 0.35).normalized(), 0.62, 0.42},
      {Eigen::Vector3d(-0.9, 0.3, -0.25).normalized(), 0.48, 0.38},
      {Eigen::Vector3d(0.2, 1.0, -0.4).normalized(), 0.41, 0.34},
      {Eigen::Vector3d(-0.25, -0.95, 0.3).normalized(), 0.55, 0.40},
      {Eigen::Vector3d(0.1, -0.2, -1.0).normalized(), 0.35, 0.30},
  };
  return bumps;
}

TriMesh make_base_shape(int subdivisions) {
  TriMesh mesh = make_icosphere(subdivisions, 1.0);
  // capsule-like stretch along z, a few limb protrusions, then a fixed
  // medium-scale relief so descriptors vary across the whole surface rather
  // than only near the limbs
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    Eigen::Vector3d p = mesh.vertices.row(i);
    const Eigen::Vector3d unit = p.normalized();
    p.z() *= 1.7;
    double push = 0.0;
    for (const Bump& bump : bump_set()) {
      const double angle = std::acos(std::clamp(unit.dot(bump.direction), -1.0, 1.0));
      push += bump.amplitude * std::exp(-0.5 * (angle / bump.width) * (angle / bump.width));
    }
    const double relief = 0.10 * std::sin(3.1 * unit.x() + 1.0) * std::cos(2.3 * unit.y() - 0.5) +
                          0.08 * std::sin(4.7 * unit.z() + 2.0) * std::cos(3.9 * unit.x() + 0.7) +
                          0.06 * std::sin(5.3 * unit.y() + 4.0) * std::cos(4.1 * unit.z() + 1.3);
    mesh.vertices.row(i) = p + (push + relief) * unit;
  }
  mesh.validate();
  return mesh;
}

struct SubjectParams {
  Eigen::Vector3d axis_scale;
  double bulge_amplitude;
  double bulge_center;  // in normalized z
  double bulge_width;
};

struct PoseParams {
  double bend = 0.0;   // radians, about the x axis
  double twist = 0.0;  // radians, about the z axis
};

SubjectParams draw_subject(Rng& rng, double strength) {
  SubjectParams p;
  p.axis_scale = {1.0 + strength * rng.uniform(-0.22, 0.32), 1.0 + strength * rng.uniform(-0.22, 0.32),
                  1.0 + strength * rng.uniform(-0.18, 0.28)};
  p.bulge_amplitude = strength * rng.uniform(-0.18, 0.38);
  p.bulge_center = rng.uniform(-0.35, 0.35);
  p.bulge_width = 0.33;
  return p;
}

PoseParams draw_pose(Rng& rng, double strength) {
  PoseParams p;
  p.bend = strength * rng.uniform(-0.65, 0.65);
  p.twist = strength * rng.uniform(-0.55, 0.55);
  return p;
}

TriMesh deform(const TriMesh& base, const SubjectParams& subject, const PoseParams& pose) {
  TriMesh mesh = base;
  const double z_min = base.vertices.col(2).minCoeff();
  const double z_max = base.vertices.col(2).maxCoeff();
  const double z_span = std::max(z_max - z_min, 1e-9);

  for (int i = 0; i < mesh.vertex_count(); ++i) {
    Eigen::Vector3d p = mesh.vertices.row(i);
    const double z_rel = (p.z() - z_min) / z_span;  // 0..1 along the long axis

    // subject: anisotropic axis scaling + a radial bulge band
    p = p.cwiseProduct(subject.axis_scale);
    const double band = (z_rel - 0.5 - subject.bulge_center) / subject.bulge_width;
    const double bulge = 1.0 + subject.bulge_amplitude * std::exp(-0.5 * band * band);
    p.x() *= bulge;
    p.y() *= bulge;

    // pose: progressive bend about x, then twist about z
    const double smooth = z_rel * z_rel * (3.0 - 2.0 * z_rel);
    const double bend = pose.bend * smooth;
    const double cb = std::cos(bend), sb = std::sin(bend);
    p = Eigen::Vector3d(p.x(), cb * p.y() - sb * p.z(), sb * p.y() + cb * p.z());
    const double twist = pose.twist * z_rel;
    const double ct = std::cos(twist), st = std::sin(twist);
    p = Eigen::Vector3d(ct * p.x() - st * p.y(), st * p.x() + ct * p.y(), p.z());

    mesh.vertices.row(i) = p;
  }
  mesh.validate();
  return mesh;
}

}  // namespace

std::string synth_mesh_filename(int subject, int pose) {
  return "s" + std::to_string(subject) + "_p" + std::to_string(pose) + ".obj";
}

SynthCorpus make_synth_corpus(const SynthOptions& options) {
  require(options.subjects >= 1 && options.poses >= 1, ErrorCode::InvalidArgument,
          "need at least one subject and one pose");
  require(options.subject_strength >= 0.0 && options.pose_strength >= 0.0, ErrorCode::InvalidArgument,
          "strengths must be nonnegative");

  SynthCorpus corpus;
  corpus.base = make_base_shape(options.subdivisions);

  for (const Bump& bump : bump_set()) {
    int apex = 0;
    double best = -2.0;
    for (int i = 0; i < corpus.base.vertex_count(); ++i) {
      const double align = Eigen::Vector3d(corpus.base.vertices.row(i)).normalized().dot(bump.direction);
      if (align > best) {
        best = align;
        apex = i;
      }
    }
    corpus.protrusion_apices.push_back(apex);
  }

  Rng master(options.seed);
  Rng subject_rng = master.fork(1);
  Rng pose_rng = master.fork(2);

  std::vector<SubjectParams> subjects;
  for (int s = 0; s < options.subjects; ++s) subjects.push_back(draw_subject(subject_rng, options.subject_strength));
  std::vector<PoseParams> poses;
  for (int p = 0; p < options.poses; ++p) poses.push_back(draw_pose(pose_rng, options.pose_strength));

  for (int s = 0; s < options.subjects; ++s) {
    for (int p = 0; p < options.poses; ++p) {
      corpus.meshes.push_back(deform(corpus.base, subjects[static_cast<std::size_t>(s)],
                                     poses[static_cast<std::size_t>(p)]));
      corpus.ids.emplace_back(s, p);
      corpus.manifest_text +=
          synth_mesh_filename(s, p) + " " + std::to_string(s) + " " + std::to_string(p) + "\n";
    }
  }
  return corpus;
}

std::filesystem::path write_synth_corpus(const SynthCorpus& corpus, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  for (std::size_t i = 0; i < corpus.meshes.size(); ++i) {
    const auto [subject, pose] = corpus.ids[i];
    save_obj(corpus.meshes[i], directory / synth_mesh_filename(subject, pose));
  }
  const auto manifest = directory / "manifest.txt";
  std::ofstream out(manifest);
  require(out.good(), ErrorCode::IoError, "cannot write " + manifest.string());
  out << corpus.manifest_text;
  require(out.good(), ErrorCode::IoError, "write failed for " + manifest.string());
  return manifest;
}

}  // namespace specmatch
