#include "specmatch/mesh.hpp"

#include <Eigen/Geometry>

#include <string>

#include "specmatch/error.hpp"

namespace specmatch {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DegenerateFace: return "DegenerateFace";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DisconnectedMesh: return "DisconnectedMesh";
    case ErrorCode::DegenerateTriangle: return "DegenerateTriangle";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::InsufficientVertices: return "InsufficientVertices";
    case ErrorCode::ZeroEigenvalue: return "ZeroEigenvalue";
    case ErrorCode::InvalidSchedule: return "InvalidSchedule";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::DescriptorMissing: return "DescriptorMissing";
    case ErrorCode::VertexCountMismatch: return "VertexCountMismatch";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::ManifestParseError: return "ManifestParseError";
    case ErrorCode::EmptyTestSet: return "EmptyTestSet";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

double TriMesh::face_area(int f) const {
  const Eigen::Vector3d a = vertices.row(faces(f, 0));
  const Eigen::Vector3d b = vertices.row(faces(f, 1));
  const Eigen::Vector3d c = vertices.row(faces(f, 2));
  return 0.5 * (b - a).cross(c - a).norm();
}

double TriMesh::mean_edge_length() const {
  if (face_count() == 0) return 0.0;
  double total = 0.0;
  for (int f = 0; f < face_count(); ++f) {
    for (int e = 0; e < 3; ++e) {
      const Eigen::Vector3d u = vertices.row(faces(f, e));
      const Eigen::Vector3d v = vertices.row(faces(f, (e + 1) % 3));
      total += (u - v).norm();
    }
  }
  return total / (3.0 * face_count());
}

void TriMesh::validate() const {
  const int n = vertex_count();
  for (int f = 0; f < face_count(); ++f) {
    for (int e = 0; e < 3; ++e) {
      const int idx = faces(f, e);
      require(idx >= 0 && idx < n, ErrorCode::IndexOutOfRange,
              "face " + std::to_string(f) + " references vertex " + std::to_string(idx) +
                  " of " + std::to_string(n));
    }
    const int a = faces(f, 0), b = faces(f, 1), c = faces(f, 2);
    require(a != b && b != c && a != c, ErrorCode::DegenerateFace,
            "face " + std::to_string(f) + " repeats a vertex index");
  }
  const double mel = mean_edge_length();
  const double area_floor = 1e-12 * mel * mel;
  for (int f = 0; f < face_count(); ++f) {
    require(face_area(f) > area_floor, ErrorCode::DegenerateFace,
            "face " + std::to_string(f) + " has (near-)zero area");
  }
}

std::uint64_t mesh_content_hash(const TriMesh& mesh) {
  // FNV-1a over the raw coordinate and index bytes.
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ull;
    }
  };
  const std::uint64_t nv = mesh.vertices.rows(), nf = mesh.faces.rows();
  mix(&nv, sizeof nv);
  mix(&nf, sizeof nf);
  for (int i = 0; i < mesh.vertices.rows(); ++i) {
    for (int j = 0; j < 3; ++j) {
      const double v = mesh.vertices(i, j);
      mix(&v, sizeof v);
    }
  }
  for (int i = 0; i < mesh.faces.rows(); ++i) {
    for (int j = 0; j < 3; ++j) {
      const std::int64_t v = mesh.faces(i, j);
      mix(&v, sizeof v);
    }
  }
  return h;
}

}  // namespace specmatch
