#include "specmatch/laplace.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "binio.hpp"
#include "specmatch/error.hpp"

namespace specmatch {

namespace {

constexpr double kCotClamp = 1e6;

double clamped_cot(const Eigen::Vector3d& u, const Eigen::Vector3d& v, int& clamp_count) {
  const double cross = u.cross(v).norm();
  const double dot = u.dot(v);
  if (cross <= std::abs(dot) / kCotClamp) {
    ++clamp_count;
    return dot >= 0.0 ? kCotClamp : -kCotClamp;
  }
  return dot / cross;
}

// Deterministic sign convention: largest-magnitude entry positive, first
// such entry on exact ties.
void fix_signs(Eigen::MatrixXd& columns) {
  for (int k = 0; k < columns.cols(); ++k) {
    int best = 0;
    double best_abs = std::abs(columns(0, k));
    for (int i = 1; i < columns.rows(); ++i) {
      const double a = std::abs(columns(i, k));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (columns(best, k) < 0.0) columns.col(k) = -columns.col(k);
  }
}

// Modified Gram-Schmidt in the mass inner product. Mixes only within
// (near-)degenerate eigenspaces, so residuals survive.
void mass_orthonormalize(Eigen::MatrixXd& columns, const Eigen::VectorXd& mass) {
  for (int k = 0; k < columns.cols(); ++k) {
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < k; ++j) {
        const double proj = columns.col(j).dot(mass.cwiseProduct(columns.col(k)));
        columns.col(k) -= proj * columns.col(j);
      }
    }
    const double norm = std::sqrt(columns.col(k).dot(mass.cwiseProduct(columns.col(k))));
    require(norm > 0.0, ErrorCode::ConvergenceFailure, "eigenfunction collapsed during orthonormalization");
    columns.col(k) /= norm;
  }
}

LaplaceSpectrum dense_spectrum(const Eigen::SparseMatrix<double>& stiffness, const Eigen::VectorXd& mass,
                               int modes) {
  const Eigen::VectorXd inv_sqrt_mass = mass.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd sym = Eigen::MatrixXd(stiffness);
  sym = inv_sqrt_mass.asDiagonal() * sym * inv_sqrt_mass.asDiagonal();
  sym = 0.5 * (sym + sym.transpose());  // exact symmetry for the dense solver

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  require(solver.info() == Eigen::Success, ErrorCode::ConvergenceFailure, "dense eigensolver failed");

  LaplaceSpectrum spectrum;
  spectrum.eigenvalues = solver.eigenvalues().head(modes);
  spectrum.eigenfunctions = inv_sqrt_mass.asDiagonal() * solver.eigenvectors().leftCols(modes);
  spectrum.mass = mass;
  fix_signs(spectrum.eigenfunctions);
  return spectrum;
}

void check_residuals(const LaplaceSpectrum& spectrum, const Eigen::SparseMatrix<double>& stiffness,
                     const Eigen::VectorXd& mass, double tol) {
  const Eigen::MatrixXd lhs = stiffness * spectrum.eigenfunctions;
  const Eigen::MatrixXd mphi = mass.asDiagonal() * spectrum.eigenfunctions;
  for (int k = 0; k < spectrum.mode_count(); ++k) {
    const double lambda = spectrum.eigenvalues[k];
    const double residual = (lhs.col(k) - lambda * mphi.col(k)).norm();
    const double bound = tol * (1.0 + std::abs(lambda)) * mphi.col(k).norm();
    require(residual <= bound, ErrorCode::ConvergenceFailure,
            "eigenpair " + std::to_string(k) + " residual " + std::to_string(residual) +
                " exceeds bound " + std::to_string(bound));
  }
}

}  // namespace

OperatorPair build_operators(const TriMesh& mesh) {
  mesh.validate();
  const int n = mesh.vertex_count();
  OperatorPair ops;
  ops.mass = Eigen::VectorXd::Zero(n);

  // Accumulate one weight per undirected edge so both triangle entries of a
  // shared edge land in the same accumulator; emitting (i,j) and (j,i) from
  // it keeps the matrix symmetric to the last bit.
  std::map<std::pair<int, int>, double> edge_weight;
  int clamp_count = 0;
  for (int f = 0; f < mesh.face_count(); ++f) {
    const int i = mesh.faces(f, 0), j = mesh.faces(f, 1), k = mesh.faces(f, 2);
    const Eigen::Vector3d a = mesh.vertices.row(i);
    const Eigen::Vector3d b = mesh.vertices.row(j);
    const Eigen::Vector3d c = mesh.vertices.row(k);

    const double area = 0.5 * (b - a).cross(c - a).norm();
    const double third = area / 3.0;
    ops.mass[i] += third;
    ops.mass[j] += third;
    ops.mass[k] += third;

    // half-cotangent of the angle opposite each edge
    edge_weight[std::minmax(j, k)] += 0.5 * clamped_cot(b - a, c - a, clamp_count);
    edge_weight[std::minmax(i, k)] += 0.5 * clamped_cot(a - b, c - b, clamp_count);
    edge_weight[std::minmax(i, j)] += 0.5 * clamped_cot(a - c, b - c, clamp_count);
  }
  ops.clamped_cotangents = clamp_count;
  require(n > 0 && ops.mass.minCoeff() > 0.0, ErrorCode::InvalidArgument,
          "mesh has vertices with no incident faces; the lumped mass must be strictly positive");

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(edge_weight.size() * 2 + n);
  std::vector<double> diagonal(n, 0.0);
  for (const auto& [edge, w] : edge_weight) {
    triplets.emplace_back(edge.first, edge.second, -w);
    triplets.emplace_back(edge.second, edge.first, -w);
    diagonal[edge.first] += w;
    diagonal[edge.second] += w;
  }
  for (int i = 0; i < n; ++i) triplets.emplace_back(i, i, diagonal[i]);

  ops.stiffness.resize(n, n);
  ops.stiffness.setFromTriplets(triplets.begin(), triplets.end());
  ops.stiffness.makeCompressed();
  return ops;
}

LaplaceSpectrum compute_spectrum(const OperatorPair& ops, int modes, const EigsOptions& options) {
  const int n = ops.size();
  require(modes >= 1, ErrorCode::InvalidArgument, "mode count must be positive");
  require(modes <= n, ErrorCode::InsufficientVertices,
          std::to_string(modes) + " modes requested on " + std::to_string(n) + " vertices");

  EigsMethod method = options.method;
  if (method == EigsMethod::Auto) {
    // Lanczos pays off only when the subspace is small relative to n.
    method = (n <= options.dense_threshold || modes * 2 > n) ? EigsMethod::Dense
                                                             : EigsMethod::ShiftInvertLanczos;
  }

  LaplaceSpectrum spectrum = (method == EigsMethod::Dense)
                                 ? dense_spectrum(ops.stiffness, ops.mass, modes)
                                 : detail::shift_invert_lanczos(ops.stiffness, ops.mass, modes, options);
  check_residuals(spectrum, ops.stiffness, ops.mass, options.residual_tol);
  return spectrum;
}

bool spectrum_consistent(const LaplaceSpectrum& spectrum, const OperatorPair& ops, double tol) {
  if (spectrum.vertex_count() != ops.size()) return false;
  if ((spectrum.mass - ops.mass).cwiseAbs().maxCoeff() > 1e-12 * ops.mass.maxCoeff()) return false;
  const Eigen::MatrixXd lhs = ops.stiffness * spectrum.eigenfunctions;
  const Eigen::MatrixXd mphi = ops.mass.asDiagonal() * spectrum.eigenfunctions;
  for (int k = 0; k < spectrum.mode_count(); ++k) {
    const double lambda = spectrum.eigenvalues[k];
    const double residual = (lhs.col(k) - lambda * mphi.col(k)).norm();
    if (residual > tol * (1.0 + std::abs(lambda)) * mphi.col(k).norm()) return false;
  }
  return true;
}

void save_spectrum(const LaplaceSpectrum& spectrum, const std::filesystem::path& path) {
  binio::Writer out(path);
  out.magic("LBS1");
  out.u64(static_cast<std::uint64_t>(spectrum.vertex_count()));
  out.u64(static_cast<std::uint64_t>(spectrum.mode_count()));
  out.f64_array(spectrum.eigenvalues.data(), static_cast<std::size_t>(spectrum.mode_count()));
  out.f64_array(spectrum.mass.data(), static_cast<std::size_t>(spectrum.vertex_count()));
  // column-major: Eigen's native layout
  out.f64_array(spectrum.eigenfunctions.data(),
                static_cast<std::size_t>(spectrum.vertex_count()) * static_cast<std::size_t>(spectrum.mode_count()));
  out.close();
}

LaplaceSpectrum load_spectrum(const std::filesystem::path& path) {
  binio::Reader in(path);
  in.expect_magic("LBS1");
  const auto n = static_cast<int>(in.u64());
  const auto m = static_cast<int>(in.u64());
  require(n >= 1 && m >= 1 && m <= n, ErrorCode::ParseError, path.string() + ": implausible dimensions");
  LaplaceSpectrum spectrum;
  spectrum.eigenvalues.resize(m);
  spectrum.mass.resize(n);
  spectrum.eigenfunctions.resize(n, m);
  in.f64_array(spectrum.eigenvalues.data(), static_cast<std::size_t>(m));
  in.f64_array(spectrum.mass.data(), static_cast<std::size_t>(n));
  in.f64_array(spectrum.eigenfunctions.data(), static_cast<std::size_t>(n) * static_cast<std::size_t>(m));
  return spectrum;
}

namespace detail {
void laplace_fix_signs(Eigen::MatrixXd& columns) { fix_signs(columns); }
void laplace_mass_orthonormalize(Eigen::MatrixXd& columns, const Eigen::VectorXd& mass) {
  mass_orthonormalize(columns, mass);
}
}  // namespace detail

}  // namespace specmatch
