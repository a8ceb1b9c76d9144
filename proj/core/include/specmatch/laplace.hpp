#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <cstdint>
#include <filesystem>

#include "specmatch/mesh.hpp"

namespace specmatch {

// Cotangent stiffness (positive semi-definite, symmetric, zero row sums) and
// barycentric lumped mass diagonal. clamped_cotangents counts sliver
// triangles whose cotangents hit the +-1e6 clamp.
struct OperatorPair {
  Eigen::SparseMatrix<double> stiffness;
  Eigen::VectorXd mass;
  int clamped_cotangents = 0;

  int size() const { return static_cast<int>(mass.size()); }
};

// Smallest-m eigenpairs of  stiffness * phi = lambda * mass * phi.
// Eigenvalues ascend; eigenfunction columns are mass-orthonormal and
// sign-fixed (largest-magnitude entry positive, lowest index on ties).
struct LaplaceSpectrum {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenfunctions;  // n x m
  Eigen::VectorXd mass;

  int vertex_count() const { return static_cast<int>(eigenfunctions.rows()); }
  int mode_count() const { return static_cast<int>(eigenvalues.size()); }
};

enum class EigsMethod { Auto, Dense, ShiftInvertLanczos };

struct EigsOptions {
  EigsMethod method = EigsMethod::Auto;
  int dense_threshold = 1500;     // Auto picks the dense path at or below this size
  double residual_tol = 1e-8;     // ||L phi - lambda M phi|| <= tol * (1+lambda) * ||M phi||
  double shift = -1e-8;           // shift-invert target (just below zero)
  std::uint64_t seed = 0x1ec57a9d;  // Lanczos start vector
};

OperatorPair build_operators(const TriMesh& mesh);

LaplaceSpectrum compute_spectrum(const OperatorPair& ops, int modes, const EigsOptions& options = {});

// True when the spectrum satisfies the generalized eigen-residual bound for
// these operators; used to validate on-disk caches against the current mesh.
bool spectrum_consistent(const LaplaceSpectrum& spectrum, const OperatorPair& ops, double tol = 1e-6);

// LBS1 cache file: magic, n and m as u64 LE, eigenvalues, mass, then
// eigenfunctions column-major, all float64 LE.
void save_spectrum(const LaplaceSpectrum& spectrum, const std::filesystem::path& path);
LaplaceSpectrum load_spectrum(const std::filesystem::path& path);

namespace detail {
// Shift-invert Lanczos with full reorthogonalization; exposed for tests.
LaplaceSpectrum shift_invert_lanczos(const Eigen::SparseMatrix<double>& stiffness, const Eigen::VectorXd& mass,
                                     int modes, const EigsOptions& options);
}  // namespace detail

}  // namespace specmatch
