#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "laplace_detail.hpp"
#include "specmatch/error.hpp"
#include "specmatch/laplace.hpp"
#include "specmatch/rng.hpp"

namespace specmatch::detail {

namespace {

// Operator C = M^{1/2} (L - sigma M)^{-1} M^{1/2}: the shift-inverted form of
// the symmetrized pencil. Its largest eigenvalues theta map to the
// generalized eigenvalues nearest sigma via lambda = sigma + 1/theta, with
// eigenvectors y = M^{1/2} phi.
class ShiftInvertOp {
public:
  ShiftInvertOp(const Eigen::SparseMatrix<double>& stiffness, const Eigen::VectorXd& mass, double sigma)
      : sqrt_mass_(mass.cwiseSqrt()) {
    Eigen::SparseMatrix<double> shifted = stiffness;
    for (int i = 0; i < mass.size(); ++i) shifted.coeffRef(i, i) -= sigma * mass[i];
    shifted.makeCompressed();
    solver_.compute(shifted);
    require(solver_.info() == Eigen::Success, ErrorCode::ConvergenceFailure,
            "factorization of shifted stiffness failed");
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    return sqrt_mass_.cwiseProduct(solver_.solve(sqrt_mass_.cwiseProduct(x)));
  }

private:
  Eigen::VectorXd sqrt_mass_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

// Gershgorin bound on the generalized spectrum, used to scale the shift.
double max_eigenvalue_estimate(const Eigen::SparseMatrix<double>& stiffness, const Eigen::VectorXd& mass) {
  Eigen::VectorXd row_abs = Eigen::VectorXd::Zero(mass.size());
  for (int k = 0; k < stiffness.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(stiffness, k); it; ++it) {
      row_abs[it.row()] += std::abs(it.value());
    }
  }
  return (row_abs.cwiseQuotient(mass)).maxCoeff();
}

}  // namespace

LaplaceSpectrum shift_invert_lanczos(const Eigen::SparseMatrix<double>& stiffness, const Eigen::VectorXd& mass,
                                     int modes, const EigsOptions& options) {
  const int n = static_cast<int>(mass.size());

  // The requested shift is a lower bound: a magnitude below roughly
  // 1e-6 * lambda_max makes the factorization so ill-conditioned that solve
  // noise alone exceeds the residual contract, so it is scaled up to the
  // spectrum. Any sigma < 0 targets the same (smallest) eigenvalues.
  const double lambda_max = max_eigenvalue_estimate(stiffness, mass);
  const double sigma = -std::max(std::abs(options.shift), 1e-6 * lambda_max);
  const ShiftInvertOp op(stiffness, mass, sigma);

  Rng rng(options.seed);
  auto random_vector = [&rng, n]() {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.next_normal();
    return v;
  };

  const int max_dim = std::min(n, std::max(4 * modes + 16, modes + 320));
  int target_dim = std::min(n, 2 * modes + 16);

  Eigen::MatrixXd basis(n, max_dim);
  std::vector<double> alpha, beta;  // beta[j] couples columns j and j+1
  alpha.reserve(static_cast<std::size_t>(max_dim));
  beta.reserve(static_cast<std::size_t>(max_dim));

  auto reorthogonalize = [&basis](Eigen::VectorXd& w, int count) {
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd coeffs = basis.leftCols(count).transpose() * w;
      w.noalias() -= basis.leftCols(count) * coeffs;
    }
  };

  basis.col(0) = random_vector().normalized();
  int dim = 0;
  double operator_scale = 1.0;
  bool basis_complete = false;

  const Eigen::VectorXd inv_sqrt_mass = mass.cwiseSqrt().cwiseInverse();
  LaplaceSpectrum spectrum;
  spectrum.mass = mass;

  while (true) {
    while (dim < target_dim && !basis_complete) {
      Eigen::VectorXd w = op.apply(basis.col(dim));
      const double a = basis.col(dim).dot(w);
      operator_scale = std::max(operator_scale, std::abs(a));
      alpha.push_back(a);
      w.noalias() -= a * basis.col(dim);
      if (dim > 0) w.noalias() -= beta[static_cast<std::size_t>(dim) - 1] * basis.col(dim - 1);
      reorthogonalize(w, dim + 1);
      double b = w.norm();
      if (b <= 1e-13 * operator_scale) {
        // invariant subspace: continue from a fresh orthogonal direction
        w = random_vector();
        reorthogonalize(w, dim + 1);
        const double norm = w.norm();
        if (norm < 1e-6) {
          basis_complete = true;  // Krylov basis spans the whole space
          break;
        }
        w /= norm;
        b = 0.0;
      } else {
        w /= b;
      }
      beta.push_back(b);
      ++dim;
      if (dim < max_dim) basis.col(dim) = w;
    }

    // Ritz values of the tridiagonal section
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri_solver;
    {
      Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), dim);
      Eigen::VectorXd sub(dim > 1 ? dim - 1 : 0);
      for (int i = 0; i + 1 < dim; ++i) sub[i] = beta[static_cast<std::size_t>(i)];
      tri_solver.computeFromTridiagonal(diag, sub);
    }
    require(tri_solver.info() == Eigen::Success, ErrorCode::ConvergenceFailure,
            "tridiagonal eigensolver failed");

    const int take = std::min(modes, dim);
    const bool last_chance = basis_complete || target_dim >= max_dim;

    // cheap screening: bottom-row residual estimate per wanted Ritz pair
    bool plausible = take == modes;
    if (plausible && dim > take && !last_chance) {
      const double b_last = beta.empty() ? 0.0 : beta.back();
      for (int k = 0; k < take && plausible; ++k) {
        const int col = dim - 1 - k;
        const double theta = tri_solver.eigenvalues()[col];
        const double est = std::abs(b_last * tri_solver.eigenvectors()(dim - 1, col));
        if (est > 1e-9 * std::max(std::abs(theta), 1e-30)) plausible = false;
      }
    }

    if (plausible || last_chance) {
      // Ritz vectors, mapped back to the pencil and refined by a
      // Rayleigh-Ritz projection in (L, M); the projection also returns
      // M-orthonormal columns.
      Eigen::MatrixXd ritz(n, take);
      for (int k = 0; k < take; ++k) {
        ritz.col(k) =
            inv_sqrt_mass.cwiseProduct(basis.leftCols(dim) * tri_solver.eigenvectors().col(dim - 1 - k));
      }
      Eigen::MatrixXd projected_l = ritz.transpose() * (stiffness * ritz);
      Eigen::MatrixXd projected_m = ritz.transpose() * (mass.asDiagonal() * ritz);
      projected_l = 0.5 * (projected_l + projected_l.transpose());
      projected_m = 0.5 * (projected_m + projected_m.transpose());
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> refine(projected_l, projected_m);
      if (refine.info() == Eigen::Success) {
        spectrum.eigenvalues = refine.eigenvalues();
        spectrum.eigenfunctions = ritz * refine.eigenvectors();
        laplace_fix_signs(spectrum.eigenfunctions);

        if (take == modes) {
          bool converged = true;
          const Eigen::MatrixXd lhs = stiffness * spectrum.eigenfunctions;
          const Eigen::MatrixXd mphi = mass.asDiagonal() * spectrum.eigenfunctions;
          for (int k = 0; k < modes && converged; ++k) {
            const double lambda = spectrum.eigenvalues[k];
            const double residual = (lhs.col(k) - lambda * mphi.col(k)).norm();
            if (residual > options.residual_tol * (1.0 + std::abs(lambda)) * mphi.col(k).norm()) {
              converged = false;
            }
          }
          if (converged) return spectrum;
        }
      }
    }

    require(!last_chance, ErrorCode::ConvergenceFailure,
            "shift-invert Lanczos did not converge for " + std::to_string(modes) + " modes (subspace " +
                std::to_string(dim) + " of " + std::to_string(n) + ")");
    target_dim = std::min(max_dim, target_dim + std::max(32, modes / 2));
  }
}

}  // namespace specmatch::detail
