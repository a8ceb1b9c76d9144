#pragma once

#include <Eigen/Core>

namespace specmatch::detail {

void laplace_fix_signs(Eigen::MatrixXd& columns);
void laplace_mass_orthonormalize(Eigen::MatrixXd& columns, const Eigen::VectorXd& mass);

}  // namespace specmatch::detail
