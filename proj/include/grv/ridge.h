#pragma once

#include <Eigen/Dense>

namespace grv {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// argmin_x ||A x - b||^2 + lambda ||x||^2 through the d x d normal
// equations (A^T A + lambda I) x = A^T b. With lambda == 0 a singular normal
// matrix throws E_SINGULAR.
Eigen::VectorXd SolveRidgeNormalEquations(const RowMatrix& design,
                                          const Eigen::VectorXd& rhs,
                                          double lambda);

}  // namespace grv
