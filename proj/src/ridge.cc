#include "grv/ridge.h"

#include <cmath>

#include "grv/common.h"

namespace grv {

Eigen::VectorXd SolveRidgeNormalEquations(const RowMatrix& design,
                                          const Eigen::VectorXd& rhs,
                                          double lambda) {
  if (!(lambda >= 0.0)) throw Error("E_CONFIG", "ridge lambda must be >= 0");
  if (design.rows() != rhs.size()) {
    throw Error("E_DIM", "design/rhs row mismatch");
  }
  const Eigen::Index d = design.cols();
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(d, d);
  normal.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose());
  normal.diagonal().array() += lambda;
  const Eigen::VectorXd moment = design.transpose() * rhs;

  if (lambda > 0.0) {
    Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(normal);
    if (llt.info() == Eigen::Success) return llt.solve(moment);
  }
  Eigen::LDLT<Eigen::MatrixXd, Eigen::Lower> ldlt(normal);
  const Eigen::VectorXd pivots = ldlt.vectorD().cwiseAbs();
  const double largest = pivots.size() > 0 ? pivots.maxCoeff() : 0.0;
  const double threshold =
      largest * static_cast<double>(d) * Eigen::NumTraits<double>::epsilon();
  if (ldlt.info() != Eigen::Success || pivots.size() == 0 ||
      pivots.minCoeff() <= threshold) {
    throw Error("E_SINGULAR",
                "normal matrix is singular; use a ridge lambda > 0");
  }
  return ldlt.solve(moment);
}

}  // namespace grv
