// SPDX-License-Identifier: Apache-2.0
#include "rismtc/linalg.hpp"

#include <cmath>

namespace rismtc {

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMat hermitian_pinv(const CMat& a, double tol) {
  Eigen::SelfAdjointEigenSolver<CMat> eig(hermitian_part(a));
  const RVec& lambda = eig.eigenvalues();
  const double cutoff = tol * lambda.cwiseAbs().maxCoeff();
  RVec inv = RVec::Zero(lambda.size());
  for (Eigen::Index k = 0; k < lambda.size(); ++k)
    if (std::abs(lambda(k)) > cutoff && lambda(k) != 0.0) inv(k) = 1.0 / lambda(k);
  const CMat& V = eig.eigenvectors();
  return V * inv.cast<cd>().asDiagonal() * V.adjoint();
}

RMat symmetric_pinv(const RMat& a, double tol) {
  Eigen::SelfAdjointEigenSolver<RMat> eig(0.5 * (a + a.transpose()));
  const RVec& lambda = eig.eigenvalues();
  const double cutoff = tol * lambda.cwiseAbs().maxCoeff();
  RVec inv = RVec::Zero(lambda.size());
  for (Eigen::Index k = 0; k < lambda.size(); ++k)
    if (std::abs(lambda(k)) > cutoff && lambda(k) != 0.0) inv(k) = 1.0 / lambda(k);
  const RMat& V = eig.eigenvectors();
  return V * inv.asDiagonal() * V.transpose();
}

CMat hermitian_part(const CMat& a) { return 0.5 * (a + a.adjoint()); }

CVec vec(const CMat& x) { return Eigen::Map<const CVec>(x.data(), x.size()); }

CMat unvec(const CVec& x, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const CMat>(x.data(), rows, cols);
}

}  // namespace rismtc
