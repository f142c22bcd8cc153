// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rismtc/types.hpp"

namespace rismtc {

CMat kron(const CMat& a, const CMat& b);

// Hermitian pseudo-inverse; eigenvalues below tol * max|eig| are dropped.
CMat hermitian_pinv(const CMat& a, double tol = 1e-12);
RMat symmetric_pinv(const RMat& a, double tol = 1e-12);

CMat hermitian_part(const CMat& a);

// vec(X) for X of size rows x cols stored column-major, and its inverse.
CVec vec(const CMat& x);
CMat unvec(const CVec& x, Eigen::Index rows, Eigen::Index cols);

}  // namespace rismtc
