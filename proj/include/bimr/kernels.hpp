#pragma once

#include <Eigen/Dense>

namespace bimr::kernels {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Row-accumulation kernels that dominate per-dataset cost (O(n p^2) / O(n p)).
// The parallel versions distribute whole output entries across threads; every
// entry is a straight serial sum over rows, so results are bit-identical to
// the serial reference at any thread count.

/// Z^T Z.
MatrixXd gram(const MatrixXd& z);

/// Z^T v.
VectorXd tmatvec(const MatrixXd& z, const VectorXd& v);

/// Z^T diag(w) Z.
MatrixXd weighted_gram(const MatrixXd& z, const VectorXd& w);

namespace serial {

MatrixXd gram(const MatrixXd& z);
VectorXd tmatvec(const MatrixXd& z, const VectorXd& v);
MatrixXd weighted_gram(const MatrixXd& z, const VectorXd& w);

}  // namespace serial

}  // namespace bimr::kernels
