#pragma once

#include <Eigen/Cholesky>

#include "bimr/types.hpp"

namespace bimr {

/// Subtracts the column mean from every column. Empty input is an error.
MatrixXd center(const MatrixXd& m);
VectorXd center(const VectorXd& v);

/// Shared per-dataset factorization: Z^T Z and its Cholesky, validated for
/// full column rank (offending columns are named on failure). Z must outlive
/// the workspace.
class ZWorkspace {
  public:
    /// Aliases z for its lifetime; the caller keeps ownership.
    explicit ZWorkspace(const MatrixXd& z);
    explicit ZWorkspace(MatrixXd&&) = delete;

    const MatrixXd& z() const { return z_; }
    const MatrixXd& gram() const { return gram_; }
    /// Empirical second-moment matrix Z^T Z / n.
    const MatrixXd& sigma() const { return sigma_; }
    int n() const { return static_cast<int>(z_.rows()); }
    int p() const { return static_cast<int>(z_.cols()); }

    /// (Z^T Z)^{-1} b.
    VectorXd solve_gram(const VectorXd& b) const { return llt_.solve(b); }
    MatrixXd solve_gram(const MatrixXd& b) const { return llt_.solve(b); }
    /// OLS coefficients (Z^T Z)^{-1} Z^T v.
    VectorXd coef(const VectorXd& v) const;
    /// v - Z (Z^T Z)^{-1} Z^T v.
    VectorXd residual(const VectorXd& v) const;

  private:
    const MatrixXd& z_;
    MatrixXd gram_;
    MatrixXd sigma_;
    Eigen::LLT<MatrixXd> llt_;
};

/// Reduced-form regression of one trait on all candidate instruments.
/// se[j] is the heteroscedasticity-robust (sandwich) standard error of
/// gamma[j], so gamma[j]/se[j] is asymptotically N(0,1) when gamma_j = 0.
struct ReducedForm {
    VectorXd gamma;
    VectorXd residuals;
    VectorXd se;
};

ReducedForm ols_reduced_form(const MatrixXd& z, const VectorXd& d);
ReducedForm ols_reduced_form(const ZWorkspace& ws, const VectorXd& d);

/// Full sandwich covariance (Z^T Z)^{-1} [Z^T diag(w) Z] (Z^T Z)^{-1}.
/// With w = squared residuals this is the covariance of the OLS coefficients.
MatrixXd sandwich_cov(const ZWorkspace& ws, const VectorXd& w);

/// Z^T Z / n.
MatrixXd sigma_hat(const MatrixXd& z);

/// Residual-maker: v minus its projection onto the column span of Z.
VectorXd residual_projection(const MatrixXd& z, const VectorXd& v);

}  // namespace bimr
