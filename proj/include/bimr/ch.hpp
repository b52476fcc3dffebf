#pragma once

#include "bimr/core_stats.hpp"
#include "bimr/types.hpp"

namespace bimr {

/// Projection residual of dp - beta_fwd * d on the instrument span: the
/// carrier of covariance heterogeneity for the reverse direction.
VectorXd lambda_hat(const ZWorkspace& ws, const VectorXd& d, const VectorXd& dp, double beta_fwd);

/// Reduced-form coefficients of the interactions (d .* lambda) and
/// (dp .* lambda) on z, plus the inverse sandwich covariance of the latter
/// (the weighting matrix of the heterogeneity test).
struct ThetaPair {
    VectorXd theta_d;
    VectorXd theta_dp;
    MatrixXd omega;
    bool omega_pinv = false;  // set when the covariance needed a pseudo-inverse
};

ThetaPair theta_hats(const ZWorkspace& ws, const VectorXd& d, const VectorXd& dp,
                     const VectorXd& lambda);

/// Wald statistic theta_dp' Omega theta_dp.
double ch_statistic(const ThetaPair& tp);

/// Accepts heterogeneity when the statistic reaches the chi-square(p)
/// quantile at level 1 - 1/n.
bool ch_test(const ThetaPair& tp, int n);

/// Ratio estimate (theta_dp' Sigma theta_d) / (theta_dp' Sigma theta_dp);
/// NA when the denominator degenerates.
Maybe ch_beta(const ThetaPair& tp, const MatrixXd& sigma);

/// Variance recipe for the reverse-direction ratio.
enum class ChVariance {
    Propagated,  // sandwich + first-order propagation of the forward-beta error
    PlugIn,      // sandwich treating forward beta and lambda as fixed
};

/// Reverse-direction estimate with its n-scaled asymptotic variance.
/// fwd_influence carries the per-observation influence of the forward TSLS
/// estimate (ignored under PlugIn; may be empty only in that mode).
DirectionalEstimate ch_estimate(const ZWorkspace& ws, const VectorXd& d, const VectorXd& dp,
                                const VectorXd& lambda, const ThetaPair& tp,
                                const VectorXd& fwd_influence,
                                ChVariance mode = ChVariance::Propagated);

}  // namespace bimr
