#pragma once

#include "bimr/core_stats.hpp"
#include "bimr/types.hpp"

namespace bimr {

/// Hard-thresholding step: indices j with |gamma_j| >= se_j * sqrt(log n),
/// i.e. the coordinates whose reduced-form association survives a
/// sqrt(log n / n)-scale cut. Inclusive at the boundary.
IndexSet select_relevant(const ReducedForm& rf, int n);

/// Ratios gamma_dp[j]/gamma_d[j] over a relevant set together with their
/// delta-method variances, computed from the joint sandwich covariance of the
/// two reduced-form fits (shared design, cross term included).
struct RatioTable {
    IndexSet index;
    VectorXd ratio;
    VectorXd variance;  // finite-sample variance of each ratio
};

RatioTable ratio_table(const ZWorkspace& ws, const ReducedForm& rf_d, const ReducedForm& rf_dp,
                       const IndexSet& relevant);

/// Voting among relevant instruments. Instrument k votes for j when their
/// ratios agree within sqrt(log n) * sqrt(var_k + var_j). The plurality set
/// collects the max-vote instruments; the mode is declared unique only when
/// the plurality set size equals the max vote count (a strictly larger set
/// means overlapping clusters tied for the win).
struct SelectionResult {
    IndexSet relevant;
    std::vector<int> votes;  // aligned with relevant
    IndexSet plurality_set;
    bool mode_unique = false;

    int max_vote() const;
};

SelectionResult vote(const ZWorkspace& ws, const ReducedForm& rf_d, const ReducedForm& rf_dp,
                     const IndexSet& relevant);

/// TSLS of dp on d using instruments z[:, valid] with the remaining columns
/// included as exogenous controls. First stage fits d on all of z; the
/// coefficient on fitted-d is the estimate. The variance field holds the
/// n-scaled sandwich variance built from structural residuals (raw d).
DirectionalEstimate modified_tsls(const VectorXd& d, const VectorXd& dp, const MatrixXd& z,
                                  const IndexSet& valid);

/// Same fit plus the per-observation influence values used by downstream
/// variance propagation: mean(influence^2) equals the variance field.
struct TslsFit {
    DirectionalEstimate est;
    VectorXd influence;  // empty when est is NA
};

TslsFit tsls_fit(const ZWorkspace& ws, const VectorXd& d, const VectorXd& dp,
                 const IndexSet& valid, const ReducedForm& rf_d);

}  // namespace bimr
