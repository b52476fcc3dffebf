#pragma once

#include "bimr/core_stats.hpp"
#include "bimr/types.hpp"

namespace bimr {

/// Inverse-variance-weighted mean of the per-instrument ratio estimates over
/// the exposure's relevant set. Ratio variances come from the first-order
/// delta method on the two reduced-form standard errors. NA when the relevant
/// set is empty.
DirectionalEstimate ivw_estimate(const ReducedForm& rf_exp, const ReducedForm& rf_out, int n);

/// Weighted regression of outcome associations on exposure associations with
/// an intercept (weights 1/se_out^2, coordinates oriented to positive
/// exposure association). The slope is the estimate; its variance is the
/// robust (sandwich) slope variance. NA with fewer than 3 relevant
/// instruments.
DirectionalEstimate egger_estimate(const ReducedForm& rf_exp, const ReducedForm& rf_out, int n);

/// Thresholding + voting + TSLS without the mode-uniqueness guard: the
/// plurality set is used as-is. NA when nothing is relevant.
DirectionalEstimate tsht_estimate(const ZWorkspace& ws, const VectorXd& d, const VectorXd& dp,
                                  const ReducedForm& rf_d, const ReducedForm& rf_dp);

enum class BaselineMethod { Ivw, Egger, Tsht };

const char* baseline_name(BaselineMethod m);

/// Both directions of one baseline plus its direction call. The call uses
/// level 1-1/n intervals (both significant -> 2); reported intervals use
/// alpha.
struct BaselineResult {
    BaselineMethod method = BaselineMethod::Ivw;
    DirectionalEstimate xy;
    DirectionalEstimate yx;
    MaybeInterval ci_xy;
    MaybeInterval ci_yx;
    int h_call = 0;
};

BaselineResult run_baseline(BaselineMethod method, const ZWorkspace& ws, const VectorXd& x,
                            const VectorXd& y, const ReducedForm& rf_x, const ReducedForm& rf_y,
                            double alpha);

}  // namespace bimr
