#include "bimr/pch.hpp"

namespace bimr {

PCHOutput pch(const ZWorkspace& ws, const VectorXd& d, const VectorXd& dp,
              const ReducedForm& rf_d, const ReducedForm& rf_dp, ChVariance vmode) {
    PCHOutput out;

    const IndexSet relevant = select_relevant(rf_d, ws.n());
    out.selection = vote(ws, rf_d, rf_dp, relevant);
    if (!out.selection.mode_unique) return out;
    out.plurality_ok = true;

    const TslsFit fit = tsls_fit(ws, d, dp, out.selection.plurality_set, rf_d);
    out.forward = fit.est;
    if (out.forward.is_na()) {
        out.plurality_ok = false;
        return out;
    }

    // Reverse direction through covariance heterogeneity. P-perp is linear,
    // so the projection residual reuses the reduced-form residuals.
    const VectorXd lambda = rf_dp.residuals - *out.forward.beta * rf_d.residuals;
    const ThetaPair tp = theta_hats(ws, d, dp, lambda);
    out.ch_ok = ch_test(tp, ws.n());
    if (!out.ch_ok) return out;

    out.reverse = ch_estimate(ws, d, dp, lambda, tp, fit.influence, vmode);
    return out;
}

PCHOutput pch(const VectorXd& d, const VectorXd& dp, const MatrixXd& z, ChVariance vmode) {
    ZWorkspace ws(z);
    const ReducedForm rf_d = ols_reduced_form(ws, d);
    const ReducedForm rf_dp = ols_reduced_form(ws, dp);
    return pch(ws, d, dp, rf_d, rf_dp, vmode);
}

}  // namespace bimr
