#include "bimr/baselines.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "bimr/inference.hpp"
#include "bimr/tsht.hpp"

namespace bimr {

DirectionalEstimate ivw_estimate(const ReducedForm& rf_exp, const ReducedForm& rf_out, int n) {
    DirectionalEstimate est;
    const IndexSet relevant = select_relevant(rf_exp, n);
    if (relevant.empty()) return est;

    double sw = 0.0, swr = 0.0;
    for (int j : relevant) {
        const double ge = rf_exp.gamma[j];
        const double r = rf_out.gamma[j] / ge;
        const double var_fs =
            (rf_out.se[j] * rf_out.se[j] + r * r * rf_exp.se[j] * rf_exp.se[j]) / (ge * ge);
        const double w = 1.0 / var_fs;
        sw += w;
        swr += w * r;
    }
    est.beta = swr / sw;
    est.variance = static_cast<double>(n) / sw;
    est.valid_set = relevant;
    return est;
}

DirectionalEstimate egger_estimate(const ReducedForm& rf_exp, const ReducedForm& rf_out, int n) {
    DirectionalEstimate est;
    const IndexSet relevant = select_relevant(rf_exp, n);
    const int m = static_cast<int>(relevant.size());
    if (m < 3) return est;

    // Orient every coordinate so the exposure association is positive.
    VectorXd ge(m), go(m), w(m);
    for (int i = 0; i < m; ++i) {
        const int j = relevant[i];
        const double flip = rf_exp.gamma[j] < 0.0 ? -1.0 : 1.0;
        ge[i] = flip * rf_exp.gamma[j];
        go[i] = flip * rf_out.gamma[j];
        w[i] = 1.0 / (rf_out.se[j] * rf_out.se[j]);
    }

    // Weighted LS of go on [1, ge].
    Eigen::Matrix2d xtwx;
    Eigen::Vector2d xtwy;
    xtwx << w.sum(), w.dot(ge), w.dot(ge), ge.cwiseProduct(w).dot(ge);
    xtwy << w.dot(go), ge.cwiseProduct(w).dot(go);
    const Eigen::Vector2d coef = xtwx.ldlt().solve(xtwy);

    // Robust slope variance from the weighted residuals.
    const VectorXd resid = go - VectorXd::Constant(m, coef[0]) - coef[1] * ge;
    Eigen::Matrix2d meat = Eigen::Matrix2d::Zero();
    for (int i = 0; i < m; ++i) {
        Eigen::Vector2d xi(1.0, ge[i]);
        meat += (w[i] * resid[i]) * (w[i] * resid[i]) * xi * xi.transpose();
    }
    const Eigen::Matrix2d inv = xtwx.inverse();
    const Eigen::Matrix2d cov = inv * meat * inv;

    est.beta = coef[1];
    est.variance = static_cast<double>(n) * cov(1, 1);
    est.valid_set = relevant;
    return est;
}

DirectionalEstimate tsht_estimate(const ZWorkspace& ws, const VectorXd& d, const VectorXd& dp,
                                  const ReducedForm& rf_d, const ReducedForm& rf_dp) {
    DirectionalEstimate est;
    const IndexSet relevant = select_relevant(rf_d, ws.n());
    if (relevant.empty()) return est;
    const SelectionResult sel = vote(ws, rf_d, rf_dp, relevant);
    return tsls_fit(ws, d, dp, sel.plurality_set, rf_d).est;
}

const char* baseline_name(BaselineMethod m) {
    switch (m) {
        case BaselineMethod::Ivw: return "ivw";
        case BaselineMethod::Egger: return "egger";
        case BaselineMethod::Tsht: return "tsht";
    }
    return "?";
}

BaselineResult run_baseline(BaselineMethod method, const ZWorkspace& ws, const VectorXd& x,
                            const VectorXd& y, const ReducedForm& rf_x, const ReducedForm& rf_y,
                            double alpha) {
    BaselineResult res;
    res.method = method;
    switch (method) {
        case BaselineMethod::Ivw:
            res.xy = ivw_estimate(rf_x, rf_y, ws.n());
            res.yx = ivw_estimate(rf_y, rf_x, ws.n());
            break;
        case BaselineMethod::Egger:
            res.xy = egger_estimate(rf_x, rf_y, ws.n());
            res.yx = egger_estimate(rf_y, rf_x, ws.n());
            break;
        case BaselineMethod::Tsht:
            res.xy = tsht_estimate(ws, x, y, rf_x, rf_y);
            res.yx = tsht_estimate(ws, y, x, rf_y, rf_x);
            break;
    }
    res.ci_xy = ci(res.xy.beta, res.xy.variance, ws.n(), alpha);
    res.ci_yx = ci(res.yx.beta, res.yx.variance, ws.n(), alpha);

    const double a_detect = 1.0 / static_cast<double>(ws.n());
    const MaybeInterval det_xy = ci(res.xy.beta, res.xy.variance, ws.n(), a_detect);
    const MaybeInterval det_yx = ci(res.yx.beta, res.yx.variance, ws.n(), a_detect);
    const bool sig_xy = det_xy && !det_xy->contains(0.0);
    const bool sig_yx = det_yx && !det_yx->contains(0.0);
    if (sig_xy && sig_yx)
        res.h_call = 2;
    else
        res.h_call = (sig_xy ? 1 : 0) - (sig_yx ? 1 : 0);
    return res;
}

}  // namespace bimr
