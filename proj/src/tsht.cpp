#include "bimr/tsht.hpp"

#include <algorithm>
#include <cmath>

#include "bimr/kernels.hpp"

namespace bimr {

IndexSet select_relevant(const ReducedForm& rf, int n) {
    if (n < 2) throw DimensionError("select_relevant: need n >= 2");
    if (rf.gamma.size() != rf.se.size()) throw DimensionError("select_relevant: gamma/se mismatch");
    const double root_log_n = std::sqrt(std::log(static_cast<double>(n)));
    IndexSet out;
    for (int j = 0; j < rf.gamma.size(); ++j)
        if (std::abs(rf.gamma[j]) >= rf.se[j] * root_log_n) out.push_back(j);
    return out;
}

RatioTable ratio_table(const ZWorkspace& ws, const ReducedForm& rf_d, const ReducedForm& rf_dp,
                       const IndexSet& relevant) {
    RatioTable t;
    t.index = relevant;
    const int m = static_cast<int>(relevant.size());
    t.ratio.resize(m);
    t.variance.resize(m);
    if (m == 0) return t;

    // Cross term of the joint sandwich covariance of (gamma_dp, gamma_d).
    const VectorXd cross_w = rf_d.residuals.cwiseProduct(rf_dp.residuals);
    const VectorXd cross_diag = sandwich_cov(ws, cross_w).diagonal();

    for (int i = 0; i < m; ++i) {
        const int j = relevant[i];
        const double gd = rf_d.gamma[j];
        const double r = rf_dp.gamma[j] / gd;
        t.ratio[i] = r;
        const double var_dp = rf_dp.se[j] * rf_dp.se[j];
        const double var_d = rf_d.se[j] * rf_d.se[j];
        t.variance[i] = (var_dp - 2.0 * r * cross_diag[j] + r * r * var_d) / (gd * gd);
    }
    return t;
}

int SelectionResult::max_vote() const {
    int m = 0;
    for (int v : votes) m = std::max(m, v);
    return m;
}

SelectionResult vote(const ZWorkspace& ws, const ReducedForm& rf_d, const ReducedForm& rf_dp,
                     const IndexSet& relevant) {
    SelectionResult sel;
    sel.relevant = relevant;
    const int m = static_cast<int>(relevant.size());
    sel.votes.assign(m, 0);
    if (m == 0) return sel;

    const RatioTable t = ratio_table(ws, rf_d, rf_dp, relevant);
    const double root_log_n = std::sqrt(std::log(static_cast<double>(ws.n())));

    for (int i = 0; i < m; ++i) {
        int q = 0;
        for (int k = 0; k < m; ++k) {
            const double tol =
                root_log_n * std::sqrt(std::max(0.0, t.variance[k] + t.variance[i]));
            if (std::abs(t.ratio[k] - t.ratio[i]) <= tol) ++q;
        }
        sel.votes[i] = q;
    }

    const int top = *std::max_element(sel.votes.begin(), sel.votes.end());
    for (int i = 0; i < m; ++i)
        if (sel.votes[i] == top) sel.plurality_set.push_back(relevant[i]);
    sel.mode_unique = static_cast<int>(sel.plurality_set.size()) == top;
    return sel;
}

TslsFit tsls_fit(const ZWorkspace& ws, const VectorXd& d, const VectorXd& dp,
                 const IndexSet& valid, const ReducedForm& rf_d) {
    TslsFit fit;
    if (valid.empty()) return fit;

    const int n = ws.n(), p = ws.p();
    std::vector<bool> in_valid(p, false);
    for (int j : valid) {
        if (j < 0 || j >= p) throw DimensionError("tsls: valid index out of range");
        in_valid[j] = true;
    }

    // W = [fitted-d, controls], controls = instruments outside the valid set.
    const int q = 1 + p - static_cast<int>(valid.size());
    MatrixXd w(n, q);
    w.col(0) = ws.z() * rf_d.gamma;
    int c = 1;
    for (int j = 0; j < p; ++j)
        if (!in_valid[j]) w.col(c++) = ws.z().col(j);

    const MatrixXd wtw = kernels::gram(w);
    Eigen::LLT<MatrixXd> llt(wtw);
    if (llt.info() != Eigen::Success)
        throw SingularityError("tsls: singular second-stage design");
    const VectorXd coef = llt.solve(kernels::tmatvec(w, dp));

    const double beta = coef[0];
    // Structural residuals use the raw exposure, not its fitted values.
    VectorXd u = dp - beta * d;
    for (int k = 1; k < q; ++k) u -= coef[k] * w.col(k);

    const MatrixXd meat = kernels::weighted_gram(w, u.array().square());
    const MatrixXd cov = llt.solve(MatrixXd(llt.solve(meat).transpose())).transpose();

    fit.est.beta = beta;
    fit.est.variance = static_cast<double>(n) * cov(0, 0);
    fit.est.valid_set = valid;

    // influence_i = [ (W^T W / n)^{-1} w_i u_i ]_0  =>  mean(influence^2) = variance.
    VectorXd a0 = llt.solve(VectorXd(VectorXd::Unit(q, 0)));
    fit.influence = static_cast<double>(n) * (w * a0).cwiseProduct(u);
    return fit;
}

DirectionalEstimate modified_tsls(const VectorXd& d, const VectorXd& dp, const MatrixXd& z,
                                  const IndexSet& valid) {
    ZWorkspace ws(z);
    const ReducedForm rf_d = ols_reduced_form(ws, d);
    return tsls_fit(ws, d, dp, valid, rf_d).est;
}

}  // namespace bimr
