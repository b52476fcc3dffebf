#include "bimr/ch.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "bimr/kernels.hpp"
#include "bimr/quantiles.hpp"

namespace bimr {

VectorXd lambda_hat(const ZWorkspace& ws, const VectorXd& d, const VectorXd& dp, double beta_fwd) {
    if (d.size() != ws.n() || dp.size() != ws.n()) throw DimensionError("lambda_hat: length mismatch");
    return ws.residual(dp - beta_fwd * d);
}

ThetaPair theta_hats(const ZWorkspace& ws, const VectorXd& d, const VectorXd& dp,
                     const VectorXd& lambda) {
    if (lambda.size() != ws.n()) throw DimensionError("theta_hats: length mismatch");
    ThetaPair tp;
    tp.theta_d = ws.solve_gram(kernels::tmatvec(ws.z(), d.cwiseProduct(lambda)));
    const VectorXd w = dp.cwiseProduct(lambda);
    tp.theta_dp = ws.solve_gram(kernels::tmatvec(ws.z(), w));

    const VectorXd resid = w - ws.z() * tp.theta_dp;
    const MatrixXd cov = sandwich_cov(ws, resid.array().square());

    Eigen::LLT<MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) {
        tp.omega = llt.solve(MatrixXd::Identity(ws.p(), ws.p()));
    } else {
        // Degenerate covariance (e.g. constant residuals): fall back to a
        // spectral pseudo-inverse and flag it.
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(cov);
        const VectorXd& ev = es.eigenvalues();
        const double cut = 1e-12 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
        VectorXd inv = VectorXd::Zero(ev.size());
        for (int i = 0; i < ev.size(); ++i)
            if (ev[i] > cut) inv[i] = 1.0 / ev[i];
        tp.omega = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
        tp.omega_pinv = true;
    }
    return tp;
}

double ch_statistic(const ThetaPair& tp) {
    return tp.theta_dp.dot(tp.omega * tp.theta_dp);
}

bool ch_test(const ThetaPair& tp, int n) {
    const int p = static_cast<int>(tp.theta_dp.size());
    return ch_statistic(tp) >= chi2_quantile(p, 1.0 - 1.0 / static_cast<double>(n));
}

Maybe ch_beta(const ThetaPair& tp, const MatrixXd& sigma) {
    const double denom = tp.theta_dp.dot(sigma * tp.theta_dp);
    if (!std::isfinite(denom) || denom <= 0.0) return std::nullopt;
    const double num = tp.theta_dp.dot(sigma * tp.theta_d);
    if (!std::isfinite(num)) return std::nullopt;
    return num / denom;
}

DirectionalEstimate ch_estimate(const ZWorkspace& ws, const VectorXd& d, const VectorXd& dp,
                                const VectorXd& lambda, const ThetaPair& tp,
                                const VectorXd& fwd_influence, ChVariance mode) {
    DirectionalEstimate est;
    const Maybe beta = ch_beta(tp, ws.sigma());
    if (!beta) return est;

    const double n = static_cast<double>(ws.n());
    const double q = tp.theta_dp.dot(ws.sigma() * tp.theta_dp);

    // Estimating-equation score: s_i = (theta_dp' z_i) * (d_i - beta dp_i) * lambda_i.
    const VectorXd ztheta = ws.z() * tp.theta_dp;
    const VectorXd nu = d - *beta * dp;
    VectorXd score = ztheta.cwiseProduct(nu).cwiseProduct(lambda);

    if (mode == ChVariance::Propagated) {
        if (fwd_influence.size() != ws.n())
            throw DimensionError("ch_estimate: forward influence required for propagation");
        // d(lambda)/d(beta_fwd) = -resid(d); fold the forward-stage noise in.
        const VectorXd rd = ws.residual(d);
        const double kappa = -ztheta.cwiseProduct(nu).dot(rd) / n;
        score += kappa * fwd_influence;
    }

    est.beta = beta;
    est.variance = score.squaredNorm() / n / (q * q);
    return est;
}

}  // namespace bimr
