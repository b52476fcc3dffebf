#include "bimr/core_stats.hpp"

#include <Eigen/QR>
#include <cmath>
#include <sstream>

#include "bimr/kernels.hpp"

namespace bimr {

namespace {

// On Cholesky failure, name the dependent columns via column-pivoted QR.
[[noreturn]] void throw_rank_deficient(const MatrixXd& z) {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(z);
    qr.setThreshold(1e-10);
    const int rank = static_cast<int>(qr.rank());
    const auto& perm = qr.colsPermutation().indices();
    std::ostringstream msg;
    msg << "instrument matrix is rank deficient (rank " << rank << " of " << z.cols()
        << "); dependent columns:";
    for (int i = rank; i < z.cols(); ++i) msg << ' ' << perm[i];
    throw SingularityError(msg.str());
}

}  // namespace

MatrixXd center(const MatrixXd& m) {
    if (m.rows() == 0 || m.cols() == 0) throw DimensionError("center: empty input");
    return m.rowwise() - m.colwise().mean();
}

VectorXd center(const VectorXd& v) {
    if (v.size() == 0) throw DimensionError("center: empty input");
    return v.array() - v.mean();
}

Dataset make_dataset(VectorXd x, VectorXd y, MatrixXd z) {
    const auto n = z.rows();
    if (n == 0 || z.cols() == 0) throw DimensionError("dataset: empty instrument matrix");
    if (x.size() != n || y.size() != n)
        throw DimensionError("dataset: x, y, and z must share the number of rows");
    if (n <= z.cols()) throw DimensionError("dataset: need n > p");
    return Dataset{center(VectorXd(std::move(x))), center(VectorXd(std::move(y))),
                   center(MatrixXd(std::move(z)))};
}

ZWorkspace::ZWorkspace(const MatrixXd& z) : z_(z) {
    if (z.rows() == 0 || z.cols() == 0) throw DimensionError("workspace: empty instrument matrix");
    if (z.rows() <= z.cols()) throw DimensionError("workspace: need n > p");
    gram_ = kernels::gram(z);
    sigma_ = gram_ / static_cast<double>(z.rows());
    llt_.compute(gram_);
    if (llt_.info() != Eigen::Success) throw_rank_deficient(z);
}

VectorXd ZWorkspace::coef(const VectorXd& v) const {
    if (v.size() != z_.rows()) throw DimensionError("coef: length mismatch");
    return llt_.solve(kernels::tmatvec(z_, v));
}

VectorXd ZWorkspace::residual(const VectorXd& v) const { return v - z_ * coef(v); }

ReducedForm ols_reduced_form(const ZWorkspace& ws, const VectorXd& d) {
    ReducedForm rf;
    rf.gamma = ws.coef(d);
    rf.residuals = d - ws.z() * rf.gamma;
    rf.se = sandwich_cov(ws, rf.residuals.array().square()).diagonal().cwiseSqrt();
    return rf;
}

ReducedForm ols_reduced_form(const MatrixXd& z, const VectorXd& d) {
    ZWorkspace ws(z);
    return ols_reduced_form(ws, d);
}

MatrixXd sandwich_cov(const ZWorkspace& ws, const VectorXd& w) {
    const MatrixXd meat = kernels::weighted_gram(ws.z(), w);
    const MatrixXd half = ws.solve_gram(meat);
    return ws.solve_gram(MatrixXd(half.transpose())).transpose();
}

MatrixXd sigma_hat(const MatrixXd& z) {
    if (z.rows() == 0) throw DimensionError("sigma_hat: empty input");
    return kernels::gram(z) / static_cast<double>(z.rows());
}

VectorXd residual_projection(const MatrixXd& z, const VectorXd& v) {
    ZWorkspace ws(z);
    return ws.residual(v);
}

}  // namespace bimr
