#include <doctest.h>

#include <cmath>

#include "bimr/rng.hpp"
#include "bimr/tsht.hpp"

using namespace bimr;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_matrix(int n, int p, std::uint64_t seed) {
    Rng rng(seed);
    MatrixXd m(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) m(i, j) = rng.normal();
    return m;
}

// Synthetic reduced form with chosen coefficients/errors and zeroed
// residuals, for driving the selection logic directly.
ReducedForm injected(const VectorXd& gamma, const VectorXd& se, int n) {
    ReducedForm rf;
    rf.gamma = gamma;
    rf.se = se;
    rf.residuals = VectorXd::Zero(n);
    return rf;
}

}  // namespace

TEST_CASE("relevance cut is inclusive at the threshold") {
    const int n = 500;
    const double root_log_n = std::sqrt(std::log(static_cast<double>(n)));
    VectorXd se(4), gamma(4);
    se << 0.1, 0.2, 0.05, 0.3;
    gamma[0] = se[0] * root_log_n;                    // exactly at the cut: kept
    gamma[1] = se[1] * root_log_n * (1.0 - 1e-12);    // hair below: dropped
    gamma[2] = -se[2] * root_log_n * 2.0;             // well above (sign ignored)
    gamma[3] = 0.0;
    const ReducedForm rf = injected(gamma, se, n);
    CHECK(select_relevant(rf, n) == IndexSet{0, 2});
    CHECK_THROWS_AS(select_relevant(rf, 1), DimensionError);
}

TEST_CASE("ratio table matches the delta-method formula") {
    const int n = 150, p = 4;
    const MatrixXd z = random_matrix(n, p, 7);
    const ZWorkspace ws(z);
    Rng rng(8);
    VectorXd d(n), dp(n);
    for (int i = 0; i < n; ++i) {
        d[i] = z(i, 0) + 0.5 * z(i, 1) + rng.normal();
        dp[i] = 2.0 * d[i] + z(i, 2) + rng.normal();
    }
    const ReducedForm rf_d = ols_reduced_form(ws, d);
    const ReducedForm rf_dp = ols_reduced_form(ws, dp);

    const IndexSet relevant{0, 1, 3};
    const RatioTable t = ratio_table(ws, rf_d, rf_dp, relevant);
    REQUIRE(t.index == relevant);

    const MatrixXd gram_inv = (z.transpose() * z).inverse();
    const VectorXd cross_w = rf_d.residuals.cwiseProduct(rf_dp.residuals);
    const MatrixXd cross = gram_inv * (z.transpose() * cross_w.asDiagonal() * z) * gram_inv;
    for (int i = 0; i < 3; ++i) {
        const int j = relevant[i];
        const double r = rf_dp.gamma[j] / rf_d.gamma[j];
        CHECK(t.ratio[i] == doctest::Approx(r).epsilon(1e-12));
        const double want = (rf_dp.se[j] * rf_dp.se[j] - 2.0 * r * cross(j, j) +
                             r * r * rf_d.se[j] * rf_d.se[j]) /
                            (rf_d.gamma[j] * rf_d.gamma[j]);
        CHECK(t.variance[i] == doctest::Approx(want).epsilon(1e-10));
    }
}

TEST_CASE("voting finds a clear plurality") {
    const int n = 200, p = 5;
    const MatrixXd z = random_matrix(n, p, 17);
    const ZWorkspace ws(z);
    // Ratios 1,1,1,5,9 with negligible uncertainty: votes 3,3,3,1,1.
    VectorXd gd = VectorXd::Ones(p);
    VectorXd gdp(p);
    gdp << 1.0, 1.0, 1.0, 5.0, 9.0;
    const VectorXd se = VectorXd::Constant(p, 1e-7);
    const ReducedForm rf_d = injected(gd, se, n);
    const ReducedForm rf_dp = injected(gdp, se, n);

    const SelectionResult sel = vote(ws, rf_d, rf_dp, IndexSet{0, 1, 2, 3, 4});
    CHECK(sel.votes == std::vector<int>{3, 3, 3, 1, 1});
    CHECK(sel.plurality_set == IndexSet{0, 1, 2});
    CHECK(sel.max_vote() == 3);
    CHECK(sel.mode_unique);
}

TEST_CASE("tied clusters are flagged as non-unique") {
    const int n = 200, p = 4;
    const MatrixXd z = random_matrix(n, p, 18);
    const ZWorkspace ws(z);
    VectorXd gd = VectorXd::Ones(p);
    VectorXd gdp(p);
    gdp << 1.0, 1.0, 5.0, 5.0;  // two clusters of two
    const VectorXd se = VectorXd::Constant(p, 1e-7);
    const SelectionResult sel =
        vote(ws, injected(gd, se, n), injected(gdp, se, n), IndexSet{0, 1, 2, 3});
    CHECK(sel.votes == std::vector<int>{2, 2, 2, 2});
    CHECK(sel.plurality_set.size() == 4);
    CHECK_FALSE(sel.mode_unique);
}

TEST_CASE("voting on an empty relevant set is a clean no-selection") {
    const MatrixXd z = random_matrix(50, 3, 19);
    const ZWorkspace ws(z);
    const ReducedForm rf = injected(VectorXd::Ones(3), VectorXd::Constant(3, 1e-3), 50);
    const SelectionResult sel = vote(ws, rf, rf, IndexSet{});
    CHECK(sel.plurality_set.empty());
    CHECK_FALSE(sel.mode_unique);
    CHECK(sel.max_vote() == 0);
}

TEST_CASE("two-stage fit matches a dense reference") {
    const int n = 300, p = 6;
    MatrixXd z = center(random_matrix(n, p, 27));
    Rng rng(28);
    VectorXd d(n), dp(n);
    for (int i = 0; i < n; ++i) {
        d[i] = z.row(i).head(4).sum() + rng.normal();
        dp[i] = 1.5 * d[i] + 2.0 * z(i, 4) - z(i, 5) + rng.normal();
    }
    d = center(d);
    dp = center(dp);

    const ZWorkspace ws(z);
    const ReducedForm rf_d = ols_reduced_form(ws, d);
    const IndexSet valid{0, 1, 2, 3};
    const TslsFit fit = tsls_fit(ws, d, dp, valid, rf_d);
    REQUIRE_FALSE(fit.est.is_na());

    // Reference: regress dp on [fitted-d, z4, z5], sandwich with structural
    // residuals built from the raw exposure.
    MatrixXd w(n, 3);
    w.col(0) = z * rf_d.gamma;
    w.col(1) = z.col(4);
    w.col(2) = z.col(5);
    const MatrixXd wtw_inv = (w.transpose() * w).inverse();
    const VectorXd coef = wtw_inv * w.transpose() * dp;
    CHECK(*fit.est.beta == doctest::Approx(coef[0]).epsilon(1e-10));
    CHECK(*fit.est.beta == doctest::Approx(1.5).epsilon(0.1));

    const VectorXd u = dp - coef[0] * d - coef[1] * w.col(1) - coef[2] * w.col(2);
    const MatrixXd meat = w.transpose() * u.array().square().matrix().asDiagonal() * w;
    const MatrixXd cov = wtw_inv * meat * wtw_inv;
    CHECK(*fit.est.variance == doctest::Approx(n * cov(0, 0)).epsilon(1e-9));

    // influence values reproduce the variance and are centered at zero
    REQUIRE(fit.influence.size() == n);
    CHECK(fit.influence.squaredNorm() / n == doctest::Approx(*fit.est.variance).epsilon(1e-9));
    CHECK(std::abs(fit.influence.mean()) < 0.2 * std::sqrt(*fit.est.variance));

    // the standalone entry point agrees
    const DirectionalEstimate alone = modified_tsls(d, dp, z, valid);
    CHECK(*alone.beta == doctest::Approx(*fit.est.beta).epsilon(1e-12));
    CHECK(*alone.variance == doctest::Approx(*fit.est.variance).epsilon(1e-12));
}

TEST_CASE("two-stage fit edge cases") {
    const int n = 60, p = 3;
    const MatrixXd z = random_matrix(n, p, 31);
    const ZWorkspace ws(z);
    const VectorXd d = z.col(0) + 0.1 * random_matrix(n, 1, 32).col(0);
    const VectorXd dp = 2.0 * d;
    const ReducedForm rf_d = ols_reduced_form(ws, d);

    const TslsFit empty = tsls_fit(ws, d, dp, IndexSet{}, rf_d);
    CHECK(empty.est.is_na());
    CHECK(empty.influence.size() == 0);
    CHECK_THROWS_AS(tsls_fit(ws, d, dp, IndexSet{5}, rf_d), DimensionError);
}

TEST_CASE("all instruments valid reduces to plain TSLS") {
    const int n = 250, p = 4;
    MatrixXd z = center(random_matrix(n, p, 41));
    Rng rng(42);
    VectorXd d(n);
    for (int i = 0; i < n; ++i) d[i] = z.row(i).sum() + rng.normal();
    VectorXd dp(n);
    for (int i = 0; i < n; ++i) dp[i] = -0.7 * d[i] + rng.normal();
    d = center(d);
    dp = center(dp);

    const DirectionalEstimate est = modified_tsls(d, dp, z, IndexSet{0, 1, 2, 3});
    // classic TSLS ratio: (fitted-d' dp) / (fitted-d' fitted-d)
    const ZWorkspace ws(z);
    const VectorXd fit = z * ws.coef(d);
    CHECK(*est.beta == doctest::Approx(fit.dot(dp) / fit.dot(fit)).epsilon(1e-10));
}
