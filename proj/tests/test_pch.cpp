#include <doctest.h>

#include <cmath>

#include "bimr/dgp.hpp"
#include "bimr/pch.hpp"
#include "bimr/rng.hpp"

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

SimConfig one_way_config() {
    SimConfig cfg;
    cfg.n = 20000;
    cfg.p = 15;
    cfg.s_x = 6;
    cfg.s_xy = 4;
    cfg.s_y = 3;
    cfg.beta_xy = 0.5;
    cfg.beta_yx = 0.0;
    cfg.pi_strength_x = 1.0;
    cfg.seed = 2024;
    return cfg;
}

}  // namespace

TEST_CASE("one-way data: forward run estimates both parameters") {
    const SimConfig cfg = one_way_config();
    const GeneratedData gen = generate(cfg, 0);
    const ZWorkspace ws(gen.data.z);
    const ReducedForm rf_x = ols_reduced_form(ws, gen.data.x);
    const ReducedForm rf_y = ols_reduced_form(ws, gen.data.y);

    const PCHOutput out = pch(ws, gen.data.x, gen.data.y, rf_x, rf_y);
    CHECK(out.plurality_ok);
    CHECK(out.ch_ok);
    REQUIRE(out.forward.beta.has_value());
    CHECK(std::abs(*out.forward.beta - 0.5) < 0.05);
    CHECK(*out.forward.variance > 0.0);
    CHECK(out.forward.valid_set == IndexSet{0, 1, 2, 3, 4, 5});

    // the heterogeneity estimate of the reverse effect is consistent for 0
    REQUIRE(out.reverse.beta.has_value());
    CHECK(std::abs(*out.reverse.beta) < 0.1);
    CHECK(*out.reverse.variance > 0.0);

    // the convenience overload reproduces the workspace-sharing run exactly
    const PCHOutput again = pch(gen.data.x, gen.data.y, gen.data.z);
    CHECK(*again.forward.beta == *out.forward.beta);
    CHECK(*again.forward.variance == *out.forward.variance);
    CHECK(*again.reverse.beta == *out.reverse.beta);
    CHECK(again.selection.plurality_set == out.selection.plurality_set);
}

TEST_CASE("one-way data: reverse run is stopped by the heterogeneity test") {
    const SimConfig cfg = one_way_config();
    const GeneratedData gen = generate(cfg, 0);
    const ZWorkspace ws(gen.data.z);
    const ReducedForm rf_x = ols_reduced_form(ws, gen.data.x);
    const ReducedForm rf_y = ols_reduced_form(ws, gen.data.y);

    // exposure and outcome swapped: the ratio mode sits at 1/0.5 and the
    // voting happily picks it, but the heterogeneity statistic stays small
    const PCHOutput out = pch(ws, gen.data.y, gen.data.x, rf_y, rf_x);
    CHECK(out.plurality_ok);
    REQUIRE(out.forward.beta.has_value());
    CHECK(std::abs(*out.forward.beta - 2.0) < 0.2);
    CHECK_FALSE(out.ch_ok);
    CHECK(out.reverse.is_na());
}

TEST_CASE("a ratio tie abstains instead of guessing") {
    // two instruments with well-separated ratios: two singleton clusters
    // at one vote each, so no unique mode exists at any noise level
    const int n = 120, p = 2;
    const MatrixXd z = random_matrix(n, p, 31);
    Rng rng(32);
    VectorXd d(n), dp(n);
    for (int i = 0; i < n; ++i) {
        d[i] = z(i, 0) + z(i, 1) + 0.3 * rng.normal();
        dp[i] = z(i, 0) + 5.0 * z(i, 1) + 0.3 * rng.normal();
    }

    const PCHOutput out = pch(d, dp, z);
    CHECK_FALSE(out.selection.mode_unique);
    CHECK_FALSE(out.plurality_ok);
    CHECK_FALSE(out.ch_ok);
    CHECK(out.forward.is_na());
    CHECK(out.reverse.is_na());
    CHECK(out.forward.valid_set.empty());
}

TEST_CASE("no relevant instruments: every stage reports NA") {
    const int n = 2000, p = 3;
    const MatrixXd z = random_matrix(n, p, 77);
    Rng rng(78);
    VectorXd d(n), dp(n);
    for (int i = 0; i < n; ++i) {
        d[i] = rng.normal();
        dp[i] = 0.3 * d[i] + rng.normal();
    }
    const PCHOutput out = pch(d, dp, z);
    CHECK(out.selection.relevant.empty());
    CHECK_FALSE(out.plurality_ok);
    CHECK(out.forward.is_na());
    CHECK(out.reverse.is_na());
}
