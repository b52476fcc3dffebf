#include <doctest.h>

#include <cmath>

#include "bimr/dgp.hpp"
#include "bimr/oracle.hpp"
#include "bimr/rng.hpp"

using namespace bimr;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Structured spec with block sizes (valid-for-X, shared, valid-for-Y) and
// per-coordinate effect sizes.
PopulationSpec block_spec(double b_xy, double b_yx, int s_x, int s_xy, int s_y,
                          std::uint64_t seed) {
    Rng rng(seed);
    const int p = s_x + s_xy + s_y + 2;
    PopulationSpec spec;
    spec.beta_xy = b_xy;
    spec.beta_yx = b_yx;
    spec.pi_x = VectorXd::Zero(p);
    spec.pi_y = VectorXd::Zero(p);
    for (int j = 0; j < s_x + s_xy; ++j) spec.pi_x[j] = 0.4 + 0.6 * rng.uniform01();
    for (int j = s_x; j < s_x + s_xy + s_y; ++j) spec.pi_y[j] = 0.3 + 0.5 * rng.uniform01();
    spec.sigma = MatrixXd::Identity(p, p);
    spec.zeta_sq_z = VectorXd::Zero(p);
    spec.eta_sq_z = VectorXd::Zero(p);
    spec.zeta_sq_z[s_x] = 1.3;
    spec.zeta_sq_z[s_x + 1] = -0.7;
    spec.eta_sq_z[0] = 0.9;
    spec.eta_sq_z[1] = -1.1;
    return spec;
}

}  // namespace

TEST_CASE("reduced-form effects satisfy the structural fixed point") {
    Rng rng(5);
    for (int trial = 0; trial < 25; ++trial) {
        const int p = 3 + static_cast<int>(rng.uniform01() * 6);
        PopulationSpec spec;
        spec.beta_xy = 2.0 * rng.uniform01() - 1.0;
        spec.beta_yx = 2.0 * rng.uniform01() - 1.0;
        if (std::abs(std::abs(spec.beta_xy * spec.beta_yx) - 1.0) < 1e-3) continue;
        spec.pi_x = VectorXd::Zero(p);
        spec.pi_y = VectorXd::Zero(p);
        for (int j = 0; j < p; ++j) {
            spec.pi_x[j] = rng.normal();
            spec.pi_y[j] = rng.normal();
        }
        const PopulationGammas g = population_gammas(spec);
        const VectorXd id1 = g.gamma_y - (spec.pi_y + spec.beta_xy * g.gamma_x);
        const VectorXd id2 = g.gamma_x - (spec.pi_x + spec.beta_yx * g.gamma_y);
        CHECK(id1.cwiseAbs().maxCoeff() < 1e-12);
        CHECK(id2.cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("mode extraction clusters and breaks ties correctly") {
    const IndexSet idx{10, 20, 30, 40, 50};
    VectorXd r(5);

    r << 1.0, 1.0 + 2e-10, 1.0 - 3e-10, 4.0, 7.0;  // one cluster of three
    ModeResult m = population_mode(r, idx);
    CHECK(m.unique);
    CHECK(m.members == IndexSet{10, 20, 30});
    CHECK(m.value == doctest::Approx(1.0).epsilon(1e-9));

    r << 1.0, 1.0, 5.0, 5.0, 9.0;  // two clusters of two: tie
    m = population_mode(r, idx);
    CHECK_FALSE(m.unique);

    r << 3.0, 2.0, 1.0, 2.0 + 1e-12, 9.0;  // cluster {2.0, 2.0+eps}
    m = population_mode(r, idx);
    CHECK(m.unique);
    CHECK(m.members == IndexSet{20, 40});

    // the reported value is a member, exactly
    r << 2.5, 2.5, 2.5, 0.0, 1.0;
    m = population_mode(r, idx);
    CHECK(m.value == 2.5);

    CHECK_FALSE(population_mode(VectorXd(), IndexSet{}).unique);
}

TEST_CASE("spec validation rejects ill-posed populations") {
    PopulationSpec spec = block_spec(0.5, 2.0, 3, 2, 2, 1);
    CHECK_THROWS_AS(spec.validate(), DomainError);  // b_xy * b_yx = 1

    spec = block_spec(0.5, -0.2, 3, 2, 2, 1);
    spec.validate();
    spec.sigma(0, 0) = -1.0;
    CHECK_THROWS_AS(spec.validate(), SingularityError);

    spec = block_spec(0.5, -0.2, 3, 2, 2, 1);
    spec.pi_y.conservativeResize(3);
    CHECK_THROWS_AS(spec.validate(), DimensionError);
}

TEST_CASE("uni-directional populations are recovered exactly") {
    // forward effect only: reverse side degenerates to INF and the selection
    // rule lands on side I with h = 1
    const PopulationSpec fwd = block_spec(0.7, 0.0, 6, 3, 2, 11);
    const OracleTriplet i = oracle_pch(fwd, Direction::XtoY);
    REQUIRE(i.beta_fwd.has_value());
    CHECK(*i.beta_fwd == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(i.valid_set == IndexSet{0, 1, 2, 3, 4, 5});
    REQUIRE(i.beta_rev.has_value());
    CHECK(*i.beta_rev == doctest::Approx(0.0).epsilon(1e-12));

    const OracleTriplet ii = oracle_pch(fwd, Direction::YtoX);
    REQUIRE(ii.beta_fwd.has_value());  // misidentified mode, finite
    CHECK_FALSE(ii.beta_rev.has_value());  // heterogeneity degenerates: INF

    const OracleSelection sel = oracle_select(i, ii);
    CHECK(sel.side == 1);
    CHECK(sel.defined);
    CHECK(sel.h == 1);
    CHECK(*sel.beta_xy == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(*sel.beta_yx == doctest::Approx(0.0).epsilon(1e-12));

    // reverse effect only: mirrored through the same machinery
    const PopulationSpec rev = block_spec(0.0, -0.6, 6, 3, 2, 12);
    const OracleTriplet ri = oracle_pch(rev, Direction::XtoY);
    REQUIRE(ri.beta_fwd.has_value());
    CHECK(*ri.beta_fwd == doctest::Approx(0.0).epsilon(1e-12));
    REQUIRE(ri.beta_rev.has_value());
    CHECK(*ri.beta_rev == doctest::Approx(-0.6).epsilon(1e-10));
    const OracleSelection rsel = oracle_select(ri, oracle_pch(rev, Direction::YtoX));
    CHECK(rsel.side == 1);
    CHECK(rsel.h == -1);
}

TEST_CASE("bi-directional populations give two reciprocal pairs") {
    const PopulationSpec spec = block_spec(0.8, -0.5, 7, 3, 3, 21);
    const OracleTriplet i = oracle_pch(spec, Direction::XtoY);
    const OracleTriplet ii = oracle_pch(spec, Direction::YtoX);
    REQUIRE(i.beta_fwd.has_value());
    REQUIRE(i.beta_rev.has_value());
    REQUIRE(ii.beta_fwd.has_value());
    REQUIRE(ii.beta_rev.has_value());

    // side I carries the truth
    CHECK(*i.beta_fwd == doctest::Approx(0.8).epsilon(1e-10));
    CHECK(*i.beta_rev == doctest::Approx(-0.5).epsilon(1e-10));
    // side II carries the reciprocal pair
    CHECK(*i.beta_fwd * *ii.beta_fwd == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(*i.beta_rev * *ii.beta_rev == doctest::Approx(1.0).epsilon(1e-10));

    // equal valid-set sizes break toward side I
    const OracleSelection sel = oracle_select(i, ii);
    CHECK(sel.side == 1);
    CHECK(sel.h == 2);
}

TEST_CASE("selection handles doubly degenerate populations") {
    OracleTriplet none;  // everything INF
    const OracleSelection sel = oracle_select(none, none);
    CHECK_FALSE(sel.defined);
    CHECK(sel.side == 1);
    CHECK(sel.h == 0);

    OracleTriplet only_ii;
    only_ii.beta_fwd = 2.0;
    only_ii.beta_rev = 0.25;
    only_ii.valid_set = IndexSet{0, 1};
    const OracleSelection s2 = oracle_select(none, only_ii);
    CHECK(s2.defined);
    CHECK(s2.side == 2);
    CHECK(*s2.beta_xy == doctest::Approx(0.25));
    CHECK(*s2.beta_yx == doctest::Approx(2.0));
}

TEST_CASE("simulation-design populations match the hand-worked block structure") {
    SimConfig cfg;  // defaults: p=50, s_x=15, s_xy=8, s_y=5
    cfg.beta_xy = 0.5;
    cfg.beta_yx = -0.4;
    const PopulationSpec spec = population_spec(cfg);

    const OracleTriplet i = oracle_pch(spec, Direction::XtoY);
    REQUIRE(i.beta_fwd.has_value());
    CHECK(*i.beta_fwd == doctest::Approx(0.5).epsilon(1e-12));
    REQUIRE(i.beta_rev.has_value());
    CHECK(*i.beta_rev == doctest::Approx(-0.4).epsilon(1e-10));
    IndexSet first15;
    for (int j = 0; j < 15; ++j) first15.push_back(j);
    CHECK(i.valid_set == first15);

    const OracleTriplet ii = oracle_pch(spec, Direction::YtoX);
    REQUIRE(ii.beta_fwd.has_value());
    CHECK(*ii.beta_fwd == doctest::Approx(1.0 / 0.5).epsilon(1e-10));
    CHECK(ii.valid_set.size() == 15);
}
