#include "bimr/inference.hpp"

#include <cmath>

#include "bimr/quantiles.hpp"

namespace bimr {

namespace {

// NA intervals cannot certify that zero is excluded.
bool excludes_zero(const MaybeInterval& iv) { return iv && !iv->contains(0.0); }

double max_abs(double a, double b) { return std::max(std::abs(a), std::abs(b)); }

}  // namespace

ConfidenceInterval ci(double beta, double variance, int n, double alpha) {
    if (n < 1) throw DimensionError("ci: need n >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("ci: alpha must be in (0,1)");
    if (variance < 0.0) throw DomainError("ci: negative variance");
    const double hw = normal_quantile(1.0 - alpha / 2.0) * std::sqrt(variance / n);
    return {beta - hw, beta + hw};
}

MaybeInterval ci(const Maybe& beta, const Maybe& variance, int n, double alpha) {
    if (!beta || !variance) return std::nullopt;
    return ci(*beta, *variance, n, alpha);
}

int true_direction(double beta_xy, double beta_yx) {
    const bool fwd = beta_xy != 0.0, rev = beta_yx != 0.0;
    if (fwd && rev) return 2;
    if (fwd) return 1;
    if (rev) return -1;
    return 0;
}

const char* branch_name(Branch b) {
    switch (b) {
        case Branch::IiNa: return "II_NA";
        case Branch::INa: return "I_NA";
        case Branch::VoteCompareI: return "VOTE_COMPARE_I";
        case Branch::VoteCompareII: return "VOTE_COMPARE_II";
        case Branch::BidirI: return "BIDIR_I";
        case Branch::BidirII: return "BIDIR_II";
    }
    return "?";
}

const char* sign_prior_name(SignPrior p) {
    switch (p) {
        case SignPrior::XyPosYxNeg: return "XY_POS_YX_NEG";
        case SignPrior::XyNegYxPos: return "XY_NEG_YX_POS";
        case SignPrior::Magnitude: return "MAGNITUDE";
    }
    return "?";
}

InferenceResult infer(const PCHOutput& out_xy, const PCHOutput& out_yx, int n, double alpha,
                      SignPrior prior) {
    InferenceResult res;
    res.prior = prior;
    res.n_valid_i = static_cast<int>(out_xy.forward.valid_set.size());
    res.n_valid_ii = static_cast<int>(out_yx.forward.valid_set.size());
    res.plurality_ok_i = out_xy.plurality_ok;
    res.ch_ok_i = out_xy.ch_ok;
    res.plurality_ok_ii = out_yx.plurality_ok;
    res.ch_ok_ii = out_yx.ch_ok;

    // The four candidate estimates. Side I: (beta_xy, beta_yx) from the
    // X-as-exposure run; side II: the same parameters from the Y-as-exposure
    // run (its forward estimate is beta_yx).
    const DirectionalEstimate& xy_i = out_xy.forward;
    const DirectionalEstimate& yx_i = out_xy.reverse;
    const DirectionalEstimate& yx_ii = out_yx.forward;
    const DirectionalEstimate& xy_ii = out_yx.reverse;

    const double a_detect = 1.0 / static_cast<double>(n);
    const MaybeInterval d_xy_i = ci(xy_i.beta, xy_i.variance, n, a_detect);
    const MaybeInterval d_yx_i = ci(yx_i.beta, yx_i.variance, n, a_detect);
    const MaybeInterval d_yx_ii = ci(yx_ii.beta, yx_ii.variance, n, a_detect);
    const MaybeInterval d_xy_ii = ci(xy_ii.beta, xy_ii.variance, n, a_detect);

    const bool union_defined = d_xy_i && d_yx_i && d_yx_ii && d_xy_ii;
    const bool union_excludes_zero = union_defined && !d_xy_i->contains(0.0) &&
                                     !d_yx_i->contains(0.0) && !d_yx_ii->contains(0.0) &&
                                     !d_xy_ii->contains(0.0);

    if (union_excludes_zero) {
        // Both directions detected; the prior disambiguates the two pairs.
        res.h_hat = 2;
        bool pick_i = true;
        switch (prior) {
            case SignPrior::XyPosYxNeg: pick_i = *xy_i.beta > *xy_ii.beta; break;
            case SignPrior::XyNegYxPos: pick_i = *xy_i.beta < *xy_ii.beta; break;
            case SignPrior::Magnitude:
                pick_i = max_abs(*xy_i.beta, *yx_i.beta) <= max_abs(*xy_ii.beta, *yx_ii.beta);
                break;
        }
        res.branch = pick_i ? Branch::BidirI : Branch::BidirII;
        res.side = pick_i ? 1 : 2;
    } else {
        // At most one direction present; decide which run to trust.
        if (yx_ii.is_na() || xy_ii.is_na()) {
            res.branch = Branch::IiNa;
            res.side = 1;
        } else if (xy_i.is_na() || yx_i.is_na()) {
            res.branch = Branch::INa;
            res.side = 2;
        } else if (res.n_valid_i >= res.n_valid_ii) {
            res.branch = Branch::VoteCompareI;
            res.side = 1;
        } else {
            res.branch = Branch::VoteCompareII;
            res.side = 2;
        }
    }

    const DirectionalEstimate& est_xy = (res.side == 1) ? xy_i : xy_ii;
    const DirectionalEstimate& est_yx = (res.side == 1) ? yx_i : yx_ii;
    res.beta_xy = est_xy.beta;
    res.var_xy = est_xy.variance;
    res.beta_yx = est_yx.beta;
    res.var_yx = est_yx.variance;
    res.ci_xy = ci(est_xy.beta, est_xy.variance, n, alpha);
    res.ci_yx = ci(est_yx.beta, est_yx.variance, n, alpha);

    if (res.h_hat != 2) {
        const MaybeInterval det_xy = ci(est_xy.beta, est_xy.variance, n, a_detect);
        const MaybeInterval det_yx = ci(est_yx.beta, est_yx.variance, n, a_detect);
        res.h_hat = (excludes_zero(det_xy) ? 1 : 0) - (excludes_zero(det_yx) ? 1 : 0);
    }

    if (!res.beta_xy && !res.beta_yx) {
        res.assumptions_undetectable = true;
        res.h_hat = 0;
    }
    return res;
}

}  // namespace bimr
