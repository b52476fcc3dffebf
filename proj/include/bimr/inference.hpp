#pragma once

#include "bimr/pch.hpp"
#include "bimr/types.hpp"

namespace bimr {

/// beta +/- z_{1-alpha/2} * sqrt(variance / n).
ConfidenceInterval ci(double beta, double variance, int n, double alpha);
MaybeInterval ci(const Maybe& beta, const Maybe& variance, int n, double alpha);

/// Direction implied by the true coefficients: 2 both, 1 forward only,
/// -1 reverse only, 0 neither.
int true_direction(double beta_xy, double beta_yx);

/// Prior used to break the bi-directional two-pair ambiguity.
enum class SignPrior {
    XyPosYxNeg,  // positive forward, negative reverse: keep the larger beta_xy
    XyNegYxPos,  // mirrored
    Magnitude,   // keep the pair with the smaller max |beta|
};

/// Which decision path produced the result.
enum class Branch {
    IiNa,           // side II undefined -> side I
    INa,            // side I undefined -> side II
    VoteCompareI,   // valid-set comparison chose side I
    VoteCompareII,  // valid-set comparison chose side II
    BidirI,         // both directions detected; prior chose side I
    BidirII,        // both directions detected; prior chose side II
};

const char* branch_name(Branch b);
const char* sign_prior_name(SignPrior p);

struct InferenceResult {
    int h_hat = 0;
    Maybe beta_xy;
    Maybe beta_yx;
    Maybe var_xy;
    Maybe var_yx;
    MaybeInterval ci_xy;  // at the requested alpha
    MaybeInterval ci_yx;
    Branch branch = Branch::IiNa;
    int side = 1;
    SignPrior prior = SignPrior::XyPosYxNeg;
    bool assumptions_undetectable = false;  // both sides fully NA
    // Carried diagnostics:
    int n_valid_i = 0;
    int n_valid_ii = 0;
    bool plurality_ok_i = false, ch_ok_i = false;
    bool plurality_ok_ii = false, ch_ok_ii = false;
};

/// Combines the two pipeline directions: out_xy treats X as exposure,
/// out_yx treats Y as exposure. Detection runs at level 1 - 1/n; the
/// reported intervals use alpha.
InferenceResult infer(const PCHOutput& out_xy, const PCHOutput& out_yx, int n, double alpha,
                      SignPrior prior = SignPrior::XyPosYxNeg);

}  // namespace bimr
