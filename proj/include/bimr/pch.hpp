#pragma once

#include "bimr/ch.hpp"
#include "bimr/tsht.hpp"
#include "bimr/types.hpp"

namespace bimr {

/// One direction of the two-stage pipeline: thresholding + voting + TSLS for
/// exposure -> outcome, then the covariance-heterogeneity reverse estimate.
/// Statistical failures surface as NA fields with the flags telling which
/// stage gave up: plurality_ok is the voting mode-uniqueness diagnostic,
/// ch_ok the heterogeneity test.
struct PCHOutput {
    DirectionalEstimate forward;  // exposure -> outcome; valid_set populated
    DirectionalEstimate reverse;  // outcome -> exposure via heterogeneity
    bool plurality_ok = false;
    bool ch_ok = false;
    SelectionResult selection;  // relevant set + votes, for diagnostics
};

PCHOutput pch(const VectorXd& d, const VectorXd& dp, const MatrixXd& z,
              ChVariance vmode = ChVariance::Propagated);

/// Workspace-sharing variant: rf_d / rf_dp are the reduced forms of d and dp
/// on ws.z(), so running both directions costs one set of regressions.
PCHOutput pch(const ZWorkspace& ws, const VectorXd& d, const VectorXd& dp,
              const ReducedForm& rf_d, const ReducedForm& rf_dp,
              ChVariance vmode = ChVariance::Propagated);

}  // namespace bimr
