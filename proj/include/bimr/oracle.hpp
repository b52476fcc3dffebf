#pragma once

#include "bimr/types.hpp"

namespace bimr {

/// Population-level description of the two-trait structural model:
/// direct effects, instrument effect vectors, the second-moment matrix of the
/// (centered) instruments, and the instrument-indexed second moments of the
/// idiosyncratic errors that drive covariance heterogeneity.
struct PopulationSpec {
    double beta_xy = 0.0;
    double beta_yx = 0.0;
    VectorXd pi_x;
    VectorXd pi_y;
    MatrixXd sigma;      // E[Z Z^T]
    VectorXd zeta_sq_z;  // E[zeta^2 Z]
    VectorXd eta_sq_z;   // E[eta^2 Z]

    int p() const { return static_cast<int>(pi_x.size()); }
    void validate() const;
};

/// Reduced-form instrument effects implied by the structural coefficients.
struct PopulationGammas {
    VectorXd gamma_x;
    VectorXd gamma_y;
};

PopulationGammas population_gammas(const PopulationSpec& spec);

enum class Direction { XtoY, YtoX };

/// Population limit of one pipeline direction. INF (identification failure:
/// no ratio mode, tied modes, or degenerate heterogeneity) is encoded as an
/// empty optional and serialized as the sentinel "INF"; the oracle never
/// produces finite-sample NA.
struct OracleTriplet {
    Maybe beta_fwd;
    Maybe beta_rev;
    IndexSet valid_set;  // empty when beta_fwd is INF
};

OracleTriplet oracle_pch(const PopulationSpec& spec, Direction dir);

/// Mode of real-valued ratios, clustering values within tol before counting.
/// unique=false when two clusters tie for the maximum size.
struct ModeResult {
    bool unique = false;
    double value = 0.0;
    IndexSet members;
};

ModeResult population_mode(const VectorXd& ratios, const IndexSet& index, double tol = 1e-9);

/// Identification rule combining the two directions, and the implied
/// population direction indicator h in {2, 1, -1, 0}. defined=false when both
/// sides fail (h is reported as 0 with no meaning attached).
struct OracleSelection {
    Maybe beta_xy;
    Maybe beta_yx;
    int side = 1;  // 1 or 2
    int h = 0;
    bool defined = true;
};

OracleSelection oracle_select(const OracleTriplet& out_xy, const OracleTriplet& out_yx);

}  // namespace bimr
