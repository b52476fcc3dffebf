#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bimr/inference.hpp"
#include "bimr/oracle.hpp"
#include "bimr/types.hpp"

namespace bimr {

/// One simulation configuration. Defaults reproduce the reference design:
/// p candidate instruments of which the first s_x affect only X, the next
/// s_xy affect both traits, the next s_y affect only Y, and the rest are
/// null; three-level instruments; shared confounder plus instrument-scaled
/// idiosyncratic errors.
struct SimConfig {
    int n = 20000;
    int p = 50;
    int s_x = 15;
    int s_xy = 8;
    int s_y = 5;
    double beta_xy = 0.0;
    double beta_yx = 0.0;
    double pi_strength_x = 0.6;
    double pi_strength_y = 0.4;
    std::uint64_t seed = 1;
    int replications = 100;

    void validate() const;
    /// Error-scale switches: tau multiplies the second zeta-carrier column,
    /// kappa the second eta-carrier column; both flip when beta_yx == 0.
    double tau() const { return beta_yx == 0.0 ? -0.5 : 1.0; }
    double kappa() const { return beta_yx == 0.0 ? 1.0 : -1.0; }
};

/// Instrument-effect vectors implied by a configuration.
VectorXd pi_x_of(const SimConfig& cfg);
VectorXd pi_y_of(const SimConfig& cfg);

/// Centered dataset plus the latent structural disturbances (kept for
/// diagnostics and identity checks; estimators never see them).
struct GeneratedData {
    Dataset data;
    VectorXd r_x;
    VectorXd r_y;
};

/// Deterministic draw for one replication: the stream is derived from
/// (cfg.seed, rep_index) only, so replications are order-independent and
/// individually reproducible.
GeneratedData generate(const SimConfig& cfg, std::uint64_t rep_index);

/// Raw (pre-centering) moments of the three-level instrument law.
struct ThreeLevelMoments {
    double mean;
    double var;
    double third_central;
};
ThreeLevelMoments three_level_moments();

/// Population-moment description of a configuration, for the oracle.
PopulationSpec population_spec(const SimConfig& cfg);

/// Per-observation fixed-point iteration of the two structural equations
/// (test oracle for the direct reduced-form solve). mu_* collect the
/// instrument and disturbance terms of each equation.
struct EquilibriumPath {
    VectorXd y;
    VectorXd x;
};
EquilibriumPath equilibrium_iterate(double beta_xy, double beta_yx, const VectorXd& mu_y,
                                    const VectorXd& mu_x, int steps);

/// Per-configuration, per-method Monte Carlo aggregates. RMSE and coverage
/// are over non-NA replications; na_* count the NA ones.
struct MethodMetrics {
    std::string method;
    int reps = 0;
    double h_accuracy = 0.0;
    Maybe rmse_xy, rmse_yx;
    Maybe coverage_xy, coverage_yx;
    int na_xy = 0, na_yx = 0;
};

struct ConfigReport {
    SimConfig cfg;
    int true_h = 0;
    std::vector<MethodMetrics> methods;
};

struct ExperimentReport {
    double alpha = 0.05;
    SignPrior prior = SignPrior::Magnitude;
    std::vector<ConfigReport> rows;
};

/// Runs every configuration for its number of replications. Replications are
/// distributed over OpenMP threads (threads <= 0 means the runtime default);
/// results land in per-replication slots, so aggregates are identical for any
/// thread count. methods may list "pch", "tsht", "egger", "ivw".
ExperimentReport run_experiment(const std::vector<SimConfig>& grid,
                                const std::vector<std::string>& methods, double alpha,
                                SignPrior prior, int threads = 0);

}  // namespace bimr
