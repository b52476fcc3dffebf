#include "bimr/oracle.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace bimr {

namespace {

constexpr double kZeroTol = 1e-9;  // population zero/cluster tolerance

bool near_zero(double v) { return std::abs(v) <= kZeroTol; }

}  // namespace

void PopulationSpec::validate() const {
    const int dim = p();
    if (dim < 1) throw DimensionError("population spec: empty pi_x");
    if (pi_y.size() != dim || zeta_sq_z.size() != dim || eta_sq_z.size() != dim)
        throw DimensionError("population spec: vector length mismatch");
    if (sigma.rows() != dim || sigma.cols() != dim)
        throw DimensionError("population spec: sigma must be p x p");
    if (std::abs(std::abs(beta_xy * beta_yx) - 1.0) <= kZeroTol)
        throw DomainError("population spec: |beta_xy * beta_yx| must differ from 1");
    Eigen::LLT<MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw SingularityError("population spec: sigma is not positive definite");
}

PopulationGammas population_gammas(const PopulationSpec& spec) {
    const double det = 1.0 - spec.beta_xy * spec.beta_yx;
    PopulationGammas g;
    g.gamma_y = (spec.pi_y + spec.beta_xy * spec.pi_x) / det;
    g.gamma_x = (spec.pi_x + spec.beta_yx * spec.pi_y) / det;
    return g;
}

ModeResult population_mode(const VectorXd& ratios, const IndexSet& index, double tol) {
    ModeResult out;
    const int m = static_cast<int>(ratios.size());
    if (m == 0 || static_cast<int>(index.size()) != m) return out;

    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return ratios[a] < ratios[b]; });

    // Walk sorted ratios, starting a new cluster at each gap > tol.
    std::vector<std::pair<int, int>> clusters;  // (start, length) in order[]
    int start = 0;
    for (int i = 1; i <= m; ++i) {
        if (i == m || ratios[order[i]] - ratios[order[i - 1]] > tol) {
            clusters.emplace_back(start, i - start);
            start = i;
        }
    }

    int best = -1, best_len = 0, ties = 0;
    for (int c = 0; c < static_cast<int>(clusters.size()); ++c) {
        if (clusters[c].second > best_len) {
            best = c;
            best_len = clusters[c].second;
            ties = 1;
        } else if (clusters[c].second == best_len) {
            ++ties;
        }
    }
    if (ties != 1) return out;

    out.unique = true;
    const auto [s, len] = clusters[best];
    out.value = ratios[order[s + len / 2]];  // a member value, not a mean
    for (int i = s; i < s + len; ++i) out.members.push_back(index[order[i]]);
    std::sort(out.members.begin(), out.members.end());
    return out;
}

OracleTriplet oracle_pch(const PopulationSpec& spec, Direction dir) {
    spec.validate();
    OracleTriplet out;

    const PopulationGammas g = population_gammas(spec);
    const VectorXd& gd = (dir == Direction::XtoY) ? g.gamma_x : g.gamma_y;
    const VectorXd& gdp = (dir == Direction::XtoY) ? g.gamma_y : g.gamma_x;

    IndexSet support;
    for (int j = 0; j < spec.p(); ++j)
        if (!near_zero(gd[j])) support.push_back(j);
    if (support.empty()) return out;

    VectorXd ratios(support.size());
    for (size_t i = 0; i < support.size(); ++i)
        ratios[static_cast<int>(i)] = gdp[support[i]] / gd[support[i]];
    const ModeResult mode = population_mode(ratios, support);
    if (!mode.unique) return out;

    out.beta_fwd = mode.value;
    out.valid_set = mode.members;

    // Instrument-indexed second moments of the reduced-form disturbances.
    const double a1 = spec.beta_xy, a2 = spec.beta_yx;
    const double det = 1.0 - a1 * a2;
    const VectorXd m_xx = (spec.eta_sq_z + a2 * a2 * spec.zeta_sq_z) / (det * det);
    const VectorXd m_yy = (spec.zeta_sq_z + a1 * a1 * spec.eta_sq_z) / (det * det);
    const VectorXd m_xy = (a2 * spec.zeta_sq_z + a1 * spec.eta_sq_z) / (det * det);

    // E[Lambda D Z] and E[Lambda D' Z] with Lambda the population projection
    // residual of D' - b D.
    const double b = mode.value;
    VectorXd e_ld, e_ldp;
    if (dir == Direction::XtoY) {
        e_ld = m_xy - b * m_xx;
        e_ldp = m_yy - b * m_xy;
    } else {
        e_ld = m_xy - b * m_yy;
        e_ldp = m_xx - b * m_xy;
    }

    Eigen::LLT<MatrixXd> llt(spec.sigma);
    const VectorXd theta_d = llt.solve(e_ld);
    const VectorXd theta_dp = llt.solve(e_ldp);
    const double denom = theta_dp.dot(spec.sigma * theta_dp);
    const double num_scale = std::max(1.0, theta_d.dot(spec.sigma * theta_d));
    if (denom <= 1e-20 * num_scale) return out;  // heterogeneity degenerate: reverse INF

    out.beta_rev = theta_dp.dot(spec.sigma * theta_d) / denom;
    return out;
}

OracleSelection oracle_select(const OracleTriplet& out_xy, const OracleTriplet& out_yx) {
    OracleSelection sel;
    const bool inf_ii = !out_yx.beta_fwd || !out_yx.beta_rev;
    const bool inf_i = !out_xy.beta_fwd || !out_xy.beta_rev;

    if (inf_ii) {
        sel.side = 1;
    } else if (inf_i) {
        sel.side = 2;
    } else {
        sel.side = out_xy.valid_set.size() >= out_yx.valid_set.size() ? 1 : 2;
    }

    if (sel.side == 1) {
        sel.beta_xy = out_xy.beta_fwd;
        sel.beta_yx = out_xy.beta_rev;
    } else {
        sel.beta_xy = out_yx.beta_rev;
        sel.beta_yx = out_yx.beta_fwd;
    }

    if (!sel.beta_xy || !sel.beta_yx) {
        sel.defined = false;
        return sel;
    }

    // Direction indicator: bi-directional only when every component of both
    // sides is nonzero (INF counts as nonzero but is never selected here).
    const auto nonzero = [](const Maybe& v) { return !v || !near_zero(*v); };
    const bool all_nonzero = nonzero(out_xy.beta_fwd) && nonzero(out_xy.beta_rev) &&
                             nonzero(out_yx.beta_fwd) && nonzero(out_yx.beta_rev);
    if (all_nonzero) {
        sel.h = 2;
    } else {
        sel.h = (near_zero(*sel.beta_xy) ? 0 : 1) - (near_zero(*sel.beta_yx) ? 0 : 1);
    }
    return sel;
}

}  // namespace bimr
