#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "bimr/errors.hpp"

namespace bimr {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Missing statistical results are empty optionals ("NA" in serialized form).
using Maybe = std::optional<double>;

/// Candidate-instrument indices, 0-based, strictly increasing.
using IndexSet = std::vector<int>;

/// Centered observations: x, y of length n and instrument matrix z (n x p).
struct Dataset {
    VectorXd x;
    VectorXd y;
    MatrixXd z;

    int n() const { return static_cast<int>(z.rows()); }
    int p() const { return static_cast<int>(z.cols()); }
};

/// Validates shapes and centers all columns.
Dataset make_dataset(VectorXd x, VectorXd y, MatrixXd z);

/// One causal direction: point estimate, asymptotic variance (the quantity
/// sigma^2 such that the CI half-width is z * sqrt(sigma^2 / n)), and the
/// instruments accepted as valid. beta and variance are NA together.
struct DirectionalEstimate {
    Maybe beta;
    Maybe variance;
    IndexSet valid_set;

    bool is_na() const { return !beta.has_value(); }
};

struct ConfidenceInterval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const { return lo <= v && v <= hi; }
};

/// NA-able interval; NA when the underlying estimate is NA.
using MaybeInterval = std::optional<ConfidenceInterval>;

}  // namespace bimr
