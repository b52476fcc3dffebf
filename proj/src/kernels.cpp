#include "bimr/kernels.hpp"

#include "bimr/errors.hpp"

namespace bimr::kernels {

namespace {

// Plain serial dot; the unit all kernels are built from. Kept scalar so the
// summation order is fixed regardless of compiler vectorization choices.
inline double dot_n(const double* a, const double* b, Eigen::Index n) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

inline double dot3_n(const double* a, const double* w, const double* b, Eigen::Index n) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) acc += a[i] * w[i] * b[i];
    return acc;
}

void check_rows(Eigen::Index zr, Eigen::Index vr, const char* what) {
    if (zr != vr) throw DimensionError(std::string(what) + ": row mismatch");
}

}  // namespace

namespace serial {

MatrixXd gram(const MatrixXd& z) {
    const Eigen::Index n = z.rows(), p = z.cols();
    MatrixXd g(p, p);
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index k = j; k < p; ++k) {
            const double s = dot_n(z.col(j).data(), z.col(k).data(), n);
            g(j, k) = s;
            g(k, j) = s;
        }
    return g;
}

VectorXd tmatvec(const MatrixXd& z, const VectorXd& v) {
    check_rows(z.rows(), v.size(), "tmatvec");
    const Eigen::Index n = z.rows(), p = z.cols();
    VectorXd out(p);
    for (Eigen::Index j = 0; j < p; ++j) out[j] = dot_n(z.col(j).data(), v.data(), n);
    return out;
}

MatrixXd weighted_gram(const MatrixXd& z, const VectorXd& w) {
    check_rows(z.rows(), w.size(), "weighted_gram");
    const Eigen::Index n = z.rows(), p = z.cols();
    MatrixXd g(p, p);
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index k = j; k < p; ++k) {
            const double s = dot3_n(z.col(j).data(), w.data(), z.col(k).data(), n);
            g(j, k) = s;
            g(k, j) = s;
        }
    return g;
}

}  // namespace serial

MatrixXd gram(const MatrixXd& z) {
    const Eigen::Index n = z.rows(), p = z.cols();
    MatrixXd g(p, p);
    const Eigen::Index pairs = p * (p + 1) / 2;
#pragma omp parallel for schedule(static)
    for (Eigen::Index t = 0; t < pairs; ++t) {
        // Unrank t into the upper triangle (j <= k).
        Eigen::Index j = 0, rem = t;
        while (rem >= p - j) {
            rem -= p - j;
            ++j;
        }
        const Eigen::Index k = j + rem;
        const double s = dot_n(z.col(j).data(), z.col(k).data(), n);
        g(j, k) = s;
        g(k, j) = s;
    }
    return g;
}

VectorXd tmatvec(const MatrixXd& z, const VectorXd& v) {
    check_rows(z.rows(), v.size(), "tmatvec");
    const Eigen::Index n = z.rows(), p = z.cols();
    VectorXd out(p);
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < p; ++j) out[j] = dot_n(z.col(j).data(), v.data(), n);
    return out;
}

MatrixXd weighted_gram(const MatrixXd& z, const VectorXd& w) {
    check_rows(z.rows(), w.size(), "weighted_gram");
    const Eigen::Index n = z.rows(), p = z.cols();
    MatrixXd g(p, p);
    const Eigen::Index pairs = p * (p + 1) / 2;
#pragma omp parallel for schedule(static)
    for (Eigen::Index t = 0; t < pairs; ++t) {
        Eigen::Index j = 0, rem = t;
        while (rem >= p - j) {
            rem -= p - j;
            ++j;
        }
        const Eigen::Index k = j + rem;
        const double s = dot3_n(z.col(j).data(), w.data(), z.col(k).data(), n);
        g(j, k) = s;
        g(k, j) = s;
    }
    return g;
}

}  // namespace bimr::kernels
