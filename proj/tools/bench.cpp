// Timing comparison between the serial reference kernels and the OpenMP
// versions, plus a small end-to-end replication batch.

#include <omp.h>

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <vector>

#include "bimr/dgp.hpp"
#include "bimr/kernels.hpp"
#include "bimr/rng.hpp"

namespace {

using namespace bimr;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename F>
double time_best_of(int reps, F&& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = Clock::now();
        f();
        const double dt = seconds_since(t0);
        if (dt < best) best = dt;
    }
    return best;
}

void bench_kernels(int n, int p) {
    Rng rng = Rng::stream(20250814u, 0);
    MatrixXd z(n, p);
    VectorXd w(n), v(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) z(i, j) = rng.normal();
    for (int i = 0; i < n; ++i) {
        w[i] = 1.0 + rng.uniform01();
        v[i] = rng.normal();
    }

    MatrixXd g;
    VectorXd tv;
    const double t_gram_s = time_best_of(3, [&] { g = kernels::serial::gram(z); });
    const double t_gram_p = time_best_of(3, [&] { g = kernels::gram(z); });
    const double t_wg_s = time_best_of(3, [&] { g = kernels::serial::weighted_gram(z, w); });
    const double t_wg_p = time_best_of(3, [&] { g = kernels::weighted_gram(z, w); });
    const double t_tm_s = time_best_of(5, [&] { tv = kernels::serial::tmatvec(z, v); });
    const double t_tm_p = time_best_of(5, [&] { tv = kernels::tmatvec(z, v); });

    std::printf("kernels (n=%d, p=%d, threads=%d)\n", n, p, omp_get_max_threads());
    std::printf("  %-14s %10s %10s %8s\n", "kernel", "serial(s)", "openmp(s)", "speedup");
    std::printf("  %-14s %10.4f %10.4f %7.2fx\n", "gram", t_gram_s, t_gram_p, t_gram_s / t_gram_p);
    std::printf("  %-14s %10.4f %10.4f %7.2fx\n", "weighted_gram", t_wg_s, t_wg_p,
                t_wg_s / t_wg_p);
    std::printf("  %-14s %10.4f %10.4f %7.2fx\n", "tmatvec", t_tm_s, t_tm_p, t_tm_s / t_tm_p);
}

void bench_replications(int reps) {
    SimConfig cfg;
    cfg.n = 5000;
    cfg.p = 30;
    cfg.replications = reps;
    cfg.beta_xy = 0.5;
    cfg.beta_yx = 0.0;

    const std::vector<std::string> methods = {"pch"};
    const auto t0 = Clock::now();
    const ExperimentReport rep =
        run_experiment({cfg}, methods, 0.05, SignPrior::Magnitude, 1);
    const double t_serial = seconds_since(t0);

    const auto t1 = Clock::now();
    const ExperimentReport rep2 =
        run_experiment({cfg}, methods, 0.05, SignPrior::Magnitude, 0);
    const double t_par = seconds_since(t1);

    const auto& m1 = rep.rows[0].methods[0];
    const auto& m2 = rep2.rows[0].methods[0];
    std::printf("replications (n=%d, p=%d, reps=%d)\n", cfg.n, cfg.p, reps);
    std::printf("  1 thread:   %.2fs   h_accuracy=%.3f\n", t_serial, m1.h_accuracy);
    std::printf("  %d threads: %.2fs   h_accuracy=%.3f   speedup=%.2fx\n",
                omp_get_max_threads(), t_par, m2.h_accuracy, t_serial / t_par);
    std::printf("  results identical: %s\n",
                m1.h_accuracy == m2.h_accuracy && m1.rmse_xy == m2.rmse_xy ? "yes" : "NO");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bimr kernel and replication benchmarks"};
    bool kernels = false, replications = false;
    int n = 20000, p = 60, reps = 40;
    app.add_flag("--kernels", kernels, "time the OpenMP kernels against the serial reference");
    app.add_flag("--replications", replications, "time an end-to-end replication batch");
    app.add_option("--n", n, "rows for the kernel benchmark");
    app.add_option("--p", p, "columns for the kernel benchmark");
    app.add_option("--reps", reps, "replication count for the batch benchmark");
    CLI11_PARSE(app, argc, argv);

    if (!kernels && !replications) kernels = replications = true;
    if (kernels) bench_kernels(n, p);
    if (replications) bench_replications(reps);
    return 0;
}
