#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bimr/baselines.hpp"
#include "bimr/dgp.hpp"
#include "bimr/types.hpp"

namespace bimr {

/// Which CSV columns play which role. Empty x/y fall back to the first two
/// columns; an empty z list takes every remaining column.
struct ColumnRoles {
    std::string x;
    std::string y;
    std::vector<std::string> z;
};

/// Header-line CSV of numeric columns. Parse failures name the row and
/// column; missing roles name the absent columns. The result is centered.
Dataset load_dataset(const std::string& path, const ColumnRoles& roles = {});

/// Inverse of load_dataset for round-trip checks: header x,y,z1..zp at full
/// precision.
void write_dataset_csv(const std::string& path, const Dataset& data);

/// One output row of an analysis, shaped like the reporting table: method,
/// direction call, and the two estimates with their intervals. Sentinel "NA"
/// stands in for missing values in both table and record form.
struct AnalyzeRecord {
    std::string method;
    int h = 0;
    Maybe beta_xy;
    MaybeInterval ci_xy;
    Maybe beta_yx;
    MaybeInterval ci_yx;
    std::string detail;  // branch / valid-set sizes / flags
};

/// Full analysis of one dataset: the two-directional pipeline first, then any
/// requested baselines ("tsht", "egger", "ivw").
std::vector<AnalyzeRecord> analyze_dataset(const Dataset& data, double alpha, SignPrior prior,
                                           const std::vector<std::string>& baselines,
                                           ChVariance vmode = ChVariance::Propagated);

void write_records_table(std::ostream& os, const std::vector<AnalyzeRecord>& records,
                         double alpha);
void write_records_tsv(std::ostream& os, const std::vector<AnalyzeRecord>& records);

/// Declarative simulation config (JSON): scalar defaults plus a list of
/// cases, each fixing one effect and sweeping the other over a grid.
struct SimulateSpec {
    SimConfig base;
    double alpha = 0.05;
    std::vector<std::string> methods = {"pch", "tsht", "egger", "ivw"};
    SignPrior prior = SignPrior::Magnitude;

    struct Case {
        std::string name;
        std::string vary;  // "beta_xy" or "beta_yx"
        double fixed_value = 0.0;
        std::vector<double> grid;
    };
    std::vector<Case> cases;
};

SimulateSpec load_simulate_config(const std::string& path);

/// One SimConfig per (case, grid point), in declaration order.
std::vector<std::pair<std::string, SimConfig>> expand_grid(const SimulateSpec& spec);

void write_report_tsv(std::ostream& os, const std::vector<std::string>& case_names,
                      const ExperimentReport& report);
void write_report_summary(std::ostream& os, const std::vector<std::string>& case_names,
                          const ExperimentReport& report);

/// "NA" or the value with max_digits10 round-trip precision (records) /
/// fixed precision (tables).
std::string format_value(const Maybe& v, int precision = 6);

SignPrior parse_sign_prior(const std::string& s);

}  // namespace bimr
