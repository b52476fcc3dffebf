// Command-line front end: analyze a dataset, run a replication study from a
// config file, or evaluate the population oracle for an identification study.

#include <omp.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "bimr/dgp.hpp"
#include "bimr/io.hpp"
#include "bimr/oracle.hpp"

namespace {

using namespace bimr;
using nlohmann::json;

int default_threads() {
    if (const char* env = std::getenv("BIMR_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 0;  // runtime default
}

void apply_threads(int threads) {
    if (threads > 0) omp_set_num_threads(threads);
}

VectorXd read_vector(const json& j, const std::string& key, int p) {
    if (!j.contains(key) || !j[key].is_array())
        throw ConfigError("oracle spec: '" + key + "' must be an array");
    const auto& arr = j[key];
    if (p >= 0 && static_cast<int>(arr.size()) != p)
        throw ConfigError("oracle spec: '" + key + "' must have length " + std::to_string(p));
    VectorXd v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number()) throw ConfigError("oracle spec: '" + key + "' must hold numbers");
        v[static_cast<int>(i)] = arr[i].get<double>();
    }
    return v;
}

PopulationSpec load_population_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open oracle spec '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("oracle spec: ") + e.what());
    }

    if (j.contains("simulation")) {
        const json& js = j["simulation"];
        SimConfig cfg;
        if (js.contains("p")) cfg.p = js["p"].get<int>();
        if (js.contains("s_x")) cfg.s_x = js["s_x"].get<int>();
        if (js.contains("s_xy")) cfg.s_xy = js["s_xy"].get<int>();
        if (js.contains("s_y")) cfg.s_y = js["s_y"].get<int>();
        if (js.contains("beta_xy")) cfg.beta_xy = js["beta_xy"].get<double>();
        if (js.contains("beta_yx")) cfg.beta_yx = js["beta_yx"].get<double>();
        if (js.contains("pi_strength_x")) cfg.pi_strength_x = js["pi_strength_x"].get<double>();
        if (js.contains("pi_strength_y")) cfg.pi_strength_y = js["pi_strength_y"].get<double>();
        cfg.n = cfg.p + 1;  // population object; n only has to pass validation
        return population_spec(cfg);
    }

    PopulationSpec spec;
    if (!j.contains("beta_xy") || !j.contains("beta_yx"))
        throw ConfigError("oracle spec: needs beta_xy and beta_yx");
    spec.beta_xy = j["beta_xy"].get<double>();
    spec.beta_yx = j["beta_yx"].get<double>();
    spec.pi_x = read_vector(j, "pi_x", -1);
    const int p = spec.p();
    spec.pi_y = read_vector(j, "pi_y", p);
    spec.zeta_sq_z = read_vector(j, "zeta_sq_z", p);
    spec.eta_sq_z = read_vector(j, "eta_sq_z", p);
    if (j.contains("sigma") && j["sigma"].is_array()) {
        const auto& rows = j["sigma"];
        if (static_cast<int>(rows.size()) != p) throw ConfigError("oracle spec: sigma must be p x p");
        spec.sigma.resize(p, p);
        for (int r = 0; r < p; ++r) {
            const auto& jr = rows[r];
            if (!jr.is_array() || static_cast<int>(jr.size()) != p)
                throw ConfigError("oracle spec: sigma must be p x p");
            for (int c = 0; c < p; ++c) spec.sigma(r, c) = jr[c].get<double>();
        }
    } else if (j.contains("sigma_diagonal")) {
        spec.sigma = read_vector(j, "sigma_diagonal", p).asDiagonal();
    } else {
        spec.sigma = MatrixXd::Identity(p, p);
    }
    spec.validate();
    return spec;
}

std::string oracle_value(const Maybe& v) { return v ? format_value(v, 10) : "INF"; }

int cmd_analyze(const std::string& data_path, const ColumnRoles& roles, double alpha,
                const std::string& prior_name, bool no_baselines, const std::string& variance,
                const std::string& out_path, int threads) {
    apply_threads(threads);
    const Dataset data = load_dataset(data_path, roles);
    const SignPrior prior = parse_sign_prior(prior_name);
    const ChVariance vmode =
        variance == "plugin" ? ChVariance::PlugIn : ChVariance::Propagated;
    std::vector<std::string> baselines;
    if (!no_baselines) baselines = {"tsht", "egger", "ivw"};

    const auto records = analyze_dataset(data, alpha, prior, baselines, vmode);
    std::cout << "n=" << data.n() << " p=" << data.p() << "\n";
    write_records_table(std::cout, records, alpha);
    for (const auto& r : records) std::cout << "# " << r.method << ": " << r.detail << "\n";

    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw ParseError("cannot write '" + out_path + "'");
        write_records_tsv(out, records);
        std::cout << "records written to " << out_path << "\n";
    }
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, int threads) {
    const SimulateSpec spec = load_simulate_config(config_path);
    const auto grid = expand_grid(spec);
    std::vector<std::string> names;
    std::vector<SimConfig> cfgs;
    for (const auto& [name, cfg] : grid) {
        names.push_back(name);
        cfgs.push_back(cfg);
    }

    std::filesystem::create_directories(out_dir);
    const ExperimentReport report =
        run_experiment(cfgs, spec.methods, spec.alpha, spec.prior, threads);

    const std::string tsv_path = out_dir + "/report.tsv";
    const std::string txt_path = out_dir + "/summary.txt";
    {
        std::ofstream out(tsv_path);
        write_report_tsv(out, names, report);
    }
    {
        std::ofstream out(txt_path);
        write_report_summary(out, names, report);
    }
    std::cout << "wrote " << tsv_path << " and " << txt_path << " (" << cfgs.size()
              << " configurations)\n";
    return 0;
}

int cmd_oracle(const std::string& spec_path) {
    const PopulationSpec spec = load_population_spec(spec_path);
    const OracleTriplet out_xy = oracle_pch(spec, Direction::XtoY);
    const OracleTriplet out_yx = oracle_pch(spec, Direction::YtoX);
    const OracleSelection sel = oracle_select(out_xy, out_yx);

    const auto print_triplet = [](const char* label, const OracleTriplet& t) {
        std::cout << label << ": beta_fwd=" << oracle_value(t.beta_fwd)
                  << " beta_rev=" << oracle_value(t.beta_rev) << " valid_set={";
        for (std::size_t i = 0; i < t.valid_set.size(); ++i)
            std::cout << (i ? "," : "") << t.valid_set[i] + 1;
        std::cout << "}\n";
    };
    print_triplet("direction X->Y", out_xy);
    print_triplet("direction Y->X", out_yx);
    std::cout << "selected side " << sel.side << ": beta_xy=" << oracle_value(sel.beta_xy)
              << " beta_yx=" << oracle_value(sel.beta_yx) << " h=" << sel.h;
    if (!sel.defined) std::cout << " (undefined: both sides degenerate)";
    std::cout << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bidirectional instrument-based causal analysis"};
    app.require_subcommand(1);

    // analyze
    std::string data_path, x_col, y_col, out_path;
    std::vector<std::string> z_cols;
    double alpha = 0.05;
    std::string prior_name = "xy-pos-yx-neg";
    std::string variance = "propagated";
    bool no_baselines = false;
    int threads = default_threads();
    auto* analyze = app.add_subcommand("analyze", "analyze a CSV dataset");
    analyze->add_option("--data", data_path, "CSV file with header row")->required();
    analyze->add_option("--x", x_col, "exposure column (default: first)");
    analyze->add_option("--y", y_col, "outcome column (default: second)");
    analyze->add_option("--z", z_cols, "instrument columns (default: all remaining)");
    analyze->add_option("--alpha", alpha, "CI level (default 0.05)");
    analyze->add_option("--sign-prior", prior_name,
                        "xy-pos-yx-neg | xy-neg-yx-pos | magnitude");
    analyze->add_option("--variance", variance, "propagated | plugin");
    analyze->add_flag("--no-baselines", no_baselines, "report only the main method");
    analyze->add_option("--out", out_path, "also write machine-readable records (TSV)");
    analyze->add_option("--threads", threads, "thread count (default: BIMR_THREADS or all)");

    // simulate
    std::string config_path, out_dir = "sim-out";
    int sim_threads = default_threads();
    auto* simulate = app.add_subcommand("simulate", "run a replication study from a config file");
    simulate->add_option("--config", config_path, "JSON config")->required();
    simulate->add_option("--out-dir", out_dir, "output directory (default sim-out)");
    simulate->add_option("--threads", sim_threads, "thread count (default: BIMR_THREADS or all)");

    // oracle
    std::string spec_path;
    auto* oracle = app.add_subcommand("oracle", "population-limit identification study");
    oracle->add_option("--spec", spec_path, "JSON population spec")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(analyze)) {
            ColumnRoles roles{x_col, y_col, z_cols};
            return cmd_analyze(data_path, roles, alpha, prior_name, no_baselines, variance,
                               out_path, threads);
        }
        if (app.got_subcommand(simulate)) return cmd_simulate(config_path, out_dir, sim_threads);
        if (app.got_subcommand(oracle)) return cmd_oracle(spec_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
