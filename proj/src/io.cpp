#include "bimr/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace bimr {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    cells.push_back(cur);
    for (std::string& c : cells) {
        const auto a = c.find_first_not_of(" \t");
        const auto b = c.find_last_not_of(" \t");
        c = (a == std::string::npos) ? "" : c.substr(a, b - a + 1);
    }
    return cells;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& col) {
    const auto fail = [&](const char* why) -> double {
        std::ostringstream msg;
        msg << "csv row " << row << ", column '" << col << "': " << why;
        throw ParseError(msg.str());
    };
    if (cell.empty()) return fail("blank cell");
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        return fail("not a number");
    return v;
}

std::string fmt_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_prec(double v, int precision) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

std::string fmt_interval(const MaybeInterval& iv, int precision) {
    if (!iv) return "NA";
    return "[" + fmt_prec(iv->lo, precision) + ", " + fmt_prec(iv->hi, precision) + "]";
}

}  // namespace

std::string format_value(const Maybe& v, int precision) {
    if (!v) return "NA";
    return fmt_prec(*v, precision);
}

Dataset load_dataset(const std::string& path, const ColumnRoles& roles) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw ParseError("'" + path + "': empty file");
    const std::vector<std::string> header = split_csv_line(line);

    const auto col_index = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ParseError("'" + path + "': missing column '" + name + "'");
        return static_cast<int>(it - header.begin());
    };

    int xi, yi;
    std::vector<int> zi;
    if (roles.x.empty() && roles.y.empty() && roles.z.empty()) {
        if (header.size() < 3)
            throw ParseError("'" + path + "': need at least x, y and one instrument column");
        xi = 0;
        yi = 1;
        for (std::size_t j = 2; j < header.size(); ++j) zi.push_back(static_cast<int>(j));
    } else {
        xi = col_index(roles.x.empty() ? "x" : roles.x);
        yi = col_index(roles.y.empty() ? "y" : roles.y);
        if (roles.z.empty()) {
            for (std::size_t j = 0; j < header.size(); ++j)
                if (static_cast<int>(j) != xi && static_cast<int>(j) != yi)
                    zi.push_back(static_cast<int>(j));
        } else {
            for (const std::string& name : roles.z) zi.push_back(col_index(name));
        }
    }
    if (zi.empty()) throw ParseError("'" + path + "': no instrument columns");

    std::vector<double> xs, ys;
    std::vector<std::vector<double>> zs(zi.size());
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            std::ostringstream msg;
            msg << "csv row " << row << ": expected " << header.size() << " cells, found "
                << cells.size();
            throw ParseError(msg.str());
        }
        xs.push_back(parse_cell(cells[xi], row, header[xi]));
        ys.push_back(parse_cell(cells[yi], row, header[yi]));
        for (std::size_t k = 0; k < zi.size(); ++k)
            zs[k].push_back(parse_cell(cells[zi[k]], row, header[zi[k]]));
    }

    const int n = static_cast<int>(xs.size());
    const int p = static_cast<int>(zi.size());
    if (n <= p) {
        std::ostringstream msg;
        msg << "'" << path << "': need more rows than instruments (n=" << n << ", p=" << p << ")";
        throw DimensionError(msg.str());
    }
    VectorXd x = Eigen::Map<VectorXd>(xs.data(), n);
    VectorXd y = Eigen::Map<VectorXd>(ys.data(), n);
    MatrixXd z(n, p);
    for (int k = 0; k < p; ++k) z.col(k) = Eigen::Map<VectorXd>(zs[k].data(), n);
    return make_dataset(std::move(x), std::move(y), std::move(z));
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << "x,y";
    for (int j = 1; j <= data.p(); ++j) out << ",z" << j;
    out << "\n";
    for (int i = 0; i < data.n(); ++i) {
        out << fmt_full(data.x[i]) << ',' << fmt_full(data.y[i]);
        for (int j = 0; j < data.p(); ++j) out << ',' << fmt_full(data.z(i, j));
        out << "\n";
    }
}

std::vector<AnalyzeRecord> analyze_dataset(const Dataset& data, double alpha, SignPrior prior,
                                           const std::vector<std::string>& baselines,
                                           ChVariance vmode) {
    ZWorkspace ws(data.z);
    const ReducedForm rf_x = ols_reduced_form(ws, data.x);
    const ReducedForm rf_y = ols_reduced_form(ws, data.y);

    std::vector<AnalyzeRecord> records;
    {
        const PCHOutput out_xy = pch(ws, data.x, data.y, rf_x, rf_y, vmode);
        const PCHOutput out_yx = pch(ws, data.y, data.x, rf_y, rf_x, vmode);
        const InferenceResult r = infer(out_xy, out_yx, data.n(), alpha, prior);
        AnalyzeRecord rec;
        rec.method = "pch";
        rec.h = r.h_hat;
        rec.beta_xy = r.beta_xy;
        rec.ci_xy = r.ci_xy;
        rec.beta_yx = r.beta_yx;
        rec.ci_yx = r.ci_yx;
        std::ostringstream detail;
        detail << "branch=" << branch_name(r.branch) << " side=" << r.side
               << " prior=" << sign_prior_name(r.prior) << " valid_i=" << r.n_valid_i
               << " valid_ii=" << r.n_valid_ii;
        if (r.assumptions_undetectable) detail << " assumptions_undetectable";
        rec.detail = detail.str();
        records.push_back(std::move(rec));
    }
    for (const std::string& name : baselines) {
        BaselineMethod bm;
        if (name == "tsht")
            bm = BaselineMethod::Tsht;
        else if (name == "egger")
            bm = BaselineMethod::Egger;
        else if (name == "ivw")
            bm = BaselineMethod::Ivw;
        else
            throw ConfigError("analyze: unknown baseline '" + name + "'");
        const BaselineResult r = run_baseline(bm, ws, data.x, data.y, rf_x, rf_y, alpha);
        AnalyzeRecord rec;
        rec.method = name;
        rec.h = r.h_call;
        rec.beta_xy = r.xy.beta;
        rec.ci_xy = r.ci_xy;
        rec.beta_yx = r.yx.beta;
        rec.ci_yx = r.ci_yx;
        std::ostringstream detail;
        detail << "relevant_xy=" << r.xy.valid_set.size()
               << " relevant_yx=" << r.yx.valid_set.size();
        rec.detail = detail.str();
        records.push_back(std::move(rec));
    }
    return records;
}

void write_records_table(std::ostream& os, const std::vector<AnalyzeRecord>& records,
                         double alpha) {
    char head[160];
    std::snprintf(head, sizeof head, "%-8s %4s %12s %-24s %12s %-24s", "method", "H", "beta_XY",
                  ("CI_XY(" + fmt_prec(alpha, 3) + ")").c_str(), "beta_YX",
                  ("CI_YX(" + fmt_prec(alpha, 3) + ")").c_str());
    os << head << "\n";
    for (const AnalyzeRecord& r : records) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%-8s %4d %12s %-24s %12s %-24s", r.method.c_str(), r.h,
                      format_value(r.beta_xy, 4).c_str(), fmt_interval(r.ci_xy, 4).c_str(),
                      format_value(r.beta_yx, 4).c_str(), fmt_interval(r.ci_yx, 4).c_str());
        os << buf << "\n";
    }
}

void write_records_tsv(std::ostream& os, const std::vector<AnalyzeRecord>& records) {
    os << "method\th\tbeta_xy\tci_xy_lo\tci_xy_hi\tbeta_yx\tci_yx_lo\tci_yx_hi\tdetail\n";
    for (const AnalyzeRecord& r : records) {
        os << r.method << '\t' << r.h << '\t' << format_value(r.beta_xy, 10) << '\t'
           << (r.ci_xy ? fmt_prec(r.ci_xy->lo, 10) : "NA") << '\t'
           << (r.ci_xy ? fmt_prec(r.ci_xy->hi, 10) : "NA") << '\t'
           << format_value(r.beta_yx, 10) << '\t'
           << (r.ci_yx ? fmt_prec(r.ci_yx->lo, 10) : "NA") << '\t'
           << (r.ci_yx ? fmt_prec(r.ci_yx->hi, 10) : "NA") << '\t' << r.detail << "\n";
    }
}

SignPrior parse_sign_prior(const std::string& s) {
    if (s == "xy-pos-yx-neg" || s == "XY_POS_YX_NEG") return SignPrior::XyPosYxNeg;
    if (s == "xy-neg-yx-pos" || s == "XY_NEG_YX_POS") return SignPrior::XyNegYxPos;
    if (s == "magnitude" || s == "MAGNITUDE") return SignPrior::Magnitude;
    throw ConfigError("unknown sign prior '" + s + "'");
}

SimulateSpec load_simulate_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config '" + path + "': top level must be an object");

    static const std::vector<std::string> known = {
        "n",    "p",     "s_x",  "s_xy",    "s_y",     "pi_strength_x", "pi_strength_y",
        "seed", "replications", "alpha",   "methods", "sign_prior",    "cases"};
    std::vector<std::string> offending;
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            offending.push_back(it.key());
    if (!offending.empty()) {
        std::string msg = "config schema error; unknown keys:";
        for (const std::string& k : offending) msg += " " + k;
        throw ConfigError(msg);
    }

    SimulateSpec spec;
    const auto get_int = [&](const char* key, int& dest) {
        if (!j.contains(key)) return;
        if (!j[key].is_number_integer()) throw ConfigError(std::string("config key '") + key + "' must be an integer");
        dest = j[key].get<int>();
    };
    const auto get_double = [&](const char* key, double& dest) {
        if (!j.contains(key)) return;
        if (!j[key].is_number()) throw ConfigError(std::string("config key '") + key + "' must be a number");
        dest = j[key].get<double>();
    };
    get_int("n", spec.base.n);
    get_int("p", spec.base.p);
    get_int("s_x", spec.base.s_x);
    get_int("s_xy", spec.base.s_xy);
    get_int("s_y", spec.base.s_y);
    get_int("replications", spec.base.replications);
    get_double("pi_strength_x", spec.base.pi_strength_x);
    get_double("pi_strength_y", spec.base.pi_strength_y);
    get_double("alpha", spec.alpha);
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            throw ConfigError("config key 'seed' must be an integer");
        spec.base.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("methods")) {
        if (!j["methods"].is_array()) throw ConfigError("config key 'methods' must be an array");
        spec.methods.clear();
        for (const auto& m : j["methods"]) {
            if (!m.is_string()) throw ConfigError("config key 'methods' must hold strings");
            spec.methods.push_back(m.get<std::string>());
        }
    }
    if (j.contains("sign_prior")) {
        if (!j["sign_prior"].is_string()) throw ConfigError("config key 'sign_prior' must be a string");
        spec.prior = parse_sign_prior(j["sign_prior"].get<std::string>());
    }

    if (!j.contains("cases") || !j["cases"].is_array() || j["cases"].empty())
        throw ConfigError("config needs a non-empty 'cases' array");
    for (const auto& jc : j["cases"]) {
        if (!jc.is_object()) throw ConfigError("each case must be an object");
        static const std::vector<std::string> case_known = {"name", "beta_xy", "beta_yx", "grid"};
        std::vector<std::string> bad;
        for (auto it = jc.begin(); it != jc.end(); ++it)
            if (std::find(case_known.begin(), case_known.end(), it.key()) == case_known.end())
                bad.push_back(it.key());
        if (!bad.empty()) {
            std::string msg = "case schema error; unknown keys:";
            for (const std::string& k : bad) msg += " " + k;
            throw ConfigError(msg);
        }
        SimulateSpec::Case c;
        if (!jc.contains("name") || !jc["name"].is_string())
            throw ConfigError("each case needs a string 'name'");
        c.name = jc["name"].get<std::string>();
        if (!jc.contains("beta_xy") || !jc.contains("beta_yx"))
            throw ConfigError("case '" + c.name + "': needs beta_xy and beta_yx");
        const auto read_effect = [&](const char* key) -> std::pair<bool, double> {
            const auto& v = jc[key];
            if (v.is_string() && v.get<std::string>() == "vary") return {true, 0.0};
            if (v.is_number()) return {false, v.get<double>()};
            throw ConfigError("case '" + c.name + "': '" + key + "' must be a number or \"vary\"");
        };
        const auto [vxy, fxy] = read_effect("beta_xy");
        const auto [vyx, fyx] = read_effect("beta_yx");
        if (vxy == vyx)
            throw ConfigError("case '" + c.name + "': exactly one of beta_xy/beta_yx must be \"vary\"");
        c.vary = vxy ? "beta_xy" : "beta_yx";
        c.fixed_value = vxy ? fyx : fxy;
        if (!jc.contains("grid") || !jc["grid"].is_array() || jc["grid"].empty())
            throw ConfigError("case '" + c.name + "': needs a non-empty 'grid' array");
        for (const auto& g : jc["grid"]) {
            if (!g.is_number()) throw ConfigError("case '" + c.name + "': grid must hold numbers");
            c.grid.push_back(g.get<double>());
        }
        spec.cases.push_back(std::move(c));
    }
    return spec;
}

std::vector<std::pair<std::string, SimConfig>> expand_grid(const SimulateSpec& spec) {
    std::vector<std::pair<std::string, SimConfig>> out;
    for (const auto& c : spec.cases) {
        for (double v : c.grid) {
            SimConfig cfg = spec.base;
            if (c.vary == "beta_xy") {
                cfg.beta_xy = v;
                cfg.beta_yx = c.fixed_value;
            } else {
                cfg.beta_yx = v;
                cfg.beta_xy = c.fixed_value;
            }
            cfg.validate();
            out.emplace_back(c.name, cfg);
        }
    }
    return out;
}

void write_report_tsv(std::ostream& os, const std::vector<std::string>& case_names,
                      const ExperimentReport& report) {
    os << "case\tbeta_xy\tbeta_yx\ttrue_h\tmethod\treps\th_accuracy\t"
          "rmse_xy\tcoverage_xy\tna_xy\trmse_yx\tcoverage_yx\tna_yx\n";
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const ConfigReport& row = report.rows[i];
        for (const MethodMetrics& mm : row.methods) {
            os << case_names[i] << '\t' << fmt_prec(row.cfg.beta_xy, 10) << '\t'
               << fmt_prec(row.cfg.beta_yx, 10) << '\t' << row.true_h << '\t' << mm.method << '\t'
               << mm.reps << '\t' << fmt_prec(mm.h_accuracy, 10) << '\t'
               << format_value(mm.rmse_xy, 10) << '\t' << format_value(mm.coverage_xy, 10) << '\t'
               << mm.na_xy << '\t' << format_value(mm.rmse_yx, 10) << '\t'
               << format_value(mm.coverage_yx, 10) << '\t' << mm.na_yx << "\n";
        }
    }
}

void write_report_summary(std::ostream& os, const std::vector<std::string>& case_names,
                          const ExperimentReport& report) {
    os << "replication study: alpha=" << fmt_prec(report.alpha, 4)
       << " prior=" << sign_prior_name(report.prior) << "\n\n";
    std::string prev_case;
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const ConfigReport& row = report.rows[i];
        if (case_names[i] != prev_case) {
            prev_case = case_names[i];
            os << "case " << prev_case << "\n";
            char head[200];
            std::snprintf(head, sizeof head, "  %8s %8s %-7s %6s %9s %8s %7s %9s %8s %7s\n",
                          "beta_xy", "beta_yx", "method", "acc", "rmse_xy", "cov_xy", "na_xy",
                          "rmse_yx", "cov_yx", "na_yx");
            os << head;
        }
        for (const MethodMetrics& mm : row.methods) {
            char buf[240];
            std::snprintf(buf, sizeof buf, "  %8.3g %8.3g %-7s %6.3f %9s %8s %7d %9s %8s %7d\n",
                          row.cfg.beta_xy, row.cfg.beta_yx, mm.method.c_str(), mm.h_accuracy,
                          format_value(mm.rmse_xy, 3).c_str(),
                          format_value(mm.coverage_xy, 3).c_str(), mm.na_xy,
                          format_value(mm.rmse_yx, 3).c_str(),
                          format_value(mm.coverage_yx, 3).c_str(), mm.na_yx);
            os << buf;
        }
    }
}

}  // namespace bimr
