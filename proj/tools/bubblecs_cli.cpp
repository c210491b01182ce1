// bubblecs: bubble detection, date estimation and confidence sets for
// emergence, collapse and recovery dates.

#include "bubblecs/bubblecs.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace bubblecs;

namespace {

constexpr const char* kVersion = "0.1.0";

enum ExitCode { kOk = 0, kConfig = 2, kData = 3, kNumeric = 4 };

struct Common {
    std::string input;
    std::string date_col;
    std::string price_col;
    bool no_log = false;
    std::uint64_t seed = 20240607;
    double delta = 0.10;
    double eps = 0.10;
    std::string ends = "estimated";
    std::string out_dir = ".";
    unsigned threads = 0;
    double trim = 0.10;
    int cv_reps = 50000;
    int cv_steps = 1000;
};

struct CiOptions {
    std::string te, tc, tr;
    std::string emergence_variant = "LE";
    std::string collapse_variant = "EMa";
    std::string recovery_variant = "LE";
};

struct DetectOptions {
    double level = 0.05;
    double r0 = 0.0;
    int lags = 0;
    int reps = 2000;
};

struct McOptions {
    int case_id = 1;
    std::vector<double> a = {2.0, 4.0, 6.0};
    int reps = 2000;
};

struct TabulateOptions {
    std::vector<std::string> functionals;
    std::vector<double> quantiles;
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

ConfigEntries base_config(const std::string& command, const Common& c) {
    return {{"tool", std::string("bubblecs ") + kVersion},
            {"command", command},
            {"seed", std::to_string(c.seed)},
            {"delta", num(c.delta)},
            {"eps", num(c.eps)}};
}

ConfigEntries data_config(const Common& c) {
    return {{"input", c.input},
            {"date_column", c.date_col.empty() ? "<first>" : c.date_col},
            {"price_column", c.price_col.empty() ? "<second>" : c.price_col},
            {"log_transform", c.no_log ? "false" : "true"}};
}

nlohmann::json to_json(const ConfigEntries& cfg) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : cfg) j[k] = v;
    return j;
}

fs::path out_path(const Common& c, const std::string& name) {
    fs::create_directories(c.out_dir);
    return fs::path(c.out_dir) / name;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw DataError("cannot write '" + p.string() + "'");
    return os;
}

void write_json(const fs::path& p, const nlohmann::json& j) {
    auto os = open_out(p);
    os << j.dump(2) << '\n';
}

PriceData load(const Common& c) {
    if (c.input.empty()) throw ParameterError("--input is required");
    return ingest(c.input, ColumnSpec{c.date_col, c.price_col}, !c.no_log);
}

SimulationSettings sim_settings(const Common& c) {
    return {c.cv_reps, c.cv_steps, c.seed, c.threads};
}

/// Accepts an observation index or a YYYY-MM-DD date.
int resolve_date(const std::string& s, const DateIndex& idx, const char* what) {
    if (s.empty()) throw ParameterError(std::string("--") + what + " is required with --ends true");
    if (s.find('-') != std::string::npos) return idx.index(parse_date(s));
    try {
        std::size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::logic_error&) {
        throw ParameterError(std::string("--") + what + ": expected an index or YYYY-MM-DD, got '" + s + "'");
    }
}

nlohmann::json dates_json(const BreakDates& b, const DateIndex& idx) {
    return {{"te", b.te}, {"tc", b.tc}, {"tr", b.tr},
            {"te_date", idx.label(b.te)}, {"tc_date", idx.label(b.tc)}, {"tr_date", idx.label(b.tr)}};
}

// ---------------------------------------------------------------------------

int cmd_detect(const Common& c, const DetectOptions& o) {
    const auto data = load(c);
    const int T = data.series.T();
    const double r0 = o.r0 > 0.0 ? o.r0 : default_sadf_window(T);
    const AdfOptions adf{o.lags};
    const double stat = sadf(data.series, r0, adf);
    const double cv = sadf_critical_value(T, r0, o.level, o.reps, c.seed, adf, c.threads);
    const bool reject = stat > cv;

    auto cfg = base_config("detect", c);
    for (auto& e : data_config(c)) cfg.push_back(e);
    cfg.insert(cfg.end(), {{"level", num(o.level)}, {"r0", num(r0)}, {"lags", std::to_string(o.lags)},
                           {"cv_reps", std::to_string(o.reps)}});
    nlohmann::json j;
    j["config"] = to_json(cfg);
    j["T"] = T;
    j["sadf"] = stat;
    j["critical_value"] = cv;
    j["bubble_detected"] = reject;
    write_json(out_path(c, "detect.json"), j);
    std::cout << "SADF " << num(stat) << "  cv(" << num(o.level) << ") " << num(cv) << "  -> "
              << (reject ? "explosive behaviour detected" : "no evidence of explosiveness") << '\n';
    return kOk;
}

int cmd_estimate(const Common& c) {
    const auto data = load(c);
    const BreakDates b = estimate_breaks(data.series, c.trim);
    const RegimeFit fit = fit_regimes(data.series, b);

    auto cfg = base_config("estimate", c);
    for (auto& e : data_config(c)) cfg.push_back(e);
    cfg.emplace_back("trim", num(c.trim));
    nlohmann::json j;
    j["config"] = to_json(cfg);
    j["T"] = data.series.T();
    j["dates"] = dates_json(b, data.index);
    j["phi_a_hat"] = fit.phi_a_hat;
    j["phi_b_hat"] = fit.phi_b_hat;
    j["sigma2_hat"] = fit.sigma2_hat;
    write_json(out_path(c, "estimate.json"), j);
    std::cout << "emergence " << data.index.label(b.te) << "  collapse " << data.index.label(b.tc)
              << "  recovery " << data.index.label(b.tr) << '\n';
    return kOk;
}

int cmd_ci(const Common& c, const CiOptions& o) {
    const auto data = load(c);
    const Ends ends = parse_ends(c.ends);
    const int T = data.series.T();
    BreakDates b;
    if (ends == Ends::True) {
        b = {resolve_date(o.te, data.index, "te"), resolve_date(o.tc, data.index, "tc"),
             resolve_date(o.tr, data.index, "tr")};
    } else {
        b = estimate_breaks(data.series, c.trim);
    }
    b.validate(T);
    const RegimeFit fit = fit_regimes(data.series, b);
    const auto cvs = CriticalValues::for_level(c.delta, c.eps, sim_settings(c));
    const PrefixSums ps(data.series);

    const std::array<std::pair<DateType, Variant>, 3> plan = {
        std::pair{DateType::Emergence, parse_variant(o.emergence_variant)},
        std::pair{DateType::Collapse, parse_variant(o.collapse_variant)},
        std::pair{DateType::Recovery, parse_variant(o.recovery_variant)}};

    auto cfg = base_config("ci", c);
    for (auto& e : data_config(c)) cfg.push_back(e);
    cfg.insert(cfg.end(), {{"ends", c.ends}, {"trim", num(c.trim)}, {"te", std::to_string(b.te)},
                           {"tc", std::to_string(b.tc)}, {"tr", std::to_string(b.tr)},
                           {"emergence_variant", o.emergence_variant},
                           {"collapse_variant", o.collapse_variant},
                           {"recovery_variant", o.recovery_variant},
                           {"cv_source", to_string(cvs.source(Functional::EMa21e))}});
    if (cvs.source(Functional::EMa21e) == CvSource::Simulated)
        cfg.insert(cfg.end(), {{"cv_reps", std::to_string(c.cv_reps)}, {"cv_steps", std::to_string(c.cv_steps)}});

    const DateLabeler label = [&](int t) { return data.index.label(t); };
    nlohmann::json summary;
    summary["config"] = to_json(cfg);
    summary["estimates"] = dates_json(b, data.index);
    summary["phi_a_hat"] = fit.phi_a_hat;
    summary["phi_b_hat"] = fit.phi_b_hat;
    summary["sigma2_hat"] = fit.sigma2_hat;

    std::vector<std::vector<char>> member(3, std::vector<char>(static_cast<std::size_t>(T) + 1, 0));
    for (std::size_t k = 0; k < plan.size(); ++k) {
        const auto [type, variant] = plan[k];
        const Variant v[] = {variant};
        const auto set = std::move(build_sets(ps, fit, b, type, v, cvs).front());
        auto os = open_out(out_path(c, to_string(type) + ".csv"));
        write_config_header(os, cfg);
        os << "# date_type=" << to_string(type) << "\n# variant=" << to_string(variant) << '\n';
        write_set_csv(os, set, label);
        summary["sets"][to_string(type)] = set_summary_json(set, label);
        for (int d : set.retained()) member[k][static_cast<std::size_t>(d)] = 1;
        const auto kept = set.retained();
        std::cout << to_string(type) << " (" << to_string(variant) << "): " << kept.size() << " dates";
        if (!kept.empty()) std::cout << ", " << label(kept.front()) << " .. " << label(kept.back());
        std::cout << '\n';
    }
    write_json(out_path(c, "summary.json"), summary);

    auto bands = open_out(out_path(c, "bands.csv"));
    write_config_header(bands, cfg);
    bands << "index,date," << (c.no_log ? "price" : "log_price") << ",in_emergence_set,in_collapse_set,in_recovery_set\n";
    bands.precision(12);
    for (int t = 0; t <= T; ++t) {
        const auto i = static_cast<std::size_t>(t);
        bands << t << ',' << label(t) << ',' << data.series[t] << ',' << int(member[0][i]) << ','
              << int(member[1][i]) << ',' << int(member[2][i]) << '\n';
    }
    return kOk;
}

int cmd_mc(const Common& c, const McOptions& o) {
    const Ends ends = parse_ends(c.ends);
    const auto cvs = CriticalValues::for_level(c.delta, c.eps, sim_settings(c));
    std::vector<McReport> reports;
    for (double a : o.a) {
        McScenario sc = McScenario::preset(o.case_id, a, ends);
        sc.reps = o.reps;
        sc.seed = c.seed;
        sc.delta = c.delta;
        sc.eps = c.eps;
        sc.trim = c.trim;
        reports.push_back(run_scenario(sc, cvs, c.threads));

        char name[96];
        std::snprintf(name, sizeof name, "mc_case%d_a%g_%s.csv", o.case_id, a, to_string(ends).c_str());
        auto os = open_out(out_path(c, name));
        auto cfg = base_config("mc", c);
        cfg.emplace_back("cv_source", to_string(cvs.source(Functional::EMa21e)));
        write_config_header(os, cfg);
        write_report_csv(os, reports.back());
    }
    char name[64];
    std::snprintf(name, sizeof name, "mc_case%d_%s.md", o.case_id, to_string(ends).c_str());
    auto md = open_out(out_path(c, name));
    md << "<!--\n";
    write_config_header(md, base_config("mc", c));
    md << "-->\n\n";
    write_report_markdown(md, reports);
    write_report_markdown(std::cout, reports);
    return kOk;
}

int cmd_tabulate(const Common& c, const TabulateOptions& o) {
    std::vector<Functional> fs;
    if (o.functionals.empty()) fs.assign(kAllFunctionals.begin(), kAllFunctionals.end());
    for (const auto& s : o.functionals) fs.push_back(parse_functional(s));
    const auto grid = lambda_grid();
    for (auto f : fs) {
        std::vector<double> q = o.quantiles;
        if (q.empty()) q = {tail_quantile(f, c.delta)};
        const auto rows = tabulate(f, grid, c.eps, q, sim_settings(c));
        auto os = open_out(out_path(c, "cv_" + to_string(f) + ".csv"));
        auto cfg = base_config("tabulate", c);
        cfg.insert(cfg.end(), {{"functional", to_string(f)}, {"cv_reps", std::to_string(c.cv_reps)},
                               {"cv_steps", std::to_string(c.cv_steps)}});
        write_config_header(os, cfg);
        write_cv_csv(os, rows);
        std::cout << "wrote " << (fs::path(c.out_dir) / ("cv_" + to_string(f) + ".csv")).string() << '\n';
    }
    return kOk;
}

void report_error(const char* kind, const std::string& msg) {
    nlohmann::json j{{"error", kind}, {"message", msg}};
    std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Confidence sets for bubble emergence, collapse and recovery dates"};
    app.set_version_flag("--version", kVersion);
    app.set_config("--config", "", "TOML/INI file with option values (command-line flags win)");
    app.require_subcommand(1);
    app.fallthrough();

    Common c;
    app.add_option("--seed", c.seed, "Random seed")->capture_default_str();
    app.add_option("--delta", c.delta, "Overall significance level (split equally between tails)")
        ->capture_default_str()->check(CLI::Range(0.0, 1.0));
    app.add_option("--eps", c.eps, "Trimming fraction")->capture_default_str()->check(CLI::Range(0.0, 0.5));
    app.add_option("--out-dir", c.out_dir, "Directory for output files")->capture_default_str();
    app.add_option("--threads", c.threads, "Worker threads (0 = hardware concurrency)")->capture_default_str();
    app.add_option("--trim", c.trim, "Trimming for break-date estimation")->capture_default_str();
    app.add_option("--cv-reps", c.cv_reps, "Replications for simulated critical values")->capture_default_str();
    app.add_option("--cv-steps", c.cv_steps, "Grid steps for simulated Brownian motion")->capture_default_str();

    auto add_input = [&](CLI::App* sub) {
        sub->add_option("--input", c.input, "CSV file with a date column and a price column")->required();
        sub->add_option("--date-col", c.date_col, "Date column name (default: first column)");
        sub->add_option("--price-col", c.price_col, "Price column name (default: second column)");
        sub->add_flag("--no-log", c.no_log, "Use prices as given instead of their logarithm");
    };

    DetectOptions det;
    auto* detect = app.add_subcommand("detect", "SADF test for explosive behaviour");
    add_input(detect);
    detect->add_option("--level", det.level, "Significance level")->capture_default_str();
    detect->add_option("--r0", det.r0, "Minimal window fraction (default 0.01 + 1.8/sqrt(T))");
    detect->add_option("--lags", det.lags, "ADF augmentation lags")->capture_default_str();
    detect->add_option("--reps", det.reps, "Random-walk replications for the critical value")->capture_default_str();

    auto* estimate = app.add_subcommand("estimate", "Least-squares estimates of the three break dates");
    add_input(estimate);

    CiOptions ci;
    auto* cis = app.add_subcommand("ci", "Confidence sets for the three dates");
    add_input(cis);
    cis->add_option("--ends", c.ends, "Segment ends: true (given by --te/--tc/--tr) or estimated")
        ->capture_default_str()->check(CLI::IsMember({"true", "estimated"}));
    cis->add_option("--te", ci.te, "Emergence date (index or YYYY-MM-DD) for --ends true");
    cis->add_option("--tc", ci.tc, "Collapse date (index or YYYY-MM-DD) for --ends true");
    cis->add_option("--tr", ci.tr, "Recovery date (index or YYYY-MM-DD) for --ends true");
    cis->add_option("--emergence-variant", ci.emergence_variant)->capture_default_str()
        ->check(CLI::IsMember({"LRa", "EMa", "EMb", "LE"}));
    cis->add_option("--collapse-variant", ci.collapse_variant)->capture_default_str()
        ->check(CLI::IsMember({"LRa", "EMa", "EMb"}));
    cis->add_option("--recovery-variant", ci.recovery_variant)->capture_default_str()
        ->check(CLI::IsMember({"LRa", "EMa", "EMb", "LE"}));

    McOptions mo;
    auto* mc = app.add_subcommand("mc", "Monte Carlo coverage and length study");
    mc->add_option("--case", mo.case_id, "Break-fraction case 1-4")->capture_default_str()->check(CLI::Range(1, 4));
    mc->add_option("--a", mo.a, "Explosive constants (b = a)")->capture_default_str();
    mc->add_option("--reps", mo.reps, "Replications per scenario")->capture_default_str();
    mc->add_option("--ends", c.ends, "true or estimated")->capture_default_str()
        ->check(CLI::IsMember({"true", "estimated"}));

    TabulateOptions to;
    auto* tab = app.add_subcommand("tabulate", "Simulate critical values on the 0.10..0.90 grid");
    tab->add_option("--functional", to.functionals, "LR21e, EMa21e, EMb21e, EMa12r, EMb12r (default all)");
    tab->add_option("--quantile", to.quantiles, "Quantile levels (default from --delta)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        if (*detect) return cmd_detect(c, det);
        if (*estimate) return cmd_estimate(c);
        if (*cis) return cmd_ci(c, ci);
        if (*mc) return cmd_mc(c, mo);
        if (*tab) return cmd_tabulate(c, to);
    } catch (const ParameterError& e) {
        report_error("config", e.what());
        return kConfig;
    } catch (const RangeError& e) {
        report_error("config", e.what());
        return kConfig;
    } catch (const DataError& e) {
        report_error("data", e.what());
        return kData;
    } catch (const DegenerateFitError& e) {
        report_error("degenerate", e.what());
        return kNumeric;
    } catch (const NumericError& e) {
        report_error("numeric", e.what());
        return kNumeric;
    } catch (const FitError& e) {
        report_error("fit", e.what());
        return kNumeric;
    } catch (const fs::filesystem_error& e) {
        report_error("data", e.what());
        return kData;
    }
    return kConfig;
}
