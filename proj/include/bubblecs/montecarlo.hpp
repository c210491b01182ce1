#pragma once

#include "bubblecs/confidence_set.hpp"
#include "bubblecs/critical_values.hpp"
#include "bubblecs/estimation.hpp"
#include "bubblecs/model.hpp"
#include "bubblecs/parallel.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace bubblecs {

enum class Ends { True, Estimated };

inline std::string to_string(Ends e) { return e == Ends::True ? "true" : "estimated"; }

inline Ends parse_ends(const std::string& s) {
    if (s == "true") return Ends::True;
    if (s == "estimated") return Ends::Estimated;
    throw ParameterError("ends must be 'true' or 'estimated', got '" + s + "'");
}

/// One simulation design. Defaults reproduce the published study: T = 200,
/// sigma = 6.79, y0 = 100, phi_a = 1 + a/T, phi_b = 1 - a/T, 2000 replications,
/// delta = 0.10 (0.05 per one-sided test), eps = 0.10.
struct McScenario {
    int case_id = 1;
    double lambda_e = 0.3;
    double lambda_c = 0.5;
    double lambda_r = 0.7;
    double a = 2.0;
    double alpha = 1.0;
    double b = 2.0;
    double beta = 1.0;
    Ends ends = Ends::True;
    int reps = 2000;
    std::uint64_t seed = 12345;
    int T = 200;
    double sigma = 6.79;
    double y0 = 100.0;
    double delta = 0.10;
    double eps = 0.10;
    double trim = 0.10;

    BubbleDgpSpec dgp() const {
        return {T, a, alpha, b, beta, lambda_e, lambda_c, lambda_r, sigma, y0};
    }

    bool operator==(const McScenario&) const = default;

    /// Cases 1-4 with the collapse speed tied to the explosive speed (b = a).
    static McScenario preset(int case_id, double a, Ends ends = Ends::True) {
        static constexpr double fractions[4][3] = {
            {0.3, 0.5, 0.7}, {0.4, 0.6, 0.8}, {0.5, 0.7, 0.9}, {0.4, 0.6, 0.7}};
        if (case_id < 1 || case_id > 4) throw ParameterError("case must be 1, 2, 3 or 4");
        McScenario s;
        s.case_id = case_id;
        s.lambda_e = fractions[case_id - 1][0];
        s.lambda_c = fractions[case_id - 1][1];
        s.lambda_r = fractions[case_id - 1][2];
        s.a = a;
        s.b = a;
        s.ends = ends;
        return s;
    }
};

struct VariantMetrics {
    double coverage = 0.0;
    double coverage12 = 0.0;
    double coverage21 = 0.0;
    double length = 0.0;
    double length12left = 0.0;
    double length12right = 0.0;
    double length21left = 0.0;
    double length21right = 0.0;

    bool operator==(const VariantMetrics&) const = default;
};

inline constexpr std::array<const char*, 8> kMetricNames = {
    "coverage", "coverage12", "coverage21", "length",
    "length12left", "length12right", "length21left", "length21right"};

inline double& metric_ref(VariantMetrics& m, std::size_t i) {
    double* fields[] = {&m.coverage, &m.coverage12, &m.coverage21, &m.length,
                        &m.length12left, &m.length12right, &m.length21left, &m.length21right};
    return *fields[i];
}
inline double metric_value(const VariantMetrics& m, std::size_t i) {
    return metric_ref(const_cast<VariantMetrics&>(m), i);
}

struct DateTypeReport {
    DateType type = DateType::Emergence;
    /// Share of replications whose (estimated) segment misses the true date.
    double noncontainment = 0.0;
    /// Replications entering the length averages.
    int length_reps = 0;
    std::vector<Variant> variants;
    std::vector<VariantMetrics> metrics;

    bool operator==(const DateTypeReport&) const = default;

    const VariantMetrics& at(Variant v) const {
        for (std::size_t i = 0; i < variants.size(); ++i)
            if (variants[i] == v) return metrics[i];
        throw ParameterError("variant " + to_string(v) + " not in report");
    }
};

struct McReport {
    McScenario scenario;
    std::array<DateTypeReport, 3> dates;

    const DateTypeReport& at(DateType d) const { return dates[static_cast<std::size_t>(d)]; }
    bool operator==(const McReport&) const = default;
};

namespace detail {

inline constexpr std::array<DateType, 3> kDateTypes = {DateType::Emergence, DateType::Collapse,
                                                       DateType::Recovery};

struct ReplicationOutcome {
    std::array<bool, 3> in_segment{};
    std::array<std::vector<SetMetrics>, 3> metrics;
};

inline int truth_for(DateType d, const BreakDates& b) {
    switch (d) {
        case DateType::Emergence: return b.te;
        case DateType::Collapse: return b.tc;
        case DateType::Recovery: return b.tr;
    }
    return 0;
}

inline ReplicationOutcome run_replication(const McScenario& sc, const CriticalValues& cvs,
                                          std::uint64_t rep) {
    const BubbleDgpSpec dgp = sc.dgp();
    GaussianNoise noise(mix_seed(sc.seed, rep), sc.sigma);
    const Series series = simulate(dgp, noise);
    const BreakDates truth = dgp.dates();
    const BreakDates bounds = sc.ends == Ends::True ? truth : estimate_breaks(series, sc.trim);
    const PrefixSums ps(series);

    ReplicationOutcome out;
    std::optional<RegimeFit> fit;
    try {
        fit = fit_regimes(series, bounds);
    } catch (const ParameterError&) {
        fit.reset();
    }
    for (std::size_t k = 0; k < kDateTypes.size(); ++k) {
        const DateType d = kDateTypes[k];
        const auto variants = default_variants(d);
        const int t = truth_for(d, truth);
        const Segment seg = segment_for(d, bounds, series.T());
        out.in_segment[k] = t > seg.start && t <= seg.end;
        std::vector<SetMetrics> ms(variants.size());
        if (fit) {
            try {
                const auto sets = build_sets(ps, *fit, bounds, d, variants, cvs);
                for (std::size_t i = 0; i < sets.size(); ++i) ms[i] = set_metrics(sets[i], t);
            } catch (const ParameterError&) {
                // segment too short to test: empty set
                for (auto& m : ms) m = SetMetrics{.truth_in_segment = out.in_segment[k]};
            }
        }
        out.metrics[k] = std::move(ms);
    }
    return out;
}

}  // namespace detail

/// Runs all replications of a scenario. Coverage is averaged over every
/// replication; lengths only over replications whose segment contains the
/// true date. Replication r draws from a stream keyed by (seed, r), so the
/// report does not depend on `threads`.
inline McReport run_scenario(const McScenario& sc, const CriticalValues& cvs, unsigned threads = 0) {
    sc.dgp().validate();
    if (sc.reps < 1) throw ParameterError("need at least one replication");
    if (std::fabs(cvs.delta() - sc.delta) > 1e-12 || std::fabs(cvs.eps() - sc.eps) > 1e-12)
        throw ParameterError("critical values were built for a different delta or eps");

    std::vector<detail::ReplicationOutcome> outcomes(static_cast<std::size_t>(sc.reps));
    parallel_for(outcomes.size(), threads, [&](std::size_t r) {
        outcomes[r] = detail::run_replication(sc, cvs, r);
    });

    McReport report;
    report.scenario = sc;
    for (std::size_t k = 0; k < detail::kDateTypes.size(); ++k) {
        auto& dr = report.dates[k];
        dr.type = detail::kDateTypes[k];
        dr.variants = default_variants(dr.type);
        dr.metrics.assign(dr.variants.size(), VariantMetrics{});
        int missing = 0;
        for (const auto& o : outcomes) {
            const bool inside = o.in_segment[k];
            missing += !inside;
            dr.length_reps += inside;
            for (std::size_t i = 0; i < dr.variants.size(); ++i) {
                const SetMetrics& m = o.metrics[k][i];
                auto& acc = dr.metrics[i];
                acc.coverage += m.contains;
                acc.coverage12 += m.contains12;
                acc.coverage21 += m.contains21;
                if (inside) {
                    acc.length += m.length;
                    acc.length12left += m.length12left;
                    acc.length12right += m.length12right;
                    acc.length21left += m.length21left;
                    acc.length21right += m.length21right;
                }
            }
        }
        const double n = sc.reps;
        const double nl = dr.length_reps > 0 ? dr.length_reps : 1.0;
        dr.noncontainment = missing / n;
        for (auto& acc : dr.metrics) {
            acc.coverage /= n;
            acc.coverage12 /= n;
            acc.coverage21 /= n;
            acc.length /= nl;
            acc.length12left /= nl;
            acc.length12right /= nl;
            acc.length21left /= nl;
            acc.length21right /= nl;
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace detail {

inline std::string exact(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::vector<std::pair<std::string, std::string>> scenario_fields(const McScenario& s) {
    return {{"case", std::to_string(s.case_id)},   {"lambda_e", exact(s.lambda_e)},
            {"lambda_c", exact(s.lambda_c)},        {"lambda_r", exact(s.lambda_r)},
            {"a", exact(s.a)},                      {"alpha", exact(s.alpha)},
            {"b", exact(s.b)},                      {"beta", exact(s.beta)},
            {"ends", to_string(s.ends)},            {"reps", std::to_string(s.reps)},
            {"seed", std::to_string(s.seed)},       {"T", std::to_string(s.T)},
            {"sigma", exact(s.sigma)},              {"y0", exact(s.y0)},
            {"delta", exact(s.delta)},              {"eps", exact(s.eps)},
            {"trim", exact(s.trim)}};
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw DataError("bad number '" + s + "'");
    return v;
}

inline void set_scenario_field(McScenario& s, const std::string& key, const std::string& value) {
    if (key == "case") s.case_id = std::stoi(value);
    else if (key == "lambda_e") s.lambda_e = parse_double(value);
    else if (key == "lambda_c") s.lambda_c = parse_double(value);
    else if (key == "lambda_r") s.lambda_r = parse_double(value);
    else if (key == "a") s.a = parse_double(value);
    else if (key == "alpha") s.alpha = parse_double(value);
    else if (key == "b") s.b = parse_double(value);
    else if (key == "beta") s.beta = parse_double(value);
    else if (key == "ends") s.ends = parse_ends(value);
    else if (key == "reps") s.reps = std::stoi(value);
    else if (key == "seed") s.seed = std::stoull(value);
    else if (key == "T") s.T = std::stoi(value);
    else if (key == "sigma") s.sigma = parse_double(value);
    else if (key == "y0") s.y0 = parse_double(value);
    else if (key == "delta") s.delta = parse_double(value);
    else if (key == "eps") s.eps = parse_double(value);
    else if (key == "trim") s.trim = parse_double(value);
}

}  // namespace detail

/// Long-format CSV: a `# key=value` header carrying the scenario, then one
/// row per (date type, variant, metric). Numbers use shortest round-trip form.
inline void write_report_csv(std::ostream& os, const McReport& r) {
    os << "# bubblecs monte carlo report\n";
    for (const auto& [k, v] : detail::scenario_fields(r.scenario)) os << "# " << k << '=' << v << '\n';
    os << "date_type,variant,metric,value\n";
    for (const auto& d : r.dates) {
        os << to_string(d.type) << ",*,noncontainment," << detail::exact(d.noncontainment) << '\n';
        os << to_string(d.type) << ",*,length_reps," << d.length_reps << '\n';
        for (std::size_t i = 0; i < d.variants.size(); ++i)
            for (std::size_t m = 0; m < kMetricNames.size(); ++m)
                os << to_string(d.type) << ',' << to_string(d.variants[i]) << ',' << kMetricNames[m]
                   << ',' << detail::exact(metric_value(d.metrics[i], m)) << '\n';
    }
}

inline McReport read_report_csv(std::istream& is) {
    McReport r;
    for (std::size_t k = 0; k < 3; ++k) r.dates[k].type = detail::kDateTypes[k];
    std::string line;
    bool header_seen = false;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq != std::string::npos && line.size() > 2)
                detail::set_scenario_field(r.scenario, line.substr(2, eq - 2), line.substr(eq + 1));
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        std::stringstream ss(line);
        std::string dt, var, metric, value;
        if (!std::getline(ss, dt, ',') || !std::getline(ss, var, ',') || !std::getline(ss, metric, ',') ||
            !std::getline(ss, value))
            throw DataError("malformed report row at line " + std::to_string(lineno));
        auto& d = r.dates[static_cast<std::size_t>(parse_date_type(dt))];
        if (var == "*") {
            if (metric == "noncontainment") d.noncontainment = detail::parse_double(value);
            else if (metric == "length_reps") d.length_reps = std::stoi(value);
            continue;
        }
        const Variant v = parse_variant(var);
        auto it = std::find(d.variants.begin(), d.variants.end(), v);
        if (it == d.variants.end()) {
            d.variants.push_back(v);
            d.metrics.emplace_back();
            it = d.variants.end() - 1;
        }
        auto& m = d.metrics[static_cast<std::size_t>(it - d.variants.begin())];
        const auto name = std::find_if(kMetricNames.begin(), kMetricNames.end(),
                                       [&](const char* n) { return metric == n; });
        if (name == kMetricNames.end()) throw DataError("unknown metric '" + metric + "'");
        metric_ref(m, static_cast<std::size_t>(name - kMetricNames.begin())) = detail::parse_double(value);
    }
    return r;
}

/// Tables in the published layout: one table per date type, metric rows
/// grouped by a, one column per variant. Reports should share everything but a.
inline void write_report_markdown(std::ostream& os, const std::vector<McReport>& reports) {
    if (reports.empty()) return;
    const auto& s0 = reports.front().scenario;
    char buf[64];
    for (std::size_t k = 0; k < 3; ++k) {
        const auto& first = reports.front().dates[k];
        os << "### " << to_string(first.type) << " (case " << s0.case_id << ", " << to_string(s0.ends)
           << " ends, " << s0.reps << " reps)\n\n";
        os << "| metric | a |";
        for (auto v : first.variants) os << ' ' << to_string(v) << " |";
        os << "\n|---|---|";
        for (std::size_t i = 0; i < first.variants.size(); ++i) os << "---|";
        os << '\n';
        for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
            for (const auto& r : reports) {
                const auto& d = r.dates[k];
                std::snprintf(buf, sizeof buf, "%g", r.scenario.a);
                os << "| " << kMetricNames[m] << " | " << buf << " |";
                for (const auto& mm : d.metrics) {
                    std::snprintf(buf, sizeof buf, " %.2f |", metric_value(mm, m));
                    os << buf;
                }
                os << '\n';
            }
        }
        os << "\nnon-containment of the true date:";
        for (const auto& r : reports) {
            std::snprintf(buf, sizeof buf, " a=%g: %.3f;", r.scenario.a, r.dates[k].noncontainment);
            os << buf;
        }
        os << "\n\n";
    }
}

}  // namespace bubblecs
