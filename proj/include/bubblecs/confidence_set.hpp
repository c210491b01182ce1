#pragma once

#include "bubblecs/collapse.hpp"
#include "bubblecs/critical_values.hpp"
#include "bubblecs/emergence.hpp"
#include "bubblecs/recovery.hpp"

#include <json.hpp>

#include <algorithm>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace bubblecs {

/// Test outcome at one hypothesized date. stat/cv pairs hold the statistics
/// the variant actually compares.
struct DateRecord {
    int date = 0;
    bool retained = true;
    bool reject12 = false;
    bool reject21 = false;
    bool degenerate = false;
    double stat12 = 0.0;
    double stat21 = 0.0;
    double cv12 = 0.0;
    double cv21 = 0.0;
};

/// Dates in (seg_start, seg_end] not rejected by the location test. May be
/// discontinuous and need not contain the point estimate.
struct ConfidenceSet {
    DateType type = DateType::Emergence;
    Variant variant = Variant::LE;
    double delta = 0.10;
    double eps = 0.10;
    int seg_start = 0;
    int seg_end = 0;
    std::vector<DateRecord> records;

    int span() const { return seg_end - seg_start; }

    std::vector<int> retained() const {
        std::vector<int> out;
        for (const auto& r : records)
            if (r.retained) out.push_back(r.date);
        return out;
    }

    bool contains(int date) const {
        const auto it = std::find_if(records.begin(), records.end(),
                                     [&](const DateRecord& r) { return r.date == date; });
        return it != records.end() && it->retained;
    }

    std::size_t degenerate_count() const {
        return static_cast<std::size_t>(std::count_if(records.begin(), records.end(),
                                                      [](const DateRecord& r) { return r.degenerate; }));
    }
};

/// Which statistics a variant compares, per date type.
inline std::vector<Variant> default_variants(DateType d) {
    if (d == DateType::Collapse) return {Variant::LRa, Variant::EMa, Variant::EMb};
    return {Variant::LRa, Variant::EMa, Variant::EMb, Variant::LE};
}

/// Segment (start, end] analysed for a date type given the bounding dates.
struct Segment {
    int start = 0;
    int end = 0;
    int span() const { return end - start; }
};

inline Segment segment_for(DateType d, const BreakDates& b, int T) {
    switch (d) {
        case DateType::Emergence: return {0, b.tc};
        case DateType::Collapse: return {b.te, b.tr};
        case DateType::Recovery: return {b.tc, T};
    }
    return {};
}

inline PermissibleRange permissible_range(DateType d, const BreakDates& b, int T, double eps) {
    switch (d) {
        case DateType::Emergence: return emergence_range(b.tc, eps);
        case DateType::Collapse: return collapse_range(b.te, b.tr, eps);
        case DateType::Recovery: return recovery_range(b.tc, T, eps);
    }
    return {};
}

namespace detail {

inline DateRecord emergence_record(const EmergenceStats& s, const EmergenceCvs& cv, Variant v) {
    DateRecord r;
    const Decision d = emergence_decision(s, cv, v);
    r.reject12 = d.reject12;
    r.reject21 = d.reject21;
    switch (v) {
        case Variant::LRa: r.stat12 = s.lr_a12; r.cv12 = cv.lr12; r.stat21 = s.lr_a21; r.cv21 = cv.lr21; break;
        case Variant::EMa: r.stat12 = s.em_a12; r.cv12 = cv.em12; r.stat21 = s.em_a21; r.cv21 = cv.ema21; break;
        case Variant::EMb: r.stat12 = s.em_b12; r.cv12 = cv.em12; r.stat21 = s.em_b21; r.cv21 = cv.emb21; break;
        case Variant::LE: r.stat12 = s.lr_b12; r.cv12 = cv.lr12; r.stat21 = s.em_a21; r.cv21 = cv.ema21; break;
    }
    return r;
}

inline DateRecord collapse_record(const CollapseStats& s, const CollapseCvs& cv, Variant v) {
    DateRecord r;
    const Decision d = collapse_decision(s, cv, v);
    r.reject12 = d.reject12;
    r.reject21 = d.reject21;
    switch (v) {
        case Variant::LRa: r.stat12 = s.lr_a12; r.cv12 = cv.lr12; r.stat21 = s.lr_a21; r.cv21 = cv.lr21; break;
        case Variant::EMa: r.stat12 = s.em_a12; r.cv12 = cv.em12; r.stat21 = s.em_a21; r.cv21 = cv.em21; break;
        case Variant::EMb: r.stat12 = s.em_b12; r.cv12 = cv.em12; r.stat21 = s.em_b21; r.cv21 = cv.em21; break;
        case Variant::LE: break;
    }
    return r;
}

inline DateRecord recovery_record(const RecoveryStats& s, const RecoveryCvs& cv, Variant v) {
    DateRecord r;
    const Decision d = recovery_decision(s, cv, v);
    r.reject12 = d.reject12;
    r.reject21 = d.reject21;
    switch (v) {
        case Variant::LRa: r.stat12 = s.lr_a12; r.cv12 = cv.lr12; r.stat21 = s.lr_a21; r.cv21 = cv.lr21; break;
        case Variant::EMa: r.stat12 = s.em_a12; r.cv12 = cv.ema12; r.stat21 = s.em_a21; r.cv21 = cv.em21; break;
        case Variant::EMb: r.stat12 = s.em_b12; r.cv12 = cv.emb12; r.stat21 = s.em_b21; r.cv21 = cv.em21; break;
        case Variant::LE: r.stat12 = s.em_b12; r.cv12 = cv.emb12; r.stat21 = s.lr_b21; r.cv21 = cv.lr21; break;
    }
    return r;
}

}  // namespace detail

/// Inverts the location test for every permissible date, once per variant.
/// Statistics are computed once per date and shared by all variants. Dates
/// whose statistics are undefined for the fit are retained and flagged.
inline std::vector<ConfidenceSet> build_sets(const PrefixSums& ps, const RegimeFit& fit,
                                             const BreakDates& bounds, DateType type,
                                             std::span<const Variant> variants,
                                             const CriticalValues& cvs) {
    const int T = ps.T();
    const double eps = cvs.eps();
    const Segment seg = segment_for(type, bounds, T);
    const int m = detail::trim_of(eps, seg.span());
    if (seg.start < 0 || seg.end > T || m < 2 || seg.span() < 2 * m + 2)
        throw ParameterError("segment (" + std::to_string(seg.start) + ", " + std::to_string(seg.end) +
                             "] too short for " + to_string(type) + " location tests");
    if (type == DateType::Collapse)
        for (auto v : variants)
            if (v == Variant::LE) throw ParameterError("the LE combination is not defined for the collapse date");

    std::vector<ConfidenceSet> sets(variants.size());
    for (std::size_t i = 0; i < variants.size(); ++i) {
        sets[i].type = type;
        sets[i].variant = variants[i];
        sets[i].delta = cvs.delta();
        sets[i].eps = eps;
        sets[i].seg_start = seg.start;
        sets[i].seg_end = seg.end;
    }

    const auto range = permissible_range(type, bounds, T, eps);
    for (int t1 = range.lo; t1 <= range.hi; ++t1) {
        std::vector<DateRecord> recs(variants.size());
        try {
            switch (type) {
                case DateType::Emergence: {
                    const auto s = emergence_stats(ps, fit, bounds.tc, t1, eps);
                    const auto cv = cvs.emergence(t1, bounds.tc, T);
                    for (std::size_t i = 0; i < variants.size(); ++i) recs[i] = detail::emergence_record(s, cv, variants[i]);
                    break;
                }
                case DateType::Collapse: {
                    const auto s = collapse_stats(ps, fit, bounds.te, bounds.tr, t1, eps);
                    const auto cv = cvs.collapse(bounds.te, T);
                    for (std::size_t i = 0; i < variants.size(); ++i) recs[i] = detail::collapse_record(s, cv, variants[i]);
                    break;
                }
                case DateType::Recovery: {
                    const auto s = recovery_stats(ps, fit, bounds.te, bounds.tc, t1, eps);
                    const auto cv = cvs.recovery(t1, bounds.te, bounds.tc, T);
                    for (std::size_t i = 0; i < variants.size(); ++i) recs[i] = detail::recovery_record(s, cv, variants[i]);
                    break;
                }
            }
            for (auto& r : recs) r.retained = !(r.reject12 || r.reject21);
        } catch (const DegenerateFitError&) {
            for (auto& r : recs) r = DateRecord{.degenerate = true};
        }
        for (std::size_t i = 0; i < variants.size(); ++i) {
            recs[i].date = t1;
            sets[i].records.push_back(recs[i]);
        }
    }
    return sets;
}

inline ConfidenceSet build_set(const Series& series, const RegimeFit& fit, const BreakDates& bounds,
                               DateType type, Variant variant, const CriticalValues& cvs) {
    const PrefixSums ps(series);
    const Variant v[] = {variant};
    return std::move(build_sets(ps, fit, bounds, type, v, cvs).front());
}

/// Coverage and length summaries against a known date. Lengths are counts
/// divided by the segment length; the left part holds dates <= truth, the
/// right part dates >= truth (the true date counts in both).
struct SetMetrics {
    bool truth_in_segment = false;
    bool contains = false;
    bool contains12 = false;
    bool contains21 = false;
    double length = 0.0;
    double length_left = 0.0;
    double length_right = 0.0;
    double length12left = 0.0;
    double length12right = 0.0;
    double length21left = 0.0;
    double length21right = 0.0;
};

inline SetMetrics set_metrics(const ConfidenceSet& set, int truth) {
    SetMetrics m;
    m.truth_in_segment = truth > set.seg_start && truth <= set.seg_end;
    const double span = set.span() > 0 ? static_cast<double>(set.span()) : 1.0;
    int n = 0, nl = 0, nr = 0, l12 = 0, r12 = 0, l21 = 0, r21 = 0;
    for (const auto& r : set.records) {
        const bool keep12 = !r.reject12;
        const bool keep21 = !r.reject21;
        const bool left = r.date <= truth;
        const bool right = r.date >= truth;
        if (r.retained) {
            ++n;
            nl += left;
            nr += right;
        }
        if (keep12) { l12 += left; r12 += right; }
        if (keep21) { l21 += left; r21 += right; }
        if (r.date == truth) {
            m.contains = r.retained;
            m.contains12 = keep12;
            m.contains21 = keep21;
        }
    }
    m.length = n / span;
    m.length_left = nl / span;
    m.length_right = nr / span;
    m.length12left = l12 / span;
    m.length12right = r12 / span;
    m.length21left = l21 / span;
    m.length21right = r21 / span;
    return m;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// Optional map from observation index to a calendar label.
using DateLabeler = std::function<std::string(int)>;

inline void write_set_csv(std::ostream& os, const ConfidenceSet& set, const DateLabeler& label = {}) {
    os << "date,label,retained,reject12,reject21,degenerate,stat12,cv12,stat21,cv21\n";
    const auto old = os.precision(12);
    for (const auto& r : set.records) {
        os << r.date << ',' << (label ? label(r.date) : std::string()) << ',' << r.retained << ','
           << r.reject12 << ',' << r.reject21 << ',' << r.degenerate << ',' << r.stat12 << ','
           << r.cv12 << ',' << r.stat21 << ',' << r.cv21 << '\n';
    }
    os.precision(old);
}

inline nlohmann::json set_summary_json(const ConfidenceSet& set, const DateLabeler& label = {}) {
    nlohmann::json j;
    j["date_type"] = to_string(set.type);
    j["variant"] = to_string(set.variant);
    j["delta"] = set.delta;
    j["eps"] = set.eps;
    j["segment"] = {set.seg_start, set.seg_end};
    const auto kept = set.retained();
    j["retained"] = kept;
    if (label) {
        std::vector<std::string> labels;
        for (int d : kept) labels.push_back(label(d));
        j["retained_labels"] = labels;
    }
    j["size"] = kept.size();
    j["relative_length"] = set.span() > 0 ? static_cast<double>(kept.size()) / set.span() : 0.0;
    j["degenerate_dates"] = set.degenerate_count();
    return j;
}

}  // namespace bubblecs
