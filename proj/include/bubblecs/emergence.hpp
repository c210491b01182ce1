#pragma once

#include "bubblecs/numeric.hpp"
#include "bubblecs/scan.hpp"

#include <cmath>
#include <limits>

namespace bubblecs {

/// Location statistics for H0: Te = T1 on the segment [1, Tc].
/// The 12-statistics reject in the left tail, the 21-statistics in the right.
struct EmergenceStats {
    double lr_a12 = 0.0;
    double lr_b12 = 0.0;
    double em_a12 = 0.0;
    double em_b12 = 0.0;
    double lr_a21 = 0.0;
    double em_a21 = 0.0;
    double em_b21 = 0.0;
    int t_lra12 = 0;
    int t_lrb12 = 0;
    int t_emb12 = 0;
};

/// Critical values for one hypothesized date.
struct EmergenceCvs {
    double lr12 = 0.0;   // left tail, shared by LR_a12 and LR_b12
    double em12 = 0.0;   // left tail, shared by EM_a12 and EM_b12
    double lr21 = 0.0;   // right tail
    double ema21 = 0.0;  // right tail
    double emb21 = 0.0;  // right tail
};

/// Dates T1 for which both alternative ranges are nonempty.
struct PermissibleRange {
    int lo = 0;
    int hi = -1;
    bool empty() const { return hi < lo; }
    int count() const { return empty() ? 0 : hi - lo + 1; }
};

inline PermissibleRange emergence_range(int tc, double eps) {
    const int m = detail::trim_of(eps, tc);
    return {m + 1, tc - m};
}

inline EmergenceStats emergence_stats(const PrefixSums& ps, const RegimeFit& fit, int tc, int t1,
                                      double eps) {
    if (tc > ps.T() || tc < 1) throw ParameterError("emergence segment end outside the sample");
    const int m = detail::trim_of(eps, tc);
    if (m < 2) throw ParameterError("emergence segment too short: floor(Tc * eps) must be >= 2");
    const auto range = emergence_range(tc, eps);
    detail::require_in(t1, range.lo, range.hi, "emergence test");

    const detail::ScanContext ctx(ps, fit);
    const double rho = fit.rho_a_hat();
    if (!(rho > 0.0)) throw DegenerateFitError("no explosive root estimated (phi_a_hat <= 1)");
    const double log_phi = std::log(fit.phi_a_hat);

    EmergenceStats s;

    // T2 > T1: scan (T1, T2] for T2 in [T1 + m, Tc].
    double min_a = std::numeric_limits<double>::infinity();
    double min_b = std::numeric_limits<double>::infinity();
    double min_t = std::numeric_limits<double>::infinity();
    double sum_t = 0.0;
    for (int t2 = t1 + m; t2 <= tc; ++t2) {
        const double sxx = ctx.y2(t1, t2);
        const double sxy = ctx.ydy(t1, t2);
        const double yend = ctx.level(t2);
        const double na = 2.0 * sxy - rho * sxx;
        const double nb = yend * yend - rho * sxx;
        const double t = ctx.tstat(t1, t2);
        if (na < min_a) { min_a = na; s.t_lra12 = t2; }
        if (nb < min_b) { min_b = nb; s.t_lrb12 = t2; }
        if (t < min_t) { min_t = t; s.t_emb12 = t2; }
        sum_t += t;
    }
    const double log_base = ctx.log_T() + ctx.log_sigma2() - std::log(2.0);
    s.lr_a12 = scaled_by_log(min_a, log_base + 2.0 * (s.t_lra12 - t1) * log_phi);
    s.lr_b12 = scaled_by_log(min_b, log_base + 2.0 * (s.t_lrb12 - t1) * log_phi);
    s.em_a12 = scaled_by_log(
        sum_t, 0.5 * (ctx.log_T() + 2.0 * (tc - t1) * log_phi - std::log(2.0 * rho)));
    s.em_b12 = scaled_by_log(
        min_t, 0.5 * (ctx.log_T() + std::log(rho) + 2.0 * (s.t_emb12 - t1) * log_phi - std::log(2.0)));

    // T2 < T1: scan (T2, T1] for T2 in [1, T1 - m].
    double max_a = -std::numeric_limits<double>::infinity();
    double max_t = -std::numeric_limits<double>::infinity();
    sum_t = 0.0;
    for (int t2 = 1; t2 <= t1 - m; ++t2) {
        const double na = 2.0 * ctx.ydy(t2, t1) - rho * ctx.y2(t2, t1);
        const double t = ctx.tstat(t2, t1);
        max_a = std::max(max_a, na);
        max_t = std::max(max_t, t);
        sum_t += t;
    }
    const double ub = static_cast<double>(tc);
    s.lr_a21 = max_a / (ub * ub * rho * fit.sigma2_hat);
    s.em_a21 = sum_t / ub;
    s.em_b21 = max_t;
    return s;
}

inline EmergenceStats emergence_stats(const Series& series, const RegimeFit& fit, int tc, int t1,
                                      double eps) {
    const PrefixSums ps(series);
    return emergence_stats(ps, fit, tc, t1, eps);
}

inline Decision emergence_decision(const EmergenceStats& s, const EmergenceCvs& cv, Variant v) {
    switch (v) {
        case Variant::LRa: return {s.lr_a12 < cv.lr12, s.lr_a21 > cv.lr21};
        case Variant::EMa: return {s.em_a12 < cv.em12, s.em_a21 > cv.ema21};
        case Variant::EMb: return {s.em_b12 < cv.em12, s.em_b21 > cv.emb21};
        case Variant::LE: return {s.lr_b12 < cv.lr12, s.em_a21 > cv.ema21};
    }
    return {};
}

}  // namespace bubblecs
