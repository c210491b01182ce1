#pragma once

#include "bubblecs/emergence.hpp"
#include "bubblecs/numeric.hpp"
#include "bubblecs/scan.hpp"

#include <cmath>
#include <limits>

namespace bubblecs {

/// Location statistics for H0: Tc = T1 on the segment (Te, Tr].
/// The 12-statistics reject in the right tail, the 21-statistics in the left.
struct CollapseStats {
    double lr_a12 = 0.0;
    double em_a12 = 0.0;
    double em_b12 = 0.0;
    double lr_a21 = 0.0;
    double em_a21 = 0.0;
    double em_b21 = 0.0;
};

struct CollapseCvs {
    double lr12 = 0.0;  // right tail (negative)
    double em12 = 0.0;  // right tail (negative)
    double lr21 = 0.0;  // left tail (positive)
    double em21 = 0.0;  // left tail (positive)
};

inline PermissibleRange collapse_range(int te, int tr, double eps) {
    const int m = detail::trim_of(eps, tr - te);
    return {te + m + 1, tr - m};
}

inline CollapseStats collapse_stats(const PrefixSums& ps, const RegimeFit& fit, int te, int tr,
                                    int t1, double eps) {
    if (!(0 <= te && te < tr && tr <= ps.T()))
        throw ParameterError("collapse segment (Te, Tr] outside the sample");
    const int m = detail::trim_of(eps, tr - te);
    if (m < 2) throw ParameterError("collapse segment too short: floor((Tr - Te) * eps) must be >= 2");
    const auto range = collapse_range(te, tr, eps);
    detail::require_in(t1, range.lo, range.hi, "collapse test");

    const detail::ScanContext ctx(ps, fit);
    const double pa = fit.phi_a_hat;
    const double pb = fit.phi_b_hat;
    const double rho_a = fit.rho_a_hat();
    const double rho_b = fit.rho_b_hat();
    if (!(rho_a > 0.0)) throw DegenerateFitError("no explosive root estimated (phi_a_hat <= 1)");
    if (!(rho_b > 0.0)) throw DegenerateFitError("no mean reversion estimated (phi_b_hat >= 1)");
    const double recenter = 2.0 - pa - pb;

    // log of T * phi_a^{2 (T1 - Te)}
    const double log_growth = ctx.log_T() + 2.0 * (t1 - te) * std::log(pa);
    const double log_lr = log_growth + std::log(pa - pb) + ctx.log_sigma2();

    CollapseStats s;

    double max_n = -std::numeric_limits<double>::infinity();
    double max_t = -std::numeric_limits<double>::infinity();
    double sum_t = 0.0;
    for (int t2 = t1 + m; t2 <= tr; ++t2) {
        const double n = 2.0 * ctx.ydy(t1, t2) + recenter * ctx.y2(t1, t2);
        const double t = ctx.tstat(t1, t2);
        max_n = std::max(max_n, n);
        max_t = std::max(max_t, t);
        sum_t += t;
    }
    const double count12 = static_cast<double>(tr - t1 - m + 1);
    const double log_em12 = 0.5 * (log_growth + std::log(rho_b) - std::log(2.0));
    s.lr_a12 = scaled_by_log(max_n, log_lr - std::log(2.0 * rho_b));
    s.em_a12 = scaled_by_log(sum_t / count12, log_em12);
    s.em_b12 = scaled_by_log(max_t, log_em12);

    double min_n = std::numeric_limits<double>::infinity();
    double min_t = std::numeric_limits<double>::infinity();
    sum_t = 0.0;
    for (int t2 = te + 1; t2 <= t1 - m; ++t2) {
        const double n = 2.0 * ctx.ydy(t2, t1) + recenter * ctx.y2(t2, t1);
        const double t = ctx.tstat(t2, t1);
        min_n = std::min(min_n, n);
        min_t = std::min(min_t, t);
        sum_t += t;
    }
    const double count21 = static_cast<double>(t1 - m - te);
    const double log_em21 = 0.5 * (log_growth + std::log(rho_a) - std::log(2.0));
    s.lr_a21 = scaled_by_log(min_n, log_lr - std::log(2.0 * rho_a));
    s.em_a21 = scaled_by_log(sum_t / count21, log_em21);
    s.em_b21 = scaled_by_log(min_t, log_em21);
    return s;
}

inline CollapseStats collapse_stats(const Series& series, const RegimeFit& fit, int te, int tr,
                                    int t1, double eps) {
    const PrefixSums ps(series);
    return collapse_stats(ps, fit, te, tr, t1, eps);
}

inline Decision collapse_decision(const CollapseStats& s, const CollapseCvs& cv, Variant v) {
    switch (v) {
        case Variant::LRa: return {s.lr_a12 > cv.lr12, s.lr_a21 < cv.lr21};
        case Variant::EMa: return {s.em_a12 > cv.em12, s.em_a21 < cv.em21};
        case Variant::EMb: return {s.em_b12 > cv.em12, s.em_b21 < cv.em21};
        case Variant::LE: throw ParameterError("the LE combination is not defined for the collapse date");
    }
    return {};
}

}  // namespace bubblecs
