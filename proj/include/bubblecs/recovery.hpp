#pragma once

#include "bubblecs/emergence.hpp"
#include "bubblecs/numeric.hpp"
#include "bubblecs/scan.hpp"

#include <cmath>
#include <limits>

namespace bubblecs {

/// Location statistics for H0: Tr = T1 on the segment (Tc, T].
/// The 12-statistics reject in the left tail, the 21-statistics in the right.
/// Scalings carry phi_a^{2 (Tc - Te)}, so the emergence date enters as well.
struct RecoveryStats {
    double lr_a12 = 0.0;
    double em_a12 = 0.0;
    double em_b12 = 0.0;
    double lr_a21 = 0.0;
    double lr_b21 = 0.0;
    double em_a21 = 0.0;
    double em_b21 = 0.0;
    int t_lra12 = 0;
    int t_lra21 = 0;
    int t_lrb21 = 0;
    int t_emb21 = 0;
};

struct RecoveryCvs {
    double lr12 = 0.0;   // left tail, chi-square form
    double ema12 = 0.0;  // left tail, response surface
    double emb12 = 0.0;  // left tail, response surface
    double lr21 = 0.0;   // right tail (negative), shared by LR_a21 and LR_b21
    double em21 = 0.0;   // right tail (negative)
};

/// The backward range starts m after Tc and ends m before T1, so T1 >= Tc + 2m.
inline PermissibleRange recovery_range(int tc, int T, double eps) {
    const int m = detail::trim_of(eps, T - tc);
    return {tc + 2 * m, T - m};
}

inline RecoveryStats recovery_stats(const PrefixSums& ps, const RegimeFit& fit, int te, int tc,
                                    int t1, double eps) {
    const int T = ps.T();
    if (!(0 <= te && te < tc && tc < T)) throw ParameterError("recovery segment (Tc, T] outside the sample");
    const int m = detail::trim_of(eps, T - tc);
    if (m < 2) throw ParameterError("recovery segment too short: floor((T - Tc) * eps) must be >= 2");
    const auto range = recovery_range(tc, T, eps);
    detail::require_in(t1, range.lo, range.hi, "recovery test");

    const detail::ScanContext ctx(ps, fit);
    const double pa = fit.phi_a_hat;
    const double pb = fit.phi_b_hat;
    const double rho_b = fit.rho_b_hat();
    if (!(pb > 0.0 && pb < 1.0)) throw DegenerateFitError("phi_b_hat outside (0, 1)");
    if (!(pa > 0.0)) throw DegenerateFitError("phi_a_hat must be positive");
    const double log_pb = std::log(pb);
    // log of T * phi_a^{2 (Tc - Te)}
    const double log_peak = ctx.log_T() + 2.0 * (tc - te) * std::log(pa);

    RecoveryStats s;

    double min_n = std::numeric_limits<double>::infinity();
    double min_t = std::numeric_limits<double>::infinity();
    double sum_t = 0.0;
    for (int t2 = t1 + m; t2 <= T; ++t2) {
        const double n = 2.0 * ctx.ydy(t1, t2) + rho_b * ctx.y2(t1, t2);
        const double t = ctx.tstat(t1, t2);
        if (n < min_n) { min_n = n; s.t_lra12 = t2; }
        min_t = std::min(min_t, t);
        sum_t += t;
    }
    s.lr_a12 = scaled_by_log(min_n, log_peak + std::log(static_cast<double>(s.t_lra12 - t1)) +
                                        std::log(rho_b) + 2.0 * (t1 - tc) * log_pb +
                                        ctx.log_sigma2());
    s.em_a12 = sum_t / static_cast<double>(T - tc);
    s.em_b12 = min_t;

    double max_a = -std::numeric_limits<double>::infinity();
    double max_b = -std::numeric_limits<double>::infinity();
    double max_t = -std::numeric_limits<double>::infinity();
    sum_t = 0.0;
    for (int t2 = tc + m; t2 <= t1 - m; ++t2) {
        const double sxx = ctx.y2(t2, t1);
        const double ystart = ctx.level(t2);
        const double na = 2.0 * ctx.ydy(t2, t1) + rho_b * sxx;
        const double nb = -ystart * ystart - ctx.dy2(t2, t1) + rho_b * sxx;
        const double t = ctx.tstat(t2, t1);
        if (na > max_a) { max_a = na; s.t_lra21 = t2; }
        if (nb > max_b) { max_b = nb; s.t_lrb21 = t2; }
        if (t > max_t) { max_t = t; s.t_emb21 = t2; }
        sum_t += t;
    }
    const double log_lr21 = log_peak + ctx.log_sigma2() - std::log(2.0);
    s.lr_a21 = scaled_by_log(max_a, log_lr21 + 2.0 * (s.t_lra21 - tc) * log_pb);
    s.lr_b21 = scaled_by_log(max_b, log_lr21 + 2.0 * (s.t_lrb21 - tc) * log_pb);
    s.em_a21 = scaled_by_log(sum_t, 0.5 * (log_peak + 2.0 * m * log_pb - std::log(2.0 * rho_b)));
    s.em_b21 = scaled_by_log(max_t, 0.5 * (log_peak + std::log(rho_b) +
                                           2.0 * (s.t_emb21 - tc) * log_pb - std::log(2.0)));
    return s;
}

inline RecoveryStats recovery_stats(const Series& series, const RegimeFit& fit, int te, int tc,
                                    int t1, double eps) {
    const PrefixSums ps(series);
    return recovery_stats(ps, fit, te, tc, t1, eps);
}

inline Decision recovery_decision(const RecoveryStats& s, const RecoveryCvs& cv, Variant v) {
    switch (v) {
        case Variant::LRa: return {s.lr_a12 < cv.lr12, s.lr_a21 > cv.lr21};
        case Variant::EMa: return {s.em_a12 < cv.ema12, s.em_a21 > cv.em21};
        case Variant::EMb: return {s.em_b12 < cv.emb12, s.em_b21 > cv.em21};
        case Variant::LE: return {s.em_b12 < cv.emb12, s.lr_b21 > cv.lr21};
    }
    return {};
}

}  // namespace bubblecs
