#pragma once

#include "bubblecs/errors.hpp"
#include "bubblecs/model.hpp"
#include "bubblecs/numeric.hpp"
#include "bubblecs/parallel.hpp"
#include "bubblecs/prefix_sums.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

namespace bubblecs {

/// Subsample AR(1) estimates and the full-sample innovation variance.
struct RegimeFit {
    double phi_a_hat = 1.0;
    double phi_b_hat = 1.0;
    double sigma2_hat = 0.0;

    double rho_a_hat() const { return phi_a_hat - 1.0; }
    double rho_b_hat() const { return 1.0 - phi_b_hat; }
};

namespace detail {

template <class Objective>
int argmin_earliest(int lo, int hi, Objective&& objective) {
    int best = lo;
    double best_value = std::numeric_limits<double>::infinity();
    for (int k = lo; k <= hi; ++k) {
        const double v = objective(k);
        if (v < best_value) {
            best_value = v;
            best = k;
        }
    }
    return best;
}

inline int trim_count(double trim, int length) {
    return static_cast<int>(std::floor(trim * length));
}

}  // namespace detail

/// Step-by-step least-squares dating.
///
/// 1. Tc: split the full sample into two AR(1) regimes with free coefficients.
/// 2. Te: unit root on [1, k], free AR(1) on (k, Tc].
/// 3. Tr: free AR(1) on (Tc, k], unit root on (k, T].
///
/// Each search keeps floor(trim * segment) observations away from the segment
/// ends. Ties resolve to the earliest date.
inline BreakDates estimate_breaks(const Series& series, double trim = 0.10) {
    if (!(trim > 0.0 && trim < 0.5)) throw ParameterError("trim must lie in (0, 0.5)");
    if (static_cast<double>(series.size()) < 20.0 / trim) {
        std::ostringstream os;
        os << "series too short for break estimation: need at least " << std::ceil(20.0 / trim)
           << " observations, got " << series.size();
        throw ParameterError(os.str());
    }
    const PrefixSums ps(series);
    const int T = series.T();

    const int m = detail::trim_count(trim, T);
    const int tc = detail::argmin_earliest(m, T - m, [&](int k) {
        return ps.ar1_ssr(0, k) + ps.ar1_ssr(k, T);
    });

    const int me = detail::trim_count(trim, tc);
    const int te = detail::argmin_earliest(std::max(me, 1), tc - me, [&](int k) {
        return ps.dy2(0, k) + ps.ar1_ssr(k, tc);
    });

    const int mr = detail::trim_count(trim, T - tc);
    const int tr = detail::argmin_earliest(tc + mr, T - std::max(mr, 1), [&](int k) {
        return ps.ar1_ssr(tc, k) + ps.dy2(k, T);
    });

    return {te, tc, tr};
}

/// OLS on the explosive and collapse regimes; sigma^2 from the regime-wise
/// residuals of the full sample divided by T.
inline RegimeFit fit_regimes(const Series& series, const BreakDates& breaks) {
    const int T = series.T();
    breaks.validate(T);
    const PrefixSums ps(series);

    const double sxx_a = ps.y2(breaks.te, breaks.tc);
    const double sxx_b = ps.y2(breaks.tc, breaks.tr);
    if (!(sxx_a > 0.0) || !(sxx_b > 0.0))
        throw ParameterError("empty or all-zero regime; cannot fit AR(1) coefficients");

    RegimeFit fit;
    fit.phi_a_hat = 1.0 + ps.ydy(breaks.te, breaks.tc) / sxx_a;
    fit.phi_b_hat = 1.0 + ps.ydy(breaks.tc, breaks.tr) / sxx_b;

    double ssr = 0.0;
    for (int t = 1; t <= T; ++t) {
        double coef = 1.0;
        if (t > breaks.te && t <= breaks.tc)
            coef = fit.phi_a_hat;
        else if (t > breaks.tc && t <= breaks.tr)
            coef = fit.phi_b_hat;
        const double e = series[t] - coef * series[t - 1];
        ssr += e * e;
    }
    fit.sigma2_hat = ssr / T;
    return fit;
}

struct AdfOptions {
    int lags = 0;
};

/// Right-tailed ADF t-statistic (intercept, `lags` augmentation terms) on
/// observations y_0..y_n. Returns NaN when the regressors are collinear.
inline double adf_tstat(const Series& series, int n, const AdfOptions& opts = {}) {
    const int p = opts.lags;
    const int k = 2 + p;
    const int first = p + 1;
    const int nobs = n - first + 1;
    if (nobs <= k) return std::numeric_limits<double>::quiet_NaN();

    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(k, k);
    Eigen::VectorXd xty = Eigen::VectorXd::Zero(k);
    double yty = 0.0;
    Eigen::VectorXd x(k);
    for (int t = first; t <= n; ++t) {
        x(0) = 1.0;
        x(1) = series[t - 1];
        for (int j = 1; j <= p; ++j) x(1 + j) = series[t - j] - series[t - j - 1];
        const double dy = series[t] - series[t - 1];
        xtx.noalias() += x * x.transpose();
        xty += x * dy;
        yty += dy * dy;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
    lu.setThreshold(1e-12);
    if (lu.rank() < k) return std::numeric_limits<double>::quiet_NaN();
    const Eigen::VectorXd beta = lu.solve(xty);
    const double ssr = std::max(yty - beta.dot(xty), 0.0);
    const double s2 = ssr / (nobs - k);
    const Eigen::MatrixXd inv = lu.inverse();
    const double se = std::sqrt(s2 * inv(1, 1));
    if (se == 0.0) return beta(1) > 0 ? std::numeric_limits<double>::infinity()
                                      : -std::numeric_limits<double>::infinity();
    return beta(1) / se;
}

/// Supremum of forward-recursive ADF statistics over end points
/// floor(r T) for r in [r0, 1], windows anchored at the first observation.
inline double sadf(const Series& series, double r0, const AdfOptions& opts = {}) {
    const int T = series.T();
    if (!(r0 > 0.0 && r0 < 1.0)) throw ParameterError("minimal window fraction must lie in (0, 1)");
    const int n0 = static_cast<int>(std::floor(r0 * T));
    if (n0 < 10) throw ParameterError("minimal SADF window must contain at least 10 observations");
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (int n = n0; n <= T; ++n) {
        const double t = adf_tstat(series, n, opts);
        if (std::isnan(t)) continue;
        any = true;
        best = std::max(best, t);
    }
    if (!any) throw DegenerateFitError("SADF undefined: lagged level is collinear with the intercept");
    return best;
}

/// Conventional minimal window r0 = 0.01 + 1.8 / sqrt(T).
inline double default_sadf_window(int T) { return 0.01 + 1.8 / std::sqrt(static_cast<double>(T)); }

/// Upper `level` quantile of SADF under a driftless Gaussian random walk of
/// the same length.
inline double sadf_critical_value(int T, double r0, double level, int reps, std::uint64_t seed,
                                  const AdfOptions& opts = {}, unsigned threads = 0) {
    if (reps < 100) throw ParameterError("SADF critical value needs at least 100 replications");
    std::vector<double> stats(static_cast<std::size_t>(reps));
    parallel_for(stats.size(), threads, [&](std::size_t r) {
        std::mt19937_64 rng(mix_seed(seed, r));
        std::normal_distribution<double> z(0.0, 1.0);
        std::vector<double> y(static_cast<std::size_t>(T) + 1, 0.0);
        for (int t = 1; t <= T; ++t) y[static_cast<std::size_t>(t)] = y[static_cast<std::size_t>(t - 1)] + z(rng);
        stats[r] = sadf(Series(std::move(y)), r0, opts);
    });
    return empirical_quantile(stats, 1.0 - level);
}

}  // namespace bubblecs
