#pragma once

// Naive reference implementations used only by the tests. Everything here is
// recomputed with direct loops and plain pow(); nothing is shared with the
// library beyond the plain data structs.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

// sums over (from, to]
inline double s_ydy(const Vec& y, int from, int to) {
    double s = 0.0;
    for (int t = from + 1; t <= to; ++t) s += y[t - 1] * (y[t] - y[t - 1]);
    return s;
}
inline double s_y2(const Vec& y, int from, int to) {
    double s = 0.0;
    for (int t = from + 1; t <= to; ++t) s += y[t - 1] * y[t - 1];
    return s;
}
inline double s_dy2(const Vec& y, int from, int to) {
    double s = 0.0;
    for (int t = from + 1; t <= to; ++t) s += (y[t] - y[t - 1]) * (y[t] - y[t - 1]);
    return s;
}

inline double phi_hat(const Vec& y, int from, int to) {
    double num = 0.0, den = 0.0;
    for (int t = from + 1; t <= to; ++t) {
        num += y[t - 1] * y[t];
        den += y[t - 1] * y[t - 1];
    }
    return num / den;
}

struct Fit {
    double pa, pb, s2;
};

inline Fit fit(const Vec& y, int te, int tc, int tr) {
    const int T = static_cast<int>(y.size()) - 1;
    Fit f{phi_hat(y, te, tc), phi_hat(y, tc, tr), 0.0};
    for (int t = 1; t <= T; ++t) {
        double c = 1.0;
        if (t > te && t <= tc) c = f.pa;
        if (t > tc && t <= tr) c = f.pb;
        f.s2 += std::pow(y[t] - c * y[t - 1], 2);
    }
    f.s2 /= T;
    return f;
}

inline double tstat(const Vec& y, double s2, int from, int to) {
    return s_ydy(y, from, to) / std::sqrt(s2 * s_y2(y, from, to));
}

// free AR(1) without intercept: SSR = sum dy^2 - (sum y dy)^2 / sum y^2
inline double ssr_free(const Vec& y, int from, int to) {
    const double p = phi_hat(y, from, to);
    double s = 0.0;
    for (int t = from + 1; t <= to; ++t) s += std::pow(y[t] - p * y[t - 1], 2);
    return s;
}
inline double ssr_unit(const Vec& y, int from, int to) { return s_dy2(y, from, to); }

struct Breaks {
    int te, tc, tr;
};

inline Breaks breaks(const Vec& y, double trim) {
    const int T = static_cast<int>(y.size()) - 1;
    auto argmin = [](int lo, int hi, auto f) {
        int best = lo;
        double bv = std::numeric_limits<double>::infinity();
        for (int k = lo; k <= hi; ++k) {
            const double v = f(k);
            if (v < bv) { bv = v; best = k; }
        }
        return best;
    };
    const int m = static_cast<int>(std::floor(trim * T));
    const int tc = argmin(m, T - m, [&](int k) { return ssr_free(y, 0, k) + ssr_free(y, k, T); });
    const int me = static_cast<int>(std::floor(trim * tc));
    const int te = argmin(std::max(me, 1), tc - me, [&](int k) { return ssr_unit(y, 0, k) + ssr_free(y, k, tc); });
    const int mr = static_cast<int>(std::floor(trim * (T - tc)));
    const int tr = argmin(tc + mr, T - std::max(mr, 1), [&](int k) { return ssr_free(y, tc, k) + ssr_unit(y, k, T); });
    return {te, tc, tr};
}

struct Emergence {
    double lr_a12, lr_b12, em_a12, em_b12, lr_a21, em_a21, em_b21;
};

inline Emergence emergence(const Vec& y, const Fit& f, int tc, int t1, double eps) {
    const int T = static_cast<int>(y.size()) - 1;
    const int m = static_cast<int>(std::floor(tc * eps));
    const double rho = f.pa - 1.0;
    Emergence e{};
    double min_a = 1e300, min_b = 1e300, min_t = 1e300, sum_t = 0.0;
    int arg_a = 0, arg_b = 0, arg_t = 0;
    for (int t2 = t1 + m; t2 <= tc; ++t2) {
        const double na = 2.0 * s_ydy(y, t1, t2) - rho * s_y2(y, t1, t2);
        const double nb = y[t2] * y[t2] - rho * s_y2(y, t1, t2);
        const double t = tstat(y, f.s2, t1, t2);
        if (na < min_a) { min_a = na; arg_a = t2; }
        if (nb < min_b) { min_b = nb; arg_b = t2; }
        if (t < min_t) { min_t = t; arg_t = t2; }
        sum_t += t;
    }
    e.lr_a12 = min_a / (T * std::pow(f.pa, 2.0 * (arg_a - t1)) * f.s2 / 2.0);
    e.lr_b12 = min_b / (T * std::pow(f.pa, 2.0 * (arg_b - t1)) * f.s2 / 2.0);
    e.em_a12 = sum_t / std::sqrt(T * std::pow(f.pa, 2.0 * (tc - t1)) / (2.0 * rho));
    e.em_b12 = min_t / std::sqrt(T * rho * std::pow(f.pa, 2.0 * (arg_t - t1)) / 2.0);
    double max_a = -1e300, max_t = -1e300;
    sum_t = 0.0;
    for (int t2 = 1; t2 <= t1 - m; ++t2) {
        max_a = std::max(max_a, 2.0 * s_ydy(y, t2, t1) - rho * s_y2(y, t2, t1));
        const double t = tstat(y, f.s2, t2, t1);
        max_t = std::max(max_t, t);
        sum_t += t;
    }
    e.lr_a21 = max_a / (double(tc) * tc * rho * f.s2);
    e.em_a21 = sum_t / tc;
    e.em_b21 = max_t;
    return e;
}

struct Collapse {
    double lr_a12, em_a12, em_b12, lr_a21, em_a21, em_b21;
};

inline Collapse collapse(const Vec& y, const Fit& f, int te, int tr, int t1, double eps) {
    const int T = static_cast<int>(y.size()) - 1;
    const int m = static_cast<int>(std::floor((tr - te) * eps));
    const double ra = f.pa - 1.0, rb = 1.0 - f.pb;
    const double grow = T * std::pow(f.pa, 2.0 * (t1 - te));
    auto num = [&](int from, int to) {
        return 2.0 * s_ydy(y, from, to) + (2.0 - f.pa - f.pb) * s_y2(y, from, to);
    };
    Collapse c{};
    double mx = -1e300, mt = -1e300, st = 0.0;
    for (int t2 = t1 + m; t2 <= tr; ++t2) {
        mx = std::max(mx, num(t1, t2));
        const double t = tstat(y, f.s2, t1, t2);
        mt = std::max(mt, t);
        st += t;
    }
    c.lr_a12 = mx / (grow * (f.pa - f.pb) * f.s2 / (2.0 * rb));
    c.em_a12 = (st / (tr - t1 - m + 1)) / std::sqrt(grow * rb / 2.0);
    c.em_b12 = mt / std::sqrt(grow * rb / 2.0);
    double mn = 1e300, mnt = 1e300;
    st = 0.0;
    for (int t2 = te + 1; t2 <= t1 - m; ++t2) {
        mn = std::min(mn, num(t2, t1));
        const double t = tstat(y, f.s2, t2, t1);
        mnt = std::min(mnt, t);
        st += t;
    }
    c.lr_a21 = mn / (grow * (f.pa - f.pb) * f.s2 / (2.0 * ra));
    c.em_a21 = (st / (t1 - m - te)) / std::sqrt(grow * ra / 2.0);
    c.em_b21 = mnt / std::sqrt(grow * ra / 2.0);
    return c;
}

struct Recovery {
    double lr_a12, em_a12, em_b12, lr_a21, lr_b21, em_a21, em_b21;
};

inline Recovery recovery(const Vec& y, const Fit& f, int te, int tc, int t1, double eps) {
    const int T = static_cast<int>(y.size()) - 1;
    const int m = static_cast<int>(std::floor((T - tc) * eps));
    const double rb = 1.0 - f.pb;
    const double peak = T * std::pow(f.pa, 2.0 * (tc - te));
    Recovery r{};
    double mn = 1e300, mt = 1e300, st = 0.0;
    int arg = 0;
    for (int t2 = t1 + m; t2 <= T; ++t2) {
        const double n = 2.0 * s_ydy(y, t1, t2) + rb * s_y2(y, t1, t2);
        if (n < mn) { mn = n; arg = t2; }
        const double t = tstat(y, f.s2, t1, t2);
        mt = std::min(mt, t);
        st += t;
    }
    r.lr_a12 = mn / (peak * (arg - t1) * rb * std::pow(f.pb, 2.0 * (t1 - tc)) * f.s2);
    r.em_a12 = st / (T - tc);
    r.em_b12 = mt;
    double ma = -1e300, mb = -1e300, mxt = -1e300;
    int aa = 0, ab = 0, at = 0;
    st = 0.0;
    for (int t2 = tc + m; t2 <= t1 - m; ++t2) {
        const double na = 2.0 * s_ydy(y, t2, t1) + rb * s_y2(y, t2, t1);
        const double nb = -y[t2] * y[t2] - s_dy2(y, t2, t1) + rb * s_y2(y, t2, t1);
        const double t = tstat(y, f.s2, t2, t1);
        if (na > ma) { ma = na; aa = t2; }
        if (nb > mb) { mb = nb; ab = t2; }
        if (t > mxt) { mxt = t; at = t2; }
        st += t;
    }
    r.lr_a21 = ma / (peak * std::pow(f.pb, 2.0 * (aa - tc)) * f.s2 / 2.0);
    r.lr_b21 = mb / (peak * std::pow(f.pb, 2.0 * (ab - tc)) * f.s2 / 2.0);
    r.em_a21 = st / std::sqrt(peak * std::pow(f.pb, 2.0 * m) / (2.0 * rb));
    r.em_b21 = mxt / std::sqrt(peak * rb * std::pow(f.pb, 2.0 * (at - tc)) / 2.0);
    return r;
}

// chi-square(1) quantile by bisection on P(Z^2 <= q) = erf(sqrt(q / 2))
inline double chi2_1_quantile(double level) {
    double lo = 0.0, hi = 50.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (std::erf(std::sqrt(mid / 2.0)) < level) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Brownian functionals straight from a vector of standard normal increments,
// every integral recomputed per window.
struct Path {
    Vec w;  // w[0] = 0, w[i] = sum_{j<i} z_j / sqrt(n)
    int n;
    explicit Path(const Vec& z) : w(z.size() + 1, 0.0), n(static_cast<int>(z.size())) {
        for (int i = 1; i <= n; ++i) w[i] = w[i - 1] + z[i - 1] / std::sqrt(double(n));
    }
    double int_sq(int i, int j, double centre) const {
        double s = 0.0;
        for (int k = i; k < j; ++k) s += std::pow(w[k] - centre, 2) / n;
        return s;
    }
};

inline double lr21e(const Path& p, int i1, int e) { return -p.int_sq(i1 - e, i1, 0.0); }

inline double adf(const Path& p, int k, int i) {
    return 0.5 * (p.w[i] * p.w[i] - p.w[k] * p.w[k] - double(i - k) / p.n) / std::sqrt(p.int_sq(k, i, 0.0));
}
inline double adf_r(const Path& p, int i, int k) {
    const double d = p.w[k] - p.w[i];
    return 0.5 * (d * d - double(k - i) / p.n) / std::sqrt(p.int_sq(i, k, p.w[i]));
}

inline double ema21e(const Path& p, int i1, int e) {
    double s = 0.0;
    for (int k = 1; k <= i1 - e; ++k) s += adf(p, k, i1);
    return s / p.n;
}
inline double emb21e(const Path& p, int i1, int e) {
    double b = -1e300;
    for (int k = 1; k <= i1 - e; ++k) b = std::max(b, adf(p, k, i1));
    return b;
}
inline double ema12r(const Path& p, int i1, int e) {
    double s = 0.0;
    for (int k = i1 + e; k <= p.n; ++k) s += adf_r(p, i1, k);
    return s / p.n;
}
inline double emb12r(const Path& p, int i1, int e) {
    double b = 1e300;
    for (int k = i1 + e; k <= p.n; ++k) b = std::min(b, adf_r(p, i1, k));
    return b;
}

inline double rel_err(double a, double b) {
    if (a == b) return 0.0;
    return std::fabs(a - b) / std::max(std::fabs(a), std::fabs(b));
}

}  // namespace oracle
