#pragma once

#include "bubblecs/collapse.hpp"
#include "bubblecs/emergence.hpp"
#include "bubblecs/errors.hpp"
#include "bubblecs/model.hpp"
#include "bubblecs/numeric.hpp"
#include "bubblecs/parallel.hpp"
#include "bubblecs/recovery.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace bubblecs {

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

enum class CvShape { Quadratic, Absolute };

/// Quantiles of lambda * chi2(1) (quadratic) or sqrt(lambda * chi2(1))
/// (absolute), i.e. of W(lambda)^2 and |W(lambda)|, optionally negated.
inline double chi2_cv(double level, double lambda, CvShape shape, int sign = +1) {
    if (!(level > 0.0 && level < 1.0)) throw ParameterError("critical value level must lie in (0, 1)");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ParameterError("fraction must lie in [0, 1]");
    const double q = chi2_1_quantile(level);
    const double v = shape == CvShape::Quadratic ? lambda * q : std::sqrt(lambda * q);
    return sign < 0 ? -v : v;
}

// ---------------------------------------------------------------------------
// Brownian functionals with break-fraction-dependent null limits
// ---------------------------------------------------------------------------

/// Null limits that need simulation. The 21-emergence functionals are read
/// in the right tail; the 12-recovery functionals in the left tail.
enum class Functional { LR21e, EMa21e, EMb21e, EMa12r, EMb12r };

inline constexpr std::array<Functional, 5> kAllFunctionals = {
    Functional::LR21e, Functional::EMa21e, Functional::EMb21e, Functional::EMa12r,
    Functional::EMb12r};

inline std::string to_string(Functional f) {
    switch (f) {
        case Functional::LR21e: return "LR21e";
        case Functional::EMa21e: return "EMa21e";
        case Functional::EMb21e: return "EMb21e";
        case Functional::EMa12r: return "EMa12r";
        case Functional::EMb12r: return "EMb12r";
    }
    return "?";
}

inline Functional parse_functional(const std::string& s) {
    for (auto f : kAllFunctionals)
        if (to_string(f) == s) return f;
    throw ParameterError("unknown functional '" + s + "'");
}

inline bool right_tailed(Functional f) {
    return f == Functional::LR21e || f == Functional::EMa21e || f == Functional::EMb21e;
}

/// Quantile level of the critical value at overall significance delta
/// (delta / 2 per one-sided test).
inline double tail_quantile(Functional f, double delta) {
    return right_tailed(f) ? 1.0 - delta / 2.0 : delta / 2.0;
}

/// Standard Brownian motion on [0, 1] discretized as scaled partial sums of
/// `steps` i.i.d. normals, with running integrals of W and W^2 (left Riemann).
class BrownianPath {
public:
    template <class Rng>
    BrownianPath(int steps, Rng& rng) : n_(steps), w_(steps + 1), iw_(steps + 1), iw2_(steps + 1) {
        std::normal_distribution<double> z(0.0, 1.0);
        const double scale = 1.0 / std::sqrt(static_cast<double>(steps));
        const double dt = 1.0 / steps;
        w_[0] = iw_[0] = iw2_[0] = 0.0;
        for (int i = 1; i <= steps; ++i) {
            const auto k = static_cast<std::size_t>(i);
            w_[k] = w_[k - 1] + scale * z(rng);
            iw_[k] = iw_[k - 1] + dt * w_[k - 1];
            iw2_[k] = iw2_[k - 1] + dt * w_[k - 1] * w_[k - 1];
        }
    }

    int steps() const { return n_; }
    double w(int i) const { return w_[static_cast<std::size_t>(i)]; }
    /// integral of W^2 over [i/n, j/n]
    double int_w2(int i, int j) const { return iw2_[static_cast<std::size_t>(j)] - iw2_[static_cast<std::size_t>(i)]; }
    /// integral of (W(s) - W(i/n))^2 over [i/n, j/n]
    double int_centered_w2(int i, int j) const {
        const double c = w(i);
        const double len = static_cast<double>(j - i) / n_;
        const double iw = iw_[static_cast<std::size_t>(j)] - iw_[static_cast<std::size_t>(i)];
        return std::max(int_w2(i, j) - 2.0 * c * iw + c * c * len, 0.0);
    }

    /// Dickey-Fuller functional on [k/n, i/n] for a path started at zero.
    double adf(int k, int i) const {
        const double num = 0.5 * (w(i) * w(i) - w(k) * w(k) - static_cast<double>(i - k) / n_);
        return num / std::sqrt(int_w2(k, i));
    }

    /// Dickey-Fuller functional on [i/n, k/n] for the path recentred at W(i/n).
    double adf_recentred(int i, int k) const {
        const double d = w(k) - w(i);
        const double num = 0.5 * (d * d - static_cast<double>(k - i) / n_);
        return num / std::sqrt(int_centered_w2(i, k));
    }

private:
    int n_;
    std::vector<double> w_;
    std::vector<double> iw_;
    std::vector<double> iw2_;
};

namespace detail {

inline void check_functional_point(Functional f, double lambda_star, double eps) {
    const bool ok = right_tailed(f) ? (lambda_star >= eps - 1e-12 && lambda_star <= 1.0 + 1e-12)
                                    : (lambda_star >= -1e-12 && lambda_star <= 1.0 - eps + 1e-12);
    if (!ok)
        throw ParameterError("break fraction " + std::to_string(lambda_star) +
                             " incompatible with functional " + to_string(f));
}

}  // namespace detail

/// One draw of the functional at break fraction index i1 = round(lambda* n).
inline double evaluate_functional(const BrownianPath& p, Functional f, int i1, int e) {
    const int n = p.steps();
    switch (f) {
        case Functional::LR21e: return -p.int_w2(i1 - e, i1);
        case Functional::EMa21e: {
            double s = 0.0;
            for (int k = 1; k <= i1 - e; ++k) s += p.adf(k, i1);
            return s / n;
        }
        case Functional::EMb21e: {
            double best = -std::numeric_limits<double>::infinity();
            for (int k = 1; k <= i1 - e; ++k) best = std::max(best, p.adf(k, i1));
            return best;
        }
        case Functional::EMa12r: {
            double s = 0.0;
            for (int k = i1 + e; k <= n; ++k) s += p.adf_recentred(i1, k);
            return s / n;
        }
        case Functional::EMb12r: {
            double best = std::numeric_limits<double>::infinity();
            for (int k = i1 + e; k <= n; ++k) best = std::min(best, p.adf_recentred(i1, k));
            return best;
        }
    }
    return 0.0;
}

struct SimulationSettings {
    int reps = 50000;
    int steps = 1000;
    std::uint64_t seed = 20240607;
    unsigned threads = 0;
};

/// Draws of `f` at each fraction in `lambdas`, sharing paths across fractions.
/// Result is indexed [fraction][replication].
inline std::vector<std::vector<double>> simulate_functional_draws(Functional f,
                                                                  std::span<const double> lambdas,
                                                                  double eps,
                                                                  const SimulationSettings& cfg) {
    if (cfg.reps < 1000) throw ParameterError("functional simulation needs at least 1000 replications");
    if (cfg.steps < 100) throw ParameterError("functional simulation needs at least 100 steps");
    if (!(eps > 0.0 && eps < 0.5)) throw ParameterError("trimming fraction must lie in (0, 0.5)");
    std::vector<int> idx;
    for (double l : lambdas) {
        detail::check_functional_point(f, l, eps);
        idx.push_back(static_cast<int>(std::lround(l * cfg.steps)));
    }
    const int e = static_cast<int>(std::lround(eps * cfg.steps));
    std::vector<std::vector<double>> draws(lambdas.size(), std::vector<double>(static_cast<std::size_t>(cfg.reps)));
    parallel_for(static_cast<std::size_t>(cfg.reps), cfg.threads, [&](std::size_t r) {
        std::mt19937_64 rng(mix_seed(cfg.seed, r));
        const BrownianPath path(cfg.steps, rng);
        for (std::size_t j = 0; j < idx.size(); ++j) draws[j][r] = evaluate_functional(path, f, idx[j], e);
    });
    return draws;
}

/// Monte Carlo quantile of a functional at a single break fraction.
inline double simulate_cv(Functional f, double lambda_star, double eps, double quantile,
                          const SimulationSettings& cfg) {
    const double l[] = {lambda_star};
    const auto draws = simulate_functional_draws(f, l, eps, cfg);
    return empirical_quantile(draws[0], quantile);
}

/// The tabulation grid 0.10, 0.11, ..., 0.90.
inline std::vector<double> lambda_grid() {
    std::vector<double> g;
    for (int i = 10; i <= 90; ++i) g.push_back(i / 100.0);
    return g;
}

struct CvRow {
    Functional functional;
    double lambda;
    double cv;
    double quantile;
    double eps;
    int reps;
    int steps;
    std::uint64_t seed;
};

/// Simulated critical values over a grid of fractions at several quantile levels.
inline std::vector<CvRow> tabulate(Functional f, std::span<const double> lambdas, double eps,
                                   std::span<const double> quantiles, const SimulationSettings& cfg) {
    const auto draws = simulate_functional_draws(f, lambdas, eps, cfg);
    std::vector<CvRow> rows;
    for (double q : quantiles)
        for (std::size_t j = 0; j < lambdas.size(); ++j)
            rows.push_back({f, lambdas[j], empirical_quantile(draws[j], q), q, eps, cfg.reps, cfg.steps, cfg.seed});
    return rows;
}

inline void write_cv_csv(std::ostream& os, std::span<const CvRow> rows) {
    os << "lambda,cv,functional,quantile,eps,reps,steps,seed\n";
    os.precision(10);
    for (const auto& r : rows)
        os << r.lambda << ',' << r.cv << ',' << to_string(r.functional) << ',' << r.quantile << ','
           << r.eps << ',' << r.reps << ',' << r.steps << ',' << r.seed << '\n';
}

// ---------------------------------------------------------------------------
// Response surfaces
// ---------------------------------------------------------------------------

/// cv(l) = a0 + a_m1 / l + a1 l + a2 l^2 + a3 l^3, plus an optional second
/// branch of the same form switched on for l > threshold.
struct ResponseSurface {
    std::array<double, 5> a{};  // a0, a_m1, a1, a2, a3
    std::optional<std::array<double, 5>> b;
    double threshold = 0.7;
    double lo = 0.10;
    double hi = 0.90;
};

namespace detail {
inline double surface_terms(const std::array<double, 5>& c, double l) {
    return c[0] + c[1] / l + c[2] * l + c[3] * l * l + c[4] * l * l * l;
}
}  // namespace detail

inline double eval_surface(const ResponseSurface& s, double lambda) {
    if (!(lambda >= s.lo - 1e-9 && lambda <= s.hi + 1e-9))
        throw RangeError("fraction " + std::to_string(lambda) + " outside the fitted range [" +
                         std::to_string(s.lo) + ", " + std::to_string(s.hi) + "]");
    double v = detail::surface_terms(s.a, lambda);
    if (s.b && lambda > s.threshold) v += detail::surface_terms(*s.b, lambda);
    return v;
}

/// Published coefficients for delta = 0.10 (0.95 quantiles of the
/// 21-emergence limits, 0.05 quantiles of the 12-recovery limits), eps = 0.1.
inline ResponseSurface table1_surface(Functional f) {
    ResponseSurface s;
    switch (f) {
        case Functional::LR21e: s.a = {-9.99e-4, 5.13e-5, -1.09e-3, 4.40e-4, -2.16e-4}; break;
        case Functional::EMa21e: s.a = {-0.127, -4.75e-4, 1.34, -0.185, 0.0956}; break;
        case Functional::EMb21e: s.a = {1.59, -0.0368, 0.706, -0.525, 0.194}; break;
        case Functional::EMa12r: s.a = {-1.47, 5.02e-5, 1.57, -0.0124, 0.0779}; break;
        case Functional::EMb12r:
            s.a = {-2.81, -7.44e-5, 0.258, -0.382, 0.745};
            s.b = std::array<double, 5>{-2710.0, 530.0, 5192.0, -4420.0, 1411.0};
            break;
    }
    return s;
}

struct SurfaceFit {
    ResponseSurface surface;
    std::vector<double> residuals;
    double rmse = 0.0;
};

/// Least-squares fit of the response-surface form. Only the cubic-plus-reciprocal
/// model class is supported; `poly_degree` other than 3 is rejected.
inline SurfaceFit fit_surface(std::span<const double> lambdas, std::span<const double> cvs,
                              bool two_branch, int poly_degree = 3, double threshold = 0.7) {
    if (poly_degree != 3) throw FitError("response surface is cubic plus reciprocal; degree " +
                                         std::to_string(poly_degree) + " is not in the model class");
    if (lambdas.size() != cvs.size()) throw ParameterError("grid and values differ in length");
    if (lambdas.size() < 10) throw ParameterError("response surface fit needs at least 10 grid points");
    const int cols = two_branch ? 10 : 5;
    const auto n = static_cast<Eigen::Index>(lambdas.size());
    Eigen::MatrixXd X(n, cols);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double l = lambdas[static_cast<std::size_t>(i)];
        if (!(l > 0.0)) throw ParameterError("response surface grid must be positive");
        const double row[5] = {1.0, 1.0 / l, l, l * l, l * l * l};
        const double ind = l > threshold ? 1.0 : 0.0;
        for (int c = 0; c < 5; ++c) X(i, c) = row[c];
        if (two_branch)
            for (int c = 0; c < 5; ++c) X(i, 5 + c) = ind * row[c];
        y(i) = cvs[static_cast<std::size_t>(i)];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < cols) throw FitError("response surface design is rank deficient");
    const Eigen::VectorXd beta = qr.solve(y);

    SurfaceFit out;
    out.surface.threshold = threshold;
    out.surface.lo = *std::min_element(lambdas.begin(), lambdas.end());
    out.surface.hi = *std::max_element(lambdas.begin(), lambdas.end());
    for (int c = 0; c < 5; ++c) out.surface.a[static_cast<std::size_t>(c)] = beta(c);
    if (two_branch) {
        std::array<double, 5> b{};
        for (int c = 0; c < 5; ++c) b[static_cast<std::size_t>(c)] = beta(5 + c);
        out.surface.b = b;
    }
    const Eigen::VectorXd res = y - X * beta;
    out.residuals.assign(res.data(), res.data() + res.size());
    out.rmse = std::sqrt(res.squaredNorm() / static_cast<double>(n));
    return out;
}

// ---------------------------------------------------------------------------
// Per-date critical values
// ---------------------------------------------------------------------------

enum class CvSource { ClosedForm, Table1Surface, Simulated };

inline std::string to_string(CvSource s) {
    switch (s) {
        case CvSource::ClosedForm: return "closed-form";
        case CvSource::Table1Surface: return "table-1 surface";
        case CvSource::Simulated: return "freshly simulated";
    }
    return "?";
}

/// Critical values for every date type at a given overall level delta
/// (delta / 2 per one-sided test). Fraction-dependent surfaces are stored on
/// the 0.01 grid over [0.10, 0.90]; lookups round to the nearest grid point
/// and clamp at the ends.
class CriticalValues {
public:
    /// Published surfaces; valid only for delta = 0.10 and eps = 0.10.
    /// delta = 0 yields infinite critical values (nothing is rejected).
    static CriticalValues table1(double delta = 0.10, double eps = 0.10) {
        CriticalValues cv(delta, eps);
        if (delta == 0.0) return cv;
        if (std::fabs(delta - 0.10) > 1e-12 || std::fabs(eps - 0.10) > 1e-12)
            throw ParameterError("published response surfaces cover delta = 0.10 and eps = 0.10 only; "
                                 "simulate critical values for other settings");
        const auto grid = lambda_grid();
        for (auto f : kAllFunctionals) {
            auto& g = cv.grid_[index(f)];
            const auto s = table1_surface(f);
            for (double l : grid) g.push_back(eval_surface(s, l));
            cv.source_[index(f)] = CvSource::Table1Surface;
        }
        return cv;
    }

    /// Surfaces replaced by Monte Carlo quantiles on the grid.
    static CriticalValues simulated(double delta, double eps, const SimulationSettings& cfg) {
        CriticalValues cv(delta, eps);
        if (delta == 0.0) return cv;
        const auto grid = lambda_grid();
        for (auto f : kAllFunctionals) {
            const auto draws = simulate_functional_draws(f, grid, eps, cfg);
            auto& g = cv.grid_[index(f)];
            for (const auto& d : draws) g.push_back(empirical_quantile(d, tail_quantile(f, delta)));
            cv.source_[index(f)] = CvSource::Simulated;
        }
        return cv;
    }

    /// Table 1 when it applies, simulation otherwise.
    static CriticalValues for_level(double delta, double eps, const SimulationSettings& cfg) {
        if (delta == 0.0 || (std::fabs(delta - 0.10) < 1e-12 && std::fabs(eps - 0.10) < 1e-12))
            return table1(delta, eps);
        return simulated(delta, eps, cfg);
    }

    double delta() const { return delta_; }
    double eps() const { return eps_; }
    CvSource source(Functional f) const { return source_[index(f)]; }

    /// Surface critical value at the grid point nearest to lambda_star.
    double surface(Functional f, double lambda_star) const {
        if (delta_ == 0.0) return right_tailed(f) ? kInf : -kInf;
        const auto& g = grid_[index(f)];
        long k = std::lround((lambda_star - 0.10) * 100.0);
        k = std::clamp<long>(k, 0, static_cast<long>(g.size()) - 1);
        return g[static_cast<std::size_t>(k)];
    }

    double left_chi2(double lambda, CvShape shape, int sign) const {
        if (delta_ == 0.0) return -kInf;
        return chi2_cv(delta_ / 2.0, lambda, shape, sign);
    }
    double right_chi2(double lambda, CvShape shape, int sign) const {
        if (delta_ == 0.0) return kInf;
        return chi2_cv(delta_ / 2.0, lambda, shape, sign);
    }

    /// lambda_1 = T1 / T for the chi-square forms, T1 / Tc for the surfaces.
    EmergenceCvs emergence(int t1, int tc, int T) const {
        const double l1 = static_cast<double>(t1) / T;
        const double ls = static_cast<double>(t1) / tc;
        return {left_chi2(l1, CvShape::Quadratic, +1), left_chi2(l1, CvShape::Absolute, +1),
                surface(Functional::LR21e, ls), surface(Functional::EMa21e, ls),
                surface(Functional::EMb21e, ls)};
    }

    /// lambda_e = Te / T. Right-tail values are negative, left-tail values positive.
    CollapseCvs collapse(int te, int T) const {
        const double le = static_cast<double>(te) / T;
        return {right_chi2(le, CvShape::Quadratic, -1), right_chi2(le, CvShape::Absolute, -1),
                left_chi2(le, CvShape::Quadratic, +1), left_chi2(le, CvShape::Absolute, +1)};
    }

    /// Conservative choices: chi-square forms at lambda_e = Te / T, and the
    /// alpha > beta surfaces at (T1 - Tc) / (T - Tc) for the EM 12-statistics.
    RecoveryCvs recovery(int t1, int te, int tc, int T) const {
        const double le = static_cast<double>(te) / T;
        const double ls = static_cast<double>(t1 - tc) / (T - tc);
        return {left_chi2(le, CvShape::Quadratic, +1), surface(Functional::EMa12r, ls),
                surface(Functional::EMb12r, ls), right_chi2(le, CvShape::Quadratic, -1),
                right_chi2(le, CvShape::Absolute, -1)};
    }

private:
    static constexpr double kInf = std::numeric_limits<double>::infinity();

    CriticalValues(double delta, double eps) : delta_(delta), eps_(eps) {
        if (!(delta >= 0.0 && delta < 1.0)) throw ParameterError("delta must lie in [0, 1)");
        if (!(eps > 0.0 && eps < 0.5)) throw ParameterError("eps must lie in (0, 0.5)");
        source_.fill(CvSource::ClosedForm);
    }

    static std::size_t index(Functional f) { return static_cast<std::size_t>(f); }

    double delta_;
    double eps_;
    std::array<std::vector<double>, 5> grid_;
    std::array<CvSource, 5> source_{};
};

}  // namespace bubblecs
