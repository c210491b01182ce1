#pragma once

#include "bubblecs/bubblecs.hpp"
#include "oracle.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace testing_support {

using namespace bubblecs;

inline BubbleDgpSpec case1(double a, double sigma = 6.79) {
    BubbleDgpSpec s;
    s.a = a;
    s.b = a;
    s.sigma = sigma;
    return s;
}

inline Series noisy(double a, std::uint64_t seed, double sigma = 6.79) {
    GaussianNoise n(seed, sigma);
    return simulate(case1(a, sigma), n);
}

inline Series noiseless(double a) { return simulate(case1(a), ZeroNoise{}); }

inline const CriticalValues& table1() {
    static const CriticalValues cv = CriticalValues::table1();
    return cv;
}

/// A Case 1 draw whose true-date fit has an explosive and a collapsing root.
struct Draw {
    Series series;
    RegimeFit fit;
    BreakDates dates;
};

inline Draw regular_draw(double a, std::uint64_t seed) {
    const auto dates = case1(a).dates();
    for (std::uint64_t k = 0;; ++k) {
        auto s = noisy(a, mix_seed(seed, k));
        const auto f = fit_regimes(s, dates);
        if (f.phi_a_hat > 1.0 && f.phi_b_hat < 1.0 && f.phi_b_hat > 0.0) return {std::move(s), f, dates};
    }
}

/// Random (series, T1) instance from Case 1 with a drawn from {2, 4, 6}.
struct Instance {
    Draw d;
    int t1;
};

inline Instance instance(DateType type, int i) {
    std::mt19937_64 rng(mix_seed(2718, static_cast<std::uint64_t>(i)));
    const double a = 2.0 * (1 + static_cast<int>(rng() % 3));
    Draw d = regular_draw(a, rng());
    const auto r = permissible_range(type, d.dates, d.series.T(), 0.10);
    std::uniform_int_distribution<int> pick(r.lo, r.hi);
    return {std::move(d), pick(rng)};
}

inline oracle::Fit to_oracle(const RegimeFit& f) { return {f.phi_a_hat, f.phi_b_hat, f.sigma2_hat}; }

}  // namespace testing_support
