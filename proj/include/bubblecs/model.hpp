#pragma once

#include "bubblecs/errors.hpp"

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace bubblecs {

/// Emergence, collapse and recovery dates as observation indices.
struct BreakDates {
    int te = 0;
    int tc = 0;
    int tr = 0;

    bool operator==(const BreakDates&) const = default;

    /// Throws ParameterError unless 1 <= te < tc < tr < T.
    void validate(int T) const {
        if (!(1 <= te && te < tc && tc < tr && tr < T)) {
            std::ostringstream os;
            os << "break dates must satisfy 1 <= Te < Tc < Tr < T, got (" << te << ", " << tc
               << ", " << tr << ") with T = " << T;
            throw ParameterError(os.str());
        }
    }

    // Segment lengths used by the three location tests.
    int emergence_span() const { return tc; }
    int collapse_span() const { return tr - te; }
    int recovery_span(int T) const { return T - tc; }

    /// Position of a date relative to the emergence segment [1, Tc].
    double emergence_fraction(int t) const { return static_cast<double>(t) / tc; }
    /// Position of a date relative to the recovery segment (Tc, T].
    double recovery_fraction(int t, int T) const {
        return static_cast<double>(t - tc) / (T - tc);
    }
};

/// Full parameterization of the four-regime bubble process (zero drift).
///
/// Regimes: unit root on [1, Te], explosive phi_a = 1 + a/T^alpha on (Te, Tc],
/// mean reverting phi_b = 1 - b/T^beta on (Tc, Tr], unit root on (Tr, T].
struct BubbleDgpSpec {
    int T = 200;
    double a = 2.0;
    double alpha = 1.0;
    double b = 2.0;
    double beta = 1.0;
    double lambda_e = 0.3;
    double lambda_c = 0.5;
    double lambda_r = 0.7;
    double sigma = 6.79;
    double y0 = 100.0;

    double phi_a() const { return 1.0 + a / std::pow(static_cast<double>(T), alpha); }
    double phi_b() const { return 1.0 - b / std::pow(static_cast<double>(T), beta); }

    BreakDates dates() const {
        return {static_cast<int>(std::floor(lambda_e * T)),
                static_cast<int>(std::floor(lambda_c * T)),
                static_cast<int>(std::floor(lambda_r * T))};
    }

    void validate() const {
        if (T < 20) throw ParameterError("sample size T must be at least 20");
        if (!(a > 0.0)) throw ParameterError("explosive constant a must be positive");
        if (!(b > 0.0)) throw ParameterError("collapse constant b must be positive");
        // alpha = beta = 1 is the local-to-unity design used in simulation studies.
        if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("alpha must lie in (0, 1]");
        if (!(beta > 0.0 && beta <= 1.0)) throw ParameterError("beta must lie in (0, 1]");
        if (!(0.0 < lambda_e && lambda_e < lambda_c && lambda_c < lambda_r && lambda_r < 1.0))
            throw ParameterError("break fractions must satisfy 0 < le < lc < lr < 1");
        if (!(sigma > 0.0)) throw ParameterError("sigma must be positive");
        if (!std::isfinite(y0)) throw ParameterError("y0 must be finite");
        const double pb = phi_b();
        if (!(pb > 0.0 && pb < 1.0)) throw ParameterError("phi_b must lie in (0, 1)");
        dates().validate(T);
    }
};

/// Levels y_0, ..., y_T. Index 0 holds the initial value.
struct Series {
    std::vector<double> y;

    Series() = default;
    explicit Series(std::vector<double> values) : y(std::move(values)) {}

    int T() const { return static_cast<int>(y.size()) - 1; }
    double operator[](int t) const { return y[static_cast<std::size_t>(t)]; }
    std::size_t size() const { return y.size(); }

    Series scaled(double c) const {
        Series out(y);
        for (auto& v : out.y) v *= c;
        return out;
    }
};

/// Anything callable that returns the next innovation.
template <class N>
concept InnovationSource = requires(N n) {
    { n() } -> std::convertible_to<double>;
};

/// i.i.d. N(0, sigma^2) innovations.
class GaussianNoise {
public:
    GaussianNoise(std::uint64_t seed, double sigma) : rng_(seed), dist_(0.0, sigma) {}
    double operator()() { return dist_(rng_); }

private:
    std::mt19937_64 rng_;
    std::normal_distribution<double> dist_;
};

struct ZeroNoise {
    double operator()() const { return 0.0; }
};

/// GARCH(1,1) martingale-difference innovations with Gaussian standardized shocks.
/// Unconditional variance is omega / (1 - arch - garch).
class Garch11Noise {
public:
    Garch11Noise(std::uint64_t seed, double omega, double arch, double garch)
        : rng_(seed), omega_(omega), arch_(arch), garch_(garch) {
        if (!(omega > 0.0 && arch >= 0.0 && garch >= 0.0 && arch + garch < 1.0))
            throw ParameterError("GARCH(1,1) parameters violate covariance stationarity");
        h_ = omega / (1.0 - arch - garch);
    }

    double operator()() {
        const double e = std::sqrt(h_) * z_(rng_);
        h_ = omega_ + arch_ * e * e + garch_ * h_;
        return e;
    }

private:
    std::mt19937_64 rng_;
    std::normal_distribution<double> z_{0.0, 1.0};
    double omega_, arch_, garch_;
    double h_;
};

/// SplitMix64 finalizer; maps (seed, counter) pairs to well-mixed stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (counter + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Generates y_0..y_T from the four-regime recursion.
template <InnovationSource Noise>
Series simulate(const BubbleDgpSpec& spec, Noise&& noise) {
    spec.validate();
    const BreakDates d = spec.dates();
    const double pa = spec.phi_a();
    const double pb = spec.phi_b();

    std::vector<double> y(static_cast<std::size_t>(spec.T) + 1);
    y[0] = spec.y0;
    for (int t = 1; t <= spec.T; ++t) {
        const double prev = y[static_cast<std::size_t>(t - 1)];
        double coef = 1.0;
        if (t > d.te && t <= d.tc)
            coef = pa;
        else if (t > d.tc && t <= d.tr)
            coef = pb;
        const double v = coef * prev + static_cast<double>(noise());
        if (!std::isfinite(v * v)) {
            std::ostringstream os;
            os << "simulated level overflows at t = " << t << "; reduce a or T";
            throw NumericError(os.str());
        }
        y[static_cast<std::size_t>(t)] = v;
    }
    return Series(std::move(y));
}

}  // namespace bubblecs
