#pragma once

#include "bubblecs/errors.hpp"
#include "bubblecs/estimation.hpp"
#include "bubblecs/prefix_sums.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace bubblecs {

enum class DateType { Emergence, Collapse, Recovery };

/// Test family used to invert a location test. LE pairs the finite-sample
/// corrected LR statistic with an EM statistic (emergence and recovery only).
enum class Variant { LRa, EMa, EMb, LE };

inline std::string to_string(DateType d) {
    switch (d) {
        case DateType::Emergence: return "emergence";
        case DateType::Collapse: return "collapse";
        case DateType::Recovery: return "recovery";
    }
    return "?";
}

inline std::string to_string(Variant v) {
    switch (v) {
        case Variant::LRa: return "LRa";
        case Variant::EMa: return "EMa";
        case Variant::EMb: return "EMb";
        case Variant::LE: return "LE";
    }
    return "?";
}

inline DateType parse_date_type(const std::string& s) {
    if (s == "emergence") return DateType::Emergence;
    if (s == "collapse") return DateType::Collapse;
    if (s == "recovery") return DateType::Recovery;
    throw ParameterError("unknown date type '" + s + "'");
}

inline Variant parse_variant(const std::string& s) {
    if (s == "LRa") return Variant::LRa;
    if (s == "EMa") return Variant::EMa;
    if (s == "EMb") return Variant::EMb;
    if (s == "LE") return Variant::LE;
    throw ParameterError("unknown test variant '" + s + "'");
}

/// Outcome of one location test at one hypothesized date.
struct Decision {
    bool reject12 = false;
    bool reject21 = false;
    bool rejected() const { return reject12 || reject21; }
};

namespace detail {

/// Shared access to the range sums and the subsample t-statistic
///   t(from, to) = sum y_{t-1} dy_t / (sigma * sqrt(sum y_{t-1}^2))  over (from, to].
class ScanContext {
public:
    ScanContext(const PrefixSums& ps, const RegimeFit& fit) : ps_(ps), fit_(fit) {
        const int T = ps.T();
        const double level = ps.y2(0, T) / T;
        if (!(fit.sigma2_hat > 1e-14 * std::max(level, 1e-300)))
            throw DegenerateFitError("innovation variance estimate is zero");
        sigma_ = std::sqrt(fit.sigma2_hat);
    }

    double y2(int from, int to) const { return ps_.y2(from, to); }
    double ydy(int from, int to) const { return ps_.ydy(from, to); }
    double dy2(int from, int to) const { return ps_.dy2(from, to); }
    double level(int t) const { return ps_.series()[t]; }

    double tstat(int from, int to) const {
        const double sxx = y2(from, to);
        if (!(sxx > 0.0)) throw DegenerateFitError("zero regressor variation in t-statistic window");
        return ydy(from, to) / (sigma_ * std::sqrt(sxx));
    }

    int T() const { return ps_.T(); }
    double log_T() const { return std::log(static_cast<double>(ps_.T())); }
    double log_sigma2() const { return std::log(fit_.sigma2_hat); }
    const RegimeFit& fit() const { return fit_; }

private:
    const PrefixSums& ps_;
    const RegimeFit& fit_;
    double sigma_ = 0.0;
};

inline int trim_of(double eps, int span) {
    if (!(eps > 0.0 && eps < 0.5)) throw ParameterError("trimming fraction must lie in (0, 0.5)");
    return static_cast<int>(std::floor(span * eps));
}

inline void require_in(int t1, int lo, int hi, const char* what) {
    if (t1 < lo || t1 > hi) {
        std::ostringstream os;
        os << what << ": hypothesized date " << t1 << " outside permissible range [" << lo << ", "
           << hi << "]";
        throw RangeError(os.str());
    }
}

}  // namespace detail

}  // namespace bubblecs
