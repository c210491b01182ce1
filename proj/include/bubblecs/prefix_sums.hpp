#pragma once

#include "bubblecs/errors.hpp"
#include "bubblecs/model.hpp"

#include <cmath>
#include <vector>

namespace bubblecs {

/// Cumulative sums with Neumaier compensation. A range sum over (from, to]
/// combines the two running totals and the two running corrections, which
/// keeps roughly double-double accuracy when the summands span many decades.
class CompensatedPrefix {
public:
    CompensatedPrefix() = default;

    explicit CompensatedPrefix(std::size_t n) {
        sum_.reserve(n + 1);
        carry_.reserve(n + 1);
        sum_.push_back(0.0);
        carry_.push_back(0.0);
    }

    void push(double x) {
        const double s = sum_.back();
        const double t = s + x;
        double c = carry_.back();
        if (std::fabs(s) >= std::fabs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        sum_.push_back(t);
        carry_.push_back(c);
    }

    /// Sum of the pushed values with indices in (from, to], 1-based.
    double range(int from, int to) const {
        const auto a = static_cast<std::size_t>(from);
        const auto b = static_cast<std::size_t>(to);
        return (sum_[b] - sum_[a]) + (carry_[b] - carry_[a]);
    }

    std::size_t size() const { return sum_.size(); }

private:
    std::vector<double> sum_;
    std::vector<double> carry_;
};

/// The three recurring sums of the location tests, each over t in (from, to]:
/// sum y_{t-1}^2, sum y_{t-1} dy_t and sum dy_t^2.
class PrefixSums {
public:
    explicit PrefixSums(const Series& series) : series_(&series) {
        if (series.size() < 2) throw ParameterError("prefix sums need at least two observations");
        const int T = series.T();
        y2_ = CompensatedPrefix(static_cast<std::size_t>(T));
        ydy_ = CompensatedPrefix(static_cast<std::size_t>(T));
        dy2_ = CompensatedPrefix(static_cast<std::size_t>(T));
        for (int t = 1; t <= T; ++t) {
            const double lag = series[t - 1];
            const double dy = series[t] - lag;
            y2_.push(lag * lag);
            ydy_.push(lag * dy);
            dy2_.push(dy * dy);
        }
    }

    double y2(int from, int to) const { return y2_.range(from, to); }
    double ydy(int from, int to) const { return ydy_.range(from, to); }
    double dy2(int from, int to) const { return dy2_.range(from, to); }

    /// Residual sum of squares of a no-intercept AR(1) fitted on (from, to].
    double ar1_ssr(int from, int to) const {
        const double sxx = y2(from, to);
        const double sxy = ydy(from, to);
        const double e = dy2(from, to);
        if (sxx <= 0.0) return e;
        const double ssr = e - sxy * sxy / sxx;
        return ssr > 0.0 ? ssr : 0.0;
    }

    int T() const { return series_->T(); }
    const Series& series() const { return *series_; }

private:
    const Series* series_;
    CompensatedPrefix y2_;
    CompensatedPrefix ydy_;
    CompensatedPrefix dy2_;
};

}  // namespace bubblecs
