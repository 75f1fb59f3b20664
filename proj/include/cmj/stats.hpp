#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace cmj {

/// Two-sided normal quantile for 99% intervals.
inline constexpr double kZ99 = 2.5758293035489004;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double x) const { return lo <= x && x <= hi; }
    double width() const { return hi - lo; }
};

/// Wilson score interval for a binomial proportion.
inline Interval wilson_interval(std::uint64_t hits, std::uint64_t n, double z = kZ99) {
    if (n == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(hits) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    Interval ci{std::max(0.0, centre - half), std::min(1.0, centre + half)};
    if (hits == 0) ci.lo = 0.0;
    if (hits == n) ci.hi = 1.0;
    return ci;
}

/// Streaming mean and variance (Welford); merges are exact up to rounding
/// and independent of the order in which partial results are combined.
class RunningMoments {
public:
    void add(double x) {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }

    void merge(const RunningMoments& o) {
        if (o.n_ == 0) return;
        if (n_ == 0) {
            *this = o;
            return;
        }
        const double n = static_cast<double>(n_ + o.n_);
        const double d = o.mean_ - mean_;
        mean_ += d * static_cast<double>(o.n_) / n;
        m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
        n_ += o.n_;
    }

    std::uint64_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double standard_error() const {
        return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
    }

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Upper tail P(X^2_df > stat).
inline double chi_square_sf(double stat, double df) {
    if (stat <= 0.0) return 1.0;
    return boost::math::gamma_q(0.5 * df, 0.5 * stat);
}

struct ChiSquareResult {
    double statistic = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
};

/// Goodness of fit of observed counts against probabilities. Cells with zero
/// expected probability must have zero counts (else p = 0).
inline ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed,
                                      std::span<const double> probs) {
    std::uint64_t n = 0;
    for (auto o : observed) n += o;
    ChiSquareResult r;
    int cells = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double e = probs[i] * static_cast<double>(n);
        if (e <= 0.0) {
            if (observed[i] > 0) return {std::numeric_limits<double>::infinity(), 0.0, 0.0};
            continue;
        }
        const double d = static_cast<double>(observed[i]) - e;
        r.statistic += d * d / e;
        ++cells;
    }
    r.dof = std::max(1, cells - 1);
    r.p_value = chi_square_sf(r.statistic, r.dof);
    return r;
}

/// Two-sample homogeneity test on a contingency table with two rows.
inline ChiSquareResult chi_square_two_sample(std::span<const std::uint64_t> a,
                                             std::span<const std::uint64_t> b) {
    double na = 0.0;
    double nb = 0.0;
    for (auto x : a) na += static_cast<double>(x);
    for (auto x : b) nb += static_cast<double>(x);
    ChiSquareResult r;
    int cells = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double col = static_cast<double>(a[i] + b[i]);
        if (col == 0.0) continue;
        const double ea = col * na / (na + nb);
        const double eb = col * nb / (na + nb);
        r.statistic += (static_cast<double>(a[i]) - ea) * (static_cast<double>(a[i]) - ea) / ea;
        r.statistic += (static_cast<double>(b[i]) - eb) * (static_cast<double>(b[i]) - eb) / eb;
        ++cells;
    }
    r.dof = std::max(1, cells - 1);
    r.p_value = chi_square_sf(r.statistic, r.dof);
    return r;
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

inline LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LinearFit f;
    f.slope = sxx > 0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    f.r_squared = (sxx > 0 && syy > 0) ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

inline double median(std::vector<double> xs) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
    double m = xs[mid];
    if (xs.size() % 2 == 0) {
        m = 0.5 * (m + *std::max_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid)));
    }
    return m;
}

}  // namespace cmj
