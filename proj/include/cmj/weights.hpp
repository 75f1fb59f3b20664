#pragma once

// Weight laws W for recursive trees with fitness: scalar laws and the
// (U, V) pairs used by linear fitness f(k, (U, V)) = U k + V.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>

#include "cmj/errors.hpp"
#include "cmj/random.hpp"

namespace cmj {

/// A realized node weight. Scalar laws produce (0, value), so that a scalar
/// weight acts as V with U = 0 under linear fitness.
struct Weight {
    double u = 0.0;
    double v = 0.0;

    friend bool operator==(const Weight&, const Weight&) = default;
};

namespace detail {
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline void require(bool ok, const char* what) {
    if (!ok) throw ModelError(what);
}

inline bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

// Quantiles of heavy laws can overflow for s close to 0.
inline double clamp_finite(double x) {
    return std::min(x, std::numeric_limits<double>::max());
}
}  // namespace detail

struct PointMass {
    explicit PointMass(double value) : value(value) {
        detail::require(detail::finite_nonneg(value), "PointMass: value must be finite and >= 0");
    }
    double value;

    double survival(double x) const { return x < value ? 1.0 : 0.0; }
    double quantile_upper(double) const { return value; }
    double mean() const { return value; }
    double mgf(double t) const { return std::exp(value * t); }
    bool atom_at_zero() const { return value == 0.0; }
};

struct Exponential {
    explicit Exponential(double rate) : rate(rate) {
        detail::require(std::isfinite(rate) && rate > 0.0, "Exponential: rate must be finite and > 0");
    }
    double rate;

    double survival(double x) const { return x <= 0.0 ? 1.0 : std::exp(-rate * x); }
    double quantile_upper(double s) const { return -std::log(s) / rate; }
    double mean() const { return 1.0 / rate; }
    double mgf(double t) const { return t < rate ? rate / (rate - t) : detail::kInf; }
    bool atom_at_zero() const { return false; }
};

struct Uniform {
    Uniform(double lo, double hi) : lo(lo), hi(hi) {
        detail::require(detail::finite_nonneg(lo) && std::isfinite(hi) && lo <= hi,
                        "Uniform: need 0 <= lo <= hi < inf");
    }
    double lo;
    double hi;

    double survival(double x) const {
        if (x < lo) return 1.0;
        if (x >= hi) return 0.0;
        return (hi - x) / (hi - lo);
    }
    double quantile_upper(double s) const { return hi - s * (hi - lo); }
    double mean() const { return 0.5 * (lo + hi); }
    double mgf(double t) const {
        if (t == 0.0 || hi == lo) return std::exp(lo * t);
        return std::exp(lo * t) * std::expm1((hi - lo) * t) / ((hi - lo) * t);
    }
    bool atom_at_zero() const { return hi == 0.0; }
};

/// P(X > x) = (scale / x)^shape for x >= scale.
struct Pareto {
    Pareto(double shape, double scale) : shape(shape), scale(scale) {
        detail::require(std::isfinite(shape) && shape > 0.0, "Pareto: shape must be finite and > 0");
        detail::require(std::isfinite(scale) && scale > 0.0, "Pareto: scale must be finite and > 0");
    }
    double shape;
    double scale;

    double survival(double x) const { return x <= scale ? 1.0 : std::pow(scale / x, shape); }
    double quantile_upper(double s) const {
        return detail::clamp_finite(scale * std::exp(-std::log(s) / shape));
    }
    double mean() const { return shape > 1.0 ? shape * scale / (shape - 1.0) : detail::kInf; }
    double mgf(double t) const { return t > 0.0 ? detail::kInf : 1.0; }
    bool atom_at_zero() const { return false; }
};

/// Heavy law with P(X > x) = (x0 / x) (log x / log x0)^(1 + nu) on its tail.
///
/// The raw expression exceeds 1 just above x0 whenever log x0 < 1 + nu, so the
/// survival function is clamped: it equals 1 below the crossover point x* where
/// the decreasing branch of the expression meets 1, and follows the expression
/// above it. x* is computed once here.
class LogParetoTail {
public:
    LogParetoTail(double nu, double x0) : nu_(nu), x0_(x0) {
        detail::require(std::isfinite(nu) && nu > 0.0, "LogParetoTail: nu must be finite and > 0");
        detail::require(std::isfinite(x0) && x0 >= std::numbers::e,
                        "LogParetoTail: threshold x0 must be finite and >= e");
        log_x0_ = std::log(x0);
        log_log_x0_ = std::log(log_x0_);
        log_crossover_ = find_crossover();
    }

    double nu() const { return nu_; }
    double x0() const { return x0_; }
    double crossover() const { return std::exp(log_crossover_); }

    /// log of the unclamped tail expression at x = e^y.
    double raw_log_survival(double y) const {
        return log_x0_ - y + (1.0 + nu_) * (std::log(y) - log_log_x0_);
    }

    double survival(double x) const {
        if (!(x > 0.0)) return 1.0;
        const double y = std::log(x);
        if (y <= log_crossover_) return 1.0;
        return std::min(1.0, std::exp(raw_log_survival(y)));
    }

    double quantile_upper(double s) const {
        if (s >= 1.0) return crossover();
        const double target = std::log(s);
        // raw_log_survival is strictly decreasing on [y*, inf).
        double lo = log_crossover_;
        double hi = log_crossover_ + 1.0;
        while (raw_log_survival(hi) > target) hi = log_crossover_ + 2.0 * (hi - log_crossover_);
        double y = std::clamp(log_crossover_ - target, lo, hi);
        for (int it = 0; it < 200; ++it) {
            const double g = raw_log_survival(y) - target;
            if (std::abs(g) < 1e-14 * std::max(1.0, std::abs(target))) break;
            if (g > 0.0) lo = y; else hi = y;
            const double slope = -1.0 + (1.0 + nu_) / y;
            double next = y - g / slope;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (hi - lo < 1e-15 * hi) break;
            y = next;
        }
        return detail::clamp_finite(std::exp(y));
    }

    double mean() const { return detail::kInf; }
    double mgf(double t) const { return t > 0.0 ? detail::kInf : 1.0; }
    bool atom_at_zero() const { return false; }

private:
    double find_crossover() const {
        const double peak = 1.0 + nu_;
        if (log_x0_ >= peak) return log_x0_;
        double lo = peak;
        double hi = 2.0 * peak;
        while (raw_log_survival(hi) > 0.0) hi *= 2.0;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (raw_log_survival(mid) > 0.0 ? lo : hi) = mid;
        }
        return hi;
    }

    double nu_;
    double x0_;
    double log_x0_;
    double log_log_x0_;
    double log_crossover_;
};

using ScalarLaw = std::variant<PointMass, Exponential, Uniform, Pareto, LogParetoTail>;

inline double survival(const ScalarLaw& law, double x) {
    return std::visit([x](const auto& l) { return l.survival(x); }, law);
}

/// Inverse survival function: the x with P(X > x) = s, for s in (0, 1].
inline double quantile_upper(const ScalarLaw& law, double s) {
    return std::visit([s](const auto& l) { return l.quantile_upper(s); }, law);
}

inline double mean(const ScalarLaw& law) {
    return std::visit([](const auto& l) { return l.mean(); }, law);
}

/// E[exp(t X)] for t >= 0; +inf when it diverges.
inline double mgf(const ScalarLaw& law, double t) {
    return std::visit([t](const auto& l) { return l.mgf(t); }, law);
}

inline bool atom_at_zero(const ScalarLaw& law) {
    return std::visit([](const auto& l) { return l.atom_at_zero(); }, law);
}

/// True for the light-tailed families whose moments are available in closed form.
inline bool has_closed_form_moments(const ScalarLaw& law) {
    return std::holds_alternative<PointMass>(law) || std::holds_alternative<Exponential>(law) ||
           std::holds_alternative<Uniform>(law);
}

inline const char* law_name(const ScalarLaw& law) {
    constexpr const char* names[] = {"point", "exponential", "uniform", "pareto", "logpareto"};
    return names[law.index()];
}

template <class R>
double sample(const ScalarLaw& law, R& rng) {
    return quantile_upper(law, rng.uniform_open());
}

enum class Coupling { independent, u_equals_v, u_zero, u_one };

inline const char* coupling_name(Coupling c) {
    switch (c) {
        case Coupling::independent: return "independent";
        case Coupling::u_equals_v: return "u-equals-v";
        case Coupling::u_zero: return "u-zero";
        case Coupling::u_one: return "u-one";
    }
    return "?";
}

/// Law of a weight pair (U, V). The U law is only consulted (and required)
/// for independent coupling; the other couplings pin U to 0, 1 or V.
class PairSpec {
public:
    PairSpec(Coupling coupling, ScalarLaw v, std::optional<ScalarLaw> u = std::nullopt)
        : coupling_(coupling), v_(std::move(v)), u_(std::move(u)) {
        if (coupling_ == Coupling::independent && !u_)
            throw ModelError("PairSpec: independent coupling needs a law for U");
        if (coupling_ != Coupling::independent) u_.reset();
    }

    Coupling coupling() const { return coupling_; }
    const ScalarLaw& v_law() const { return v_; }
    const std::optional<ScalarLaw>& u_law() const { return u_; }

    /// Whether P((U, V) = (0, 0)) > 0.
    bool zero_pair_has_mass() const {
        switch (coupling_) {
            case Coupling::u_one: return false;
            case Coupling::u_zero:
            case Coupling::u_equals_v: return atom_at_zero(v_);
            case Coupling::independent: return atom_at_zero(*u_) && atom_at_zero(v_);
        }
        return false;
    }

    template <class R>
    Weight sample(R& rng) const {
        switch (coupling_) {
            case Coupling::u_zero: return {0.0, cmj::sample(v_, rng)};
            case Coupling::u_one: return {1.0, cmj::sample(v_, rng)};
            case Coupling::u_equals_v: {
                const double v = cmj::sample(v_, rng);
                return {v, v};
            }
            case Coupling::independent: {
                const double u = cmj::sample(*u_, rng);
                return {u, cmj::sample(v_, rng)};
            }
        }
        return {};
    }

private:
    Coupling coupling_;
    ScalarLaw v_;
    std::optional<ScalarLaw> u_;
};

/// The random weight W: a scalar law or a pair law. Immutable once built.
class WeightSpec {
public:
    WeightSpec(ScalarLaw law) : spec_(std::move(law)) {}  // NOLINT(google-explicit-constructor)
    WeightSpec(PairSpec pair) : spec_(std::move(pair)) {}  // NOLINT(google-explicit-constructor)

    bool is_pair() const { return std::holds_alternative<PairSpec>(spec_); }
    const ScalarLaw* scalar() const { return std::get_if<ScalarLaw>(&spec_); }
    const PairSpec* pair() const { return std::get_if<PairSpec>(&spec_); }

    /// A scalar law W is read as the pair (0, W).
    PairSpec as_pair() const {
        if (const auto* p = pair()) return *p;
        return PairSpec(Coupling::u_zero, *scalar());
    }

    template <class R>
    Weight sample(R& rng) const {
        if (const auto* p = pair()) return p->sample(rng);
        return {0.0, cmj::sample(*scalar(), rng)};
    }

private:
    std::variant<ScalarLaw, PairSpec> spec_;
};

template <class R>
Weight sample_weight(const WeightSpec& spec, R& rng) {
    return spec.sample(rng);
}

}  // namespace cmj
