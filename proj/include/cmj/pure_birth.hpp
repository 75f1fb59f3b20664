#pragma once

// Pure-birth offspring processes xi(t): a counting process started at 0 that
// jumps k -> k + 1 at rate f(k, w). Closed forms for linear rates c1 k + c2,
// simulation for everything.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <variant>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "cmj/errors.hpp"
#include "cmj/fitness.hpp"
#include "cmj/quadrature.hpp"
#include "cmj/stats.hpp"
#include "cmj/weights.hpp"

namespace cmj {

/// Linear birth rates: state k jumps at rate c1 k + c2.
class BirthRates {
public:
    BirthRates(double c1, double c2) : c1_(c1), c2_(c2) {
        if (!(std::isfinite(c1) && c1 >= 0.0)) throw ModelError("BirthRates: need finite c1 >= 0");
        if (!(std::isfinite(c2) && c2 > 0.0)) throw ModelError("BirthRates: need finite c2 > 0");
    }

    double c1() const { return c1_; }
    double c2() const { return c2_; }
    /// c2 / c1; infinite on the Poisson boundary c1 = 0.
    double r() const { return c1_ > 0.0 ? c2_ / c1_ : std::numeric_limits<double>::infinity(); }

    /// True when c1 is small enough that the Poisson limit is used.
    bool poisson_limit() const { return c1_ < 1e-12 * c2_; }

private:
    double c1_;
    double c2_;
};

/// Offspring law: fixed linear rates, or a random weight w with rates f(k, w).
class OffspringModel {
public:
    struct Mixed {
        WeightSpec weights;
        FitnessSpec fitness;
    };

    /// One realized rate sequence k -> f(k, w).
    class Realization {
    public:
        Realization(const FitnessSpec* fitness, Weight w) : fitness_(fitness), w_(w) {}
        double operator()(std::uint64_t k) const { return (*fitness_)(k, w_); }
        const Weight& weight() const { return w_; }

    private:
        const FitnessSpec* fitness_;
        Weight w_;
    };

    static OffspringModel fixed(BirthRates rates) { return OffspringModel(rates); }
    static OffspringModel mixed(WeightSpec weights, FitnessSpec fitness) {
        return OffspringModel(Mixed{std::move(weights), std::move(fitness)});
    }

    const BirthRates* rates() const { return std::get_if<BirthRates>(&spec_); }
    const Mixed* mixture() const { return std::get_if<Mixed>(&spec_); }

    template <class R>
    Realization draw(R& rng) const {
        if (const auto* m = mixture()) return {&m->fitness, m->weights.sample(rng)};
        const auto& b = std::get<BirthRates>(spec_);
        return {&linear_fitness(), Weight{b.c1(), b.c2()}};
    }

private:
    explicit OffspringModel(std::variant<BirthRates, Mixed> s) : spec_(std::move(s)) {}

    static const FitnessSpec& linear_fitness() {
        static const FitnessSpec f = FitnessSpec::linear();
        return f;
    }

    std::variant<BirthRates, Mixed> spec_;
};

inline constexpr std::uint64_t kDefaultBirthCap = std::uint64_t{1} << 20;

struct BirthCount {
    std::uint64_t count = 0;
    /// The cap was reached before the horizon; the true count may be larger.
    bool saturated = false;
};

/// Births by time t for a realized rate sequence. A zero rate stops the
/// process for good.
template <class R>
BirthCount simulate_births(const OffspringModel::Realization& rate, double t, R& rng,
                           std::uint64_t cap = kDefaultBirthCap) {
    BirthCount out;
    double clock = 0.0;
    while (out.count < cap) {
        const double lambda = rate(out.count);
        if (!(lambda > 0.0)) return out;
        clock += rng.exponential(lambda);
        if (clock > t) return out;
        ++out.count;
    }
    out.saturated = true;
    return out;
}

template <class R>
BirthCount simulate_count(const OffspringModel& model, double t, R& rng,
                          std::uint64_t cap = kDefaultBirthCap) {
    if (t < 0.0) throw ModelError("simulate_count: t must be >= 0");
    if (cap < 1) throw ModelError("simulate_count: cap must be >= 1");
    return simulate_births(model.draw(rng), t, rng, cap);
}

/// E[xi(t)] = r (e^{c1 t} - 1), or c2 t when c1 = 0.
inline double mean(const BirthRates& rates, double t) {
    if (rates.poisson_limit()) return rates.c2() * t;
    return rates.c2() * std::expm1(rates.c1() * t) / rates.c1();
}

/// E[xi(t)^2] = (r+1)/r m^2 + m, or (c2 t)^2 + c2 t when c1 = 0. The
/// coefficient is the one obtained by differentiating the PGF twice at z = 1.
inline double second_moment(const BirthRates& rates, double t) {
    const double m = mean(rates, t);
    if (rates.poisson_limit()) return m * m + m;
    return (rates.c2() + rates.c1()) / rates.c2() * m * m + m;
}

/// E[z^xi(t)] = (e^{-c1 t} / (1 - z (1 - e^{-c1 t})))^r for c1 > 0.
inline double pgf(const BirthRates& rates, double t, double z) {
    if (rates.c1() == 0.0) throw ModelError("use Poisson PGF");
    if (z < 0.0 || z > 1.0) throw ModelError("pgf: z must lie in [0, 1]");
    if (z == 1.0) return 1.0;
    // log form: -c2 t - r log(1 - z (1 - e^{-c1 t}))
    const double one_minus_p = -std::expm1(-rates.c1() * t);
    return std::exp(-rates.c2() * t - rates.r() * std::log1p(-z * one_minus_p));
}

/// Poisson branch exp(c2 t (z - 1)), valid for any c1 as the c1 = 0 law.
inline double pgf_poisson(const BirthRates& rates, double t, double z) {
    if (z < 0.0 || z > 1.0) throw ModelError("pgf: z must lie in [0, 1]");
    return std::exp(rates.c2() * t * (z - 1.0));
}

/// Dispatches to the Poisson branch when c1 = 0.
inline double pgf_any(const BirthRates& rates, double t, double z) {
    return rates.c1() == 0.0 ? pgf_poisson(rates, t, z) : pgf(rates, t, z);
}

/// Exact P(xi(t) > x) for the linear rates (u, v): Poisson(v t) when u = 0,
/// otherwise negative binomial with r = v/u and success probability e^{-u t}.
inline double linear_tail_probability(double u, double v, double t, double x) {
    if (!(t > 0.0) || !(v > 0.0)) return 0.0;
    const double m = std::floor(std::max(0.0, x));
    if (u < 1e-12 * v) return boost::math::gamma_p(m + 1.0, v * t);
    const double p = std::exp(-u * t);
    if (p <= 0.0) return 1.0;
    return boost::math::ibetac(v / u, m + 1.0, p);
}

/// P(xi(t) > x) without simulation, when the model admits it: fixed rates,
/// or linear fitness whose weight law reduces to a single random coordinate.
inline std::optional<double> exact_tail_probability(const OffspringModel& model, double t, double x) {
    if (const auto* b = model.rates()) return linear_tail_probability(b->c1(), b->c2(), t, x);
    const auto& mix = *model.mixture();
    if (!mix.fitness.is_linear()) return std::nullopt;
    const PairSpec pair = mix.weights.as_pair();
    const ScalarLaw& v = pair.v_law();
    switch (pair.coupling()) {
        case Coupling::u_zero:
            return expectation(v, [&](double vv) { return linear_tail_probability(0.0, vv, t, x); });
        case Coupling::u_one:
            return expectation(v, [&](double vv) { return linear_tail_probability(1.0, vv, t, x); });
        case Coupling::u_equals_v:
            return expectation(v, [&](double vv) { return linear_tail_probability(vv, vv, t, x); });
        case Coupling::independent: {
            const ScalarLaw& u = *pair.u_law();
            if (const auto* pu = std::get_if<PointMass>(&u))
                return expectation(v, [&](double vv) { return linear_tail_probability(pu->value, vv, t, x); });
            if (const auto* pv = std::get_if<PointMass>(&v))
                return expectation(u, [&](double uu) { return linear_tail_probability(uu, pv->value, t, x); });
            return std::nullopt;
        }
    }
    return std::nullopt;
}

struct TailEstimate {
    double estimate = 0.0;
    Interval ci;  // 99% Wilson
    std::uint64_t hits = 0;
    std::uint64_t samples = 0;
};

/// Monte Carlo P(xi(t) > x). Each replicate stops at floor(x) + 1 births,
/// since only the exceedance matters.
template <class R>
TailEstimate tail_prob_mc(const OffspringModel& model, double t, double x, std::uint64_t nsamples, R& rng) {
    if (nsamples < 1000) throw ModelError("tail_prob_mc: need at least 1000 samples");
    if (x < 0.0) throw ModelError("tail_prob_mc: x must be >= 0");
    const double level = std::floor(x) + 1.0;
    const std::uint64_t cap = level >= 1.8e19 ? std::numeric_limits<std::uint64_t>::max()
                                              : static_cast<std::uint64_t>(level);
    TailEstimate out;
    out.samples = nsamples;
    for (std::uint64_t i = 0; i < nsamples; ++i) {
        const BirthCount c = simulate_count(model, t, rng, cap);
        if (static_cast<double>(c.count) > x) ++out.hits;
    }
    out.estimate = static_cast<double>(out.hits) / static_cast<double>(nsamples);
    out.ci = wilson_interval(out.hits, nsamples);
    return out;
}

}  // namespace cmj
