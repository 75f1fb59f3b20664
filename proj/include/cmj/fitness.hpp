#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cmj/errors.hpp"
#include "cmj/weights.hpp"

namespace cmj {

enum class TailRule { zero_after_end, constant_last };

/// f(k, (U, V)) = U k + V.
struct LinearFitness {};

/// Rates f(0), f(1), ... read from a table; the weight is ignored.
struct TabulatedFitness {
    std::vector<double> rates;
    TailRule tail = TailRule::zero_after_end;
};

/// Out-degree cap sup{ i : f(i, w) > 0 }, which may be infinite or absent.
struct DegreeCap {
    enum class Kind { none, finite, infinite };
    Kind kind = Kind::none;
    std::uint64_t value = 0;

    static DegreeCap none() { return {}; }
    static DegreeCap finite(std::uint64_t v) { return {Kind::finite, v}; }
    static DegreeCap infinite() { return {Kind::infinite, 0}; }

    friend bool operator==(const DegreeCap&, const DegreeCap&) = default;
};

class FitnessSpec {
public:
    static FitnessSpec linear() { return FitnessSpec(LinearFitness{}); }

    static FitnessSpec tabulated(std::vector<double> rates, TailRule tail) {
        if (rates.empty()) throw ModelError("Tabulated fitness: rate table is empty");
        for (double r : rates)
            if (!(std::isfinite(r) && r >= 0.0))
                throw ModelError("Tabulated fitness: rates must be finite and >= 0");
        return FitnessSpec(TabulatedFitness{std::move(rates), tail});
    }

    bool is_linear() const { return std::holds_alternative<LinearFitness>(spec_); }
    const TabulatedFitness* table() const { return std::get_if<TabulatedFitness>(&spec_); }

    double operator()(std::uint64_t k, const Weight& w) const {
        if (const auto* t = table()) {
            if (k < t->rates.size()) return t->rates[k];
            return t->tail == TailRule::constant_last ? t->rates.back() : 0.0;
        }
        return w.u * static_cast<double>(k) + w.v;
    }

private:
    explicit FitnessSpec(std::variant<LinearFitness, TabulatedFitness> s) : spec_(std::move(s)) {}

    std::variant<LinearFitness, TabulatedFitness> spec_;
};

inline double fitness(const FitnessSpec& spec, std::uint64_t k, const Weight& w) {
    return spec(k, w);
}

inline DegreeCap deg_max(const FitnessSpec& spec, const Weight& w) {
    if (const auto* t = spec.table()) {
        if (t->tail == TailRule::constant_last && t->rates.back() > 0.0) return DegreeCap::infinite();
        for (std::size_t i = t->rates.size(); i-- > 0;)
            if (t->rates[i] > 0.0) return DegreeCap::finite(i);
        return DegreeCap::none();
    }
    if (w.u > 0.0 || w.v > 0.0) return DegreeCap::infinite();
    return DegreeCap::none();
}

}  // namespace cmj
