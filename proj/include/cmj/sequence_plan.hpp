#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "cmj/errors.hpp"

namespace cmj {

/// Time budgets t_i and candidate budgets M_i for the summability criterion
/// and the witness search.
///
/// Defaults: t_i = i^-(1 + epsilon/2) and M_i = 2^i. `time_scale` multiplies
/// every t_i and `budget_base` replaces the base 2. The witness search looks
/// at candidates(i) = candidate_base^i children per level, which equals M_i
/// unless `candidate_base` is set (0 means "same as budget_base").
struct SequencePlan {
    double epsilon = 1.0;
    int i_max = 16;
    double time_scale = 1.0;
    double budget_base = 2.0;
    double candidate_base = 0.0;

    void validate() const {
        if (!(std::isfinite(epsilon) && epsilon > 0.0)) throw ModelError("SequencePlan: epsilon must be > 0");
        if (i_max < 1) throw ModelError("SequencePlan: i_max must be >= 1");
        if (!(std::isfinite(time_scale) && time_scale > 0.0))
            throw ModelError("SequencePlan: time scale must be > 0");
        if (!(budget_base >= 2.0)) throw ModelError("SequencePlan: budget base must be >= 2");
        if ((i_max + 2) * std::log2(budget_base) >= 62.0)
            throw ModelError("SequencePlan: M_i overflows 64-bit integers at this depth");
        if (candidate_base != 0.0) {
            if (!(candidate_base >= 2.0)) throw ModelError("SequencePlan: candidate base must be >= 2");
            if (i_max * std::log2(candidate_base) >= 62.0)
                throw ModelError("SequencePlan: candidate budget overflows 64-bit integers at this depth");
        }
    }

    double t(int i) const { return time_scale * std::pow(static_cast<double>(i), -(1.0 + 0.5 * epsilon)); }

    /// Strictly increasing integer budgets (base >= 2 makes rounding safe).
    std::uint64_t M(int i) const {
        return static_cast<std::uint64_t>(std::llround(std::pow(budget_base, static_cast<double>(i))));
    }

    std::uint64_t candidates(int i) const {
        const double base = candidate_base == 0.0 ? budget_base : candidate_base;
        return static_cast<std::uint64_t>(std::llround(std::pow(base, static_cast<double>(i))));
    }

    double t_sum(int upto) const {
        double s = 0.0;
        for (int i = 1; i <= upto; ++i) s += t(i);
        return s;
    }
};

}  // namespace cmj
