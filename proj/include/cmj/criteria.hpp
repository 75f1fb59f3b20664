#pragma once

// Numerical evaluation of the explosion criteria and the phase classification
// for linear fitness f(i, (U, V)) = U i + V.
//
// The criteria quantify over infinite sequences and continua of t; everything
// here evaluates finite truncations and grids, and every verdict carries the
// decision rule that produced it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cmj/csv.hpp"
#include "cmj/errors.hpp"
#include "cmj/fitness.hpp"
#include "cmj/pure_birth.hpp"
#include "cmj/quadrature.hpp"
#include "cmj/sequence_plan.hpp"
#include "cmj/stats.hpp"
#include "cmj/weights.hpp"

namespace cmj {

enum class CriterionVerdict { summable_evidence, divergent_evidence, inconclusive };

inline const char* verdict_name(CriterionVerdict v) {
    switch (v) {
        case CriterionVerdict::summable_evidence: return "SummableEvidence";
        case CriterionVerdict::divergent_evidence: return "DivergentEvidence";
        case CriterionVerdict::inconclusive: return "Inconclusive";
    }
    return "?";
}

/// How P(xi(t) > x) is obtained.
enum class TailMethod {
    exact_if_available,  // negative binomial / Poisson mixtures by quadrature, else Monte Carlo
    monte_carlo,
};

/// Evidence for one term P(xi(t_i) <= M_{i+1})^{M_i} of the summability series.
struct TermEvidence {
    int i = 0;
    double t = 0.0;
    std::uint64_t budget = 0;     // M_i
    std::uint64_t threshold = 0;  // M_{i+1}
    double q = 0.0;               // P(xi(t_i) > M_{i+1})
    Interval q_ci;
    bool exact = false;
    double term = 1.0;
    double term_lo = 1.0;
    double term_hi = 1.0;
    bool resolved = true;
};

enum class PointStatus { pass, fail, unresolved };

inline const char* status_name(PointStatus s) {
    switch (s) {
        case PointStatus::pass: return "pass";
        case PointStatus::fail: return "fail";
        case PointStatus::unresolved: return "unresolved";
    }
    return "?";
}

/// One (t, x) point of a tail-condition grid.
struct GridPoint {
    double t = 0.0;
    double x = 0.0;
    double threshold = 0.0;  // t (log x)^{1+eps} / x
    double estimate = 0.0;
    Interval ci;
    PointStatus status = PointStatus::unresolved;
};

struct CriterionReport {
    std::string criterion;
    CriterionVerdict verdict = CriterionVerdict::inconclusive;
    /// Tail tests only: the condition held on the whole grid.
    bool passed = false;
    std::vector<TermEvidence> terms;
    std::vector<double> partial_sum;
    std::vector<double> partial_sum_lo;
    std::vector<double> partial_sum_hi;
    std::vector<GridPoint> points;
    std::string rule;
    std::string rationale;
};

/// (1 - q)^M evaluated as exp(M log1p(-q)).
inline double power_term(double q, std::uint64_t m) {
    if (q >= 1.0) return 0.0;
    if (q <= 0.0) return 1.0;
    return std::exp(static_cast<double>(m) * std::log1p(-q));
}

// ---------------------------------------------------------------------------

struct SummabilityConfig {
    std::uint64_t nsamples = 10000;
    TailMethod method = TailMethod::exact_if_available;
    double cauchy_tolerance = 1e-3;  // summable: upper-CI terms of the last quartile add to less
    double divergent_floor = 0.5;    // divergent: lower-CI terms of the last quartile all exceed
    int max_unresolved_run = 3;
};

/// Evaluates sum_i P(xi(t_i) <= M_{i+1})^{M_i} for i = 1..i_max.
template <class R>
CriterionReport summability_test(const OffspringModel& model, const SequencePlan& plan,
                                 const SummabilityConfig& cfg, R& rng) {
    plan.validate();
    if (cfg.method == TailMethod::monte_carlo && cfg.nsamples < 10000)
        throw ModelError("summability_test: need at least 1e4 samples per term");

    CriterionReport rep;
    rep.criterion = "summability";
    rep.rule =
        "SummableEvidence if the upper-CI terms over the last quartile sum to < " +
        format_double(cfg.cauchy_tolerance) + "; DivergentEvidence if every lower-CI term in the last quartile > " +
        format_double(cfg.divergent_floor) + "; Inconclusive otherwise or after " +
        std::to_string(cfg.max_unresolved_run) + " consecutive unresolved terms";

    double s = 0.0, s_lo = 0.0, s_hi = 0.0;
    int run = 0;
    int worst_run = 0;
    for (int i = 1; i <= plan.i_max; ++i) {
        TermEvidence e;
        e.i = i;
        e.t = plan.t(i);
        e.budget = plan.M(i);
        e.threshold = plan.M(i + 1);
        const double x = static_cast<double>(e.threshold);
        std::optional<double> exact;
        if (cfg.method == TailMethod::exact_if_available) exact = exact_tail_probability(model, e.t, x);
        if (exact) {
            e.exact = true;
            e.q = std::clamp(*exact, 0.0, 1.0);
            e.q_ci = {e.q, e.q};
        } else {
            if (cfg.nsamples < 10000) throw ModelError("summability_test: need at least 1e4 samples per term");
            const TailEstimate est = tail_prob_mc(model, e.t, x, cfg.nsamples, rng);
            e.q = est.estimate;
            e.q_ci = est.ci;
        }
        e.term = power_term(e.q, e.budget);
        e.term_lo = power_term(e.q_ci.hi, e.budget);
        e.term_hi = power_term(e.q_ci.lo, e.budget);
        // A wide q interval is harmless when the power collapses both ends together.
        e.resolved = e.exact || static_cast<double>(e.budget) * e.q_ci.width() <= 1.0 ||
                     e.term_hi - e.term_lo <= cfg.cauchy_tolerance;
        run = e.resolved ? 0 : run + 1;
        worst_run = std::max(worst_run, run);

        s += e.term;
        s_lo += e.term_lo;
        s_hi += e.term_hi;
        rep.partial_sum.push_back(s);
        rep.partial_sum_lo.push_back(s_lo);
        rep.partial_sum_hi.push_back(s_hi);
        rep.terms.push_back(e);
    }

    const int quartile = std::max(1, plan.i_max / 4);
    const auto first = rep.terms.end() - quartile;
    double tail_hi = 0.0;
    double min_lo = 1.0;
    for (auto it = first; it != rep.terms.end(); ++it) {
        tail_hi += it->term_hi;
        min_lo = std::min(min_lo, it->term_lo);
    }

    if (worst_run >= cfg.max_unresolved_run) {
        rep.verdict = CriterionVerdict::inconclusive;
        rep.rationale = std::to_string(worst_run) + " consecutive unresolved terms";
    } else if (tail_hi < cfg.cauchy_tolerance) {
        rep.verdict = CriterionVerdict::summable_evidence;
        rep.rationale = "upper-CI tail over last " + std::to_string(quartile) + " terms = " + format_double(tail_hi);
    } else if (min_lo > cfg.divergent_floor) {
        rep.verdict = CriterionVerdict::divergent_evidence;
        rep.rationale = "smallest lower-CI term over last " + std::to_string(quartile) + " terms = " +
                        format_double(min_lo);
    } else {
        rep.verdict = CriterionVerdict::inconclusive;
        rep.rationale = "upper-CI tail " + format_double(tail_hi) + ", smallest lower-CI term " + format_double(min_lo);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Tail conditions P(Y_t > x) > t (log x)^{1+eps} / x on a grid.

inline double tail_threshold(double t, double x, double epsilon) {
    return t * std::pow(std::log(x), 1.0 + epsilon) / x;
}

/// Grids for "for all t in (0, eps'] and x >= x0".
struct TailGridConfig {
    double epsilon = 0.5;
    double epsilon_prime = 0.25;
    double x0 = 100.0;
    std::vector<double> t_grid = {1.0 / 256, 1.0 / 128, 1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4};
    std::vector<double> x_grid = {1e2, 1e3, 1e4};
    std::uint64_t nsamples = 100000;
    /// Largest share of unresolved points that still allows a pass.
    double max_unresolved_share = 0.25;

    void validate() const {
        if (!(epsilon > 0.0 && epsilon_prime > 0.0 && x0 > 1.0))
            throw ModelError("tail grid: need epsilon, epsilon' > 0 and x0 > 1");
        if (nsamples < 10000) throw ModelError("tail grid: need at least 1e4 samples per point");
        if (t_grid.empty() || x_grid.empty()) throw ModelError("tail grid: empty grid");
        for (double t : t_grid)
            if (!(t > 0.0 && t <= epsilon_prime)) throw ModelError("tail grid: t must lie in (0, epsilon']");
        for (double x : x_grid)
            if (!(x >= x0)) throw ModelError("tail grid: x must be >= x0");
    }

    TailGridConfig scaled_time(double c) const {
        TailGridConfig out = *this;
        out.epsilon_prime *= c;
        for (double& t : out.t_grid) t *= c;
        return out;
    }
};

namespace detail {
inline PointStatus grade(const Interval& ci, double threshold) {
    if (ci.lo > threshold) return PointStatus::pass;
    if (ci.hi < threshold) return PointStatus::fail;
    return PointStatus::unresolved;
}

inline void finish_tail_report(CriterionReport& rep, const TailGridConfig& cfg) {
    std::size_t fails = 0, unresolved = 0;
    for (const auto& p : rep.points) {
        fails += p.status == PointStatus::fail;
        unresolved += p.status == PointStatus::unresolved;
    }
    rep.rule = "point passes if its lower 99% bound exceeds the threshold and fails if its upper bound is below; "
               "grid passes with no failing point and at most " +
               format_double(cfg.max_unresolved_share) + " of points unresolved";
    const double share = static_cast<double>(unresolved) / static_cast<double>(rep.points.size());
    rep.passed = fails == 0 && share <= cfg.max_unresolved_share;
    rep.verdict = rep.passed ? CriterionVerdict::summable_evidence : CriterionVerdict::inconclusive;
    rep.rationale = std::to_string(rep.points.size() - fails - unresolved) + " pass, " + std::to_string(fails) +
                    " fail, " + std::to_string(unresolved) + " unresolved";
}
}  // namespace detail

/// Tail condition on the offspring count xi(t), estimated by simulation.
template <class R>
CriterionReport tail_criterion_test(const OffspringModel& model, const TailGridConfig& cfg, R& rng) {
    cfg.validate();
    CriterionReport rep;
    rep.criterion = "tail";
    for (double t : cfg.t_grid) {
        for (double x : cfg.x_grid) {
            GridPoint p;
            p.t = t;
            p.x = x;
            p.threshold = tail_threshold(t, x, cfg.epsilon);
            const TailEstimate est = tail_prob_mc(model, t, x, cfg.nsamples, rng);
            p.estimate = est.estimate;
            p.ci = est.ci;
            p.status = detail::grade(p.ci, p.threshold);
            rep.points.push_back(p);
        }
    }
    detail::finish_tail_report(rep, cfg);
    return rep;
}

/// log of V (e^{U t} - 1) / U, with (e^{0 t} - 1)/0 := t; -inf when V = 0.
inline double log_linear_growth(double u, double v, double t) {
    if (!(v > 0.0)) return -std::numeric_limits<double>::infinity();
    if (u <= 0.0) return std::log(v) + std::log(t);
    const double a = u * t;
    const double log_expm1 = a > 30.0 ? a + std::log1p(-std::exp(-a)) : std::log(std::expm1(a));
    return std::log(v) + log_expm1 - std::log(u);
}

inline double linear_growth(double u, double v, double t) {
    if (!(v > 0.0)) return 0.0;
    if (u <= 0.0) return v * t;
    return v * std::expm1(u * t) / u;
}

/// Tail condition on Y_t = V (e^{U t} - 1) / U sampled straight from the
/// weight law.
template <class R>
CriterionReport linear_tail_test(const WeightSpec& weights, const TailGridConfig& cfg, R& rng) {
    cfg.validate();
    CriterionReport rep;
    rep.criterion = "linear-tail";
    std::vector<double> log_y(cfg.nsamples);
    for (double t : cfg.t_grid) {
        for (auto& y : log_y) {
            const Weight w = weights.sample(rng);
            y = log_linear_growth(w.u, w.v, t);
        }
        for (double x : cfg.x_grid) {
            GridPoint p;
            p.t = t;
            p.x = x;
            p.threshold = tail_threshold(t, x, cfg.epsilon);
            const double lx = std::log(x);
            const auto hits = static_cast<std::uint64_t>(
                std::count_if(log_y.begin(), log_y.end(), [lx](double y) { return y > lx; }));
            p.estimate = static_cast<double>(hits) / static_cast<double>(cfg.nsamples);
            p.ci = wilson_interval(hits, cfg.nsamples);
            p.status = detail::grade(p.ci, p.threshold);
            rep.points.push_back(p);
        }
    }
    detail::finish_tail_report(rep, cfg);
    return rep;
}

// ---------------------------------------------------------------------------
// E[V (e^{U t} - 1) / U]

enum class MomentStatus { finite, divergence_suspected };

inline const char* status_name(MomentStatus s) {
    return s == MomentStatus::finite ? "Finite" : "DivergenceSuspected";
}

struct MomentConfig {
    std::uint64_t nsamples = 200000;
    /// Lowest truncation level, as a multiple of the sample median of Y.
    double truncation_scale = 1e4;
    int doublings = 3;            // levels L, 2L, ..., 2^doublings L
    double stable_change = 0.01;  // finite: last relative change below this, CI included
    double growth_change = 0.25;  // confident divergence: every relative change above this
};

struct MomentResult {
    double t = 0.0;
    MomentStatus status = MomentStatus::divergence_suspected;
    double value = std::numeric_limits<double>::infinity();
    Interval ci;
    bool closed_form = false;
    bool low_confidence = false;
    /// (truncation level, truncated mean E[min(Y, L)]) for the Monte Carlo route.
    std::vector<std::pair<double, double>> truncation_curve;
};

namespace detail {
/// E[(e^{U t} - 1) / U] for the light-tailed U families.
inline double expected_growth_factor(const ScalarLaw& u, double t) {
    if (const auto* p = std::get_if<PointMass>(&u)) return linear_growth(p->value, 1.0, t);
    if (const auto* e = std::get_if<Exponential>(&u)) {
        if (t >= e->rate) return std::numeric_limits<double>::infinity();
        return -e->rate * std::log1p(-t / e->rate);  // Frullani
    }
    return expectation(u, [t](double uu) { return linear_growth(uu, 1.0, t); });
}

inline std::optional<double> closed_form_linear_moment(const PairSpec& pair, double t) {
    const ScalarLaw& v = pair.v_law();
    if (!has_closed_form_moments(v)) return std::nullopt;
    switch (pair.coupling()) {
        case Coupling::u_zero: return mean(v) * t;
        case Coupling::u_one: return mean(v) * std::expm1(t);
        case Coupling::u_equals_v: return mgf(v, t) - 1.0;
        case Coupling::independent:
            if (!has_closed_form_moments(*pair.u_law())) return std::nullopt;
            return mean(v) * expected_growth_factor(*pair.u_law(), t);
    }
    return std::nullopt;
}
}  // namespace detail

/// Decides finiteness of E[V (e^{U t} - 1) / U] at one t.
///
/// Light-tailed laws use closed forms. Otherwise: Monte Carlo with truncated
/// means E[min(Y, L)] at L, 2L, 4L, 8L. Finite when the last doubling moves
/// the estimate by less than `stable_change` (upper 99% bound); confident
/// divergence when every doubling adds more than `growth_change`; anything
/// else is reported as divergence with the low-confidence flag.
template <class R>
MomentResult linear_moment_test(const WeightSpec& weights, double t, const MomentConfig& cfg, R& rng) {
    if (!(t > 0.0)) throw ModelError("linear_moment_test: t must be > 0");
    MomentResult res;
    res.t = t;
    const PairSpec pair = weights.as_pair();

    if (auto cf = detail::closed_form_linear_moment(pair, t)) {
        res.closed_form = true;
        res.value = *cf;
        res.ci = {*cf, *cf};
        res.status = std::isfinite(*cf) ? MomentStatus::finite : MomentStatus::divergence_suspected;
        return res;
    }

    if (cfg.nsamples < 1000) throw ModelError("linear_moment_test: need at least 1000 samples");
    std::vector<double> ys(cfg.nsamples);
    RunningMoments raw;
    for (auto& y : ys) {
        const Weight w = weights.sample(rng);
        y = std::exp(log_linear_growth(w.u, w.v, t));
        raw.add(y);
    }

    std::vector<double> positive;
    for (double y : ys)
        if (y > 0.0) positive.push_back(y);
    if (positive.empty()) {
        res.status = MomentStatus::finite;
        res.value = 0.0;
        res.ci = {0.0, 0.0};
        return res;
    }
    const double base = cfg.truncation_scale * median(positive);

    std::vector<double> levels;
    for (int k = 0; k <= cfg.doublings; ++k) levels.push_back(base * std::ldexp(1.0, k));
    std::vector<RunningMoments> trunc(levels.size());
    RunningMoments last_step;  // min(Y, L_top) - min(Y, L_top/2), per sample
    for (double y : ys) {
        for (std::size_t k = 0; k < levels.size(); ++k) trunc[k].add(std::min(y, levels[k]));
        last_step.add(std::min(y, levels.back()) - std::min(y, levels[levels.size() - 2]));
    }
    for (std::size_t k = 0; k < levels.size(); ++k) res.truncation_curve.emplace_back(levels[k], trunc[k].mean());

    bool all_growing = true;
    for (std::size_t k = 1; k < levels.size(); ++k) {
        const double rel = (trunc[k].mean() - trunc[k - 1].mean()) / trunc[k - 1].mean();
        all_growing = all_growing && rel > cfg.growth_change;
    }
    const double prev = trunc[levels.size() - 2].mean();
    const double last_upper = (last_step.mean() + kZ99 * last_step.standard_error()) / prev;

    res.value = raw.mean();
    const double half = kZ99 * raw.standard_error();
    res.ci = {res.value - half, res.value + half};
    if (std::isfinite(res.value) && last_upper < cfg.stable_change) {
        res.status = MomentStatus::finite;
    } else {
        res.status = MomentStatus::divergence_suspected;
        res.low_confidence = !all_growing;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Phase classification for linear fitness.

enum class Phase { every_node_max_degree, locally_finite_unique_path, single_infinite_degree_node, inconclusive };

inline const char* phase_name(Phase p) {
    switch (p) {
        case Phase::every_node_max_degree: return "EveryNodeMaxDegree";
        case Phase::locally_finite_unique_path: return "LocallyFiniteUniquePath";
        case Phase::single_infinite_degree_node: return "SingleInfiniteDegreeNode";
        case Phase::inconclusive: return "Inconclusive";
    }
    return "?";
}

struct PhaseClassification {
    Phase phase = Phase::inconclusive;
    std::string rationale;
    std::vector<MomentResult> moments;
    std::optional<CriterionReport> tail;
};

struct ClassifyConfig {
    /// "for some t > 0" search grid.
    std::vector<double> moment_t_grid = {1.0 / 256, 1.0 / 128, 1.0 / 64, 1.0 / 32, 1.0 / 16,
                                         1.0 / 8,   1.0 / 4,   1.0 / 2,  1.0};
    MomentConfig moment;
    TailGridConfig tail;

    ClassifyConfig scaled_time(double c) const {
        ClassifyConfig out = *this;
        for (double& t : out.moment_t_grid) t *= c;
        out.tail = tail.scaled_time(c);
        return out;
    }
};

/// Whether sum_i 1/f(i, w) diverges for this weight. True for every linear
/// weight except (0, 0) and for every finite rate table, whose tail is either
/// zero (an infinite waiting time) or constant.
inline bool harmonic_sum_diverges(const FitnessSpec& fitness, const Weight& w) {
    if (fitness.is_linear()) return w.u > 0.0 || w.v > 0.0;
    return true;
}

template <class R>
PhaseClassification classify_phase(const WeightSpec& weights, const ClassifyConfig& cfg, R& rng) {
    const PairSpec pair = weights.as_pair();
    if (pair.zero_pair_has_mass()) throw ModelError("classify_phase: P((U, V) = (0, 0)) > 0");
    if (cfg.moment_t_grid.empty()) throw ModelError("classify_phase: empty moment grid");

    PhaseClassification out;
    for (double t : cfg.moment_t_grid) {
        out.moments.push_back(linear_moment_test(weights, t, cfg.moment, rng));
        const MomentResult& m = out.moments.back();
        if (m.status == MomentStatus::finite) {
            out.phase = Phase::every_node_max_degree;
            out.rationale = std::string("E[V(e^{Ut}-1)/U] finite at t=") + format_double(t) + " (" +
                            (m.closed_form ? "closed form" : "truncation test") + ", value " +
                            format_double(m.value) + ")";
            return out;
        }
    }

    out.tail = linear_tail_test(weights, cfg.tail, rng);
    if (out.tail->passed) {
        // sum 1/(U i + V) diverges for every finite (U, V) != (0, 0), so an
        // explosive tree cannot carry an infinite-degree node.
        out.phase = Phase::locally_finite_unique_path;
        out.rationale = "moment test not finite on the t grid; tail condition holds on grid (" +
                        out.tail->rationale + "); harmonic sum of 1/(Ui+V) diverges";
    } else {
        out.phase = Phase::inconclusive;
        out.rationale = "moment test not finite on the t grid; tail condition not established (" +
                        out.tail->rationale + ")";
    }
    return out;
}

// ---------------------------------------------------------------------------

struct CondensationReport {
    double lambda = 0.0;
    /// partial_sum[j - 1] = sum_{l=1}^{j} E[prod_{i<l} f(i,W)/(f(i,W)+lambda)]
    std::vector<double> partial_sum;
    double standard_error = 0.0;  // of the final partial sum
    Interval ci;
    std::uint64_t samples = 0;
};

/// Monte Carlo partial sums of sum_j E[prod_{i<j} f(i, W) / (f(i, W) + lambda)].
template <class R>
CondensationReport condensation_sum(const FitnessSpec& fitness, const WeightSpec& weights, double lambda,
                                    std::uint64_t j_max, std::uint64_t nsamples, R& rng) {
    if (!(lambda > 0.0)) throw ModelError("condensation_sum: lambda must be > 0");
    if (j_max < 1 || nsamples < 1) throw ModelError("condensation_sum: need j_max >= 1 and nsamples >= 1");
    CondensationReport rep;
    rep.lambda = lambda;
    rep.samples = nsamples;
    rep.partial_sum.assign(j_max, 0.0);
    RunningMoments total;
    for (std::uint64_t s = 0; s < nsamples; ++s) {
        const Weight w = weights.sample(rng);
        double prod = 1.0;
        double acc = 0.0;
        for (std::uint64_t j = 1; j <= j_max; ++j) {
            const double f = fitness(j - 1, w);
            prod *= f / (f + lambda);
            acc += prod;
            rep.partial_sum[j - 1] += acc;
        }
        total.add(acc);
    }
    for (double& p : rep.partial_sum) p /= static_cast<double>(nsamples);
    rep.standard_error = total.standard_error();
    const double m = rep.partial_sum.back();
    rep.ci = {m - kZ99 * rep.standard_error, m + kZ99 * rep.standard_error};
    return rep;
}

// ---------------------------------------------------------------------------
// Structured text serialization.

/// CSV `t,x,threshold,estimate,ci_lo,ci_hi,status`.
inline void write_points_csv(const CriterionReport& rep, std::ostream& out) {
    CsvWriter csv(out);
    csv.row("t", "x", "threshold", "estimate", "ci_lo", "ci_hi", "status");
    for (const auto& p : rep.points)
        csv.row(p.t, p.x, p.threshold, p.estimate, p.ci.lo, p.ci.hi, std::string(status_name(p.status)));
}

/// Key-value header followed by CSV tables of per-term / per-point evidence.
inline void write_report(const CriterionReport& rep, std::ostream& out) {
    out << "criterion = " << rep.criterion << '\n';
    out << "verdict = " << verdict_name(rep.verdict) << '\n';
    if (!rep.points.empty()) out << "passed = " << (rep.passed ? "true" : "false") << '\n';
    out << "rule = " << rep.rule << '\n';
    out << "rationale = " << rep.rationale << '\n';
    if (!rep.terms.empty()) {
        out << "\n[terms]\n";
        CsvWriter csv(out);
        csv.row("i", "t_i", "M_i", "M_next", "q", "q_lo", "q_hi", "exact", "term", "term_lo", "term_hi", "resolved",
                "partial_sum", "partial_sum_lo", "partial_sum_hi");
        for (std::size_t k = 0; k < rep.terms.size(); ++k) {
            const auto& e = rep.terms[k];
            csv.row(e.i, e.t, e.budget, e.threshold, e.q, e.q_ci.lo, e.q_ci.hi, e.exact ? 1 : 0, e.term, e.term_lo,
                    e.term_hi, e.resolved ? 1 : 0, rep.partial_sum[k], rep.partial_sum_lo[k],
                    rep.partial_sum_hi[k]);
        }
    }
    if (!rep.points.empty()) {
        out << "\n[points]\n";
        write_points_csv(rep, out);
    }
}

}  // namespace cmj
