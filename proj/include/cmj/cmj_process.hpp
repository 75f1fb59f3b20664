#pragma once

// Continuous-time CMJ process of a recursive tree with fitness. Every
// individual u carries weight W_u; its j-th child arrives after an
// Exp(f(j - 1, W_u)) waiting time counted from the (j - 1)-th.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "cmj/csv.hpp"
#include "cmj/fitness.hpp"
#include "cmj/pure_birth.hpp"
#include "cmj/recursive_tree.hpp"
#include "cmj/sequence_plan.hpp"
#include "cmj/stats.hpp"
#include "cmj/weights.hpp"

namespace cmj {

struct Individual {
    NodeId parent = kNoParent;
    std::uint32_t children_born = 0;
    double birth_time = 0.0;
    Weight weight;
};

/// Individuals indexed by birth order; the root is 0 and ids double as the
/// dense stand-in for Ulam-Harris labels.
struct Genealogy {
    std::vector<Individual> individuals;

    std::size_t size() const { return individuals.size(); }
};

struct StopRule {
    std::optional<std::uint64_t> population;  // stop once |T_t| >= population
    std::optional<double> horizon;            // stop at model time horizon
    std::uint64_t population_cap = std::uint64_t{1} << 24;
};

struct ExplosionEstimate {
    /// tau[k] = inf{t : |T_t| >= k}; tau[0] = tau[1] = 0.
    std::vector<double> tau;
    /// The population cap was hit before the stop rule fired.
    bool saturated = false;
    double horizon = std::numeric_limits<double>::infinity();
};

struct CmjRun {
    Genealogy genealogy;
    ExplosionEstimate estimate;
    std::uint64_t events = 0;
    /// No clock left running: every individual has reached its last birth.
    bool exhausted = false;
};

/// Event-driven simulation. Only the next-child clock of each individual is
/// kept in the queue, which is exact by memorylessness.
template <class R>
CmjRun run_until(const FitnessSpec& fitness, const WeightSpec& weights, R& rng, const StopRule& stop) {
    if (!stop.population && !stop.horizon) throw ModelError("run_until: need a population or time stop");
    if (stop.population && *stop.population < 1) throw ModelError("run_until: population stop must be >= 1");
    if (stop.horizon && !(*stop.horizon >= 0.0)) throw ModelError("run_until: horizon must be >= 0");

    using Clock = std::pair<double, NodeId>;
    std::priority_queue<Clock, std::vector<Clock>, std::greater<>> queue;

    CmjRun run;
    auto& people = run.genealogy.individuals;
    auto& tau = run.estimate.tau;
    tau.push_back(0.0);
    if (stop.horizon) run.estimate.horizon = *stop.horizon;

    auto arm = [&](NodeId id, double now) {
        const Individual& ind = people[id];
        const double rate = fitness(ind.children_born, ind.weight);
        if (rate > 0.0) queue.emplace(now + rng.exponential(rate), id);
    };
    auto spawn = [&](NodeId parent, double now) {
        const auto id = static_cast<NodeId>(people.size());
        people.push_back(Individual{parent, 0, now, weights.sample(rng)});
        tau.push_back(now);
        arm(id, now);
    };

    spawn(kNoParent, 0.0);
    while (true) {
        if (stop.population && people.size() >= *stop.population) break;
        if (people.size() >= stop.population_cap) {
            run.estimate.saturated = true;
            break;
        }
        if (queue.empty()) {
            run.exhausted = true;
            break;
        }
        const auto [time, parent] = queue.top();
        if (stop.horizon && time > *stop.horizon) break;
        queue.pop();
        ++run.events;
        ++people[parent].children_born;
        spawn(parent, time);
        arm(parent, time);
    }
    return run;
}

/// Discrete skeleton: the genealogy relabelled by arrival order, which is
/// already the id order.
inline RecursiveTree skeleton(const Genealogy& g) {
    if (g.individuals.empty()) return {};
    RecursiveTree tree(g.individuals.front().weight);
    tree.reserve(g.size());
    std::vector<double> births;
    births.reserve(g.size());
    births.push_back(g.individuals.front().birth_time);
    for (std::size_t i = 1; i < g.size(); ++i) {
        tree.attach(g.individuals[i].parent, g.individuals[i].weight);
        births.push_back(g.individuals[i].birth_time);
    }
    tree.set_birth_times(std::move(births));
    return tree;
}

/// CSV `id,parent,birth_time,weight_u,weight_v`.
inline void write_genealogy_csv(const Genealogy& g, std::ostream& out) {
    CsvWriter csv(out);
    csv.row("id", "parent", "birth_time", "weight_u", "weight_v");
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto& ind = g.individuals[i];
        csv.field(static_cast<std::uint64_t>(i));
        if (ind.parent == kNoParent) csv.empty();
        else csv.field(static_cast<std::uint64_t>(ind.parent));
        csv.field(ind.birth_time).field(ind.weight.u).field(ind.weight.v);
        csv.end_row();
    }
}

/// CSV `k,tau_k` for k >= 1.
inline void write_tau_csv(const ExplosionEstimate& e, std::ostream& out) {
    CsvWriter csv(out);
    csv.row("k", "tau_k");
    for (std::size_t k = 1; k < e.tau.size(); ++k) csv.row(static_cast<std::uint64_t>(k), e.tau[k]);
}

// ---------------------------------------------------------------------------
// Witness search for an infinite path in finite time.

struct WitnessLevel {
    int level = 0;
    double time_budget = 0.0;           // t_i
    std::uint64_t candidate_budget = 0; // candidates(i), M_i by default
    std::uint64_t threshold = 0;        // M_{i+1}: a candidate needs more births than this
    std::uint64_t candidates = 0;       // candidates that exist (<= M_i)
    std::uint64_t examined = 0;
    bool success = false;
};

struct WitnessResult {
    int depth = 0;
    /// Model time along the path, measured from the birth of its first node.
    double elapsed = 0.0;
    std::vector<WitnessLevel> levels;
};

namespace detail {
/// Extends `offsets` (the earlier births of one individual) up to `need`
/// births, stopping at the first birth after `budget`.
template <class R>
void extend_births(const OffspringModel::Realization& rate, double budget, std::uint64_t need, R& rng,
                   std::vector<double>& offsets) {
    double clock = offsets.empty() ? 0.0 : offsets.back();
    while (offsets.size() < need) {
        const double lambda = rate(offsets.size());
        if (!(lambda > 0.0)) return;
        clock += rng.exponential(lambda);
        if (clock > budget) return;
        offsets.push_back(clock);
    }
}

/// Offsets of the first `need` births of one individual within `budget`.
template <class R>
void first_births(const OffspringModel::Realization& rate, double budget, std::uint64_t need, R& rng,
                  std::vector<double>& offsets) {
    offsets.clear();
    extend_births(rate, budget, need, rng, offsets);
}
}  // namespace detail

/// Greedy realization of the nested events E_1 ⊇ E_2 ⊇ ...
///
/// Level i looks at up to candidates(i) children of the current node in birth
/// order and descends into the first one that produces more than M_{i+1}
/// children within t_i; that node's children born within t_i are the next
/// level's candidates. Level-1 candidates are the root's first children,
/// whenever they are born.
template <class R>
WitnessResult greedy_path_witness(const FitnessSpec& fitness, const WeightSpec& weights,
                                  const SequencePlan& plan, int depth_target, R& rng) {
    plan.validate();
    if (depth_target < 1) throw ModelError("greedy_path_witness: depth target must be >= 1");

    const OffspringModel model = OffspringModel::mixed(weights, fitness);
    WitnessResult out;

    std::vector<double> candidates;  // birth offsets relative to the current node
    std::vector<double> births;
    detail::first_births(model.draw(rng), std::numeric_limits<double>::infinity(), plan.candidates(1), rng,
                          candidates);

    for (int i = 1; i <= depth_target; ++i) {
        WitnessLevel lvl;
        lvl.level = i;
        lvl.time_budget = plan.t(i);
        lvl.candidate_budget = plan.candidates(i);
        lvl.threshold = plan.M(i + 1);
        lvl.candidates = candidates.size();

        std::optional<double> chosen;
        for (double offset : candidates) {
            ++lvl.examined;
            const OffspringModel::Realization rate = model.draw(rng);
            detail::first_births(rate, lvl.time_budget, lvl.threshold + 1, rng, births);
            if (births.size() > lvl.threshold) {
                chosen = offset;
                // Children of the chosen node born within t_i are the next candidates.
                if (i < depth_target) {
                    const std::uint64_t keep = plan.candidates(i + 1);
                    if (births.size() < keep) detail::extend_births(rate, lvl.time_budget, keep, rng, births);
                    if (births.size() > keep) births.resize(static_cast<std::size_t>(keep));
                }
                break;
            }
        }
        lvl.success = chosen.has_value();
        out.levels.push_back(lvl);
        if (!chosen) break;
        out.depth = i;
        if (i > 1) out.elapsed += *chosen;
        candidates.swap(births);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Explosion diagnosis from tau curves.

enum class ExplosionVerdict { explosion_suspected, growth_unbounded, inconclusive };

inline const char* verdict_name(ExplosionVerdict v) {
    switch (v) {
        case ExplosionVerdict::explosion_suspected: return "ExplosionSuspected";
        case ExplosionVerdict::growth_unbounded: return "GrowthUnbounded";
        case ExplosionVerdict::inconclusive: return "Inconclusive";
    }
    return "?";
}

/// Heuristic thresholds. A finite sample never decides explosion; these only
/// label the trend of the dyadic increments tau_{2k} - tau_k.
struct DiagnosisConfig {
    int levels = 4;               // dyadic levels in the trend window
    double decay_ratio = 0.7;     // fitted per-level ratio below this: explosion suspected
    double bounded_ratio = 0.9;   // at or above this: increments bounded below
    std::size_t min_entries = 16; // fewer tau entries: inconclusive
    std::uint64_t fit_from = 16;  // first dyadic k in the tau against log k fit
};

struct ExplosionDiagnosis {
    ExplosionVerdict verdict = ExplosionVerdict::inconclusive;
    std::vector<std::uint64_t> k;     // dyadic milestones 1, 2, 4, ...
    std::vector<double> increments;   // tau[2k] - tau[k] for each listed k with 2k present
    double fitted_ratio = std::numeric_limits<double>::quiet_NaN();
    LinearFit log_fit;                // tau_k against log k over dyadic k >= fit_from
    std::string rationale;
};

inline ExplosionDiagnosis diagnose_explosion(const ExplosionEstimate& est, const DiagnosisConfig& cfg = {}) {
    ExplosionDiagnosis d;
    const std::size_t kmax = est.tau.empty() ? 0 : est.tau.size() - 1;
    for (std::uint64_t k = 1; k <= kmax; k *= 2) d.k.push_back(k);
    for (std::uint64_t k : d.k)
        if (2 * k <= kmax) d.increments.push_back(est.tau[2 * k] - est.tau[k]);

    std::vector<double> xs, ys;
    for (std::uint64_t k : d.k) {
        if (k < std::max<std::uint64_t>(cfg.fit_from, 2)) continue;
        xs.push_back(std::log(static_cast<double>(k)));
        ys.push_back(est.tau[k]);
    }
    if (xs.size() >= 2) d.log_fit = least_squares(xs, ys);

    const auto window = static_cast<std::size_t>(cfg.levels) + 1;
    if (kmax < cfg.min_entries || d.increments.size() < window) {
        d.rationale = "too few dyadic milestones";
        return d;
    }

    // Fit log increment against level over the last `window` increments.
    std::vector<double> lv, li;
    const std::size_t first = d.increments.size() - window;
    for (std::size_t j = first; j < d.increments.size(); ++j) {
        lv.push_back(static_cast<double>(j));
        li.push_back(std::log(std::max(d.increments[j], std::numeric_limits<double>::min())));
    }
    d.fitted_ratio = std::exp(least_squares(lv, li).slope);

    if (d.fitted_ratio < cfg.decay_ratio) {
        d.verdict = ExplosionVerdict::explosion_suspected;
        d.rationale = "dyadic increments decay geometrically (fitted ratio " + format_double(d.fitted_ratio) +
                      " < " + format_double(cfg.decay_ratio) + ")";
    } else if (d.fitted_ratio >= cfg.bounded_ratio) {
        d.verdict = ExplosionVerdict::growth_unbounded;
        d.rationale = "dyadic increments bounded below (fitted ratio " + format_double(d.fitted_ratio) +
                      " >= " + format_double(cfg.bounded_ratio) + ")";
    } else {
        d.rationale = "fitted ratio " + format_double(d.fitted_ratio) + " between thresholds";
    }
    return d;
}

}  // namespace cmj
