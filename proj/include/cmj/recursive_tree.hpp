#pragma once

// Sequential (W, f)-recursive tree with fitness and its structural statistics.
//
// Indexing: the tree starts from the root 0; growth step n inserts node n,
// so a tree with m nodes carries m - 1 edges.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmj/csv.hpp"
#include "cmj/fitness.hpp"
#include "cmj/weighted_sampler.hpp"
#include "cmj/weights.hpp"

namespace cmj {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoParent = std::numeric_limits<NodeId>::max();

/// Rooted increasing tree stored as flat arrays; node 0 is the root and
/// parent[i] < i for every other node.
class RecursiveTree {
public:
    RecursiveTree() = default;

    explicit RecursiveTree(Weight root_weight) { add_root(root_weight); }

    /// Builds a tree from a parent array (parent[0] ignored). Weights default
    /// to (0, 0). Throws if the array is not increasing.
    static RecursiveTree from_parents(const std::vector<NodeId>& parents) {
        if (parents.empty()) throw std::invalid_argument("from_parents: empty parent array");
        RecursiveTree t(Weight{});
        for (std::size_t i = 1; i < parents.size(); ++i) t.attach(parents[i], Weight{});
        return t;
    }

    std::size_t size() const { return parent_.size(); }
    bool empty() const { return parent_.empty(); }

    const std::vector<NodeId>& parent() const { return parent_; }
    const std::vector<std::uint32_t>& outdeg() const { return outdeg_; }
    const std::vector<Weight>& weight() const { return weight_; }
    const std::vector<double>& birth_time() const { return birth_time_; }
    bool has_birth_times() const { return !birth_time_.empty(); }

    void reserve(std::size_t n) {
        parent_.reserve(n);
        outdeg_.reserve(n);
        weight_.reserve(n);
    }

    NodeId attach(NodeId target, Weight w) {
        if (target >= size()) throw std::out_of_range("attach: target is not an existing node");
        const auto id = static_cast<NodeId>(size());
        parent_.push_back(target);
        outdeg_.push_back(0);
        weight_.push_back(w);
        ++outdeg_[target];
        return id;
    }

    void set_birth_times(std::vector<double> times) {
        if (times.size() != size()) throw std::invalid_argument("set_birth_times: size mismatch");
        birth_time_ = std::move(times);
    }

    /// Checks parent[i] < i, the out-degree table, and the edge count.
    bool check_invariants() const {
        if (empty()) return true;
        if (parent_[0] != kNoParent) return false;
        std::vector<std::uint32_t> deg(size(), 0);
        std::uint64_t edges = 0;
        for (std::size_t i = 1; i < size(); ++i) {
            if (parent_[i] >= i) return false;
            ++deg[parent_[i]];
        }
        for (std::size_t j = 0; j < size(); ++j) {
            if (deg[j] != outdeg_[j]) return false;
            edges += outdeg_[j];
        }
        return edges == size() - 1;
    }

private:
    void add_root(Weight w) {
        parent_.push_back(kNoParent);
        outdeg_.push_back(0);
        weight_.push_back(w);
    }

    std::vector<NodeId> parent_;
    std::vector<std::uint32_t> outdeg_;
    std::vector<Weight> weight_;
    std::vector<double> birth_time_;
};

/// Tree under construction together with its partition function Z, the sum
/// of all current node fitnesses.
class GrowthState {
public:
    /// Steps between exact recomputations of Z and the sampler.
    static constexpr std::uint64_t kRecomputeInterval = std::uint64_t{1} << 16;

    GrowthState(FitnessSpec fitness, WeightSpec weights, Weight root_weight)
        : fitness_(std::move(fitness)), weights_(std::move(weights)), tree_(root_weight) {
        const double f0 = fitness_(0, root_weight);
        sampler_.push_back(f0);
        z_ = f0;
        positive_ = f0 > 0.0 ? 1 : 0;
        settle_zero();
    }

    const RecursiveTree& tree() const { return tree_; }
    const FitnessSpec& fitness() const { return fitness_; }
    const WeightSpec& weights() const { return weights_; }
    const FenwickSampler& sampler() const { return sampler_; }

    /// Incrementally maintained partition function.
    double z() const { return z_; }
    bool halted() const { return positive_ == 0; }

    /// Z recomputed from scratch.
    double exact_z() const {
        double sum = 0.0;
        double comp = 0.0;
        for (std::size_t j = 0; j < tree_.size(); ++j) {
            const double v = fitness_(tree_.outdeg()[j], tree_.weight()[j]);
            const double t = sum + v;
            comp += (std::abs(sum) >= std::abs(v)) ? (sum - t) + v : (v - t) + sum;
            sum = t;
        }
        return sum + comp;
    }

    void reserve(std::size_t n) {
        tree_.reserve(n);
        sampler_.reserve(n);
    }

    /// Inserts one node attached to `target` with weight `w`.
    void attach(NodeId target, Weight w) {
        const std::uint32_t k = tree_.outdeg()[target];
        const Weight& wt = tree_.weight()[target];
        const double before = fitness_(k, wt);
        const double after = fitness_(k + 1, wt);
        const double fresh = fitness_(0, w);
        tree_.attach(target, w);
        sampler_.update(target, after);
        sampler_.push_back(fresh);
        z_ += (after - before) + fresh;
        positive_ += (after > 0.0 ? 1 : 0) - (before > 0.0 ? 1 : 0) + (fresh > 0.0 ? 1 : 0);
        if (++since_recompute_ >= kRecomputeInterval) recompute();
        settle_zero();
    }

    void recompute() {
        sampler_.rebuild();
        z_ = sampler_.total();
        since_recompute_ = 0;
    }

private:
    void settle_zero() {
        if (positive_ == 0) z_ = 0.0;
    }

    FitnessSpec fitness_;
    WeightSpec weights_;
    RecursiveTree tree_;
    FenwickSampler sampler_;
    double z_ = 0.0;
    std::uint64_t positive_ = 0;  // nodes with strictly positive fitness
    std::uint64_t since_recompute_ = 0;
};

template <class R>
GrowthState new_growth(const FitnessSpec& fitness, const WeightSpec& weights, R& rng) {
    const Weight root = weights.sample(rng);
    return GrowthState(fitness, weights, root);
}

/// Performs up to `steps` attachment rounds; returns how many happened.
/// Fewer than `steps` means Z hit 0 and the process terminated.
template <class R>
std::uint64_t grow(GrowthState& state, std::uint64_t steps, R& rng) {
    std::uint64_t done = 0;
    for (; done < steps && !state.halted(); ++done) {
        const auto target = static_cast<NodeId>(state.sampler().sample(rng));
        const Weight w = state.weights().sample(rng);
        state.attach(target, w);
    }
    return done;
}

/// Exact attachment law f(outdeg[j], W_j) / Z over the current nodes.
inline std::vector<double> attach_probabilities(const GrowthState& state) {
    if (state.halted()) throw std::domain_error("zero partition function");
    const RecursiveTree& t = state.tree();
    std::vector<double> p(t.size());
    for (std::size_t j = 0; j < t.size(); ++j) p[j] = state.fitness()(t.outdeg()[j], t.weight()[j]);
    const double z = state.exact_z();
    for (double& x : p) x /= z;
    return p;
}

/// counts[k] = number of nodes with out-degree k.
struct DegreeHistogram {
    std::vector<std::uint64_t> counts;

    std::uint64_t nodes() const {
        std::uint64_t n = 0;
        for (auto c : counts) n += c;
        return n;
    }
    std::uint64_t edges() const {
        std::uint64_t e = 0;
        for (std::size_t k = 0; k < counts.size(); ++k) e += k * counts[k];
        return e;
    }
};

inline DegreeHistogram degree_histogram(const RecursiveTree& tree) {
    DegreeHistogram h;
    for (auto d : tree.outdeg()) {
        if (d >= h.counts.size()) h.counts.resize(d + 1, 0);
        ++h.counts[d];
    }
    return h;
}

inline std::uint32_t max_out_degree(const RecursiveTree& tree) {
    const auto& d = tree.outdeg();
    return d.empty() ? 0 : *std::max_element(d.begin(), d.end());
}

/// Longest root-to-leaf path length, in edges.
inline std::uint32_t height(const RecursiveTree& tree) {
    std::vector<std::uint32_t> depth(tree.size(), 0);
    std::uint32_t best = 0;
    for (std::size_t i = 1; i < tree.size(); ++i) {
        depth[i] = depth[tree.parent()[i]] + 1;
        best = std::max(best, depth[i]);
    }
    return best;
}

/// Truncated edge mass sum_{k <= cap} k N_k / n.
inline double edge_mass_below(const DegreeHistogram& h, std::uint64_t cap) {
    const std::uint64_t n = h.nodes();
    if (n == 0) return 0.0;
    std::uint64_t mass = 0;
    for (std::size_t k = 0; k < h.counts.size() && k <= cap; ++k) mass += k * h.counts[k];
    return static_cast<double>(mass) / static_cast<double>(n);
}

inline double edge_mass_below(const RecursiveTree& tree, std::uint64_t cap) {
    return edge_mass_below(degree_histogram(tree), cap);
}

/// CSV `node,parent,outdeg,weight_u,weight_v,birth_time`; the root's parent
/// and the birth times of discrete runs are empty fields.
inline void write_tree_csv(const RecursiveTree& tree, std::ostream& out) {
    CsvWriter csv(out);
    csv.row("node", "parent", "outdeg", "weight_u", "weight_v", "birth_time");
    for (std::size_t i = 0; i < tree.size(); ++i) {
        csv.field(static_cast<std::uint64_t>(i));
        if (tree.parent()[i] == kNoParent) csv.empty();
        else csv.field(static_cast<std::uint64_t>(tree.parent()[i]));
        csv.field(static_cast<std::uint64_t>(tree.outdeg()[i]));
        csv.field(tree.weight()[i].u).field(tree.weight()[i].v);
        if (tree.has_birth_times()) csv.field(tree.birth_time()[i]);
        else csv.empty();
        csv.end_row();
    }
}

/// CSV `k,count`, one row per degree with a nonzero count.
inline void write_histogram_csv(const DegreeHistogram& h, std::ostream& out) {
    CsvWriter csv(out);
    csv.row("k", "count");
    for (std::size_t k = 0; k < h.counts.size(); ++k)
        if (h.counts[k] > 0) csv.row(static_cast<std::uint64_t>(k), h.counts[k]);
}

}  // namespace cmj
