#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cmj {

/// Dynamic weighted sampling over an append-only index set.
///
/// Fenwick (binary indexed) tree of nonnegative weights: O(log n) append,
/// point update and proportional draw. Zero weights stay in place so indices
/// never shift.
class FenwickSampler {
public:
    std::size_t size() const { return values_.size(); }
    double value(std::size_t i) const { return values_[i]; }
    double total() const { return total_; }

    void reserve(std::size_t n) {
        values_.reserve(n);
        tree_.reserve(n + 1);
    }

    void push_back(double w) {
        const std::size_t i = values_.size() + 1;  // 1-based slot
        values_.push_back(w);
        // tree_[i] covers (i - lowbit(i), i]: w plus the sub-ranges below it.
        double node = w;
        const std::size_t stop = i - lowbit(i);
        for (std::size_t j = i - 1; j > stop; j -= lowbit(j)) node += tree_[j];
        tree_.push_back(node);
        total_ += w;
    }

    void update(std::size_t index, double w) {
        const double delta = w - values_[index];
        values_[index] = w;
        for (std::size_t i = index + 1; i < tree_.size(); i += lowbit(i)) tree_[i] += delta;
        total_ += delta;
    }

    /// Index of the element whose cumulative range contains `target`, for
    /// target in [0, total). Never returns a zero-weight element while a
    /// positive one exists.
    std::size_t find(double target) const {
        const std::size_t n = values_.size();
        if (n == 0) throw std::out_of_range("FenwickSampler::find on empty sampler");
        std::size_t pos = 0;
        for (std::size_t step = std::bit_floor(n); step > 0; step >>= 1) {
            if (pos + step <= n && tree_[pos + step] <= target) {
                pos += step;
                target -= tree_[pos];
            }
        }
        // Rounding can push the walk past the last element or onto a zero.
        if (pos >= n) pos = n - 1;
        if (values_[pos] > 0.0) return pos;
        for (std::size_t j = pos + 1; j < n; ++j)
            if (values_[j] > 0.0) return j;
        for (std::size_t j = pos; j-- > 0;)
            if (values_[j] > 0.0) return j;
        return pos;
    }

    template <class R>
    std::size_t sample(R& rng) const {
        return find(rng.uniform_open() * total_);
    }

    /// Exact O(n) rebuild from the stored values; resets accumulated drift.
    void rebuild() {
        const std::size_t n = values_.size();
        for (std::size_t i = 1; i <= n; ++i) tree_[i] = values_[i - 1];
        for (std::size_t i = 1; i <= n; ++i) {
            const std::size_t parent = i + lowbit(i);
            if (parent <= n) tree_[parent] += tree_[i];
        }
        total_ = exact_sum();
    }

    /// Compensated (Neumaier) sum of all values.
    double exact_sum() const {
        double sum = 0.0;
        double comp = 0.0;
        for (double v : values_) {
            const double t = sum + v;
            comp += (std::abs(sum) >= std::abs(v)) ? (sum - t) + v : (v - t) + sum;
            sum = t;
        }
        return sum + comp;
    }

private:
    static std::size_t lowbit(std::size_t i) { return i & (~i + 1); }

    std::vector<double> values_;
    std::vector<double> tree_{0.0};  // tree_[0] unused
    double total_ = 0.0;
};

}  // namespace cmj
