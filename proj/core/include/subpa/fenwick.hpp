#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace subpa {

// Fenwick (binary indexed) tree over positive class weights, 1-based.
// Supports O(log n) point update and O(log n) sampling of the class whose
// prefix interval contains a given point mass.
class FenwickTree {
public:
    explicit FenwickTree(int capacity = 64) { reset(capacity); }

    int capacity() const { return int(tree_.size()) - 1; }

    void reset(int capacity) {
        int cap = 1;
        while (cap < capacity) cap <<= 1;
        tree_.assign(std::size_t(cap) + 1, 0.0);
        mask_ = cap;
    }

    void add(int k, double delta) {
        for (; k <= capacity(); k += k & -k) tree_[std::size_t(k)] += delta;
    }

    double total() const {
        double sum = 0.0;
        for (int k = capacity(); k > 0; k -= k & -k) sum += tree_[std::size_t(k)];
        return sum;
    }

    double prefix(int k) const {
        double sum = 0.0;
        for (; k > 0; k -= k & -k) sum += tree_[std::size_t(k)];
        return sum;
    }

    // Smallest k with prefix(k) > x for x in [0, total).  Assumes weights
    // are nonnegative; the caller handles the (rare) rounding fallbacks.
    int sample(double x) const {
        int pos = 0;
        for (int step = mask_; step > 0; step >>= 1) {
            const int next = pos + step;
            if (next <= capacity() && tree_[std::size_t(next)] <= x) {
                x -= tree_[std::size_t(next)];
                pos = next;
            }
        }
        return pos + 1;
    }

    // Exact rebuild from raw weights (kills accumulated rounding drift).
    void rebuild(std::span<const double> weights) {
        const int needed = int(weights.size());
        if (needed > capacity()) reset(needed);
        std::fill(tree_.begin(), tree_.end(), 0.0);
        for (int k = 1; k <= needed; ++k) {
            tree_[std::size_t(k)] += weights[std::size_t(k - 1)];
            const int parent = k + (k & -k);
            if (parent <= capacity())
                tree_[std::size_t(parent)] += tree_[std::size_t(k)];
        }
    }

private:
    std::vector<double> tree_;
    int mask_ = 0;
};

}  // namespace subpa
