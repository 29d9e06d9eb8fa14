#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dapro/errors.hpp"

namespace dapro {

/**
 * Pool-adjacent-violators over an ordered sequence of blocks.
 *
 * `Block` carries the sufficient statistics of a pooled group and must
 * provide `void absorb(const Block&)`; `value(block)` returns the group's
 * optimal common value. Works for any separable convex loss whose pooled
 * minimizer is computable from the statistics. Returns one value per input
 * item, non-decreasing.
 */
template <class Block, class ValueFn>
std::vector<double> pool_adjacent_violators(std::span<const Block> items, ValueFn value) {
    struct Pool {
        Block stats;
        double v;
        std::size_t count;
    };
    std::vector<Pool> stack;
    stack.reserve(items.size());
    for (const auto& item : items) {
        stack.push_back({item, value(item), 1});
        while (stack.size() > 1 && stack[stack.size() - 2].v > stack.back().v) {
            Pool top = stack.back();
            stack.pop_back();
            auto& prev = stack.back();
            prev.stats.absorb(top.stats);
            prev.count += top.count;
            prev.v = value(prev.stats);
        }
    }
    std::vector<double> out;
    out.reserve(items.size());
    for (const auto& p : stack) out.insert(out.end(), p.count, p.v);
    return out;
}

/// Weighted least-squares block: mean of y with weights w.
struct L2Block {
    double wy = 0.0;
    double w = 0.0;
    void absorb(const L2Block& o) {
        wy += o.wy;
        w += o.w;
    }
};

/// argmin_x sum w_i (x_i - y_i)^2 subject to x non-decreasing. Empty `w` means unit weights.
inline std::vector<double> isotonic_regression(std::span<const double> y, std::span<const double> w = {}) {
    if (!w.empty() && w.size() != y.size()) throw DomainError("isotonic_regression: weight size mismatch");
    std::vector<L2Block> blocks(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        if (!(wi > 0.0)) throw DomainError("isotonic_regression: weights must be positive");
        blocks[i] = {wi * y[i], wi};
    }
    return pool_adjacent_violators<L2Block>(blocks, [](const L2Block& b) { return b.wy / b.w; });
}

} // namespace dapro
