#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "dapro/sim_engine.hpp"

namespace dapro {

enum class Split { cal1, cal2 };

/**
 * Result of running one allocator on one calibration sample.
 *
 * `weight` is the inverse-censoring weight the calibration consumes when the
 * sample reaches its target. `reach_probability` is the probability, under
 * the policy that was run, that the sample reaches min(T, target); it is
 * evaluated from the full latent trajectory and serves as a diagnostic (mean
 * weight) even for samples the policy halted.
 */
struct AllocationOutcome {
    std::size_t sample_id = 0;
    int censoring_time = 0;  // C
    int censored_time = 0;   // min(T, C)
    bool event_observed = false;  // T <= C
    double weight = 1.0;
    double reach_probability = 1.0;
    int budget_spent = 0;
    Split split = Split::cal2;
};

/// Outcome for a sample observed until its event or its target, with weight 1.
inline AllocationOutcome full_observation(std::size_t id, int event_time, int target, Split split) {
    AllocationOutcome o;
    o.sample_id = id;
    o.censoring_time = target;
    o.censored_time = std::min(event_time, target);
    o.event_observed = event_time <= target;
    o.weight = 1.0;
    o.reach_probability = 1.0;
    o.budget_spent = std::min(event_time, target);
    o.split = split;
    return o;
}

inline long total_budget(std::span<const AllocationOutcome> outcomes) {
    long b = 0;
    for (const auto& o : outcomes) b += o.budget_spent;
    return b;
}

/// Mean of 1/reach_probability over all outcomes.
inline double mean_inverse_reach(std::span<const AllocationOutcome> outcomes) {
    if (outcomes.empty()) return 0.0;
    double s = 0.0;
    for (const auto& o : outcomes) s += 1.0 / o.reach_probability;
    return s / static_cast<double>(outcomes.size());
}

inline std::size_t count_events(std::span<const AllocationOutcome> outcomes) {
    std::size_t n = 0;
    for (const auto& o : outcomes) n += o.event_observed ? 1 : 0;
    return n;
}

/// Uniformly random subset of size n1 from {0..n-1}; returns a membership mask.
inline std::vector<bool> random_split(std::size_t n, std::size_t n1, Rng& rng) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::vector<bool> in_first(n, false);
    for (std::size_t k = 0; k < n1 && k < n; ++k) {
        const std::size_t j = k + static_cast<std::size_t>(rng.below(n - k));
        std::swap(idx[k], idx[j]);
        in_first[idx[k]] = true;
    }
    return in_first;
}

} // namespace dapro
