#pragma once

// Variance-optimal static Bernoulli censoring: each sample is either
// observed up to its target (probability pi_i) or not at all.

#include <cmath>
#include <span>
#include <vector>

#include "dapro/allocation.hpp"
#include "dapro/errors.hpp"

namespace dapro {

struct StaticPlan {
    double lambda_star = 0.0;
    std::vector<double> probabilities;

    /// sum_i target_i * pi_i.
    double planned_budget(std::span<const int> targets) const {
        double b = 0.0;
        for (std::size_t i = 0; i < targets.size(); ++i) b += targets[i] * probabilities[i];
        return b;
    }
};

/// lambda* = (sum_i sqrt(f_i) / B)^2 and pi_i = min(1, 1/sqrt(lambda* f_i)); no re-solve after clipping.
inline StaticPlan plan_static(std::span<const int> targets, double budget) {
    if (!(budget > 0.0)) throw ConfigError("static allocation needs a positive budget");
    StaticPlan plan;
    double root_sum = 0.0;
    for (int f : targets) {
        if (f < 1) throw DomainError("static allocation targets must be >= 1");
        root_sum += std::sqrt(static_cast<double>(f));
    }
    plan.lambda_star = (root_sum / budget) * (root_sum / budget);
    plan.probabilities.reserve(targets.size());
    for (int f : targets)
        plan.probabilities.push_back(std::min(1.0, 1.0 / std::sqrt(plan.lambda_star * f)));
    return plan;
}

/**
 * One Bernoulli(pi_i) draw per sample, in order. Success observes up to the
 * target (C = target, cost min(T, C)); failure gives C = 0 at no cost.
 */
inline std::vector<AllocationOutcome> execute_static(const StaticPlan& plan, std::span<const int> event_times,
                                                     std::span<const int> targets, Rng& rng) {
    if (plan.probabilities.size() != targets.size() || event_times.size() != targets.size())
        throw DomainError("static plan does not match the samples");
    std::vector<AllocationOutcome> out(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const double pi = plan.probabilities[i];
        const bool observe = rng.bernoulli(pi);
        auto& o = out[i];
        o.sample_id = i;
        o.censoring_time = observe ? targets[i] : 0;
        o.censored_time = std::min(event_times[i], o.censoring_time);
        o.event_observed = event_times[i] <= o.censoring_time;
        o.budget_spent = o.censored_time;
        o.weight = 1.0 / pi;
        o.reach_probability = pi;
        o.split = Split::cal2;
    }
    return out;
}

inline std::vector<AllocationOutcome> execute_static(const StaticPlan& plan, std::span<const PromptInstance> instances,
                                                     std::span<const int> targets, Rng& rng) {
    std::vector<int> events(instances.size());
    for (std::size_t i = 0; i < instances.size(); ++i) events[i] = instances[i].event_time;
    auto out = execute_static(plan, std::span<const int>(events), targets, rng);
    for (std::size_t i = 0; i < instances.size(); ++i) out[i].sample_id = instances[i].id;
    return out;
}

} // namespace dapro
