#pragma once

// Alternative dynamic allocators: stochastic greedy exploration followed by a
// static tail, and a locally adaptive per-step policy with a tuned multiplier.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "dapro/alloc_static.hpp"
#include "dapro/allocation.hpp"
#include "dapro/errors.hpp"
#include "dapro/sim_engine.hpp"

namespace dapro {

// ---------------------------------------------------------------- greedy

struct GreedyState {
    std::vector<int> acquisitions;  // steps observed so far per sample
    std::vector<bool> event_seen;
    double explore_budget = 0.0;    // remaining exploration units
    double rho = 0.1;
    std::size_t top_k = 50;

    GreedyState() = default;
    GreedyState(std::size_t n, double total_budget, double rho_, std::size_t k)
        : acquisitions(n, 0), event_seen(n, false), explore_budget(total_budget * rho_), rho(rho_), top_k(k) {
        if (!(rho_ >= 0.0 && rho_ < 1.0)) throw ConfigError("greedy rho must lie in [0,1)");
        if (k == 0) throw ConfigError("greedy top_k must be >= 1");
    }

    bool active(std::size_t i, int target) const { return !event_seen[i] && acquisitions[i] < target; }
};

/**
 * Spends whole units of the exploration budget one step at a time: among
 * active samples take the top_k by the model's next-step event probability
 * and advance one of them chosen proportionally to that probability.
 */
inline void greedy_explore(std::span<const PromptInstance> instances, std::span<const SurrogateModel> models,
                           std::span<const int> targets, GreedyState& state, Rng& rng) {
    const std::size_t n = instances.size();
    auto next_prob = [&](std::size_t i) { return models[i].hazard_at(state.acquisitions[i] + 1); };
    using Key = std::pair<double, std::size_t>;
    // Highest probability first, lower index first among ties.
    auto cmp = [](const Key& a, const Key& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; };
    std::set<Key, decltype(cmp)> ranked(cmp);
    for (std::size_t i = 0; i < n; ++i)
        if (state.active(i, targets[i])) ranked.insert({next_prob(i), i});

    std::vector<Key> top;
    while (state.explore_budget >= 1.0 - 1e-9 && !ranked.empty()) {
        top.clear();
        double total = 0.0;
        for (auto it = ranked.begin(); it != ranked.end() && top.size() < state.top_k; ++it) {
            top.push_back(*it);
            total += it->first;
        }
        std::size_t pick = top.size() - 1;
        if (total > 0.0) {
            double u = rng.uniform() * total;
            for (std::size_t k = 0; k < top.size(); ++k) {
                u -= top[k].first;
                if (u < 0.0) {
                    pick = k;
                    break;
                }
            }
        } else {
            pick = static_cast<std::size_t>(rng.below(top.size()));
        }
        const std::size_t i = top[pick].second;
        ranked.erase(top[pick]);
        state.acquisitions[i] += 1;
        state.explore_budget -= 1.0;
        if (instances[i].event_time == state.acquisitions[i]) state.event_seen[i] = true;
        if (state.active(i, targets[i])) ranked.insert({next_prob(i), i});
    }
}

/**
 * Resolved samples keep C = target with weight 1. Active samples get the
 * static plan on their residual targets with `remaining_budget`; success
 * extends them to the target, failure leaves C at the explored prefix.
 */
inline std::vector<AllocationOutcome> greedy_finalize(const GreedyState& state,
                                                      std::span<const PromptInstance> instances,
                                                      std::span<const int> targets, double remaining_budget,
                                                      Rng& rng) {
    const std::size_t n = instances.size();
    std::vector<AllocationOutcome> out(n);
    std::vector<std::size_t> active;
    std::vector<int> residual_targets, residual_events;
    for (std::size_t i = 0; i < n; ++i) {
        if (state.active(i, targets[i])) {
            active.push_back(i);
            residual_targets.push_back(targets[i] - state.acquisitions[i]);
            residual_events.push_back(instances[i].event_time - state.acquisitions[i]);
        } else {
            out[i] = full_observation(instances[i].id, instances[i].event_time, targets[i], Split::cal2);
            out[i].budget_spent = state.acquisitions[i];
        }
    }
    if (!active.empty()) {
        const auto plan = plan_static(residual_targets, remaining_budget);
        const auto tail = execute_static(plan, std::span<const int>(residual_events), residual_targets, rng);
        for (std::size_t k = 0; k < active.size(); ++k) {
            const std::size_t i = active[k];
            const int xi = state.acquisitions[i];
            auto& o = out[i];
            o.sample_id = instances[i].id;
            o.split = Split::cal2;
            o.censoring_time = xi + tail[k].censoring_time;
            o.censored_time = std::min(instances[i].event_time, o.censoring_time);
            o.event_observed = instances[i].event_time <= o.censoring_time;
            o.weight = tail[k].weight;
            o.reach_probability = tail[k].reach_probability;
            o.budget_spent = xi + tail[k].budget_spent;
        }
    }
    return out;
}

struct GreedyConfig {
    double budget = 0.0;  // total B
    double rho = 0.1;
    std::size_t top_k = 50;
};

inline std::vector<AllocationOutcome> run_greedy(std::span<const PromptInstance> instances,
                                                 std::span<const SurrogateModel> models, std::span<const int> targets,
                                                 const GreedyConfig& cfg, Rng& rng) {
    GreedyState state(instances.size(), cfg.budget, cfg.rho, cfg.top_k);
    greedy_explore(instances, models, targets, state, rng);
    return greedy_finalize(state, instances, targets, cfg.budget * (1.0 - cfg.rho), rng);
}

// ------------------------------------------------------- locally adaptive

/// sum_{k=1}^{d} k p(t+k|t) + d * P(K > d) = E[min(K, d)], d = target - t.
inline double expected_remaining_cost(const SurrogateModel& model, int t, int target) {
    if (t >= target) throw DomainError("expected_remaining_cost requires t < target");
    return model.expected_capped_remaining(t, target - t);
}

/// Same quantity from an explicit conditional pmf row (last entry is the mass beyond the horizon).
inline double expected_remaining_cost(std::span<const double> row, int d) {
    double e = 0.0, tail = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
        const int step = static_cast<int>(k) + 1;
        if (k + 1 < row.size() && step <= d) e += step * row[k];
        else tail += row[k];
    }
    return e + d * tail;
}

/// How a halted sample's censoring time is recorded.
enum class HaltConvention {
    last_success,  // C = steps acquired
    next_step,     // C = steps+1 when that is below min(T, target), else target
};

inline HaltConvention parse_halt_convention(std::string_view s) {
    if (s == "last_success") return HaltConvention::last_success;
    if (s == "next_step") return HaltConvention::next_step;
    throw ConfigError("unknown halt convention '" + std::string(s) + "'");
}

struct LocalPolicyState {
    double lambda = 0.0;
    double p_accum = 1.0;
    double p_min = 0.005;
};

/// min(1, 1/sqrt(lambda E)) floored at p_min.
inline double local_target_probability(double lambda, double expected_cost, double p_min) {
    if (lambda <= 0.0 || expected_cost <= 0.0) return 1.0;
    return std::clamp(1.0 / std::sqrt(lambda * expected_cost), p_min, 1.0);
}

/// min(1, target / accumulated).
inline double local_continuation_probability(double target, double p_accum) {
    return std::min(1.0, target / p_accum);
}

/// One decision after `t` acquired steps; returns whether to continue and updates p_accum on success.
inline bool local_step(LocalPolicyState& state, const SurrogateModel& model, int t, int target, Rng& rng) {
    const double pt = local_target_probability(state.lambda, expected_remaining_cost(model, t, target), state.p_min);
    const double p = local_continuation_probability(pt, state.p_accum);
    if (!rng.bernoulli(p)) return false;
    state.p_accum *= p;
    return true;
}

/// Expected acquired steps sum_{t<=b} prod_{j<t} P(j) for a fully observed history of length b.
inline double local_expected_budget(const SurrogateModel& model, int length, int target, double lambda, double p_min) {
    double acc = 1.0, total = 0.0;
    for (int t = 0; t < length; ++t) {
        const double pt = local_target_probability(lambda, expected_remaining_cost(model, t, target), p_min);
        acc *= local_continuation_probability(pt, acc);
        total += acc;
    }
    return total;
}

struct LambdaTuning {
    double lambda = 0.0;
    bool feasible = true;
    int iterations = 0;
};

/**
 * Smallest multiplier whose empirical budget on the fully observed split
 * fits `budget_per_sample`. The corrected form inflates the estimate by
 * N1/(N1+1) and adds t_max/(N1+1).
 */
inline LambdaTuning tune_lambda(std::span<const SurrogateModel> models, std::span<const int> lengths,
                                std::span<const int> targets, double budget_per_sample, int t_max,
                                bool with_correction = false, double p_min = 0.005, double lambda_max = 1e14) {
    const double n1 = static_cast<double>(models.size());
    auto risk = [&](double lambda) {
        double r = 0.0;
        for (std::size_t i = 0; i < models.size(); ++i)
            r += local_expected_budget(models[i], lengths[i], targets[i], lambda, p_min);
        r = models.empty() ? 0.0 : r / n1;
        return with_correction ? n1 / (n1 + 1.0) * r + t_max / (n1 + 1.0) : r;
    };
    LambdaTuning res;
    if (risk(0.0) <= budget_per_sample) return res;
    double lo = 1e-8, hi = lambda_max;
    if (risk(hi) > budget_per_sample) {
        res.lambda = lambda_max;
        res.feasible = false;
        return res;
    }
    if (risk(lo) <= budget_per_sample) {
        res.lambda = lo;
        return res;
    }
    while (res.iterations < 60 && hi / lo - 1.0 > 1e-6) {
        const double mid = std::sqrt(lo * hi);
        if (risk(mid) <= budget_per_sample) hi = mid;
        else lo = mid;
        ++res.iterations;
    }
    res.lambda = hi;
    return res;
}

/// Runs the policy on one sample from scratch.
inline AllocationOutcome local_acquire(const PromptInstance& inst, const SurrogateModel& model, int target,
                                       double lambda, double p_min, HaltConvention conv, Rng& rng) {
    LocalPolicyState state{lambda, 1.0, p_min};
    const int stop = std::min(target, inst.event_time);
    int xi = 0;
    bool halted = false;
    double reach = 1.0;
    for (int t = 0; t < stop; ++t) reach = std::min(reach, local_target_probability(lambda, expected_remaining_cost(model, t, target), p_min));
    while (xi < stop) {
        if (!local_step(state, model, xi, target, rng)) {
            halted = true;
            break;
        }
        ++xi;
    }
    AllocationOutcome o;
    o.sample_id = inst.id;
    o.split = Split::cal2;
    o.budget_spent = xi;
    if (!halted) o.censoring_time = target;
    else if (conv == HaltConvention::last_success) o.censoring_time = xi;
    else o.censoring_time = xi + 1 < stop ? xi + 1 : target;
    o.censored_time = std::min(inst.event_time, o.censoring_time);
    o.event_observed = inst.event_time <= o.censoring_time;
    o.weight = 1.0 / std::max(state.p_accum, p_min);
    o.reach_probability = reach;
    return o;
}

struct LocalConfig {
    double budget = 0.0;  // total B
    std::size_t n1 = 100;
    double p_min = 0.005;
    double lambda_max = 1e14;
    bool with_correction = false;
    HaltConvention halt = HaltConvention::last_success;
};

struct LocalDiagnostics {
    LambdaTuning tuning;
    long phase1_budget = 0;
    double phase2_budget_per_sample = 0.0;
};

/// Full observation of a random N1 split, multiplier tuning on it, then the policy on the rest.
inline std::vector<AllocationOutcome> run_local(std::span<const PromptInstance> instances,
                                                std::span<const SurrogateModel> models, std::span<const int> targets,
                                                const LocalConfig& cfg, Rng& rng, LocalDiagnostics* diag = nullptr) {
    const std::size_t n = instances.size();
    if (cfg.n1 == 0 || cfg.n1 > n) throw ConfigError("n1 must lie in [1, N]");
    LocalDiagnostics local;
    LocalDiagnostics& dg = diag ? *diag : local;
    dg = {};
    const auto in_phase1 = random_split(n, cfg.n1, rng);
    std::vector<SurrogateModel> m1;
    std::vector<int> len1, tgt1;
    int t_max = 0;
    for (std::size_t i = 0; i < n; ++i) {
        t_max = std::max(t_max, instances[i].t_max());
        if (!in_phase1[i]) continue;
        m1.push_back(models[i]);
        len1.push_back(std::min(instances[i].event_time, targets[i]));
        tgt1.push_back(targets[i]);
        dg.phase1_budget += len1.back();
    }
    const std::size_t n2 = n - cfg.n1;
    if (n2 > 0 ? !(static_cast<double>(dg.phase1_budget) < cfg.budget)
               : static_cast<double>(dg.phase1_budget) > cfg.budget)
        throw InfeasibleBudget("phase 1 consumes the whole budget");
    if (n2 > 0) {
        dg.phase2_budget_per_sample = (cfg.budget - static_cast<double>(dg.phase1_budget)) / static_cast<double>(n2);
        dg.tuning = tune_lambda(m1, len1, tgt1, dg.phase2_budget_per_sample, t_max, cfg.with_correction, cfg.p_min,
                                cfg.lambda_max);
    }
    const std::uint64_t stream = rng.next();
    std::vector<AllocationOutcome> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (in_phase1[i]) {
            out[i] = full_observation(instances[i].id, instances[i].event_time, targets[i], Split::cal1);
        } else {
            Rng sample_rng = Rng::derive(stream, {static_cast<std::uint64_t>(i)});
            out[i] = local_acquire(instances[i], models[i], targets[i], dg.tuning.lambda, cfg.p_min, cfg.halt,
                                   sample_rng);
        }
    }
    return out;
}

} // namespace dapro
