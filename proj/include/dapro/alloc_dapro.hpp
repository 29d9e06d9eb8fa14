#pragma once

// Two-phase adaptive allocator: full observation of a policy-learning split,
// constrained optimization of per-step continuation probabilities, per-step
// score-to-probability maps, then sequential Bernoulli acquisition.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "dapro/allocation.hpp"
#include "dapro/errors.hpp"
#include "dapro/isotonic.hpp"
#include "dapro/sim_engine.hpp"

namespace dapro {

inline constexpr double kProbabilityFloor = 1e-12;

/// Per-sample continuation probabilities P_i(1..b_i) for the policy-learning split.
struct ProbabilityMatrix {
    std::vector<std::vector<double>> entries;  // entries[i][t-1]

    std::size_t size() const { return entries.size(); }
    int length(std::size_t i) const { return static_cast<int>(entries[i].size()); }

    /// sum_{t<=b_i} prod_{j<=t} P_i(j).
    double sample_budget(std::size_t i) const {
        double acc = 1.0, total = 0.0;
        for (double p : entries[i]) {
            acc *= p;
            total += acc;
        }
        return total;
    }

    double mean_budget() const {
        if (entries.empty()) return 0.0;
        double s = 0.0;
        for (std::size_t i = 0; i < entries.size(); ++i) s += sample_budget(i);
        return s / static_cast<double>(entries.size());
    }

    /// (1/N1) sum_i 1 / prod_t P_i(t).
    double objective() const {
        if (entries.empty()) return 0.0;
        double s = 0.0;
        for (const auto& row : entries) {
            double logp = 0.0;
            for (double p : row) logp += std::log(p);
            s += std::exp(-logp);
        }
        return s / static_cast<double>(entries.size());
    }
};

struct Phase1Data {
    std::vector<int> lengths;                  // b_i = min(T_i, f_i)
    std::vector<std::vector<double>> scores;   // S_i(1..b_i)
    long budget_spent = 0;
};

/// Observes each sample until its event or its target.
inline Phase1Data observe_phase1(std::span<const PromptInstance> instances, std::span<const int> targets) {
    if (instances.size() != targets.size()) throw DomainError("phase 1: targets do not match instances");
    Phase1Data d;
    d.lengths.reserve(instances.size());
    d.scores.reserve(instances.size());
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const int b = std::min(instances[i].event_time, targets[i]);
        d.lengths.push_back(b);
        d.scores.emplace_back(instances[i].scores.begin(), instances[i].scores.begin() + b);
        d.budget_spent += b;
    }
    return d;
}

struct OptimizerDiagnostics {
    std::vector<double> lambda_trace;
    std::vector<double> budget_trace;
    std::vector<int> inner_passes;
    bool converged = true;          // every inner solve met the tolerance
    bool uniform_fallback = false;  // the uniform policy beat the solver's iterate
    double final_shift = 0.0;       // terminal log-shift applied
    double objective = 0.0;
    double mean_budget = 0.0;
    double uniform_objective = 0.0;
    double uniform_probability = 0.0;
};

struct OptimizerSettings {
    double lambda_lo = 1e-8;
    double lambda_hi = 1e14;
    int max_outer = 60;
    int max_inner = 10;
    double tolerance = 1e-9;
};

namespace detail {

// Log-space state of the optimizer. x[i][t-1] = log P_i(t) in [log floor, 0].
struct LogState {
    std::vector<std::vector<double>> x;
};

inline double clip_log(double v) {
    static const double lo = std::log(kProbabilityFloor);
    return std::clamp(v, lo, 0.0);
}

inline double state_budget(const LogState& s) {
    double total = 0.0;
    for (const auto& row : s.x) {
        double c = 0.0;
        for (double v : row) {
            c += v;
            total += std::exp(c);
        }
    }
    return s.x.empty() ? 0.0 : total / static_cast<double>(s.x.size());
}

inline double state_objective(const LogState& s) {
    double total = 0.0;
    for (const auto& row : s.x) total += std::exp(-std::accumulate(row.begin(), row.end(), 0.0));
    return s.x.empty() ? 0.0 : total / static_cast<double>(s.x.size());
}

// Samples active at each step, sorted by score; equal scores are grouped.
struct StepOrder {
    std::vector<std::size_t> members;     // sorted ascending by score
    std::vector<std::size_t> group_start; // start offsets of equal-score groups, plus end
};

inline std::vector<StepOrder> build_step_orders(std::span<const std::vector<double>> scores) {
    std::size_t t_len = 0;
    for (const auto& s : scores) t_len = std::max(t_len, s.size());
    std::vector<StepOrder> orders(t_len);
    for (std::size_t t = 0; t < t_len; ++t) {
        auto& o = orders[t];
        for (std::size_t i = 0; i < scores.size(); ++i)
            if (scores[i].size() > t) o.members.push_back(i);
        std::stable_sort(o.members.begin(), o.members.end(),
                         [&](std::size_t a, std::size_t b) { return scores[a][t] < scores[b][t]; });
        for (std::size_t k = 0; k < o.members.size(); ++k)
            if (k == 0 || scores[o.members[k]][t] != scores[o.members[k - 1]][t]) o.group_start.push_back(k);
        o.group_start.push_back(o.members.size());
    }
    return orders;
}

struct CostBlock {
    double a = 0.0;  // objective coefficient of exp(-x)
    double k = 0.0;  // budget coefficient of exp(x)
    void absorb(const CostBlock& o) {
        a += o.a;
        k += o.k;
    }
};

// One Gauss-Seidel pass over the steps for the Lagrangian
// sum_i [exp(-sum_t x_it) + lambda * sum_t exp(sum_{j<=t} x_ij)].
inline void gauss_seidel_pass(LogState& s, const std::vector<StepOrder>& orders, double lambda) {
    const std::size_t n = s.x.size();
    // Per-sample prefix sums and suffix sums of exp(prefix), refreshed lazily via a running shift.
    std::vector<std::vector<double>> suffix(n);
    std::vector<double> total_log(n), shift(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = s.x[i];
        suffix[i].assign(row.size() + 1, 0.0);
        double c = 0.0;
        std::vector<double> ec(row.size());
        for (std::size_t t = 0; t < row.size(); ++t) {
            c += row[t];
            ec[t] = std::exp(c);
        }
        total_log[i] = c;
        for (std::size_t t = row.size(); t-- > 0;) suffix[i][t] = suffix[i][t + 1] + ec[t];
    }
    std::vector<CostBlock> blocks;
    std::vector<double> cur;
    for (std::size_t t = 0; t < orders.size(); ++t) {
        const auto& o = orders[t];
        if (o.members.empty()) continue;
        blocks.clear();
        cur.clear();
        bool violated = false;
        double prev_value = -std::numeric_limits<double>::infinity();
        for (std::size_t g = 0; g + 1 < o.group_start.size(); ++g) {
            CostBlock b;
            for (std::size_t k = o.group_start[g]; k < o.group_start[g + 1]; ++k) {
                const std::size_t i = o.members[k];
                const double xi = s.x[i][t];
                // exp(-(sum_{j != t} x_ij)) and sum_{t' >= t} exp(prefix_{t'} - x_it), current values.
                b.a += std::exp(-(total_log[i] + shift[i] - xi));
                b.k += suffix[i][t] * std::exp(shift[i] - xi);
            }
            blocks.push_back(b);
            const double v = 0.5 * std::log(b.a / (lambda * b.k));
            if (v < prev_value) violated = true;
            prev_value = v;
            cur.push_back(v);
        }
        if (violated) {
            cur = pool_adjacent_violators<CostBlock>(
                blocks, [lambda](const CostBlock& b) { return 0.5 * std::log(b.a / (lambda * b.k)); });
        }
        for (std::size_t g = 0; g + 1 < o.group_start.size(); ++g) {
            const double v = clip_log(cur[g]);
            for (std::size_t k = o.group_start[g]; k < o.group_start[g + 1]; ++k) {
                const std::size_t i = o.members[k];
                const double delta = v - s.x[i][t];
                s.x[i][t] = v;
                shift[i] += delta;
            }
        }
    }
}

inline double lagrangian(const LogState& s, double lambda) { return state_objective(s) + lambda * state_budget(s); }

// Minimizes the Lagrangian at fixed lambda from `s`; returns passes used.
inline int solve_inner(LogState& s, const std::vector<StepOrder>& orders, double lambda,
                       const OptimizerSettings& cfg, bool& converged) {
    double prev = lagrangian(s, lambda);
    for (int pass = 1; pass <= cfg.max_inner; ++pass) {
        gauss_seidel_pass(s, orders, lambda);
        const double cur = lagrangian(s, lambda);
        if (std::abs(prev - cur) <= cfg.tolerance * std::max(1.0, std::abs(prev))) return pass;
        prev = cur;
    }
    converged = false;
    return cfg.max_inner;
}

inline LogState shifted(const LogState& s, double c) {
    LogState out = s;
    for (auto& row : out.x)
        for (double& v : row) v = clip_log(v + c);
    return out;
}

// Largest uniform log-shift c such that the shifted state is within budget.
inline double feasibility_shift(const LogState& s, double budget) {
    double min_x = 0.0;
    for (const auto& row : s.x)
        for (double v : row) min_x = std::min(min_x, v);
    double hi = -min_x;
    if (state_budget(shifted(s, hi)) <= budget) return hi;
    const double g = state_budget(s);
    double lo = g > budget ? std::log(budget / g) : 0.0;
    // Each budget term has at least one factor exp(c), so the bound above is feasible.
    while (state_budget(shifted(s, lo)) > budget) lo -= 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (state_budget(shifted(s, mid)) <= budget) lo = mid;
        else hi = mid;
    }
    return lo;
}

} // namespace detail

/// Largest constant p in (0, 1] whose mean budget sum_{t<=b_i} p^t fits `budget`.
inline double uniform_feasible_probability(std::span<const int> lengths, double budget) {
    auto mean_budget = [&](double p) {
        double total = 0.0;
        for (int b : lengths) {
            double acc = 1.0;
            for (int t = 0; t < b; ++t) {
                acc *= p;
                total += acc;
            }
        }
        return lengths.empty() ? 0.0 : total / static_cast<double>(lengths.size());
    };
    if (mean_budget(1.0) <= budget) return 1.0;
    double lo = kProbabilityFloor, hi = 1.0;
    if (mean_budget(lo) > budget) return lo;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mean_budget(mid) <= budget) lo = mid;
        else hi = mid;
    }
    return lo;
}

/**
 * Minimizes (1/N1) sum_i 1/prod_t P_i(t) subject to the mean expected budget
 * staying within `budget` and P_i(t) <= P_j(t) whenever S_i(t) <= S_j(t).
 *
 * Outer bisection on the multiplier, inner Gauss-Seidel over per-step blocks
 * in log space, pooling only when the block minimizers violate the score
 * order. A final uniform log-shift restores exact feasibility.
 */
inline ProbabilityMatrix optimize_probabilities(std::span<const std::vector<double>> scores, double budget,
                                                OptimizerDiagnostics* diag = nullptr,
                                                const OptimizerSettings& cfg = {}) {
    OptimizerDiagnostics local_diag;
    OptimizerDiagnostics& dg = diag ? *diag : local_diag;
    dg = {};
    ProbabilityMatrix out;
    out.entries.resize(scores.size());
    std::vector<int> lengths(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) lengths[i] = static_cast<int>(scores[i].size());

    if (!(budget > 0.0)) {
        for (std::size_t i = 0; i < scores.size(); ++i) out.entries[i].assign(scores[i].size(), kProbabilityFloor);
        dg.objective = out.objective();
        dg.mean_budget = out.mean_budget();
        dg.uniform_probability = kProbabilityFloor;
        dg.uniform_objective = dg.objective;
        return out;
    }

    const auto orders = detail::build_step_orders(scores);
    detail::LogState init;
    init.x.resize(scores.size());
    const double p0 = std::log(budget / (1.0 + budget));
    for (std::size_t i = 0; i < scores.size(); ++i) init.x[i].assign(scores[i].size(), detail::clip_log(p0));

    double lo = cfg.lambda_lo, hi = cfg.lambda_hi;
    detail::LogState lo_state = init, hi_state = init;
    double lo_gap = std::numeric_limits<double>::infinity(), hi_gap = lo_gap;
    bool have_feasible = false;
    for (int step = 0; step < cfg.max_outer; ++step) {
        const double mid = std::sqrt(lo * hi);
        detail::LogState s = lo_gap <= hi_gap ? lo_state : hi_state;
        bool ok = true;
        dg.inner_passes.push_back(detail::solve_inner(s, orders, mid, cfg, ok));
        dg.converged = dg.converged && ok;
        const double g = detail::state_budget(s);
        dg.lambda_trace.push_back(mid);
        dg.budget_trace.push_back(g);
        if (g > budget) {
            lo = mid;
            lo_state = std::move(s);
            lo_gap = g - budget;
        } else {
            hi = mid;
            hi_state = std::move(s);
            hi_gap = budget - g;
            have_feasible = true;
        }
        if (hi / lo - 1.0 < 1e-12) break;
    }

    detail::LogState best = have_feasible ? hi_state : lo_state;
    dg.final_shift = detail::feasibility_shift(best, budget);
    best = detail::shifted(best, dg.final_shift);
    // Shifting toward zero may break feasibility by rounding; step back until it holds.
    while (detail::state_budget(best) > budget) {
        dg.final_shift -= 1e-12;
        best = detail::shifted(best, -1e-12);
    }

    for (std::size_t i = 0; i < scores.size(); ++i) {
        out.entries[i].resize(best.x[i].size());
        for (std::size_t t = 0; t < best.x[i].size(); ++t) out.entries[i][t] = std::exp(best.x[i][t]);
    }

    dg.uniform_probability = uniform_feasible_probability(lengths, budget);
    ProbabilityMatrix uniform;
    uniform.entries.resize(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) uniform.entries[i].assign(scores[i].size(), dg.uniform_probability);
    dg.uniform_objective = uniform.objective();
    if (out.objective() > dg.uniform_objective) {
        out = std::move(uniform);
        dg.uniform_fallback = true;
    }
    dg.objective = out.objective();
    dg.mean_budget = out.mean_budget();
    return out;
}

inline ProbabilityMatrix optimize_probabilities(const Phase1Data& phase1, double budget,
                                                OptimizerDiagnostics* diag = nullptr,
                                                const OptimizerSettings& cfg = {}) {
    return optimize_probabilities(std::span<const std::vector<double>>(phase1.scores), budget, diag, cfg);
}

/// Monotone score-to-probability map for one step: s -> sigma(slope*s + intercept), or a constant.
struct ProjectionModel {
    static constexpr double kMinOutput = 1e-6;

    bool constant = true;
    double value = 1.0;  // used when constant
    double slope = 0.0;
    double intercept = 0.0;
    double score_lo = -std::numeric_limits<double>::infinity();  // scores are clamped to the fitted range
    double score_hi = std::numeric_limits<double>::infinity();

    double operator()(double s) const {
        if (constant) return std::clamp(value, kMinOutput, 1.0);
        s = std::clamp(s, score_lo, score_hi);
        const double p = 1.0 / (1.0 + std::exp(-(slope * s + intercept)));
        return std::clamp(p, kMinOutput, 1.0);
    }
};

/**
 * Least-squares logistic fit with non-negative slope (projected
 * Levenberg-Marquardt on standardized scores). Empty input gives the
 * constant-1 map; constant scores give the mean target. Scores outside the
 * fitted range are evaluated at the nearest end.
 */
inline ProjectionModel fit_projection(std::span<const double> scores, std::span<const double> targets) {
    if (scores.size() != targets.size()) throw DomainError("fit_projection: size mismatch");
    ProjectionModel m;
    if (scores.empty()) return m;
    const double n = static_cast<double>(scores.size());
    double mean_s = 0.0, mean_y = 0.0, min_y = 1.0;
    for (std::size_t k = 0; k < scores.size(); ++k) {
        mean_s += scores[k];
        mean_y += targets[k];
        min_y = std::min(min_y, targets[k]);
    }
    mean_s /= n;
    mean_y /= n;
    double var_s = 0.0;
    for (double s : scores) var_s += (s - mean_s) * (s - mean_s);
    const double sd = std::sqrt(var_s / n);
    if (min_y >= 1.0 - 1e-12) return m;
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean_s)))) {
        m.value = mean_y;
        return m;
    }

    std::vector<double> z(scores.size());
    for (std::size_t k = 0; k < scores.size(); ++k) z[k] = (scores[k] - mean_s) / sd;
    auto loss = [&](double a, double c) {
        double l = 0.0;
        for (std::size_t k = 0; k < z.size(); ++k) {
            const double r = 1.0 / (1.0 + std::exp(-(a * z[k] + c))) - targets[k];
            l += r * r;
        }
        return l;
    };
    const double y0 = std::clamp(mean_y, 1e-6, 1.0 - 1e-6);
    double a = 0.0, c = std::log(y0 / (1.0 - y0));
    double cur = loss(a, c);
    double mu = 1e-3;
    for (int it = 0; it < 300; ++it) {
        double jaa = 0.0, jac = 0.0, jcc = 0.0, ga = 0.0, gc = 0.0;
        for (std::size_t k = 0; k < z.size(); ++k) {
            const double p = 1.0 / (1.0 + std::exp(-(a * z[k] + c)));
            const double d = p * (1.0 - p);
            const double r = p - targets[k];
            jaa += d * d * z[k] * z[k];
            jac += d * d * z[k];
            jcc += d * d;
            ga += d * z[k] * r;
            gc += d * r;
        }
        bool accepted = false;
        for (int tries = 0; tries < 30 && !accepted; ++tries) {
            const double h11 = jaa + mu * std::max(jaa, 1e-12), h22 = jcc + mu * std::max(jcc, 1e-12);
            const double det = h11 * h22 - jac * jac;
            if (!(det > 0.0)) {
                mu *= 4.0;
                continue;
            }
            double na = a - (h22 * ga - jac * gc) / det;
            const double nc = c - (h11 * gc - jac * ga) / det;
            na = std::max(0.0, na);
            const double next = loss(na, nc);
            if (next <= cur) {
                const double gain = cur - next;
                a = na;
                c = nc;
                cur = next;
                mu = std::max(mu / 3.0, 1e-12);
                accepted = true;
                if (gain <= 1e-14 * std::max(cur, 1e-300)) it = 1 << 20;
            } else {
                mu *= 4.0;
            }
        }
        if (!accepted) break;
    }
    m.constant = false;
    m.score_lo = *std::min_element(scores.begin(), scores.end());
    m.score_hi = *std::max_element(scores.begin(), scores.end());
    m.slope = a / sd;
    m.intercept = c - a * mean_s / sd;
    return m;
}

/// One projection per step 1..t_max, fitted on the optimized probabilities of samples active at that step.
inline std::vector<ProjectionModel> fit_projections(const Phase1Data& phase1, const ProbabilityMatrix& probs,
                                                    int t_max) {
    std::vector<ProjectionModel> models(static_cast<std::size_t>(t_max));
    std::vector<double> s, p;
    for (int t = 1; t <= t_max; ++t) {
        s.clear();
        p.clear();
        for (std::size_t i = 0; i < phase1.scores.size(); ++i) {
            if (phase1.lengths[i] >= t) {
                s.push_back(phase1.scores[i][static_cast<std::size_t>(t - 1)]);
                p.push_back(probs.entries[i][static_cast<std::size_t>(t - 1)]);
            }
        }
        models[static_cast<std::size_t>(t - 1)] = fit_projection(s, p);
    }
    return models;
}

/// prod_{t <= min(target, T)} M_t(S(t)): probability that the policy reaches the boundary.
inline double reach_probability(const PromptInstance& inst, std::span<const ProjectionModel> models, int target) {
    const int stop = std::min(target, inst.event_time);
    double logp = 0.0;
    for (int t = 1; t <= stop; ++t) {
        const auto& m = models[static_cast<std::size_t>(t - 1)];
        logp += std::log(std::max(m(inst.scores[static_cast<std::size_t>(t - 1)]), kProbabilityFloor));
    }
    return std::exp(logp);
}

/**
 * Sequential acquisition: at step t continue with probability M_t(S(t)).
 * Budget is charged only on success. Reaching the event or the target gives
 * C = target; a failed draw halts with C = last successful step.
 */
inline AllocationOutcome acquire_phase2(const PromptInstance& inst, std::span<const ProjectionModel> models,
                                        int target, Rng& rng) {
    AllocationOutcome o;
    o.sample_id = inst.id;
    o.split = Split::cal2;
    const int stop = std::min(target, inst.event_time);
    double logp = 0.0;
    int reached = 0;
    bool halted = false;
    for (int t = 1; t <= stop; ++t) {
        const double p = std::max(models[static_cast<std::size_t>(t - 1)](inst.scores[static_cast<std::size_t>(t - 1)]),
                                  kProbabilityFloor);
        if (!rng.bernoulli(p)) {
            halted = true;
            break;
        }
        logp += std::log(p);
        reached = t;
    }
    o.budget_spent = reached;
    o.censoring_time = halted ? reached : target;
    o.censored_time = std::min(inst.event_time, o.censoring_time);
    o.event_observed = inst.event_time <= o.censoring_time;
    o.weight = std::min(std::exp(-logp), 1.0 / kProbabilityFloor);
    o.reach_probability = reach_probability(inst, models, target);
    return o;
}

struct DaproConfig {
    double budget = 0.0;  // total budget B over all calibration samples
    std::size_t n1 = 100;
    OptimizerSettings optimizer;
};

struct DaproDiagnostics {
    long phase1_budget = 0;
    double phase2_budget_per_sample = 0.0;  // remaining budget per Phase-II sample
    long total_budget = 0;
    double mean_weight = 0.0;
    std::size_t n_events = 0;
    OptimizerDiagnostics optimizer;
    ProbabilityMatrix probabilities;
    std::vector<ProjectionModel> projections;
    Phase1Data phase1;
};

/**
 * End-to-end run over the calibration instances. Outcomes are returned in
 * instance order. Throws InfeasibleBudget when Phase I alone exhausts B.
 */
inline std::vector<AllocationOutcome> run_dapro(std::span<const PromptInstance> instances, std::span<const int> targets,
                                                const DaproConfig& cfg, Rng& rng, DaproDiagnostics* diag = nullptr) {
    if (instances.size() != targets.size()) throw DomainError("run_dapro: targets do not match instances");
    if (cfg.n1 == 0 || cfg.n1 > instances.size()) throw ConfigError("n1 must lie in [1, N]");
    DaproDiagnostics local;
    DaproDiagnostics& dg = diag ? *diag : local;
    dg = {};

    const std::size_t n = instances.size();
    const auto in_phase1 = random_split(n, cfg.n1, rng);
    std::vector<PromptInstance> cal1;
    std::vector<int> cal1_targets;
    for (std::size_t i = 0; i < n; ++i) {
        if (in_phase1[i]) {
            cal1.push_back(instances[i]);
            cal1_targets.push_back(targets[i]);
        }
    }
    dg.phase1 = observe_phase1(cal1, cal1_targets);
    dg.phase1_budget = dg.phase1.budget_spent;
    const std::size_t n2 = n - cfg.n1;
    if (n2 > 0 ? !(static_cast<double>(dg.phase1_budget) < cfg.budget)
               : static_cast<double>(dg.phase1_budget) > cfg.budget)
        throw InfeasibleBudget("phase 1 consumes the whole budget");

    std::vector<AllocationOutcome> out(n);
    if (n2 > 0) {
        dg.phase2_budget_per_sample = (cfg.budget - static_cast<double>(dg.phase1_budget)) / static_cast<double>(n2);
        dg.probabilities = optimize_probabilities(dg.phase1, dg.phase2_budget_per_sample, &dg.optimizer, cfg.optimizer);
        int t_max = 0;
        for (const auto& inst : instances) t_max = std::max(t_max, inst.t_max());
        dg.projections = fit_projections(dg.phase1, dg.probabilities, t_max);
    }
    const std::uint64_t stream = rng.next();
    for (std::size_t i = 0; i < n; ++i) {
        if (in_phase1[i]) {
            out[i] = full_observation(instances[i].id, instances[i].event_time, targets[i], Split::cal1);
        } else {
            Rng sample_rng = Rng::derive(stream, {static_cast<std::uint64_t>(i)});
            out[i] = acquire_phase2(instances[i], dg.projections, targets[i], sample_rng);
        }
    }
    dg.total_budget = total_budget(out);
    dg.mean_weight = mean_inverse_reach(out);
    dg.n_events = count_events(out);
    return out;
}

} // namespace dapro
