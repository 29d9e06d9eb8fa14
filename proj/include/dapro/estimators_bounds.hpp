#pragma once

// Closed-form coverage and budget bounds, and inverse-censoring-weighted
// estimators of population metrics.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dapro/allocation.hpp"
#include "dapro/errors.hpp"

namespace dapro {

struct BoundParams {
    double n = 0;        // calibration size N
    double n2 = 0;       // adaptively censored part
    double alpha = 0.1;
    double delta = 0.05;
    double w_bar = 1.0;
    double t_max = 0;
    double b2 = 0;       // remaining budget per adaptively censored sample
    double budget = 0;   // total B
    std::vector<double> eta;  // per-step error bounds, length t_max

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
        if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
        if (!(n > 0)) throw DomainError("N must be positive");
    }
};

/// log(1/d)/(3N) + sqrt(log^2(1/d)/(9N^2) + 2 (w - a^2) log(1/d) / N).
inline double coverage_gap(double n, double alpha, double delta, double w_bar) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
    if (!(n > 0)) throw DomainError("N must be positive");
    if (w_bar < alpha * alpha) throw DomainError("mean weight bound below alpha^2");
    const double l = std::log(1.0 / delta);
    return l / (3.0 * n) + std::sqrt(l * l / (9.0 * n * n) + 2.0 * (w_bar - alpha * alpha) * l / n);
}

inline double coverage_gap(const BoundParams& p) {
    p.validate();
    return coverage_gap(p.n, p.alpha, p.delta, p.w_bar);
}

/// High-probability bound on the average budget per calibration sample.
inline double budget_bound(const BoundParams& p) {
    p.validate();
    const double l = std::log(1.0 / p.delta);
    return p.budget / p.n + p.t_max * l / (3.0 * p.n) +
           std::sqrt(p.t_max * p.t_max * l * l / 9.0 + 2.0 * p.n2 * p.t_max * p.b2 * l) / p.n;
}

/// sum_k (t_max - k + 1) eta_k.
inline double gamma_bias(std::span<const double> eta, int t_max) {
    if (static_cast<int>(eta.size()) != t_max) throw DomainError("eta must have t_max entries");
    double g = 0.0;
    for (int k = 1; k <= t_max; ++k) g += (t_max - k + 1) * eta[static_cast<std::size_t>(k - 1)];
    return g;
}

/// Expected total budget when the learned policy's probabilities carry per-step errors.
inline double error_inflated_expected_budget(const BoundParams& p, double gamma) { return p.budget + p.n2 * gamma; }

/// budget_bound with N2*Gamma/N added and B2 replaced by B2 + Gamma.
inline double error_inflated_budget_bound(const BoundParams& p, double gamma) {
    BoundParams q = p;
    q.b2 = p.b2 + gamma;
    return budget_bound(q) + p.n2 * gamma / p.n;
}

inline double error_inflated_budget_bound(const BoundParams& p) {
    return error_inflated_budget_bound(p, gamma_bias(p.eta, static_cast<int>(p.t_max)));
}

enum class MetricKind { event_rate, restricted_mean_time };

inline std::string_view to_string(MetricKind k) {
    return k == MetricKind::event_rate ? "event_rate" : "restricted_mean_time";
}

/// m(T): 1{T <= t_max} or min(T, t_max).
inline double metric_value(MetricKind kind, int event_time, int t_max) {
    if (kind == MetricKind::event_rate) return event_time <= t_max ? 1.0 : 0.0;
    return static_cast<double>(std::min(event_time, t_max));
}

struct MetricResult {
    MetricKind kind = MetricKind::event_rate;
    double estimate = 0.0;         // (1/N) sum w 1{T <= C} m(T)
    double capped_estimate = 0.0;  // indicator {T <= C or C = t_max}
    std::optional<double> oracle;
    std::size_t contributing = 0;
};

/**
 * Weighted estimates from censored outcomes. The raw form uses samples whose
 * event was observed; the capped form also counts windows that reached the
 * horizon, where min(T, t_max) is known.
 */
inline MetricResult population_estimate(std::span<const AllocationOutcome> outcomes, MetricKind kind, int t_max) {
    MetricResult r;
    r.kind = kind;
    if (outcomes.empty()) return r;
    double raw = 0.0, capped = 0.0;
    for (const auto& o : outcomes) {
        const bool reached_horizon = o.censoring_time >= t_max;
        if (!o.event_observed && !reached_horizon) continue;
        if (!(o.weight >= 1.0) || !std::isfinite(o.weight)) throw DomainError("contributing sample without a valid weight");
        // Under T <= C the observed censored time is T; at the horizon it is min(T, t_max).
        const double m = metric_value(kind, o.event_observed ? o.censored_time : t_max + 1, t_max);
        if (o.event_observed) raw += o.weight * m;
        capped += o.weight * m;
        ++r.contributing;
    }
    const double n = static_cast<double>(outcomes.size());
    r.estimate = raw / n;
    r.capped_estimate = capped / n;
    return r;
}

struct OracleMetrics {
    double uer = 0.0;
    double rmttu = 0.0;
};

inline OracleMetrics oracle_metrics(std::span<const int> event_times, int t_max) {
    OracleMetrics m;
    if (event_times.empty()) return m;
    for (int t : event_times) {
        m.uer += metric_value(MetricKind::event_rate, t, t_max);
        m.rmttu += metric_value(MetricKind::restricted_mean_time, t, t_max);
    }
    m.uer /= static_cast<double>(event_times.size());
    m.rmttu /= static_cast<double>(event_times.size());
    return m;
}

} // namespace dapro
