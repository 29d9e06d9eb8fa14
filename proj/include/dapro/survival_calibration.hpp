#pragma once

// Weighted conformal calibration of quantile-based predictive bounds under a
// known censoring mechanism: quantile trimming, the inverse-censoring-weighted
// miscoverage estimate, calibrated-level search and LPB/UPB evaluation.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dapro/errors.hpp"
#include "dapro/sim_engine.hpp"

namespace dapro {

enum class BoundKind { lpb, upb };

/// How the calibrated level is picked among the valid grid points.
enum class TauSelection {
    closest,   // valid point whose estimated miscoverage is closest to alpha
    supremum,  // extreme valid point (largest for LPB, smallest for UPB)
};

inline std::string_view to_string(BoundKind k) { return k == BoundKind::lpb ? "LPB" : "UPB"; }

inline BoundKind parse_bound_kind(std::string_view s) {
    if (s == "LPB" || s == "lpb") return BoundKind::lpb;
    if (s == "UPB" || s == "upb") return BoundKind::upb;
    throw ConfigError("unknown bound kind '" + std::string(s) + "'");
}

inline TauSelection parse_tau_selection(std::string_view s) {
    if (s == "closest") return TauSelection::closest;
    if (s == "supremum" || s == "sup") return TauSelection::supremum;
    throw ConfigError("unknown tau selection '" + std::string(s) + "'");
}

struct TauGrid {
    enum class Kind { log_spaced, linear };

    std::vector<double> values;
    Kind kind = Kind::linear;

    static TauGrid log_spaced(double lo, double hi, std::size_t n) {
        if (!(lo > 0.0 && hi < 1.0 && lo < hi) || n < 2) throw ConfigError("invalid log-spaced tau grid");
        TauGrid g;
        g.kind = Kind::log_spaced;
        g.values.resize(n);
        const double a = std::log(lo), b = std::log(hi);
        for (std::size_t k = 0; k < n; ++k)
            g.values[k] = std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1));
        g.values.front() = lo;
        g.values.back() = hi;
        return g;
    }

    static TauGrid linear(double lo, double hi, std::size_t n) {
        if (!(lo > 0.0 && hi < 1.0 && lo < hi) || n < 2) throw ConfigError("invalid linear tau grid");
        TauGrid g;
        g.kind = Kind::linear;
        g.values.resize(n);
        for (std::size_t k = 0; k < n; ++k)
            g.values[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
        return g;
    }

    static TauGrid from_values(std::vector<double> v) {
        TauGrid g;
        g.values = std::move(v);
        g.validate();
        return g;
    }

    static TauGrid default_lpb() { return log_spaced(0.001, 0.977, 1000); }
    static TauGrid default_upb() { return linear(0.5, 0.95, 3000); }

    /// Grid points not above `tau_max` (the search space below the prior level).
    TauGrid restricted(double tau_max) const {
        TauGrid g;
        g.kind = kind;
        for (double v : values)
            if (v <= tau_max) g.values.push_back(v);
        return g;
    }

    std::size_t size() const { return values.size(); }

    void validate() const {
        for (std::size_t k = 0; k < values.size(); ++k) {
            if (!(values[k] > 0.0 && values[k] < 1.0)) throw ConfigError("tau grid values must lie in (0,1)");
            if (k && !(values[k] > values[k - 1])) throw ConfigError("tau grid must be strictly increasing");
        }
    }
};

/// min(q, M).
constexpr int trim_quantile(int q, int M) { return q < M ? q : M; }

/// Trimmed quantiles of `model` at every grid level; non-decreasing along the grid.
inline std::vector<int> quantile_curve(const SurrogateModel& model, const TauGrid& grid, int M) {
    std::vector<int> out(grid.size());
    const auto& cdf = model.cdf();
    std::size_t pos = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double tau = grid.values[k] - 1e-12;
        while (pos < cdf.size() && cdf[pos] < tau) ++pos;
        out[k] = trim_quantile(static_cast<int>(pos) + 1, M);
    }
    return out;
}

/**
 * One calibration sample as seen by the miscoverage estimator.
 *
 * `quantile_curve` is a view aligned with the calibration grid and must
 * outlive the observation.
 */
struct WeightedObservation {
    std::size_t sample_id = 0;
    int censored_time = 0;    // min(T, C)
    int censoring_time = 0;   // C
    bool event_observed = false;  // T <= C
    double weight = 1.0;
    int prior_target = 0;
    std::span<const int> quantile_curve;
};

/// Whether observation `o` counts as a miscoverage at grid index k.
inline bool miscovered(const WeightedObservation& o, std::size_t k, BoundKind kind, int t_max) {
    const int f = o.quantile_curve[k];
    if (f > o.censoring_time) return false;
    if (kind == BoundKind::lpb) return o.censored_time < f;
    // UPB: miss when T > f is revealed; a bound at the horizon always covers.
    if (f >= t_max) return false;
    return !(o.event_observed && o.censored_time <= f);
}

/// Weighted miscoverage estimate at grid index k: (1/N) sum w_i 1{miscovered_i}.
inline double miscoverage_estimate(std::span<const WeightedObservation> obs, std::size_t k,
                                   BoundKind kind = BoundKind::lpb, int t_max = 0) {
    if (obs.empty()) return 0.0;
    double total = 0.0;
    for (const auto& o : obs)
        if (miscovered(o, k, kind, t_max)) total += o.weight;
    return total / static_cast<double>(obs.size());
}

/// Estimate at every grid index.
inline std::vector<double> miscoverage_curve(std::span<const WeightedObservation> obs, std::size_t n_grid,
                                             BoundKind kind = BoundKind::lpb, int t_max = 0) {
    std::vector<double> out(n_grid, 0.0);
    if (obs.empty()) return out;
    for (const auto& o : obs) {
        for (std::size_t k = 0; k < n_grid; ++k)
            if (miscovered(o, k, kind, t_max)) out[k] += o.weight;
    }
    const double n = static_cast<double>(obs.size());
    for (double& v : out) v /= n;
    return out;
}

struct CalibrationResult {
    double tau_hat = 0.0;  // 0 for the vacuous bound
    long index = -1;       // grid index of tau_hat, -1 for the vacuous bound
    std::vector<double> grid;
    std::vector<double> alpha_curve;
    BoundKind bound_kind = BoundKind::lpb;

    bool vacuous() const { return index < 0; }
};

/**
 * Calibrated level over a finite grid.
 *
 * LPB: valid points are those whose running maximum of the estimate over
 * tau' <= tau stays within alpha (a prefix of the grid). UPB mirrors this
 * with tau' >= tau (a suffix). With no valid point the result is vacuous.
 */
inline CalibrationResult calibrate_tau(const TauGrid& grid, std::vector<double> alpha_curve, double alpha,
                                       BoundKind kind = BoundKind::lpb,
                                       TauSelection selection = TauSelection::supremum) {
    if (alpha_curve.size() != grid.size()) throw DomainError("alpha curve does not match grid");
    CalibrationResult r;
    r.bound_kind = kind;
    r.grid = grid.values;
    const long n = static_cast<long>(grid.size());

    long first = 0, last = -1;  // valid range [first, last]
    if (kind == BoundKind::lpb) {
        double run = -1.0;
        for (long k = 0; k < n; ++k) {
            run = std::max(run, alpha_curve[static_cast<std::size_t>(k)]);
            if (run > alpha) break;
            last = k;
        }
    } else {
        double run = -1.0;
        first = n;
        last = n - 1;
        for (long k = n - 1; k >= 0; --k) {
            run = std::max(run, alpha_curve[static_cast<std::size_t>(k)]);
            if (run > alpha) break;
            first = k;
        }
        if (first == n) last = -1;
    }

    if (last >= first && last >= 0) {
        long pick = kind == BoundKind::lpb ? last : first;
        if (selection == TauSelection::closest) {
            double best = std::abs(alpha_curve[static_cast<std::size_t>(pick)] - alpha);
            for (long k = first; k <= last; ++k) {
                const double gap = std::abs(alpha_curve[static_cast<std::size_t>(k)] - alpha);
                const bool better = gap < best || (gap == best && (kind == BoundKind::lpb ? k > pick : k < pick));
                if (better) { best = gap; pick = k; }
            }
        }
        r.index = pick;
        r.tau_hat = grid.values[static_cast<std::size_t>(pick)];
    }
    r.alpha_curve = std::move(alpha_curve);
    return r;
}

/// Bound for a test sample from its quantile curve; vacuous LPB is 0, vacuous UPB is t_max.
inline int build_bound(const CalibrationResult& r, std::span<const int> curve, int t_max) {
    if (r.vacuous()) return r.bound_kind == BoundKind::lpb ? 0 : t_max;
    return curve[static_cast<std::size_t>(r.index)];
}

struct CoverageSummary {
    double coverage = 0.0;
    double mean_size = 0.0;
};

/// LPB covers when T >= L; UPB covers when T <= U or U reaches t_max.
inline CoverageSummary coverage_eval(std::span<const int> event_times, std::span<const int> bounds, BoundKind kind,
                                     int t_max) {
    if (event_times.size() != bounds.size()) throw DomainError("event times and bounds differ in length");
    CoverageSummary s;
    if (bounds.empty()) return s;
    std::size_t covered = 0;
    double size = 0.0;
    for (std::size_t i = 0; i < bounds.size(); ++i) {
        const bool ok = kind == BoundKind::lpb ? event_times[i] >= bounds[i]
                                               : (event_times[i] <= bounds[i] || bounds[i] >= t_max);
        covered += ok ? 1 : 0;
        size += bounds[i];
    }
    s.coverage = static_cast<double>(covered) / static_cast<double>(bounds.size());
    s.mean_size = size / static_cast<double>(bounds.size());
    return s;
}

/// Structured text record: one `key=value` line per field, lists comma-separated.
inline void write_calibration(std::ostream& os, const CalibrationResult& r) {
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    };
    os << "bound_kind=" << to_string(r.bound_kind) << '\n';
    os << "tau_hat=";
    put(r.tau_hat);
    os << "\nindex=" << r.index << "\ngrid=";
    for (std::size_t k = 0; k < r.grid.size(); ++k) {
        if (k) os << ',';
        put(r.grid[k]);
    }
    os << "\nalpha_curve=";
    for (std::size_t k = 0; k < r.alpha_curve.size(); ++k) {
        if (k) os << ',';
        put(r.alpha_curve[k]);
    }
    os << '\n';
}

} // namespace dapro
