#pragma once

// Experiment orchestration: per-trial population draws, allocation,
// calibration and evaluation; aggregation and report files.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dapro/alloc_dapro.hpp"
#include "dapro/alloc_static.hpp"
#include "dapro/alloc_variants.hpp"
#include "dapro/config.hpp"
#include "dapro/estimators_bounds.hpp"
#include "dapro/sim_engine.hpp"
#include "dapro/survival_calibration.hpp"

namespace dapro {

// ------------------------------------------------------------------ trial

struct TrialData {
    std::size_t trial = 0;
    Population population;
    std::vector<PromptInstance> cal_instances;
    std::vector<SurrogateModel> cal_models;
    std::vector<int> targets;  // trimmed prior quantile per calibration sample
    TauGrid grid;              // search grid (below the prior level)
    std::vector<std::vector<int>> cal_curves;
    std::vector<std::vector<int>> test_curves;
    std::vector<int> test_uncalibrated;
    std::vector<int> test_events;
};

inline std::uint64_t method_stream(Method m) { return 1 + static_cast<std::uint64_t>(m); }

inline TauGrid search_grid(const ExperimentConfig& c) {
    return c.bound_kind == BoundKind::lpb ? TauGrid::default_lpb().restricted(c.tau_prior_lpb)
                                          : TauGrid::default_upb().restricted(c.tau_prior_upb);
}

/// Draws the trial's population and splits it; everything downstream of the allocator is fixed here.
inline TrialData prepare_trial(const ExperimentConfig& c, std::size_t trial) {
    TrialData d;
    d.trial = trial;
    PopulationSpec spec = c.population;
    spec.n_samples = c.n_cal + c.n_test;
    Rng pop_rng = Rng::derive(c.seed, {trial, 0});
    d.population = generate_population(spec, pop_rng);
    const auto in_cal = random_split(spec.n_samples, c.n_cal, pop_rng);

    const int M = c.effective_M();
    const double tau_prior = c.bound_kind == BoundKind::lpb ? c.tau_prior_lpb : c.tau_prior_upb;
    const double tau_raw = c.bound_kind == BoundKind::lpb ? c.alpha : 1.0 - c.alpha;
    d.grid = search_grid(c);
    if (d.grid.size() == 0) throw ConfigError("tau search grid is empty below the prior level");
    for (std::size_t i = 0; i < spec.n_samples; ++i) {
        const auto& inst = d.population.instances[i];
        const auto& model = d.population.models[i];
        if (in_cal[i]) {
            d.cal_instances.push_back(inst);
            d.cal_models.push_back(model);
            d.targets.push_back(trim_quantile(quantile_estimate(model, tau_prior), M));
            d.cal_instances.back().prior_target = d.targets.back();
            d.cal_curves.push_back(quantile_curve(model, d.grid, M));
        } else {
            d.test_events.push_back(inst.event_time);
            d.test_curves.push_back(quantile_curve(model, d.grid, M));
            d.test_uncalibrated.push_back(trim_quantile(quantile_estimate(model, tau_raw), M));
        }
    }
    return d;
}

struct TrialMetrics {
    std::size_t trial = 0;
    std::string method;
    double coverage = 0.0;
    double coverage_deviation = 0.0;
    double mean_bound = 0.0;
    double budget_per_sample = 0.0;
    std::size_t n_events = 0;
    double mean_weight = 0.0;
};

struct MethodRun {
    TrialMetrics metrics;
    std::vector<AllocationOutcome> outcomes;
    CalibrationResult calibration;
    DaproDiagnostics dapro;
};

/// Allocation for one method on the trial's calibration split.
inline std::vector<AllocationOutcome> allocate(const ExperimentConfig& c, const TrialData& d, Method m, Rng& rng,
                                               DaproDiagnostics* dapro_diag = nullptr) {
    const double budget = c.budget_per_sample * static_cast<double>(d.cal_instances.size());
    switch (m) {
        case Method::static_alloc: {
            const auto plan = plan_static(d.targets, budget);
            return execute_static(plan, std::span<const PromptInstance>(d.cal_instances), d.targets, rng);
        }
        case Method::greedy: {
            GreedyConfig g{budget, c.greedy_rho, c.greedy_top_k};
            return run_greedy(d.cal_instances, d.cal_models, d.targets, g, rng);
        }
        case Method::locally_adaptive: {
            LocalConfig l;
            l.budget = budget;
            l.n1 = c.effective_n1();
            l.p_min = c.local_p_min;
            l.with_correction = c.local_correction;
            l.halt = c.local_halt;
            return run_local(d.cal_instances, d.cal_models, d.targets, l, rng);
        }
        case Method::dapro: {
            DaproConfig dc;
            dc.budget = budget;
            dc.n1 = c.effective_n1();
            return run_dapro(d.cal_instances, d.targets, dc, rng, dapro_diag);
        }
        case Method::uniform: {
            const int cap = static_cast<int>(std::floor(c.budget_per_sample));
            std::vector<AllocationOutcome> out;
            out.reserve(d.cal_instances.size());
            for (const auto& inst : d.cal_instances) {
                auto o = full_observation(inst.id, inst.event_time, std::min(cap, inst.t_max()), Split::cal2);
                out.push_back(o);
            }
            return out;
        }
        case Method::uncalibrated: break;
    }
    throw ConfigError("method '" + std::string(to_string(m)) + "' does not allocate");
}

/// Allocation, calibration and test evaluation of one method in one trial.
inline MethodRun run_method(const ExperimentConfig& c, const TrialData& d, Method m) {
    MethodRun r;
    r.metrics.trial = d.trial;
    r.metrics.method = std::string(to_string(m));
    const int t_max = c.population.t_max;
    std::vector<int> bounds;
    if (m == Method::uncalibrated) {
        bounds = d.test_uncalibrated;
        r.metrics.mean_weight = 1.0;
    } else {
        if (m == Method::uniform) throw ConfigError("the uniform baseline is only used by the metrics experiment");
        Rng rng = Rng::derive(c.seed, {d.trial, method_stream(m)});
        r.outcomes = allocate(c, d, m, rng, &r.dapro);
        std::vector<WeightedObservation> obs(r.outcomes.size());
        for (std::size_t i = 0; i < obs.size(); ++i) {
            const auto& o = r.outcomes[i];
            obs[i] = {o.sample_id, o.censored_time, o.censoring_time, o.event_observed, o.weight, d.targets[i],
                      d.cal_curves[i]};
        }
        auto curve = miscoverage_curve(obs, d.grid.size(), c.bound_kind, t_max);
        r.calibration = calibrate_tau(d.grid, std::move(curve), c.alpha, c.bound_kind, c.tau_selection);
        bounds.resize(d.test_curves.size());
        for (std::size_t j = 0; j < bounds.size(); ++j) bounds[j] = build_bound(r.calibration, d.test_curves[j], t_max);
        r.metrics.budget_per_sample =
            static_cast<double>(total_budget(r.outcomes)) / static_cast<double>(r.outcomes.size());
        r.metrics.n_events = count_events(r.outcomes);
        r.metrics.mean_weight = mean_inverse_reach(r.outcomes);
    }
    const auto cov = coverage_eval(d.test_events, bounds, c.bound_kind, t_max);
    r.metrics.coverage = cov.coverage;
    r.metrics.coverage_deviation = std::abs(cov.coverage - (1.0 - c.alpha));
    r.metrics.mean_bound = cov.mean_size;
    return r;
}

// ----------------------------------------------------------------- report

struct FailedRun {
    std::size_t trial = 0;
    std::string method;
    std::string reason;
};

struct ColumnStats {
    double mean = 0.0;
    double variance = 0.0;        // unbiased
    double semi_deviation = 0.0;  // sqrt(mean of squared shortfalls below the mean)
};

/// Mean, unbiased variance and downside semi-deviation of a column.
inline ColumnStats column_stats(std::span<const double> v) {
    ColumnStats s;
    if (v.empty()) return s;
    const double n = static_cast<double>(v.size());
    for (double x : v) s.mean += x;
    s.mean /= n;
    double ss = 0.0, down = 0.0;
    for (double x : v) {
        ss += (x - s.mean) * (x - s.mean);
        if (x < s.mean) down += (x - s.mean) * (x - s.mean);
    }
    s.variance = v.size() > 1 ? ss / (n - 1.0) : 0.0;
    s.semi_deviation = std::sqrt(down / n);
    return s;
}

struct Report {
    std::vector<TrialMetrics> rows;
    std::vector<FailedRun> failures;
};

inline const std::vector<std::string>& trial_columns() {
    static const std::vector<std::string> cols = {"coverage",          "coverage_deviation", "mean_bound",
                                                  "budget_per_sample", "n_events",           "mean_weight"};
    return cols;
}

inline double column_value(const TrialMetrics& r, std::string_view col) {
    if (col == "coverage") return r.coverage;
    if (col == "coverage_deviation") return r.coverage_deviation;
    if (col == "mean_bound") return r.mean_bound;
    if (col == "budget_per_sample") return r.budget_per_sample;
    if (col == "n_events") return static_cast<double>(r.n_events);
    if (col == "mean_weight") return r.mean_weight;
    throw DomainError("unknown column '" + std::string(col) + "'");
}

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Runs fn(trial) for every trial on `threads` workers; the first exception is rethrown.
template <class Fn>
void for_each_trial(std::size_t trials, std::size_t threads, Fn fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, trials);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t t; (t = next.fetch_add(1)) < trials;) {
            try {
                fn(t);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);
}

} // namespace detail

/// Rows ordered by trial, then by the configured method order. Infeasible runs are reported as failures.
inline Report run_experiment(const ExperimentConfig& c) {
    c.validate();
    if (c.n_test < 1) throw ConfigError("n_test must be >= 1");
    const auto methods = c.coverage_methods();
    for (Method m : methods)
        if (m == Method::uniform) throw ConfigError("the uniform baseline is only used by the metrics experiment");
    std::vector<std::vector<TrialMetrics>> rows(c.trials);
    std::vector<std::vector<FailedRun>> fails(c.trials);
    detail::for_each_trial(c.trials, c.threads, [&](std::size_t t) {
        const TrialData d = prepare_trial(c, t);
        for (Method m : methods) {
            try {
                rows[t].push_back(run_method(c, d, m).metrics);
            } catch (const InfeasibleBudget& e) {
                fails[t].push_back({t, std::string(to_string(m)), e.what()});
            }
        }
    });
    Report r;
    for (std::size_t t = 0; t < c.trials; ++t) {
        r.rows.insert(r.rows.end(), rows[t].begin(), rows[t].end());
        r.failures.insert(r.failures.end(), fails[t].begin(), fails[t].end());
    }
    return r;
}

inline void write_trials_csv(std::ostream& os, const std::vector<TrialMetrics>& rows) {
    os << "trial,method,coverage,coverage_deviation,mean_bound,budget_per_sample,n_events,mean_weight\n";
    for (const auto& r : rows) {
        os << r.trial << ',' << r.method << ',' << detail::fmt(r.coverage) << ',' << detail::fmt(r.coverage_deviation)
           << ',' << detail::fmt(r.mean_bound) << ',' << detail::fmt(r.budget_per_sample) << ',' << r.n_events << ','
           << detail::fmt(r.mean_weight) << '\n';
    }
}

inline void write_trials_jsonl(std::ostream& os, const std::vector<TrialMetrics>& rows) {
    for (const auto& r : rows) {
        nlohmann::ordered_json j;
        j["trial"] = r.trial;
        j["method"] = r.method;
        j["coverage"] = r.coverage;
        j["coverage_deviation"] = r.coverage_deviation;
        j["mean_bound"] = r.mean_bound;
        j["budget_per_sample"] = r.budget_per_sample;
        j["n_events"] = r.n_events;
        j["mean_weight"] = r.mean_weight;
        os << j.dump() << '\n';
    }
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) out.push_back(f);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace detail

/// Parses a CSV written by write_trials_csv.
inline std::vector<TrialMetrics> read_trials_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("trial file is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "trial,method,coverage,coverage_deviation,mean_bound,budget_per_sample,n_events,mean_weight")
        throw ConfigError("unexpected trial file header");
    std::vector<TrialMetrics> rows;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = detail::split_csv(line);
        if (f.size() != 8) throw ConfigError("trial file line " + std::to_string(lineno) + ": expected 8 fields");
        TrialMetrics r;
        r.trial = detail::parse_number<std::size_t>("trial", f[0]);
        r.method = f[1];
        r.coverage = detail::parse_number<double>("coverage", f[2]);
        r.coverage_deviation = detail::parse_number<double>("coverage_deviation", f[3]);
        r.mean_bound = detail::parse_number<double>("mean_bound", f[4]);
        r.budget_per_sample = detail::parse_number<double>("budget_per_sample", f[5]);
        r.n_events = detail::parse_number<std::size_t>("n_events", f[6]);
        r.mean_weight = detail::parse_number<double>("mean_weight", f[7]);
        rows.push_back(std::move(r));
    }
    return rows;
}

/// Parses json-lines written by write_trials_jsonl.
inline std::vector<TrialMetrics> read_trials_jsonl(std::istream& is) {
    std::vector<TrialMetrics> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            TrialMetrics r;
            r.trial = j.at("trial").get<std::size_t>();
            r.method = j.at("method").get<std::string>();
            r.coverage = j.at("coverage").get<double>();
            r.coverage_deviation = j.at("coverage_deviation").get<double>();
            r.mean_bound = j.at("mean_bound").get<double>();
            r.budget_per_sample = j.at("budget_per_sample").get<double>();
            r.n_events = j.at("n_events").get<std::size_t>();
            r.mean_weight = j.at("mean_weight").get<double>();
            rows.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("malformed json-lines record: ") + e.what());
        }
    }
    return rows;
}

struct MethodSummary {
    std::string method;
    std::size_t n_trials = 0;
    std::vector<std::pair<std::string, ColumnStats>> columns;

    const ColumnStats& at(std::string_view col) const {
        for (const auto& [name, s] : columns)
            if (name == col) return s;
        throw DomainError("no column '" + std::string(col) + "'");
    }
};

/// Per-method aggregates, methods in order of first appearance.
inline std::vector<MethodSummary> summarize(const std::vector<TrialMetrics>& rows) {
    std::vector<MethodSummary> out;
    std::vector<std::string> order;
    for (const auto& r : rows)
        if (std::find(order.begin(), order.end(), r.method) == order.end()) order.push_back(r.method);
    for (const auto& m : order) {
        MethodSummary s;
        s.method = m;
        for (const auto& col : trial_columns()) {
            std::vector<double> v;
            for (const auto& r : rows)
                if (r.method == m) v.push_back(column_value(r, col));
            s.n_trials = v.size();
            s.columns.emplace_back(col, column_stats(v));
        }
        out.push_back(std::move(s));
    }
    return out;
}

inline nlohmann::ordered_json stats_json(const ColumnStats& s) {
    nlohmann::ordered_json j;
    j["mean"] = s.mean;
    j["variance"] = s.variance;
    j["semi_deviation"] = s.semi_deviation;
    return j;
}

inline nlohmann::ordered_json summary_json(const std::vector<MethodSummary>& summary,
                                           const std::vector<FailedRun>& failures = {}) {
    nlohmann::ordered_json j;
    j["methods"] = nlohmann::ordered_json::array();
    for (const auto& s : summary) {
        nlohmann::ordered_json m;
        m["method"] = s.method;
        m["n_trials"] = s.n_trials;
        for (const auto& [col, st] : s.columns) m[col] = stats_json(st);
        j["methods"].push_back(std::move(m));
    }
    j["failures"] = nlohmann::ordered_json::array();
    for (const auto& f : failures) j["failures"].push_back({{"trial", f.trial}, {"method", f.method}, {"reason", f.reason}});
    return j;
}

inline void write_summary(std::ostream& os, const std::vector<MethodSummary>& summary,
                          const std::vector<FailedRun>& failures = {}) {
    os << summary_json(summary, failures).dump(2) << '\n';
}

inline std::vector<MethodSummary> read_summary(std::istream& is) {
    std::vector<MethodSummary> out;
    try {
        const auto j = nlohmann::ordered_json::parse(is);
        for (const auto& m : j.at("methods")) {
            MethodSummary s;
            s.method = m.at("method").get<std::string>();
            s.n_trials = m.at("n_trials").get<std::size_t>();
            for (const auto& col : trial_columns()) {
                const auto& c = m.at(col);
                s.columns.emplace_back(col, ColumnStats{c.at("mean").get<double>(), c.at("variance").get<double>(),
                                                        c.at("semi_deviation").get<double>()});
            }
            out.push_back(std::move(s));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed summary: ") + e.what());
    }
    return out;
}

// ------------------------------------------------------ metrics experiment

struct MetricsRow {
    std::size_t trial = 0;
    std::string method;
    double uer = 0.0;
    double uer_capped = 0.0;
    double rmttu = 0.0;
    double rmttu_capped = 0.0;
    double budget_per_sample = 0.0;
    std::size_t n_events = 0;
    std::size_t contributing = 0;
};

struct MetricsReport {
    OracleMetrics oracle;
    std::size_t population_size = 0;
    std::vector<MetricsRow> rows;
    std::vector<FailedRun> failures;
    std::vector<std::string> diagnostics;
};

inline const std::vector<std::string>& metrics_columns() {
    static const std::vector<std::string> cols = {"uer", "uer_capped", "rmttu", "rmttu_capped", "budget_per_sample",
                                                  "n_events"};
    return cols;
}

inline double column_value(const MetricsRow& r, std::string_view col) {
    if (col == "uer") return r.uer;
    if (col == "uer_capped") return r.uer_capped;
    if (col == "rmttu") return r.rmttu;
    if (col == "rmttu_capped") return r.rmttu_capped;
    if (col == "budget_per_sample") return r.budget_per_sample;
    if (col == "n_events") return static_cast<double>(r.n_events);
    throw DomainError("unknown column '" + std::string(col) + "'");
}

/// The fixed population of the metrics experiment (n_cal + n_test samples, all observed up to t_max).
inline TrialData metrics_population(const ExperimentConfig& c) {
    TrialData d;
    PopulationSpec spec = c.population;
    spec.n_samples = c.n_cal + c.n_test;
    Rng rng = Rng::derive(c.seed, {~std::uint64_t{0}});
    d.population = generate_population(spec, rng);
    d.cal_instances = d.population.instances;
    d.cal_models = d.population.models;
    d.targets.assign(spec.n_samples, spec.t_max);
    for (auto& inst : d.cal_instances) inst.prior_target = spec.t_max;
    return d;
}

/**
 * Re-censors one fixed population in every trial with target t_max for all
 * samples and records the weighted metric estimates next to the oracle.
 */
inline MetricsReport run_metrics_experiment(const ExperimentConfig& c) {
    c.validate();
    const auto methods = c.metrics_methods();
    const TrialData base = metrics_population(c);
    const int t_max = c.population.t_max;
    MetricsReport rep;
    rep.population_size = base.cal_instances.size();
    std::vector<int> events;
    for (const auto& inst : base.cal_instances) events.push_back(inst.event_time);
    rep.oracle = oracle_metrics(events, t_max);
    const bool zero_budget = c.budget_per_sample <= 0.0;
    if (zero_budget) rep.diagnostics.push_back("zero budget: no sample is observed, estimates are 0");

    std::vector<std::vector<MetricsRow>> rows(c.trials);
    std::vector<std::vector<FailedRun>> fails(c.trials);
    detail::for_each_trial(c.trials, c.threads, [&](std::size_t t) {
        for (Method m : methods) {
            std::vector<AllocationOutcome> out;
            if (zero_budget) {
                out.resize(base.cal_instances.size());
                for (std::size_t i = 0; i < out.size(); ++i) {
                    out[i].sample_id = i;
                    out[i].event_observed = false;
                }
            } else {
                Rng rng = Rng::derive(c.seed, {t, method_stream(m)});
                try {
                    out = allocate(c, base, m, rng);
                } catch (const InfeasibleBudget& e) {
                    fails[t].push_back({t, std::string(to_string(m)), e.what()});
                    continue;
                }
            }
            MetricsRow r;
            r.trial = t;
            r.method = std::string(to_string(m));
            const auto uer = population_estimate(out, MetricKind::event_rate, t_max);
            const auto rm = population_estimate(out, MetricKind::restricted_mean_time, t_max);
            r.uer = uer.estimate;
            r.uer_capped = uer.capped_estimate;
            r.rmttu = rm.estimate;
            r.rmttu_capped = rm.capped_estimate;
            r.contributing = uer.contributing;
            r.budget_per_sample = static_cast<double>(total_budget(out)) / static_cast<double>(out.size());
            r.n_events = count_events(out);
            rows[t].push_back(r);
        }
    });
    for (std::size_t t = 0; t < c.trials; ++t) {
        rep.rows.insert(rep.rows.end(), rows[t].begin(), rows[t].end());
        rep.failures.insert(rep.failures.end(), fails[t].begin(), fails[t].end());
    }
    return rep;
}

inline void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows) {
    os << "trial,method,uer,uer_capped,rmttu,rmttu_capped,budget_per_sample,n_events,contributing\n";
    for (const auto& r : rows) {
        os << r.trial << ',' << r.method << ',' << detail::fmt(r.uer) << ',' << detail::fmt(r.uer_capped) << ','
           << detail::fmt(r.rmttu) << ',' << detail::fmt(r.rmttu_capped) << ',' << detail::fmt(r.budget_per_sample)
           << ',' << r.n_events << ',' << r.contributing << '\n';
    }
}

inline void write_metrics_jsonl(std::ostream& os, const std::vector<MetricsRow>& rows) {
    for (const auto& r : rows) {
        nlohmann::ordered_json j;
        j["trial"] = r.trial;
        j["method"] = r.method;
        j["uer"] = r.uer;
        j["uer_capped"] = r.uer_capped;
        j["rmttu"] = r.rmttu;
        j["rmttu_capped"] = r.rmttu_capped;
        j["budget_per_sample"] = r.budget_per_sample;
        j["n_events"] = r.n_events;
        j["contributing"] = r.contributing;
        os << j.dump() << '\n';
    }
}

/// Per-method aggregates plus bias against the oracle and a 99% normal interval for the mean.
inline nlohmann::ordered_json metrics_summary_json(const MetricsReport& rep) {
    nlohmann::ordered_json j;
    j["population_size"] = rep.population_size;
    j["oracle"] = {{"uer", rep.oracle.uer}, {"rmttu", rep.oracle.rmttu}};
    j["methods"] = nlohmann::ordered_json::array();
    std::vector<std::string> order;
    for (const auto& r : rep.rows)
        if (std::find(order.begin(), order.end(), r.method) == order.end()) order.push_back(r.method);
    constexpr double z99 = 2.5758293035489004;
    for (const auto& m : order) {
        nlohmann::ordered_json mj;
        mj["method"] = m;
        std::size_t n = 0;
        for (const auto& col : metrics_columns()) {
            std::vector<double> v;
            for (const auto& r : rep.rows)
                if (r.method == m) v.push_back(column_value(r, col));
            n = v.size();
            const auto st = column_stats(v);
            auto cj = stats_json(st);
            const bool is_uer = col.rfind("uer", 0) == 0, is_rm = col.rfind("rmttu", 0) == 0;
            if (is_uer || is_rm) {
                const double oracle = is_uer ? rep.oracle.uer : rep.oracle.rmttu;
                const double half = n > 1 ? z99 * std::sqrt(st.variance / static_cast<double>(n)) : 0.0;
                cj["bias"] = st.mean - oracle;
                cj["ci99_half_width"] = half;
                cj["oracle_within_ci99"] = std::abs(st.mean - oracle) <= half;
            }
            mj[col] = std::move(cj);
        }
        mj["n_trials"] = n;
        j["methods"].push_back(std::move(mj));
    }
    j["failures"] = nlohmann::ordered_json::array();
    for (const auto& f : rep.failures)
        j["failures"].push_back({{"trial", f.trial}, {"method", f.method}, {"reason", f.reason}});
    j["diagnostics"] = rep.diagnostics;
    return j;
}

// ------------------------------------------------------------------ bounds

struct GapPoint {
    double gamma = 0.0;
    double delta_bound = 0.0;
};

/// Coverage gap over max weights gamma in [1, gamma_max] with uniformly spread weights (mean (1+gamma)/2).
inline std::vector<GapPoint> gap_curve(double n, double alpha, double delta, double gamma_max, std::size_t points) {
    if (points < 2) throw ConfigError("gap curve needs at least two points");
    if (!(gamma_max > 1.0)) throw ConfigError("gamma_max must exceed 1");
    std::vector<GapPoint> out(points);
    for (std::size_t k = 0; k < points; ++k) {
        const double g = 1.0 + (gamma_max - 1.0) * static_cast<double>(k) / static_cast<double>(points - 1);
        out[k] = {g, coverage_gap(n, alpha, delta, 0.5 * (1.0 + g))};
    }
    return out;
}

inline void write_gap_csv(std::ostream& os, const std::vector<GapPoint>& curve) {
    os << "gamma,delta_bound\n";
    for (const auto& p : curve) os << detail::fmt(p.gamma) << ',' << detail::fmt(p.delta_bound) << '\n';
}

} // namespace dapro
