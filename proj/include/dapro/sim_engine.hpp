#pragma once

// Synthetic time-to-event populations with latent discrete-time hazards,
// per-instance surrogate predictive models and the two risk scores used by
// the adaptive allocators.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dapro/errors.hpp"
#include "dapro/rng.hpp"

namespace dapro {

enum class HazardFamily { constant, geometric_decay, logistic_bump, mixture };
enum class ScoreKind { event_prob, remaining_quantile };

inline std::string_view to_string(HazardFamily f) {
    switch (f) {
        case HazardFamily::constant: return "constant";
        case HazardFamily::geometric_decay: return "geometric-decay";
        case HazardFamily::logistic_bump: return "logistic-bump";
        case HazardFamily::mixture: return "mixture";
    }
    return "?";
}

inline HazardFamily parse_hazard_family(std::string_view s) {
    if (s == "constant") return HazardFamily::constant;
    if (s == "geometric-decay" || s == "geometric_decay") return HazardFamily::geometric_decay;
    if (s == "logistic-bump" || s == "logistic_bump") return HazardFamily::logistic_bump;
    if (s == "mixture") return HazardFamily::mixture;
    throw ConfigError("unknown hazard family '" + std::string(s) + "'");
}

inline std::string_view to_string(ScoreKind k) {
    return k == ScoreKind::event_prob ? "event-prob" : "remaining-quantile";
}

inline ScoreKind parse_score_kind(std::string_view s) {
    if (s == "event-prob" || s == "event_prob") return ScoreKind::event_prob;
    if (s == "remaining-quantile" || s == "remaining_quantile") return ScoreKind::remaining_quantile;
    throw ConfigError("unknown score kind '" + std::string(s) + "'");
}

/// Parameters of one hazard shape. Per-instance heterogeneity comes from a
/// log-normal multiplier on `level` and a Gaussian shift of `onset`.
struct HazardParams {
    double level = 0.05;        // constant hazard / initial hazard / bump peak
    double level_spread = 0.0;  // sd of log(level multiplier)
    double decay = 0.9;         // geometric ratio per step
    double onset = 10.0;        // bump rising midpoint
    double onset_spread = 0.0;  // sd of per-instance onset shift
    double offset = std::numeric_limits<double>::infinity();  // bump falling midpoint
    double width = 2.0;         // logistic width of both bump edges

    void validate() const {
        if (!(level >= 0.0 && level <= 1.0)) throw ConfigError("hazard level must lie in [0,1]");
        if (!(level_spread >= 0.0)) throw ConfigError("hazard level spread must be >= 0");
        if (!(decay >= 0.0 && decay <= 1.0)) throw ConfigError("hazard decay must lie in [0,1]");
        if (!(width > 0.0)) throw ConfigError("hazard width must be > 0");
        if (!(onset_spread >= 0.0)) throw ConfigError("hazard onset spread must be >= 0");
        if (std::isnan(onset) || std::isnan(offset)) throw ConfigError("hazard onset/offset is NaN");
    }
};

struct MixtureComponent {
    HazardFamily family = HazardFamily::constant;  // never `mixture`
    double weight = 1.0;
    HazardParams params;
};

struct PopulationSpec {
    std::size_t n_samples = 1000;
    int t_max = 50;
    HazardFamily family = HazardFamily::constant;
    HazardParams params;
    std::vector<MixtureComponent> components;  // used when family == mixture
    ScoreKind score_kind = ScoreKind::remaining_quantile;
    double score_alpha = 0.1;  // level of the remaining-quantile score
    double score_noise_sd = 0.0;
    double model_miscalibration = 0.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (t_max < 1) throw ConfigError("t_max must be >= 1");
        if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
        if (!(score_noise_sd >= 0.0)) throw ConfigError("score noise sd must be >= 0");
        if (!(model_miscalibration >= 0.0)) throw ConfigError("model miscalibration must be >= 0");
        if (!(score_alpha > 0.0 && score_alpha < 1.0)) throw ConfigError("score alpha must lie in (0,1)");
        if (family == HazardFamily::mixture) {
            if (components.empty()) throw ConfigError("mixture family needs at least one component");
            double total = 0.0;
            for (const auto& c : components) {
                if (c.family == HazardFamily::mixture) throw ConfigError("nested mixture component");
                if (!(c.weight >= 0.0)) throw ConfigError("mixture weight must be >= 0");
                c.params.validate();
                total += c.weight;
            }
            if (!(total > 0.0)) throw ConfigError("mixture weights sum to zero");
        } else {
            params.validate();
        }
    }
};

/// One synthetic conversation. Steps are 1-based; vectors are indexed by t-1.
struct PromptInstance {
    std::size_t id = 0;
    std::vector<double> hazard;        // latent P(event at t | survived t-1)
    int event_time = 0;                // first success, or t_max+1 when none
    std::vector<double> scores;        // S(t), noise included
    std::vector<double> model_hazard;  // the surrogate's view of `hazard`
    int prior_target = 0;              // filled by calibration (f_prior)

    int t_max() const { return static_cast<int>(hazard.size()); }
    int no_event() const { return t_max() + 1; }
    bool has_event() const { return event_time <= t_max(); }
};

namespace detail {

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double shaped_hazard(HazardFamily family, const HazardParams& p, double level, double onset,
                            int t) {
    switch (family) {
        case HazardFamily::constant: return level;
        case HazardFamily::geometric_decay: return level * std::pow(p.decay, t - 1);
        case HazardFamily::logistic_bump: {
            const double rise = logistic((t - onset) / p.width);
            const double fall = std::isinf(p.offset) ? 1.0 : logistic((p.offset - t) / p.width);
            return level * rise * fall;
        }
        case HazardFamily::mixture: break;
    }
    throw ConfigError("mixture is not a concrete hazard shape");
}

inline std::vector<double> draw_hazard(const PopulationSpec& spec, Rng& rng) {
    HazardFamily family = spec.family;
    const HazardParams* params = &spec.params;
    if (family == HazardFamily::mixture) {
        double total = 0.0;
        for (const auto& c : spec.components) total += c.weight;
        double u = rng.uniform() * total;
        const MixtureComponent* pick = &spec.components.back();
        for (const auto& c : spec.components) {
            if (u < c.weight) { pick = &c; break; }
            u -= c.weight;
        }
        family = pick->family;
        params = &pick->params;
    }
    double level = params->level;
    if (params->level_spread > 0.0) level *= std::exp(params->level_spread * rng.normal());
    double onset = params->onset;
    if (params->onset_spread > 0.0) onset += params->onset_spread * rng.normal();
    level = std::clamp(level, 0.0, 1.0);

    std::vector<double> h(static_cast<std::size_t>(spec.t_max));
    for (int t = 1; t <= spec.t_max; ++t)
        h[t - 1] = std::clamp(shaped_hazard(family, *params, level, onset, t), 0.0, 1.0);
    return h;
}

} // namespace detail

/**
 * Discrete conditional event-time law P(T = t2 | T > t1) of one instance.
 *
 * Stored through its per-step hazards; the (t1, t2) matrix is evaluated on
 * demand. Row t1 has entries for t2 = t1+1..t_max followed by the
 * beyond-horizon mass.
 */
class SurrogateModel {
public:
    SurrogateModel() = default;
    explicit SurrogateModel(std::vector<double> hazard) : hazard_(std::move(hazard)) {
        cdf0_.resize(hazard_.size());
        double survive = 1.0;
        for (std::size_t k = 0; k < hazard_.size(); ++k) {
            survive *= 1.0 - hazard_[k];
            cdf0_[k] = 1.0 - survive;
        }
    }

    int t_max() const { return static_cast<int>(hazard_.size()); }
    const std::vector<double>& hazard() const { return hazard_; }

    /// P(T <= t) from the start, t = 1..t_max.
    const std::vector<double>& cdf() const { return cdf0_; }

    /// P(event at t | survived to t-1).
    double hazard_at(int t) const { return hazard_[static_cast<std::size_t>(t - 1)]; }

    /// Row t1 of the conditional pmf; size t_max - t1 + 1, last entry beyond horizon.
    std::vector<double> row(int t1) const {
        const int n = t_max();
        std::vector<double> out(static_cast<std::size_t>(n - t1 + 1));
        double survive = 1.0;
        for (int t2 = t1 + 1; t2 <= n; ++t2) {
            const double h = hazard_[static_cast<std::size_t>(t2 - 1)];
            out[static_cast<std::size_t>(t2 - t1 - 1)] = survive * h;
            survive *= 1.0 - h;
        }
        out.back() = survive;
        double total = 0.0;
        for (double v : out) total += v;
        if (total > 0.0)
            for (double& v : out) v /= total;
        return out;
    }

    /// E[min(K, d)] for the remaining time K after surviving t steps.
    double expected_capped_remaining(int t, int d) const {
        double expect = 0.0;
        double survive = 1.0;
        for (int k = 1; k <= d; ++k) {
            expect += survive;
            const int step = t + k;
            if (step <= t_max()) survive *= 1.0 - hazard_[static_cast<std::size_t>(step - 1)];
        }
        return expect;
    }

private:
    std::vector<double> hazard_;
    std::vector<double> cdf0_;
};

/// Surrogate from an instance's hazards, with i.i.d. Gaussian log-odds noise of sd `miscalibration`.
inline SurrogateModel build_surrogate(const PromptInstance& instance, double miscalibration, Rng& rng) {
    std::vector<double> h = instance.hazard;
    if (miscalibration > 0.0) {
        for (double& v : h) {
            const double noise = rng.normal();
            if (v > 0.0 && v < 1.0) {
                const double logit = std::log(v) - std::log1p(-v);
                v = detail::logistic(logit + miscalibration * noise);
            }
        }
    }
    return SurrogateModel(std::move(h));
}

/// Smallest t >= 1 with P(T <= t) >= tau, or t_max+1 when the horizon is never reached.
inline int quantile_estimate(const SurrogateModel& model, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw DomainError("quantile level must lie in (0,1)");
    const auto& cdf = model.cdf();
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), tau - 1e-12);
    return static_cast<int>(it - cdf.begin()) + 1;
}

/// Risk score at step t; larger means a stronger signal to continue.
inline double score(const SurrogateModel& model, int t, ScoreKind kind, double alpha = 0.1) {
    if (kind == ScoreKind::event_prob) return model.hazard_at(t);
    const int n = model.t_max();
    double cum = 0.0;
    double survive = 1.0;
    for (int k = 1; t + k - 1 <= n; ++k) {
        const double h = model.hazard_at(t + k - 1);
        cum += survive * h;
        survive *= 1.0 - h;
        if (cum >= 1.0 - alpha - 1e-12) return -static_cast<double>(k);
    }
    return -static_cast<double>(n + 2 - t);
}

inline double score(const PromptInstance&, const SurrogateModel& model, int t, ScoreKind kind,
                    double alpha = 0.1) {
    return score(model, t, kind, alpha);
}

/// First step with a successful Bernoulli(hazard[t]) draw, or t_max+1.
inline int draw_event_time(const std::vector<double>& hazard, Rng& rng) {
    const int n = static_cast<int>(hazard.size());
    for (int t = 1; t <= n; ++t)
        if (rng.bernoulli(hazard[static_cast<std::size_t>(t - 1)])) return t;
    return n + 1;
}

struct Population {
    std::vector<PromptInstance> instances;
    std::vector<SurrogateModel> models;

    std::size_t size() const { return instances.size(); }
};

/// Deterministic given `rng`; instance ids are 0..n-1.
inline Population generate_population(const PopulationSpec& spec, Rng& rng) {
    spec.validate();
    Population pop;
    pop.instances.reserve(spec.n_samples);
    pop.models.reserve(spec.n_samples);
    for (std::size_t i = 0; i < spec.n_samples; ++i) {
        PromptInstance inst;
        inst.id = i;
        inst.hazard = detail::draw_hazard(spec, rng);
        inst.event_time = draw_event_time(inst.hazard, rng);
        SurrogateModel model = build_surrogate(inst, spec.model_miscalibration, rng);
        inst.model_hazard = model.hazard();
        inst.scores.resize(inst.hazard.size());
        for (int t = 1; t <= spec.t_max; ++t) {
            double s = score(model, t, spec.score_kind, spec.score_alpha);
            if (spec.score_noise_sd > 0.0) s += spec.score_noise_sd * rng.normal();
            inst.scores[static_cast<std::size_t>(t - 1)] = s;
        }
        pop.instances.push_back(std::move(inst));
        pop.models.push_back(std::move(model));
    }
    return pop;
}

inline Population generate_population(const PopulationSpec& spec) {
    Rng rng(spec.seed);
    return generate_population(spec, rng);
}

// Line format (tab-separated):
//   id  hazards(csv)  event_time  scores(csv)  model_hazards(csv)

namespace detail {

inline void write_list(std::ostream& os, const std::vector<double>& v) {
    char buf[32];
    for (std::size_t k = 0; k < v.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", v[k]);
        if (k) os << ',';
        os << buf;
    }
}

inline std::vector<double> read_list(const std::string& field) {
    std::vector<double> out;
    std::stringstream ss(field);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw ConfigError("");
        } catch (const std::exception&) {
            throw ConfigError("malformed number '" + item + "' in population file");
        }
    }
    return out;
}

} // namespace detail

inline void write_population(std::ostream& os, const Population& pop) {
    for (const auto& inst : pop.instances) {
        os << inst.id << '\t';
        detail::write_list(os, inst.hazard);
        os << '\t' << inst.event_time << '\t';
        detail::write_list(os, inst.scores);
        os << '\t';
        detail::write_list(os, inst.model_hazard);
        os << '\n';
    }
}

inline Population read_population(std::istream& is) {
    Population pop;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, '\t')) fields.push_back(f);
        if (fields.size() != 5) throw ConfigError("population line " + std::to_string(lineno) + ": expected 5 fields");
        PromptInstance inst;
        try {
            inst.id = std::stoull(fields[0]);
            inst.event_time = std::stoi(fields[2]);
        } catch (const std::exception&) {
            throw ConfigError("population line " + std::to_string(lineno) + ": malformed id or event time");
        }
        inst.hazard = detail::read_list(fields[1]);
        inst.scores = detail::read_list(fields[3]);
        inst.model_hazard = detail::read_list(fields[4]);
        if (inst.scores.size() != inst.hazard.size() || inst.model_hazard.size() != inst.hazard.size())
            throw ConfigError("population line " + std::to_string(lineno) + ": length mismatch");
        pop.models.emplace_back(inst.model_hazard);
        pop.instances.push_back(std::move(inst));
    }
    return pop;
}

} // namespace dapro
