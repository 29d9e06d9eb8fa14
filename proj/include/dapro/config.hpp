#pragma once

// Experiment configuration: a flat `key = value` schema shared by config
// files and command-line flags.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dapro/alloc_variants.hpp"
#include "dapro/errors.hpp"
#include "dapro/sim_engine.hpp"
#include "dapro/survival_calibration.hpp"

namespace dapro {

enum class Method { uncalibrated, static_alloc, greedy, locally_adaptive, dapro, uniform };

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::uncalibrated: return "uncalibrated";
        case Method::static_alloc: return "static";
        case Method::greedy: return "greedy";
        case Method::locally_adaptive: return "locally-adaptive";
        case Method::dapro: return "dapro";
        case Method::uniform: return "uniform";
    }
    return "?";
}

inline Method parse_method(std::string_view s) {
    if (s == "uncalibrated") return Method::uncalibrated;
    if (s == "static") return Method::static_alloc;
    if (s == "greedy") return Method::greedy;
    if (s == "locally-adaptive" || s == "local") return Method::locally_adaptive;
    if (s == "dapro") return Method::dapro;
    if (s == "uniform") return Method::uniform;
    throw ConfigError("unknown method '" + std::string(s) + "'");
}

struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::size_t trials = 50;
    std::size_t n_cal = 2000;
    std::size_t n_test = 2000;
    double budget_per_sample = 20.0;
    double alpha = 0.1;
    double delta = 0.05;
    double tau_prior_lpb = 0.56;
    double tau_prior_upb = 0.97;
    int M = 200;
    double gamma_clip = 100.0;
    std::size_t n1 = 0;  // 0 picks the low-budget recipe
    std::vector<Method> methods;  // empty selects the experiment's default set
    BoundKind bound_kind = BoundKind::lpb;
    TauSelection tau_selection = TauSelection::closest;
    double greedy_rho = 0.1;
    std::size_t greedy_top_k = 50;
    double local_p_min = 0.005;
    bool local_correction = false;
    HaltConvention local_halt = HaltConvention::last_success;
    std::size_t threads = 0;  // 0 = hardware concurrency
    PopulationSpec population = default_population();

    static PopulationSpec default_population() {
        PopulationSpec p;
        p.t_max = 200;
        return p;
    }

    /// Phase-I size: explicit n1, else 25 for budgets <= 10, 50 for 25, 100 otherwise.
    std::size_t effective_n1() const {
        if (n1 > 0) return n1;
        if (budget_per_sample <= 10.0) return 25;
        if (budget_per_sample == 25.0) return 50;
        return 100;
    }

    std::vector<Method> coverage_methods() const {
        if (!methods.empty()) return methods;
        return {Method::uncalibrated, Method::static_alloc, Method::dapro};
    }

    /// Configured methods that carry an estimator (the uncalibrated baseline is skipped).
    std::vector<Method> metrics_methods() const {
        if (!methods.empty()) {
            std::vector<Method> out;
            for (Method m : methods)
                if (m != Method::uncalibrated) out.push_back(m);
            if (!out.empty()) return out;
        }
        return {Method::uniform, Method::static_alloc, Method::greedy, Method::locally_adaptive, Method::dapro};
    }

    int effective_M() const { return std::min(M, population.t_max); }

    void validate() const {
        if (trials < 1) throw ConfigError("trials must be >= 1");
        if (n_cal < 1) throw ConfigError("n_cal must be >= 1");
        if (!(budget_per_sample >= 0.0)) throw ConfigError("budget_per_sample must be >= 0");
        if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
        if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
        if (!(tau_prior_lpb > 0.0 && tau_prior_lpb < 1.0)) throw ConfigError("tau_prior_lpb must lie in (0,1)");
        if (!(tau_prior_upb > 0.0 && tau_prior_upb < 1.0)) throw ConfigError("tau_prior_upb must lie in (0,1)");
        if (M < 1) throw ConfigError("M must be >= 1");
        if (!(gamma_clip >= 1.0)) throw ConfigError("gamma_clip must be >= 1");
        if (effective_n1() > n_cal) throw ConfigError("n1 exceeds n_cal");
        if (!(greedy_rho >= 0.0 && greedy_rho < 1.0)) throw ConfigError("greedy_rho must lie in [0,1)");
        if (greedy_top_k < 1) throw ConfigError("greedy_top_k must be >= 1");
        if (!(local_p_min > 0.0 && local_p_min <= 1.0)) throw ConfigError("local_p_min must lie in (0,1]");
        population.validate();
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
    T out{};
    if constexpr (std::is_floating_point_v<T>) {
        try {
            std::size_t pos = 0;
            out = static_cast<T>(std::stod(v, &pos));
            if (pos != v.size()) throw ConfigError("");
        } catch (const std::exception&) {
            throw ConfigError("invalid number for '" + key + "': '" + v + "'");
        }
    } else {
        const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc() || res.ptr != v.data() + v.size())
            throw ConfigError("invalid integer for '" + key + "': '" + v + "'");
    }
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("invalid boolean for '" + key + "': '" + v + "'");
}

inline void set_hazard_param(HazardParams& p, std::string_view field, const std::string& key, const std::string& v) {
    if (field == "level") p.level = parse_number<double>(key, v);
    else if (field == "level_spread") p.level_spread = parse_number<double>(key, v);
    else if (field == "decay") p.decay = parse_number<double>(key, v);
    else if (field == "onset") p.onset = parse_number<double>(key, v);
    else if (field == "onset_spread") p.onset_spread = parse_number<double>(key, v);
    else if (field == "offset") p.offset = parse_number<double>(key, v);
    else if (field == "width") p.width = parse_number<double>(key, v);
    else throw ConfigError("unknown config key '" + key + "'");
}

inline constexpr std::string_view kHazardFields[] = {"level", "level_spread", "decay", "onset",
                                                     "onset_spread", "offset", "width"};

} // namespace detail

/// Scalar keys accepted by the schema (mixture keys `mix<k>_<field>` are accepted in addition).
inline const std::vector<std::pair<std::string, std::string>>& config_keys() {
    static const std::vector<std::pair<std::string, std::string>> keys = {
        {"seed", "64-bit master seed"},
        {"trials", "number of independent trials"},
        {"n_cal", "calibration samples per trial"},
        {"n_test", "test samples per trial"},
        {"t_max", "horizon (steps)"},
        {"budget_per_sample", "average budget per calibration sample"},
        {"alpha", "target miscoverage"},
        {"delta", "confidence parameter of the bounds"},
        {"tau_prior_lpb", "prior quantile level for lower bounds"},
        {"tau_prior_upb", "prior quantile level for upper bounds"},
        {"M", "quantile trimming cap"},
        {"gamma_clip", "largest weight bound on the bounds curve"},
        {"n1", "policy-learning split size (0 = budget recipe)"},
        {"methods", "comma-separated methods"},
        {"bound_kind", "LPB or UPB"},
        {"tau_selection", "closest or supremum"},
        {"greedy_rho", "greedy exploration fraction"},
        {"greedy_top_k", "greedy candidate set size"},
        {"local_p_min", "locally adaptive probability floor"},
        {"local_correction", "finite-sample correction in multiplier tuning"},
        {"local_halt", "last_success or next_step"},
        {"threads", "worker threads (0 = all cores)"},
        {"n_samples", "population size for generate"},
        {"family", "constant, geometric_decay, logistic_bump or mixture"},
        {"level", "hazard level"},
        {"level_spread", "log-normal spread of the level"},
        {"decay", "geometric decay factor"},
        {"onset", "bump onset step"},
        {"onset_spread", "normal spread of the onset"},
        {"offset", "bump offset step"},
        {"width", "bump edge width"},
        {"score_kind", "event_prob or remaining_quantile"},
        {"score_alpha", "level of the remaining-quantile score"},
        {"score_noise_sd", "Gaussian score noise"},
        {"model_miscalibration", "log-odds noise of the surrogate"},
    };
    return keys;
}

/// Applies one `key = value` assignment; unknown keys are errors.
inline void apply_config_value(ExperimentConfig& c, const std::string& key, const std::string& raw) {
    using detail::parse_number;
    const std::string v = detail::trim(raw);
    auto& pop = c.population;
    if (key == "seed") c.seed = parse_number<std::uint64_t>(key, v);
    else if (key == "trials") c.trials = parse_number<std::size_t>(key, v);
    else if (key == "n_cal") c.n_cal = parse_number<std::size_t>(key, v);
    else if (key == "n_test") c.n_test = parse_number<std::size_t>(key, v);
    else if (key == "t_max") pop.t_max = parse_number<int>(key, v);
    else if (key == "budget_per_sample") c.budget_per_sample = parse_number<double>(key, v);
    else if (key == "alpha") c.alpha = parse_number<double>(key, v);
    else if (key == "delta") c.delta = parse_number<double>(key, v);
    else if (key == "tau_prior_lpb") c.tau_prior_lpb = parse_number<double>(key, v);
    else if (key == "tau_prior_upb") c.tau_prior_upb = parse_number<double>(key, v);
    else if (key == "M") c.M = parse_number<int>(key, v);
    else if (key == "gamma_clip") c.gamma_clip = parse_number<double>(key, v);
    else if (key == "n1") c.n1 = parse_number<std::size_t>(key, v);
    else if (key == "methods") {
        c.methods.clear();
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = detail::trim(item);
            if (item.empty()) continue;
            const Method m = parse_method(item);
            if (std::find(c.methods.begin(), c.methods.end(), m) == c.methods.end()) c.methods.push_back(m);
        }
    }
    else if (key == "bound_kind") c.bound_kind = parse_bound_kind(v);
    else if (key == "tau_selection") c.tau_selection = parse_tau_selection(v);
    else if (key == "greedy_rho") c.greedy_rho = parse_number<double>(key, v);
    else if (key == "greedy_top_k") c.greedy_top_k = parse_number<std::size_t>(key, v);
    else if (key == "local_p_min") c.local_p_min = parse_number<double>(key, v);
    else if (key == "local_correction") c.local_correction = detail::parse_bool(key, v);
    else if (key == "local_halt") c.local_halt = parse_halt_convention(v);
    else if (key == "threads") c.threads = parse_number<std::size_t>(key, v);
    else if (key == "n_samples") pop.n_samples = parse_number<std::size_t>(key, v);
    else if (key == "family") pop.family = parse_hazard_family(v);
    else if (key == "score_kind") pop.score_kind = parse_score_kind(v);
    else if (key == "score_alpha") pop.score_alpha = parse_number<double>(key, v);
    else if (key == "score_noise_sd") pop.score_noise_sd = parse_number<double>(key, v);
    else if (key == "model_miscalibration") pop.model_miscalibration = parse_number<double>(key, v);
    else if (key.rfind("mix", 0) == 0 && key.size() > 3) {
        // mix<k>_<field>
        const auto us = key.find('_');
        if (us == std::string::npos || us == 3) throw ConfigError("unknown config key '" + key + "'");
        const auto k = parse_number<std::size_t>(key, key.substr(3, us - 3));
        if (k > 63) throw ConfigError("mixture index too large in '" + key + "'");
        if (pop.components.size() <= k) pop.components.resize(k + 1);
        auto& comp = pop.components[k];
        const std::string field = key.substr(us + 1);
        if (field == "family") comp.family = parse_hazard_family(v);
        else if (field == "weight") comp.weight = parse_number<double>(key, v);
        else detail::set_hazard_param(comp.params, field, key, v);
    }
    else detail::set_hazard_param(pop.params, key, key, v);
}

/// Reads `key = value` lines; `#` starts a comment.
inline void load_config(ExperimentConfig& c, std::istream& is) {
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        apply_config_value(c, detail::trim(t.substr(0, eq)), t.substr(eq + 1));
    }
}

inline ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    ExperimentConfig c;
    load_config(c, in);
    return c;
}

inline ExperimentConfig parse_config(std::string_view text) {
    std::istringstream in{std::string(text)};
    ExperimentConfig c;
    load_config(c, in);
    return c;
}

} // namespace dapro
