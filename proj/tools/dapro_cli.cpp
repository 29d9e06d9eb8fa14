#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dapro/dapro.hpp"

namespace fs = std::filesystem;
using namespace dapro;

namespace {

struct ConfigFlags {
    std::string config_path;
    std::map<std::string, std::string> values;  // only flags that were given
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
    cmd->add_option("--config", flags.config_path, "key = value config file")->check(CLI::ExistingFile);
    for (const auto& [key, help] : config_keys())
        cmd->add_option("--" + key, flags.values[key], help);
    for (int k = 0; k < 4; ++k) {
        const std::string p = "mix" + std::to_string(k) + "_";
        for (const char* field : {"family", "weight"}) cmd->add_option("--" + p + field, flags.values[p + field]);
        for (auto field : detail::kHazardFields)
            cmd->add_option("--" + p + std::string(field), flags.values[p + std::string(field)]);
    }
}

ExperimentConfig resolve_config(CLI::App* cmd, const ConfigFlags& flags) {
    ExperimentConfig c = flags.config_path.empty() ? ExperimentConfig{} : load_config_file(flags.config_path);
    for (const auto& [key, value] : flags.values)
        if (cmd->count("--" + key) > 0) apply_config_value(c, key, value);
    return c;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    return out;
}

void close_checked(std::ofstream& out, const fs::path& path) {
    out.close();
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

bool is_jsonl(const fs::path& p) { return p.extension() == ".jsonl"; }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive censoring budget allocation experiments"};
    app.require_subcommand(1);

    ConfigFlags gen_flags, run_flags, met_flags;
    std::string gen_out = "population.tsv";
    auto* gen = app.add_subcommand("generate", "draw a synthetic population and write it to a file");
    add_config_flags(gen, gen_flags);
    gen->add_option("--out", gen_out, "population file");

    std::string run_dir = "results", run_format = "csv";
    auto* run = app.add_subcommand("run", "coverage experiment over repeated calibration/test splits");
    add_config_flags(run, run_flags);
    run->add_option("--out-dir", run_dir, "output directory");
    run->add_option("--format", run_format, "trial file format")->check(CLI::IsMember({"csv", "jsonl"}));

    std::string met_dir = "results", met_format = "csv";
    auto* met = app.add_subcommand("metrics", "population-metric estimators against the full-observation oracle");
    add_config_flags(met, met_flags);
    met->add_option("--out-dir", met_dir, "output directory");
    met->add_option("--format", met_format, "trial file format")->check(CLI::IsMember({"csv", "jsonl"}));

    double b_n = 3000, b_alpha = 0.1, b_delta = 0.05, b_gamma = 100, b_n2 = 2900, b_tmax = 200, b_b2 = 18, b_bps = 20;
    std::size_t b_points = 100;
    std::string b_out, b_budget_out;
    auto* bnd = app.add_subcommand("bounds", "coverage-gap curve and budget bound");
    bnd->add_option("--n", b_n, "calibration size");
    bnd->add_option("--alpha", b_alpha, "target miscoverage");
    bnd->add_option("--delta", b_delta, "confidence parameter");
    bnd->add_option("--gamma-max", b_gamma, "largest max weight on the curve");
    bnd->add_option("--points", b_points, "curve points");
    bnd->add_option("--out", b_out, "gap curve CSV (default stdout)");
    bnd->add_option("--n2", b_n2, "adaptively censored samples");
    bnd->add_option("--t-max", b_tmax, "horizon");
    bnd->add_option("--b2", b_b2, "remaining budget per adaptively censored sample");
    bnd->add_option("--budget-per-sample", b_bps, "B/N");
    bnd->add_option("--budget-out", b_budget_out, "budget bound CSV");

    std::vector<std::string> rep_in;
    std::string rep_out;
    auto* rep = app.add_subcommand("report", "re-aggregate saved trial files into a summary");
    rep->add_option("--in", rep_in, "trial files (.csv or .jsonl)")->required()->check(CLI::ExistingFile);
    rep->add_option("--out", rep_out, "summary file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            ExperimentConfig c = resolve_config(gen, gen_flags);
            c.population.seed = c.seed;
            const auto pop = generate_population(c.population);
            auto out = open_out(gen_out);
            write_population(out, pop);
            close_checked(out, gen_out);
        } else if (*run) {
            const ExperimentConfig c = resolve_config(run, run_flags);
            const Report r = run_experiment(c);
            const fs::path trials = fs::path(run_dir) / (run_format == "csv" ? "trials.csv" : "trials.jsonl");
            auto out = open_out(trials);
            if (run_format == "csv") write_trials_csv(out, r.rows);
            else write_trials_jsonl(out, r.rows);
            close_checked(out, trials);
            const fs::path summary = fs::path(run_dir) / "summary.json";
            auto sout = open_out(summary);
            write_summary(sout, summarize(r.rows), r.failures);
            close_checked(sout, summary);
            for (const auto& f : r.failures)
                std::fprintf(stderr, "trial %zu %s failed: %s\n", f.trial, f.method.c_str(), f.reason.c_str());
        } else if (*met) {
            const ExperimentConfig c = resolve_config(met, met_flags);
            const MetricsReport r = run_metrics_experiment(c);
            const fs::path trials = fs::path(met_dir) / (met_format == "csv" ? "metrics.csv" : "metrics.jsonl");
            auto out = open_out(trials);
            if (met_format == "csv") write_metrics_csv(out, r.rows);
            else write_metrics_jsonl(out, r.rows);
            close_checked(out, trials);
            const fs::path summary = fs::path(met_dir) / "metrics_summary.json";
            auto sout = open_out(summary);
            sout << metrics_summary_json(r).dump(2) << '\n';
            close_checked(sout, summary);
        } else if (*bnd) {
            const auto curve = gap_curve(b_n, b_alpha, b_delta, b_gamma, b_points);
            if (b_out.empty()) {
                write_gap_csv(std::cout, curve);
            } else {
                auto out = open_out(b_out);
                write_gap_csv(out, curve);
                close_checked(out, b_out);
            }
            if (!b_budget_out.empty()) {
                BoundParams p;
                p.n = b_n;
                p.n2 = b_n2;
                p.alpha = b_alpha;
                p.delta = b_delta;
                p.t_max = b_tmax;
                p.b2 = b_b2;
                p.budget = b_bps * b_n;
                auto out = open_out(b_budget_out);
                out << "n,n2,t_max,b2,budget_per_sample,delta,budget_bound\n"
                    << detail::fmt(b_n) << ',' << detail::fmt(b_n2) << ',' << detail::fmt(b_tmax) << ','
                    << detail::fmt(b_b2) << ',' << detail::fmt(b_bps) << ',' << detail::fmt(b_delta) << ','
                    << detail::fmt(budget_bound(p)) << '\n';
                close_checked(out, b_budget_out);
            }
        } else if (*rep) {
            std::vector<TrialMetrics> rows;
            for (const auto& path : rep_in) {
                std::ifstream in(path);
                auto part = is_jsonl(path) ? read_trials_jsonl(in) : read_trials_csv(in);
                rows.insert(rows.end(), part.begin(), part.end());
            }
            if (rep_out.empty()) {
                write_summary(std::cout, summarize(rows));
            } else {
                auto out = open_out(rep_out);
                write_summary(out, summarize(rows));
                close_checked(out, rep_out);
            }
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
