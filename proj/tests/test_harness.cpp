#include <gtest/gtest.h>

#include <sstream>

#include "dapro/harness.hpp"

using namespace dapro;

namespace {

ExperimentConfig small_config() {
    return parse_config(R"(
seed = 11
trials = 3
n_cal = 300
n_test = 300
t_max = 20
budget_per_sample = 8
M = 20
n1 = 40
threads = 1
methods = static, dapro
family = constant
level = 0.05
level_spread = 1.0
score_noise_sd = 0.25
)");
}

} // namespace

TEST(Config, ParsesKeysAndComments) {
    const auto c = parse_config("seed = 5  # master\nalpha=0.2\nmethods = uncalibrated,static\nmix1_level = 0.3\n");
    EXPECT_EQ(c.seed, 5u);
    EXPECT_DOUBLE_EQ(c.alpha, 0.2);
    ASSERT_EQ(c.coverage_methods().size(), 2u);
    EXPECT_EQ(c.coverage_methods()[1], Method::static_alloc);
    ASSERT_GE(c.population.components.size(), 2u);
    EXPECT_DOUBLE_EQ(c.population.components[1].params.level, 0.3);
}

TEST(Config, Errors) {
    EXPECT_THROW(parse_config("not_a_key = 1"), ConfigError);
    EXPECT_THROW(parse_config("alpha"), ConfigError);
    EXPECT_THROW(parse_config("alpha = abc"), ConfigError);
    EXPECT_THROW(parse_config("methods = nope"), ConfigError);
    EXPECT_THROW(load_config_file("/nonexistent/dir/x.cfg"), ConfigError);
    auto c = parse_config("alpha = 1.5");
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, DefaultMethodSets) {
    ExperimentConfig c;
    EXPECT_EQ(c.coverage_methods(), (std::vector<Method>{Method::uncalibrated, Method::static_alloc, Method::dapro}));
    EXPECT_EQ(c.metrics_methods().size(), 5u);
}

TEST(Harness, UncalibratedUsesRawBoundWithoutBudget) {
    auto c = small_config();
    const auto d = prepare_trial(c, 0);
    const auto r = run_method(c, d, Method::uncalibrated);
    EXPECT_EQ(r.metrics.budget_per_sample, 0.0);
    EXPECT_TRUE(r.outcomes.empty());
    std::vector<int> events = d.test_events;
    const auto cov = coverage_eval(events, d.test_uncalibrated, c.bound_kind, c.population.t_max);
    EXPECT_DOUBLE_EQ(r.metrics.coverage, cov.coverage);
}

TEST(Harness, StaticCoverageNearTarget) {
    auto c = small_config();
    const auto d = prepare_trial(c, 1);
    const auto r = run_method(c, d, Method::static_alloc);
    EXPECT_GT(r.metrics.coverage, 0.8);
    EXPECT_LE(r.metrics.budget_per_sample, 2 * c.budget_per_sample);
}

TEST(Harness, ColumnStats) {
    const std::vector<double> v{1.0, 2.0, 3.0, 6.0};
    const auto s = column_stats(v);
    EXPECT_DOUBLE_EQ(s.mean, 3.0);
    EXPECT_DOUBLE_EQ(s.variance, 14.0 / 3.0);
    EXPECT_DOUBLE_EQ(s.semi_deviation, std::sqrt(5.0 / 4.0));
}

TEST(Report, EmptyCsvIsHeaderOnly) {
    std::ostringstream os;
    write_trials_csv(os, {});
    EXPECT_EQ(os.str(), "trial,method,coverage,coverage_deviation,mean_bound,budget_per_sample,n_events,mean_weight\n");
}

TEST(Report, RowCountAndRoundTrip) {
    const auto c = small_config();
    const auto rep = run_experiment(c);
    ASSERT_EQ(rep.rows.size(), 6u);
    EXPECT_TRUE(rep.failures.empty());
    std::stringstream csv, summary;
    write_trials_csv(csv, rep.rows);
    write_summary(summary, summarize(rep.rows));
    const auto parsed = read_trials_csv(csv);
    ASSERT_EQ(parsed.size(), 6u);
    const auto again = summarize(parsed);
    const auto stored = read_summary(summary);
    ASSERT_EQ(again.size(), stored.size());
    for (std::size_t m = 0; m < again.size(); ++m) {
        EXPECT_EQ(again[m].method, stored[m].method);
        for (const auto& col : trial_columns()) {
            EXPECT_NEAR(again[m].at(col).mean, stored[m].at(col).mean, 1e-12);
            EXPECT_NEAR(again[m].at(col).variance, stored[m].at(col).variance, 1e-12);
        }
    }
}

TEST(Report, JsonlRoundTrip) {
    const auto rep = run_experiment(small_config());
    std::stringstream io;
    write_trials_jsonl(io, rep.rows);
    const auto back = read_trials_jsonl(io);
    ASSERT_EQ(back.size(), rep.rows.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_EQ(back[i].method, rep.rows[i].method);
        EXPECT_EQ(back[i].coverage, rep.rows[i].coverage);
        EXPECT_EQ(back[i].mean_weight, rep.rows[i].mean_weight);
    }
}

TEST(Report, MalformedCsvRejected) {
    std::stringstream bad("trial,method\n1,static\n");
    EXPECT_THROW(read_trials_csv(bad), ConfigError);
}

TEST(Experiment, DeterministicAcrossThreadCounts) {
    auto c = small_config();
    std::ostringstream a, b;
    write_trials_csv(a, run_experiment(c).rows);
    c.threads = 3;
    write_trials_csv(b, run_experiment(c).rows);
    EXPECT_EQ(a.str(), b.str());
}

TEST(Experiment, InfeasibleBudgetIsReported) {
    auto c = small_config();
    c.budget_per_sample = 0.5;
    const auto rep = run_experiment(c);
    EXPECT_FALSE(rep.failures.empty());
    for (const auto& f : rep.failures) EXPECT_EQ(f.method, "dapro");
    EXPECT_EQ(rep.rows.size(), 3u);
}

TEST(Metrics, ZeroBudgetGivesEmptyContributions) {
    auto c = small_config();
    c.budget_per_sample = 0;
    c.methods = {Method::static_alloc};
    const auto rep = run_metrics_experiment(c);
    ASSERT_FALSE(rep.diagnostics.empty());
    for (const auto& r : rep.rows) {
        EXPECT_EQ(r.contributing, 0u);
        EXPECT_EQ(r.uer, 0.0);
    }
}

TEST(Metrics, UniformBaselineUnderestimates) {
    auto c = small_config();
    c.population.t_max = 30;
    c.M = 30;
    c.methods = {Method::uniform};
    const auto rep = run_metrics_experiment(c);
    for (const auto& r : rep.rows) EXPECT_LT(r.uer, rep.oracle.uer);
}

TEST(Bounds, GapCurveIncreasing) {
    const auto curve = gap_curve(3000, 0.1, 0.05, 100, 50);
    for (std::size_t k = 1; k < curve.size(); ++k) EXPECT_GT(curve[k].delta_bound, curve[k - 1].delta_bound);
    EXPECT_DOUBLE_EQ(curve.front().gamma, 1.0);
    EXPECT_DOUBLE_EQ(curve.back().gamma, 100.0);
    std::ostringstream os;
    write_gap_csv(os, curve);
    EXPECT_EQ(os.str().substr(0, 18), "gamma,delta_bound\n");
}
