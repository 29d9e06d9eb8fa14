#include <gtest/gtest.h>

#include "dapro/alloc_variants.hpp"

using namespace dapro;

namespace {

PromptInstance instance(std::size_t id, int event_time, int t_max) {
    PromptInstance inst;
    inst.id = id;
    inst.event_time = event_time;
    inst.hazard.assign(static_cast<std::size_t>(t_max), 0.0);
    inst.scores.assign(static_cast<std::size_t>(t_max), 0.0);
    return inst;
}

Population mixed_population(std::size_t n, std::uint64_t seed) {
    PopulationSpec spec;
    spec.t_max = 20;
    spec.n_samples = n;
    spec.seed = seed;
    spec.family = HazardFamily::constant;
    spec.params.level = 0.1;
    spec.params.level_spread = 1.0;
    return generate_population(spec);
}

} // namespace

TEST(GreedyExplore, ProportionalWithinTopK) {
    std::vector<PromptInstance> inst{instance(0, 99, 5), instance(1, 99, 5), instance(2, 99, 5)};
    std::vector<SurrogateModel> models{SurrogateModel(std::vector<double>(5, 0.1)),
                                       SurrogateModel(std::vector<double>(5, 0.7)),
                                       SurrogateModel(std::vector<double>(5, 0.2))};
    const std::vector<int> f(3, 5);
    Rng rng(12);
    std::array<int, 3> picks{};
    const int reps = 30000;
    for (int r = 0; r < reps; ++r) {
        GreedyState st(3, 10.0, 0.1, 2);
        greedy_explore(inst, models, f, st, rng);
        for (std::size_t i = 0; i < 3; ++i) picks[i] += st.acquisitions[i];
    }
    EXPECT_EQ(picks[0], 0);
    EXPECT_NEAR(picks[1] / double(reps), 7.0 / 9.0, 0.01);
    EXPECT_NEAR(picks[2] / double(reps), 2.0 / 9.0, 0.01);
}

TEST(GreedyExplore, EqualProbabilitiesAreUniform) {
    std::vector<PromptInstance> inst{instance(0, 99, 5), instance(1, 99, 5), instance(2, 99, 5)};
    std::vector<SurrogateModel> models(3, SurrogateModel(std::vector<double>(5, 0.3)));
    const std::vector<int> f(3, 5);
    Rng rng(2);
    std::array<int, 3> picks{};
    for (int r = 0; r < 30000; ++r) {
        GreedyState st(3, 10.0, 0.1, 3);
        greedy_explore(inst, models, f, st, rng);
        for (std::size_t i = 0; i < 3; ++i) picks[i] += st.acquisitions[i];
    }
    for (int p : picks) EXPECT_NEAR(p / 30000.0, 1.0 / 3.0, 0.01);
}

TEST(GreedyExplore, StopsWhenBudgetExhausted) {
    const auto pop = mixed_population(30, 1);
    const std::vector<int> f(30, 20);
    GreedyState st(30, 75.0, 0.2, 5);
    Rng rng(3);
    greedy_explore(pop.instances, pop.models, f, st, rng);
    int used = 0;
    for (int a : st.acquisitions) used += a;
    EXPECT_EQ(used, 15);
    EXPECT_LT(st.explore_budget, 1.0);
    const auto frozen = st.acquisitions;
    greedy_explore(pop.instances, pop.models, f, st, rng);
    EXPECT_EQ(st.acquisitions, frozen);
}

TEST(GreedyFinalize, ResolvedSamplesNeedNoTail) {
    std::vector<PromptInstance> inst{instance(0, 2, 6), instance(1, 9, 6)};
    const std::vector<int> f{6, 4};
    GreedyState st(2, 10.0, 0.5, 2);
    st.acquisitions = {2, 4};
    st.event_seen = {true, false};
    Rng rng(1);
    const auto out = greedy_finalize(st, inst, f, 1.0, rng);
    EXPECT_DOUBLE_EQ(out[0].weight, 1.0);
    EXPECT_TRUE(out[0].event_observed);
    EXPECT_EQ(out[0].budget_spent, 2);
    EXPECT_DOUBLE_EQ(out[1].weight, 1.0);
    EXPECT_EQ(out[1].censoring_time, 4);
    EXPECT_EQ(out[1].budget_spent, 4);
}

TEST(GreedyFinalize, SingleActiveSampleUsesStaticPlan) {
    const std::vector<int> d{4};
    const auto plan = plan_static(d, 2.0);
    EXPECT_NEAR(plan.lambda_star, 1.0, 1e-15);
    EXPECT_NEAR(plan.probabilities[0], 0.5, 1e-15);
    std::vector<PromptInstance> inst{instance(0, 99, 10)};
    const std::vector<int> f{6};
    GreedyState st(1, 10.0, 0.2, 1);
    st.acquisitions = {2};
    Rng rng(5);
    const auto out = greedy_finalize(st, inst, f, 2.0, rng);
    EXPECT_DOUBLE_EQ(out[0].weight, 2.0);
    EXPECT_TRUE(out[0].censoring_time == 2 || out[0].censoring_time == 6);
    EXPECT_EQ(out[0].budget_spent, out[0].censoring_time);
}

TEST(RunGreedy, ZeroRhoMatchesStatic) {
    const auto pop = mixed_population(200, 8);
    std::vector<int> f(200);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = 5 + static_cast<int>(i % 16);
    Rng a(44), b(44);
    const auto g = run_greedy(pop.instances, pop.models, f, {900.0, 0.0, 10}, a);
    const auto s = execute_static(plan_static(f, 900.0), std::span<const PromptInstance>(pop.instances), f, b);
    ASSERT_EQ(g.size(), s.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_EQ(g[i].censoring_time, s[i].censoring_time);
        EXPECT_EQ(g[i].censored_time, s[i].censored_time);
        EXPECT_EQ(g[i].weight, s[i].weight);
        EXPECT_EQ(g[i].budget_spent, s[i].budget_spent);
    }
    EXPECT_EQ(a.next(), b.next());
}

TEST(GreedyState, RejectsBadParameters) {
    EXPECT_THROW(GreedyState(3, 10.0, 1.0, 2), ConfigError);
    EXPECT_THROW(GreedyState(3, 10.0, 0.1, 0), ConfigError);
}

TEST(ExpectedRemainingCost, RowExample) {
    const std::vector<double> row{0.5, 0.3, 0.2};
    EXPECT_NEAR(expected_remaining_cost(row, 2), 1.5, 1e-15);
}

TEST(ExpectedRemainingCost, ModelLimits) {
    const SurrogateModel certain(std::vector<double>(8, 1.0));
    EXPECT_DOUBLE_EQ(expected_remaining_cost(certain, 3, 8), 1.0);
    const SurrogateModel never(std::vector<double>(8, 0.0));
    EXPECT_DOUBLE_EQ(expected_remaining_cost(never, 3, 8), 5.0);
    const SurrogateModel half(std::vector<double>(8, 0.5));
    EXPECT_NEAR(expected_remaining_cost(half, 0, 2), 1.5, 1e-15);
    EXPECT_THROW(expected_remaining_cost(half, 4, 4), DomainError);
}

TEST(ExpectedRemainingCost, ModelAgreesWithRow) {
    Rng rng(3);
    std::vector<double> h(15);
    for (double& v : h) v = 0.3 * rng.uniform();
    const SurrogateModel m(h);
    for (int t = 0; t < 15; ++t)
        for (int d = 1; t + d <= 15; ++d)
            EXPECT_NEAR(expected_remaining_cost(m, t, t + d), expected_remaining_cost(m.row(t), d), 1e-12);
}

TEST(LocalPolicy, TargetAndContinuation) {
    EXPECT_DOUBLE_EQ(local_target_probability(4.0, 1.0, 0.005), 0.5);
    EXPECT_DOUBLE_EQ(local_continuation_probability(0.5, 0.8), 0.625);
    EXPECT_DOUBLE_EQ(local_continuation_probability(0.9, 0.8), 1.0);
    EXPECT_DOUBLE_EQ(local_target_probability(0.0, 3.0, 0.005), 1.0);
    EXPECT_DOUBLE_EQ(local_target_probability(1e12, 3.0, 0.005), 0.005);
}

TEST(LocalPolicy, AccumulatedProbabilityTracksTarget) {
    const SurrogateModel m(std::vector<double>(10, 0.05));
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        LocalPolicyState st{2.0, 1.0, 0.005};
        Rng rng(seed);
        for (int t = 0; t < 10; ++t) {
            if (!local_step(st, m, t, 10, rng)) break;
            const double pt = local_target_probability(2.0, expected_remaining_cost(m, t, 10), 0.005);
            EXPECT_LE(st.p_accum, std::max(pt, 0.0) + 1e-15);
        }
    }
}

TEST(LocalAcquire, WeightMatchesReachFrequency) {
    const SurrogateModel m(std::vector<double>(12, 0.02));
    const auto inst = instance(0, 13, 12);
    Rng rng(77);
    int reached = 0;
    double w = 0.0;
    for (int r = 0; r < 30000; ++r) {
        const auto o = local_acquire(inst, m, 12, 0.5, 0.005, HaltConvention::last_success, rng);
        if (o.censoring_time == 12) {
            ++reached;
            w = o.weight;
        }
    }
    ASSERT_GT(reached, 0);
    EXPECT_NEAR(reached / 30000.0, 1.0 / w, 0.01);
}

TEST(LocalAcquire, HaltConventions) {
    const SurrogateModel m(std::vector<double>(12, 0.02));
    const auto inst = instance(0, 13, 12);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng a(seed), b(seed);
        const auto x = local_acquire(inst, m, 12, 5.0, 0.005, HaltConvention::last_success, a);
        const auto y = local_acquire(inst, m, 12, 5.0, 0.005, HaltConvention::next_step, b);
        EXPECT_EQ(x.budget_spent, y.budget_spent);
        if (x.censoring_time < 12) EXPECT_EQ(x.censoring_time, x.budget_spent);
        if (y.censoring_time < 12) EXPECT_EQ(y.censoring_time, y.budget_spent + 1);
    }
    EXPECT_EQ(parse_halt_convention("next_step"), HaltConvention::next_step);
    EXPECT_THROW(parse_halt_convention("x"), ConfigError);
}

TEST(TuneLambda, FreeContinuationWhenAffordable) {
    const auto pop = mixed_population(50, 2);
    std::vector<int> len, f(50, 20);
    double mean = 0;
    for (const auto& x : pop.instances) {
        len.push_back(std::min(x.event_time, 20));
        mean += len.back();
    }
    mean /= 50;
    const auto r = tune_lambda(pop.models, len, f, mean, 20);
    EXPECT_EQ(r.lambda, 0.0);
    EXPECT_TRUE(r.feasible);
}

TEST(TuneLambda, VanishingBudgetHitsCap) {
    const auto pop = mixed_population(50, 2);
    std::vector<int> len, f(50, 20);
    for (const auto& x : pop.instances) len.push_back(std::min(x.event_time, 20));
    const auto r = tune_lambda(pop.models, len, f, 1e-6, 20, false, 0.005, 1e10);
    EXPECT_EQ(r.lambda, 1e10);
    EXPECT_FALSE(r.feasible);
}

TEST(TuneLambda, MonotoneRiskAndTightBracket) {
    const auto pop = mixed_population(30, 5);
    std::vector<int> len, f(30, 20);
    for (const auto& x : pop.instances) len.push_back(std::min(x.event_time, 20));
    auto risk = [&](double lambda) {
        double r = 0;
        for (std::size_t i = 0; i < 30; ++i) r += local_expected_budget(pop.models[i], len[i], 20, lambda, 0.005);
        return r / 30;
    };
    double prev = risk(0.0);
    for (double l = 1e-4; l < 1e6; l *= 1.1) {
        const double cur = risk(l);
        EXPECT_LE(cur, prev + 1e-12);
        prev = cur;
    }
    const double target = 0.5 * risk(0.0);
    const auto r = tune_lambda(pop.models, len, f, target, 20);
    EXPECT_TRUE(r.feasible);
    EXPECT_LE(risk(r.lambda), target);
    EXPECT_GT(risk(r.lambda / (1.0 + 2e-6)), target - 1e-3);
    EXPECT_LT(r.iterations, 60);
}

TEST(TuneLambda, CorrectionIsMoreConservative) {
    const auto pop = mixed_population(40, 6);
    std::vector<int> len, f(40, 20);
    for (const auto& x : pop.instances) len.push_back(std::min(x.event_time, 20));
    const auto plain = tune_lambda(pop.models, len, f, 4.0, 20, false);
    const auto corrected = tune_lambda(pop.models, len, f, 4.0, 20, true);
    EXPECT_GE(corrected.lambda, plain.lambda);
}

TEST(RunLocal, DeterministicAndFeasibility) {
    const auto pop = mixed_population(300, 9);
    const std::vector<int> f(300, 20);
    LocalConfig cfg;
    cfg.budget = 6.0 * 300;
    cfg.n1 = 50;
    Rng a(3), b(3);
    const auto x = run_local(pop.instances, pop.models, f, cfg, a);
    const auto y = run_local(pop.instances, pop.models, f, cfg, b);
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_EQ(x[i].censoring_time, y[i].censoring_time);
        EXPECT_EQ(x[i].weight, y[i].weight);
    }
    cfg.budget = 10.0;
    Rng c(1);
    EXPECT_THROW(run_local(pop.instances, pop.models, f, cfg, c), InfeasibleBudget);
}
