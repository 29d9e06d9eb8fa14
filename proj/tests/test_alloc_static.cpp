#include <gtest/gtest.h>

#include "dapro/alloc_static.hpp"

using namespace dapro;

TEST(PlanStatic, TwoTargetExample) {
    const std::vector<int> f{4, 9};
    const auto plan = plan_static(f, 5.0);
    EXPECT_NEAR(plan.lambda_star, 1.0, 1e-15);
    EXPECT_NEAR(plan.probabilities[0], 0.5, 1e-15);
    EXPECT_NEAR(plan.probabilities[1], 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(plan.planned_budget(f), 5.0, 1e-12);
}

TEST(PlanStatic, SingleTargetExactlyAffordable) {
    const std::vector<int> f{7};
    const auto plan = plan_static(f, 7.0);
    EXPECT_NEAR(plan.lambda_star, 1.0 / 7.0, 1e-15);
    EXPECT_DOUBLE_EQ(plan.probabilities[0], 1.0);
    EXPECT_NEAR(plan.planned_budget(f), 7.0, 1e-12);
}

TEST(PlanStatic, EqualTargetsHalfBudget) {
    const std::vector<int> f(40, 12);
    const auto plan = plan_static(f, 40 * 12 / 2.0);
    for (double p : plan.probabilities) EXPECT_NEAR(p, 0.5, 1e-14);
}

TEST(PlanStatic, PlannedBudgetNeverExceedsBudget) {
    Rng rng(3);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<int> f(1 + rng.below(30));
        for (int& v : f) v = 1 + static_cast<int>(rng.below(200));
        const double b = 0.5 + 3000.0 * rng.uniform();
        const auto plan = plan_static(f, b);
        EXPECT_LE(plan.planned_budget(f), b * (1 + 1e-12));
        for (double p : plan.probabilities) {
            EXPECT_GT(p, 0.0);
            EXPECT_LE(p, 1.0);
        }
    }
}

TEST(PlanStatic, NonPositiveBudgetIsConfigError) {
    const std::vector<int> f{3};
    EXPECT_THROW(plan_static(f, 0.0), ConfigError);
    EXPECT_THROW(plan_static(f, -1.0), ConfigError);
}

TEST(ExecuteStatic, CertainObservation) {
    const std::vector<int> f{5, 5}, t{3, 8};
    StaticPlan plan{1.0, {1.0, 1.0}};
    Rng rng(1);
    const auto out = execute_static(plan, t, f, rng);
    EXPECT_EQ(out[0].censoring_time, 5);
    EXPECT_EQ(out[0].censored_time, 3);
    EXPECT_EQ(out[0].budget_spent, 3);
    EXPECT_TRUE(out[0].event_observed);
    EXPECT_EQ(out[1].censored_time, 5);
    EXPECT_FALSE(out[1].event_observed);
    for (const auto& o : out) EXPECT_DOUBLE_EQ(o.weight, 1.0);
}

TEST(ExecuteStatic, BernoulliRateMatches) {
    const std::vector<int> f{9};
    const auto plan = plan_static(f, 3.0);
    ASSERT_NEAR(plan.probabilities[0], 1.0 / 3.0, 1e-15);
    Rng rng(17);
    const std::vector<int> t{100};
    int hits = 0;
    for (int rep = 0; rep < 30000; ++rep) {
        const auto o = execute_static(plan, t, f, rng).front();
        hits += o.censoring_time == 9;
        EXPECT_DOUBLE_EQ(o.weight, 3.0);
        EXPECT_EQ(o.budget_spent, o.censoring_time == 9 ? 9 : 0);
    }
    EXPECT_NEAR(hits / 30000.0, 1.0 / 3.0, 0.01);
}

TEST(ExecuteStatic, RealizedBudgetIsUnbiased) {
    Rng gen(4);
    std::vector<int> f(50), t(50);
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = 1 + static_cast<int>(gen.below(40));
        t[i] = 1 + static_cast<int>(gen.below(60));
    }
    const auto plan = plan_static(f, 300.0);
    double expected = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) expected += plan.probabilities[i] * std::min(t[i], f[i]);
    Rng rng(5);
    double mean = 0.0;
    const int reps = 4000;
    for (int rep = 0; rep < reps; ++rep) mean += static_cast<double>(total_budget(execute_static(plan, t, f, rng)));
    mean /= reps;
    EXPECT_NEAR(mean / expected, 1.0, 0.01);
    EXPECT_LE(expected, 300.0);
}

TEST(ExecuteStatic, MismatchIsDomainError) {
    StaticPlan plan{1.0, {1.0}};
    Rng rng(1);
    EXPECT_THROW(execute_static(plan, std::vector<int>{1, 2}, std::vector<int>{1, 2}, rng), DomainError);
}

TEST(RandomSplit, SizeAndDeterminism) {
    Rng a(8), b(8);
    const auto m1 = random_split(100, 37, a);
    const auto m2 = random_split(100, 37, b);
    EXPECT_EQ(m1, m2);
    EXPECT_EQ(std::count(m1.begin(), m1.end(), true), 37);
}
