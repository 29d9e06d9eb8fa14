#include <gtest/gtest.h>

#include <sstream>

#include "dapro/survival_calibration.hpp"

using namespace dapro;

namespace {

WeightedObservation obs(int censored, int censoring, bool event, double w, std::span<const int> curve) {
    WeightedObservation o;
    o.censored_time = censored;
    o.censoring_time = censoring;
    o.event_observed = event;
    o.weight = w;
    o.quantile_curve = curve;
    return o;
}

} // namespace

TEST(TrimQuantile, Examples) {
    EXPECT_EQ(trim_quantile(150, 200), 150);
    EXPECT_EQ(trim_quantile(201, 200), 200);
    EXPECT_EQ(trim_quantile(201, 200), 200);  // sentinel for t_max = 200
    EXPECT_EQ(trim_quantile(51, 50), 50);
}

TEST(QuantileCurve, MatchesPointwiseQuantile) {
    const SurrogateModel m(std::vector<double>(30, 0.1));
    const auto grid = TauGrid::linear(0.05, 0.95, 37);
    const auto curve = quantile_curve(m, grid, 20);
    for (std::size_t k = 0; k < grid.size(); ++k)
        EXPECT_EQ(curve[k], trim_quantile(quantile_estimate(m, grid.values[k]), 20));
    EXPECT_TRUE(std::is_sorted(curve.begin(), curve.end()));
}

TEST(TauGrid, DefaultsAndValidation) {
    const auto lpb = TauGrid::default_lpb();
    EXPECT_EQ(lpb.size(), 1000u);
    EXPECT_DOUBLE_EQ(lpb.values.front(), 0.001);
    EXPECT_DOUBLE_EQ(lpb.values.back(), 0.977);
    EXPECT_NO_THROW(lpb.validate());
    EXPECT_EQ(TauGrid::default_upb().size(), 3000u);
    EXPECT_THROW(TauGrid::from_values({0.2, 0.1}), ConfigError);
    EXPECT_THROW(TauGrid::from_values({0.0, 0.1}), ConfigError);
    EXPECT_EQ(lpb.restricted(0.5).values.back() <= 0.5, true);
}

TEST(MiscoverageEstimate, WeightedExample) {
    // Samples 1 and 2 miss: the event is seen before the bound and the bound fits under C.
    const std::vector<int> curve{4};
    std::vector<WeightedObservation> o{obs(2, 10, true, 1.0, curve), obs(3, 10, true, 2.0, curve),
                                       obs(7, 10, true, 1.0, curve), obs(0, 0, false, 1.0, curve)};
    EXPECT_DOUBLE_EQ(miscoverage_estimate(o, 0), 0.75);
}

TEST(MiscoverageEstimate, ZeroBoundNeverMisses) {
    const std::vector<int> curve{0};
    std::vector<WeightedObservation> o{obs(0, 5, true, 3.0, curve), obs(2, 5, true, 1.0, curve)};
    EXPECT_DOUBLE_EQ(miscoverage_estimate(o, 0), 0.0);
}

TEST(MiscoverageEstimate, FullMiss) {
    const std::vector<int> curve{9};
    std::vector<WeightedObservation> o(5, obs(1, 9, true, 1.0, curve));
    EXPECT_DOUBLE_EQ(miscoverage_estimate(o, 0), 1.0);
}

TEST(MiscoverageEstimate, BoundAboveCensoringIsNotCounted) {
    const std::vector<int> curve{6};
    std::vector<WeightedObservation> o{obs(2, 5, false, 1.0, curve)};
    EXPECT_DOUBLE_EQ(miscoverage_estimate(o, 0), 0.0);
}

TEST(MiscoverageCurve, AgreesWithPointEstimates) {
    std::vector<std::vector<int>> curves{{1, 3, 5}, {2, 2, 8}, {0, 4, 4}};
    std::vector<WeightedObservation> o{obs(2, 5, true, 1.5, curves[0]), obs(3, 8, false, 2.0, curves[1]),
                                       obs(3, 4, true, 1.0, curves[2])};
    const auto c = miscoverage_curve(o, 3);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(c[k], miscoverage_estimate(o, k));
}

TEST(CalibrateTau, RunningMaxPicksLargestValid) {
    const auto grid = TauGrid::from_values({0.1, 0.2, 0.3});
    const auto r = calibrate_tau(grid, {0.05, 0.08, 0.12}, 0.1);
    EXPECT_DOUBLE_EQ(r.tau_hat, 0.2);
    EXPECT_EQ(r.index, 1);
}

TEST(CalibrateTau, EarlyExcessBlocksLaterPoints) {
    const auto grid = TauGrid::from_values({0.1, 0.2, 0.3});
    const auto r = calibrate_tau(grid, {0.12, 0.05, 0.05}, 0.1);
    EXPECT_TRUE(r.vacuous());
    EXPECT_DOUBLE_EQ(r.tau_hat, 0.0);
}

TEST(CalibrateTau, ZeroCurveTakesWholeGrid) {
    const auto grid = TauGrid::from_values({0.1, 0.2, 0.3});
    EXPECT_DOUBLE_EQ(calibrate_tau(grid, {0, 0, 0}, 0.1).tau_hat, 0.3);
    EXPECT_DOUBLE_EQ(calibrate_tau(grid, {0, 0, 0}, 0.1, BoundKind::upb).tau_hat, 0.1);
}

TEST(CalibrateTau, ClosestSelection) {
    const auto grid = TauGrid::from_values({0.1, 0.2, 0.3, 0.4});
    const auto r = calibrate_tau(grid, {0.02, 0.09, 0.07, 0.3}, 0.1, BoundKind::lpb, TauSelection::closest);
    EXPECT_EQ(r.index, 1);
    const auto s = calibrate_tau(grid, {0.02, 0.09, 0.07, 0.3}, 0.1, BoundKind::lpb, TauSelection::supremum);
    EXPECT_EQ(s.index, 2);
}

TEST(CalibrateTau, UpperBoundUsesSuffix) {
    const auto grid = TauGrid::from_values({0.5, 0.6, 0.7});
    EXPECT_EQ(calibrate_tau(grid, {0.3, 0.08, 0.02}, 0.1, BoundKind::upb).index, 1);
    EXPECT_TRUE(calibrate_tau(grid, {0.0, 0.0, 0.2}, 0.1, BoundKind::upb).vacuous());
}

TEST(CalibrateTau, MismatchedCurveIsDomainError) {
    EXPECT_THROW(calibrate_tau(TauGrid::from_values({0.1, 0.2}), {0.0}, 0.1), DomainError);
}

TEST(BuildBound, VacuousAndLookup) {
    const auto grid = TauGrid::from_values({0.1, 0.2, 0.3});
    const std::vector<int> curve{3, 7, 11};
    const auto vac = calibrate_tau(grid, {0.5, 0.5, 0.5}, 0.1);
    EXPECT_EQ(build_bound(vac, curve, 50), 0);
    const auto vac_u = calibrate_tau(grid, {0.5, 0.5, 0.5}, 0.1, BoundKind::upb);
    EXPECT_EQ(build_bound(vac_u, curve, 50), 50);
    const auto r = calibrate_tau(grid, {0.0, 0.05, 0.5}, 0.1);
    EXPECT_EQ(build_bound(r, curve, 50), 7);
    EXPECT_EQ(build_bound(calibrate_tau(grid, {0.0, 0.05, 0.5}, 0.1), curve, 50), 7);
}

TEST(CoverageEval, Examples) {
    const std::vector<int> t{5, 201, 100};
    EXPECT_DOUBLE_EQ(coverage_eval(t, std::vector<int>{0, 0, 0}, BoundKind::lpb, 200).coverage, 1.0);
    EXPECT_NEAR(coverage_eval(t, std::vector<int>{5, 10, 101}, BoundKind::lpb, 200).coverage, 2.0 / 3.0, 1e-15);
    EXPECT_DOUBLE_EQ(coverage_eval(t, std::vector<int>{200, 200, 200}, BoundKind::upb, 200).coverage, 1.0);
    EXPECT_NEAR(coverage_eval(t, std::vector<int>{5, 150, 99}, BoundKind::upb, 200).coverage, 1.0 / 3.0, 1e-15);
}

TEST(CoverageEval, LengthMismatch) {
    EXPECT_THROW(coverage_eval(std::vector<int>{1}, std::vector<int>{1, 2}, BoundKind::lpb, 5), DomainError);
}

TEST(UpperBound, HorizonBoundNeverMisses) {
    const std::vector<int> curve{10};
    std::vector<WeightedObservation> o{obs(10, 10, false, 1.0, curve)};
    EXPECT_DOUBLE_EQ(miscoverage_estimate(o, 0, BoundKind::upb, 10), 0.0);
    const std::vector<int> low{6};
    std::vector<WeightedObservation> p{obs(10, 10, false, 1.0, low)};
    EXPECT_DOUBLE_EQ(miscoverage_estimate(p, 0, BoundKind::upb, 10), 1.0);
}

TEST(WriteCalibration, Format) {
    const auto r = calibrate_tau(TauGrid::from_values({0.25, 0.5}), {0.0, 0.125}, 0.1);
    std::ostringstream os;
    write_calibration(os, r);
    EXPECT_EQ(os.str(), "bound_kind=LPB\ntau_hat=0.25\nindex=0\ngrid=0.25,0.5\nalpha_curve=0,0.125\n");
}
