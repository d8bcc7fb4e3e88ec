#include <gtest/gtest.h>

#include <cmath>

#include <json.hpp>

#include "xopt/analytics.hpp"
#include "xopt/builtin.hpp"

using namespace xopt;

namespace {

// Mean of a geometric count of failures before the first success.
double mean_failures(double p) { return (1.0 - p) / p; }

}  // namespace

TEST(TimeModel, ClosedForm) {
    for (double p : {0.1, 0.3, 0.5, 0.9, 1.0}) {
        EXPECT_DOUBLE_EQ(expected_time(ours_model(p)), 4.0);
        EXPECT_NEAR(expected_time(baseline_model(p)), 9.0 + 5.0 * mean_failures(p), 1e-12);
    }
    EXPECT_NEAR(retry_component(baseline_model(0.1)), 45.0, 1e-12);
    EXPECT_DOUBLE_EQ(expected_time(baseline_model(1.0)), 9.0);
    EXPECT_DOUBLE_EQ(retry_component(ours_model(0.1)), 0.0);
}

TEST(TimeModel, BaselineDecreasesWithP) {
    double prev = INFINITY;
    for (double p = 0.05; p <= 1.0; p += 0.05) {
        const double t = expected_time(baseline_model(p));
        EXPECT_LT(t, prev);
        EXPECT_GE(t, expected_time(ours_model(p)));
        prev = t;
    }
}

TEST(TimeModel, InvalidModelsThrow) {
    EXPECT_THROW(expected_time(baseline_model(0.0)), std::invalid_argument);
    EXPECT_THROW(expected_time(baseline_model(1.5)), std::invalid_argument);
    EXPECT_THROW(expected_time(baseline_model(0.5, -1.0)), std::invalid_argument);
    EXPECT_THROW(simulate_time(baseline_model(0.5), 0, 1), std::invalid_argument);
}

TEST(MonteCarlo, ExactAtCertainty) {
    EXPECT_DOUBLE_EQ(simulate_time(baseline_model(1.0), 1000, 3), 9.0);
    EXPECT_DOUBLE_EQ(simulate_time(ours_model(0.2), 1000, 3), 4.0);
}

TEST(MonteCarlo, ReproducibleAndSeedSensitive) {
    EXPECT_EQ(simulate_time(baseline_model(0.3), 5000, 11), simulate_time(baseline_model(0.3), 5000, 11));
    EXPECT_NE(simulate_time(baseline_model(0.3), 5000, 11), simulate_time(baseline_model(0.3), 5000, 12));
}

TEST(MonteCarlo, WithinOnePercent) {
    for (double p : {0.1, 0.3, 0.5, 0.9, 1.0}) {
        const double exact = expected_time(baseline_model(p));
        EXPECT_LE(std::abs(simulate_time(baseline_model(p), 100000, 7) - exact), 0.01 * exact) << p;
    }
}

TEST(Table, ClosedFormRowsAndJson) {
    const auto rows = time_table({0.1, 1.0}, 0, 7);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_DOUBLE_EQ(rows[0].ours, 4.0);
    EXPECT_NEAR(rows[0].baseline, 54.0, 1e-12);
    EXPECT_DOUBLE_EQ(rows[1].baseline, 9.0);
    const auto j = nlohmann::json::parse(table_json(rows));
    ASSERT_TRUE(j.is_array());
    EXPECT_TRUE(j[0].contains("p"));
    EXPECT_TRUE(j[0].contains("ours_Δ"));
    EXPECT_TRUE(j[0].contains("baseline_Δ"));
    const std::string text = table_text(rows);
    EXPECT_NE(text.find("ours_Δ"), std::string::npos);
    EXPECT_NE(text.find("baseline_Δ"), std::string::npos);
}

TEST(CostReport, HonestHolderTransferSellerSubmitsTwo) {
    const CostReport c = cost_report(run(builtin("holder-transfer")).trace);
    EXPECT_EQ(c.at("alice").at("transfer"), 2);
}

TEST(CostReport, HonestExerciseWriterSubmitsOne) {
    const CostReport c = cost_report(run(builtin("fig2-honest")).trace);
    EXPECT_EQ(c.at("bob").at("exercise"), 1);
    EXPECT_EQ(c.at("alice").at("exercise"), 2);  // exercise and collateral claim
}

TEST(CostReport, EmptyTrace) {
    const CostReport c = cost_report({});
    EXPECT_TRUE(c.empty());
    EXPECT_FALSE(cost_report_text(c).empty());
}

TEST(CostReport, RejectedCallsCountInTheirPhase) {
    Event e;
    e.kind = "rejected";
    e.by = "bob";
    e.fields = {{"call", "withdraw_fee"}, {"reason", "x"}};
    EXPECT_EQ(phase_of(e), "transfer");
    e.fields = {{"call", "exercise"}, {"reason", "x"}};
    EXPECT_EQ(phase_of(e), "exercise");
    e.fields = {{"call", "deploy_option"}, {"reason", "x"}};
    EXPECT_EQ(phase_of(e), "setup");
    EXPECT_EQ(cost_report({e}).at("bob").at("setup"), 1);
}
