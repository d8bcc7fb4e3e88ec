#include <gtest/gtest.h>

#include <json.hpp>

#include "xopt/builtin.hpp"
#include "xopt/config_io.hpp"

using namespace xopt;
using nlohmann::json;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config(text, "case.json");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::string mutate(const std::function<void(json&)>& f) {
    json j = json::parse(dump_config(builtin("holder-transfer")));
    f(j);
    return j.dump();
}

}  // namespace

TEST(ConfigIo, RoundTripsEveryBuiltin) {
    for (const auto& name : builtin_names()) {
        const ScenarioConfig cfg = builtin(name);
        const std::string text = dump_config(cfg);
        const ScenarioConfig back = parse_config(text, name);
        EXPECT_EQ(dump_config(back), text) << name;
        EXPECT_EQ(format_trace(run(back).trace), format_trace(run(cfg).trace)) << name;
    }
}

TEST(ConfigIo, SyntaxErrorNamesLineAndColumn) {
    EXPECT_EQ(error_of("{\n  \"name\": \"x\",\n  oops\n}"), "case.json:3:3: syntax error");
}

TEST(ConfigIo, SchemaErrorsNameTheField) {
    EXPECT_EQ(error_of(mutate([](json& j) { j.erase("horizon"); })), "case.json: horizon: missing");
    EXPECT_EQ(error_of(mutate([](json& j) { j["parties"][1]["strategy"] = "Sneaky"; })),
              "case.json: parties[1].strategy: unknown strategy 'Sneaky'");
    EXPECT_EQ(error_of(mutate([](json& j) { j["delta"] = "ten"; })), "case.json: delta: expected an integer");
    EXPECT_EQ(error_of(mutate([](json& j) { j["rules"]["speed"] = true; })), "case.json: rules.speed: unknown rule");
    EXPECT_EQ(error_of(mutate([](json& j) { j["option"]["mode"] = "american"; })),
              "case.json: option.mode: expected \"integrated\" or \"htlc\"");
    EXPECT_EQ(error_of(mutate([](json& j) { j["transfers"][0]["role"] = "buyer"; })),
              "case.json: transfers[0].role: expected \"holder\" or \"writer\"");
}

TEST(ConfigIo, ValidationErrorsArePrefixedWithSource) {
    const std::string e = error_of(mutate([](json& j) { j["option"]["holder"] = "zed"; }));
    EXPECT_EQ(e, "case.json: option.holder: unknown party 'zed'");
}

TEST(ConfigIo, MissingFile) {
    EXPECT_THROW(load_config("/nonexistent/scenario.json"), ConfigError);
}

TEST(ConfigIo, RulesRoundTrip) {
    ScenarioConfig cfg = builtin("double-sign");
    cfg.rules.extraction = false;
    EXPECT_FALSE(parse_config(dump_config(cfg)).rules.extraction);
    EXPECT_TRUE(parse_config(dump_config(cfg)).rules.withdrawal_delay);
}

TEST(WithDelta, ScalesEveryDeadline) {
    const ScenarioConfig base = builtin("holder-transfer");
    const ScenarioConfig d20 = with_delta(base, 2 * base.delta);
    EXPECT_EQ(d20.delta, 2 * base.delta);
    EXPECT_EQ(d20.horizon, 2 * base.horizon);
    EXPECT_EQ(d20.option.activation_time, 2 * base.option.activation_time);
    EXPECT_EQ(d20.option.expiry_time, 2 * base.option.expiry_time);
    EXPECT_EQ(d20.transfers[0].open_at, 2 * base.transfers[0].open_at);
    EXPECT_EQ(d20.transfers[0].deadline, 2 * base.transfers[0].deadline);
    EXPECT_EQ(d20.confirmation_lag, base.confirmation_lag);
    const Verdict v = evaluate(d20);
    EXPECT_TRUE(v.pass());
    const auto& t = v.result.report.transfers.at(0);
    EXPECT_EQ(*t.withdrawn - *t.opened, 4 * d20.delta);
}

TEST(WithDelta, RejectsInexactScaling) {
    ScenarioConfig odd = builtin("holder-transfer");
    odd.transfers[0].open_at = 45;
    EXPECT_EQ(with_delta(odd, 20).transfers[0].open_at, 90);
    EXPECT_THROW(with_delta(odd, 3), std::invalid_argument);
    EXPECT_THROW(with_delta(builtin("holder-transfer"), 0), std::invalid_argument);
}
