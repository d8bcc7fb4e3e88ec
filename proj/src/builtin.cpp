#include "xopt/builtin.hpp"

#include <functional>
#include <map>
#include <stdexcept>

namespace xopt {

namespace {

AssetAmount amt(const ChainId& chain, const AssetId& asset, std::int64_t n) { return {chain, asset, n}; }

// Alice holds a call on Bob's guilder: pay 100 florin, receive 100 guilder.
// Premium 1 thaler, guarantee 2 ducat.
ScenarioConfig integrated_base(const std::string& name, std::uint64_t seed) {
    ScenarioConfig c;
    c.name = name;
    c.seed = seed;
    c.delta = 10;
    c.confirmation_lag = 1;
    c.horizon = 230;
    c.chains = {"chain_a", "chain_b", "chain_p", "chain_c"};
    c.parties = {
        {"alice", StrategyId::HonestHolder, {amt("chain_a", "florin", 100), amt("chain_p", "thaler", 10)}},
        {"bob", StrategyId::HonestWriter, {amt("chain_b", "guilder", 100), amt("chain_a", "ducat", 2)}},
    };
    OptionSpec& o = c.option;
    o.mode = OptionMode::Integrated;
    o.holder = "alice";
    o.writer = "bob";
    o.asset_a = amt("chain_a", "florin", 100);
    o.asset_b = amt("chain_b", "guilder", 100);
    o.guarantee = amt("chain_a", "ducat", 2);
    o.premium = amt("chain_p", "thaler", 1);
    o.premium_at = 1;
    o.activation_time = 30;
    o.expiry_time = 200;
    return c;
}

// Alice's Asset_A and Bob's Asset_B sit in HTLCs from genesis; Alice owns
// the exercise secret. The holder position carries the escrowed Asset_A, so
// an unexercised option refunds it to whoever holds the role at expiry.
ScenarioConfig htlc_base(const std::string& name, std::uint64_t seed) {
    ScenarioConfig c;
    c.name = name;
    c.seed = seed;
    c.horizon = 230;
    c.chains = {"chain_a", "chain_b", "chain_c"};
    c.parties = {
        {"alice", StrategyId::HonestHolder, {amt("chain_a", "florin", 100)}},
        {"bob", StrategyId::HonestWriter, {amt("chain_b", "guilder", 100)}},
        {"carol", StrategyId::HonestBuyer, {amt("chain_c", "thaler", 20)}},
    };
    OptionSpec& o = c.option;
    o.mode = OptionMode::Htlc;
    o.holder = "alice";
    o.writer = "bob";
    o.asset_a = amt("chain_a", "florin", 100);
    o.asset_b = amt("chain_b", "guilder", 100);
    o.expiry_time = 200;
    c.transfers = {{Role::Holder, "alice", "carol", amt("chain_c", "thaler", 5), 50, 80, 1}};
    return c;
}

void add_buyer(ScenarioConfig& c, const Party& p, StrategyId s = StrategyId::HonestBuyer, std::int64_t funds = 20) {
    c.parties.push_back({p, s, {amt("chain_c", "thaler", funds)}});
}

PartySpec& party(ScenarioConfig& c, const Party& p) {
    for (auto& s : c.parties)
        if (s.name == p) return s;
    throw std::logic_error("no party " + p);
}

using Deltas = std::map<std::string, std::int64_t>;
const Deltas kNone{};

Deltas swap_holder() { return {{"chain_a:florin", -100}, {"chain_b:guilder", 100}}; }
Deltas swap_writer() { return {{"chain_a:florin", 100}, {"chain_b:guilder", -100}}; }

ScenarioConfig fig2(const std::string& name, std::uint64_t seed, bool exercise) {
    ScenarioConfig c = integrated_base(name, seed);
    c.description = exercise ? "honest lifecycle, holder exercises at 60" : "honest lifecycle, holder lets it lapse";
    if (exercise) c.option.exercise_at = 60;
    c.theorems = {"safety", "option_correctness"};
    if (exercise) {
        c.expect["alice"] = {{"chain_a:florin", -100}, {"chain_b:guilder", 100}, {"chain_p:thaler", -1}};
        c.expect["bob"] = {{"chain_a:florin", 100}, {"chain_b:guilder", -100}, {"chain_p:thaler", 1}};
    } else {
        c.expect["alice"] = {{"chain_p:thaler", -1}};
        c.expect["bob"] = {{"chain_p:thaler", 1}};
    }
    return c;
}

ScenarioConfig holder_transfer(std::uint64_t seed) {
    ScenarioConfig c = integrated_base("holder-transfer", seed);
    c.description = "alice sells the holder role to carol";
    add_buyer(c, "carol");
    c.transfers = {{Role::Holder, "alice", "carol", amt("chain_c", "thaler", 5), 50, 80, 1}};
    c.theorems = {"safety", "liveness", "unobstructibility"};
    c.expect["alice"] = {{"chain_p:thaler", -1}, {"chain_c:thaler", 5}};
    c.expect["bob"] = {{"chain_p:thaler", 1}};
    c.expect["carol"] = {{"chain_c:thaler", -5}};
    return c;
}

// The writer position carries its collateral: after expiry the refunds go
// to whoever holds the writer role.
ScenarioConfig writer_transfer(std::uint64_t seed) {
    ScenarioConfig c = integrated_base("writer-transfer", seed);
    c.description = "bob sells the writer role to dave";
    add_buyer(c, "dave");
    c.transfers = {{Role::Writer, "bob", "dave", amt("chain_c", "thaler", 4), 50, 80, 1}};
    c.theorems = {"safety", "liveness", "unobstructibility"};
    c.expect["alice"] = {{"chain_p:thaler", -1}};
    c.expect["bob"] = {{"chain_p:thaler", 1}, {"chain_c:thaler", 4}, {"chain_a:ducat", -2}, {"chain_b:guilder", -100}};
    c.expect["dave"] = {{"chain_c:thaler", -4}, {"chain_a:ducat", 2}, {"chain_b:guilder", 100}};
    return c;
}

ScenarioConfig isolation(std::uint64_t seed) {
    ScenarioConfig c = integrated_base("isolation", seed);
    c.description = "holder and writer roles sold in the same window";
    add_buyer(c, "carol");
    add_buyer(c, "dave");
    c.transfers = {{Role::Holder, "alice", "carol", amt("chain_c", "thaler", 5), 50, 80, 1},
                   {Role::Writer, "bob", "dave", amt("chain_c", "thaler", 4), 50, 80, 1}};
    c.theorems = {"safety", "isolation"};
    c.expect["alice"] = {{"chain_p:thaler", -1}, {"chain_c:thaler", 5}};
    c.expect["bob"] = {{"chain_p:thaler", 1}, {"chain_c:thaler", 4}, {"chain_a:ducat", -2}, {"chain_b:guilder", -100}};
    c.expect["carol"] = {{"chain_c:thaler", -5}};
    c.expect["dave"] = {{"chain_c:thaler", -4}, {"chain_a:ducat", 2}, {"chain_b:guilder", 100}};
    return c;
}

ScenarioConfig independence(std::uint64_t seed) {
    ScenarioConfig c = integrated_base("independence", seed);
    c.description = "holder role resold: alice to carol to erin";
    c.option.expiry_time = 300;
    c.horizon = 330;
    add_buyer(c, "carol");
    add_buyer(c, "erin");
    c.transfers = {{Role::Holder, "alice", "carol", amt("chain_c", "thaler", 5), 50, 80, 1},
                   {Role::Holder, "carol", "erin", amt("chain_c", "thaler", 5), 100, 130, 1}};
    c.theorems = {"safety", "independence"};
    c.expect["alice"] = {{"chain_p:thaler", -1}, {"chain_c:thaler", 5}};
    c.expect["bob"] = {{"chain_p:thaler", 1}};
    c.expect["carol"] = kNone;
    c.expect["erin"] = {{"chain_c:thaler", -5}};
    return c;
}

ScenarioConfig double_sign(std::uint64_t seed) {
    ScenarioConfig c = htlc_base("double-sign", seed);
    c.description = "alice signs the holder transfer for two buyers";
    party(c, "alice").strategy = StrategyId::DoubleSign;
    add_buyer(c, "carol2");
    c.transfers.push_back({Role::Holder, "alice", "carol2", amt("chain_c", "thaler", 5), 50, 80, 1});
    c.theorems = {"safety"};
    c.expect["alice"] = {{"chain_a:florin", -100}};
    c.expect["bob"] = {{"chain_a:florin", 100}};
    c.expect["carol"] = kNone;
    c.expect["carol2"] = kNone;
    return c;
}

ScenarioConfig exercise_during_transfer(std::uint64_t seed) {
    ScenarioConfig c = htlc_base("exercise-during-transfer", seed);
    c.description = "alice reveals to carol and exercises in the same tick";
    party(c, "alice").strategy = StrategyId::ExerciseDuringTransfer;
    c.theorems = {"safety"};
    c.expect["alice"] = swap_holder();
    c.expect["bob"] = swap_writer();
    c.expect["carol"] = kNone;
    return c;
}

ScenarioConfig single_chain_publish(std::uint64_t seed) {
    ScenarioConfig c = htlc_base("single-chain-publish", seed);
    c.description = "carol forwards the transfer to Contract_A only";
    party(c, "carol").strategy = StrategyId::SingleChainPublish;
    c.theorems = {"safety", "unobstructibility"};
    c.expect["alice"] = {{"chain_a:florin", -100}, {"chain_c:thaler", 5}};
    c.expect["bob"] = kNone;
    c.expect["carol"] = {{"chain_a:florin", 100}, {"chain_c:thaler", -5}};
    return c;
}

ScenarioConfig collude_seller_writer(std::uint64_t seed) {
    ScenarioConfig c = htlc_base("collude-seller-writer", seed);
    c.description = "alice passes her exercise secret to bob, both settle while carol buys";
    party(c, "alice").strategy = StrategyId::ColludeSellerWriter;
    party(c, "bob").strategy = StrategyId::ColludeSellerWriter;
    c.collusion = {{{"alice", "bob"}, {"preimage"}}};
    c.theorems = {"safety"};
    c.expect["alice"] = swap_holder();
    c.expect["bob"] = swap_writer();
    c.expect["carol"] = kNone;
    return c;
}

ScenarioConfig collude_seller_writer_key(std::uint64_t seed) {
    ScenarioConfig c = htlc_base("collude-seller-writer-key", seed);
    c.description = "alice passes her transfer key to bob, who punishes with it as the sale reveals";
    party(c, "alice").strategy = StrategyId::ColludeSellerWriter;
    party(c, "bob").strategy = StrategyId::ColludeSellerWriter;
    c.collusion = {{{"alice", "bob"}, {"transfer_key"}}};
    c.theorems = {"safety"};
    c.expect["alice"] = {{"chain_a:florin", -100}};
    c.expect["bob"] = {{"chain_a:florin", 100}};
    c.expect["carol"] = kNone;
    return c;
}

ScenarioConfig collude_seller_buyer(std::uint64_t seed) {
    ScenarioConfig c = htlc_base("collude-seller-buyer", seed);
    c.description = "carol holds alice's key and forwards a different payload to Contract_B";
    party(c, "alice").strategy = StrategyId::ColludeSellerBuyer;
    party(c, "carol").strategy = StrategyId::ColludeSellerBuyer;
    c.collusion = {{{"alice", "carol"}, {"transfer_key"}}};
    c.theorems = {"safety"};
    c.expect["alice"] = {{"chain_a:florin", -100}, {"chain_c:thaler", 5}};
    c.expect["bob"] = {{"chain_a:florin", 100}};
    c.expect["carol"] = {{"chain_c:thaler", -5}};
    return c;
}

ScenarioConfig collude_writer_buyer(std::uint64_t seed) {
    ScenarioConfig c = htlc_base("collude-writer-buyer", seed);
    c.description = "bob and carol try to stall alice's sale with bogus evidence";
    party(c, "bob").strategy = StrategyId::ColludeWriterBuyer;
    party(c, "carol").strategy = StrategyId::ColludeWriterBuyer;
    c.collusion = {{{"bob", "carol"}, {}}};
    c.theorems = {"safety", "unobstructibility"};
    c.expect["alice"] = {{"chain_a:florin", -100}, {"chain_c:thaler", 5}};
    c.expect["bob"] = kNone;
    c.expect["carol"] = {{"chain_a:florin", 100}, {"chain_c:thaler", -5}};
    return c;
}

ScenarioConfig writer_no_reveal(std::uint64_t seed) {
    ScenarioConfig c = integrated_base("writer-no-reveal", seed);
    c.description = "bob never reveals after alice exercises";
    party(c, "bob").strategy = StrategyId::WriterNoReveal;
    c.option.exercise_at = 60;
    c.theorems = {"safety", "failure_compensation"};
    c.expect["alice"] = {{"chain_a:ducat", 2}, {"chain_p:thaler", -1}};
    c.expect["bob"] = {{"chain_a:ducat", -2}, {"chain_p:thaler", 1}};
    return c;
}

ScenarioConfig exercise_during_writer_transfer(std::uint64_t seed) {
    ScenarioConfig c = integrated_base("exercise-during-writer-transfer", seed);
    c.description = "alice exercises in the tick bob reveals the writer sale to dave";
    add_buyer(c, "dave");
    c.option.exercise_at = 59;
    c.transfers = {{Role::Writer, "bob", "dave", amt("chain_c", "thaler", 4), 50, 80, 1}};
    c.theorems = {"safety", "exercisability"};
    c.expect["alice"] = {{"chain_a:florin", -100}, {"chain_b:guilder", 100}, {"chain_p:thaler", -1}};
    c.expect["bob"] = {{"chain_b:guilder", -100}, {"chain_a:ducat", -2}, {"chain_p:thaler", 1}, {"chain_c:thaler", 4}};
    c.expect["dave"] = {{"chain_a:florin", 100}, {"chain_a:ducat", 2}, {"chain_c:thaler", -4}};
    return c;
}

const std::vector<std::pair<std::string, std::function<ScenarioConfig(std::uint64_t)>>>& registry() {
    static const std::vector<std::pair<std::string, std::function<ScenarioConfig(std::uint64_t)>>> r = {
        {"fig2-honest", [](std::uint64_t s) { return fig2("fig2-honest", s, true); }},
        {"fig2-abandon", [](std::uint64_t s) { return fig2("fig2-abandon", s, false); }},
        {"holder-transfer", holder_transfer},
        {"writer-transfer", writer_transfer},
        {"isolation", isolation},
        {"independence", independence},
        {"double-sign", double_sign},
        {"exercise-during-transfer", exercise_during_transfer},
        {"single-chain-publish", single_chain_publish},
        {"collude-seller-writer", collude_seller_writer},
        {"collude-seller-writer-key", collude_seller_writer_key},
        {"collude-seller-buyer", collude_seller_buyer},
        {"collude-writer-buyer", collude_writer_buyer},
        {"writer-no-reveal", writer_no_reveal},
        {"exercise-during-writer-transfer", exercise_during_writer_transfer},
        {"phantom-bids", [](std::uint64_t s) { return phantom(50, s); }},
    };
    return r;
}

}  // namespace

std::vector<std::string> builtin_names() {
    std::vector<std::string> out;
    for (const auto& [n, f] : registry()) out.push_back(n);
    return out;
}

std::vector<std::string> misbehavior_names() {
    return {"double-sign",           "exercise-during-transfer", "single-chain-publish",
            "collude-seller-writer", "collude-seller-writer-key", "collude-seller-buyer",
            "collude-writer-buyer",  "writer-no-reveal",          "exercise-during-writer-transfer"};
}

ScenarioConfig builtin(const std::string& name, std::uint64_t seed) {
    for (const auto& [n, f] : registry())
        if (n == name) return f(seed);
    throw std::invalid_argument("unknown scenario: " + name);
}

ScenarioConfig phantom(int k, std::uint64_t seed) {
    ScenarioConfig c = integrated_base(k == 50 ? "phantom-bids" : "phantom-bids-k" + std::to_string(k), seed);
    c.description = "mallory outbids carol with escrows she never completes";
    add_buyer(c, "mallory", StrategyId::PhantomBidders, 6 * static_cast<std::int64_t>(k));
    add_buyer(c, "carol");
    c.transfers = {{Role::Holder, "alice", "mallory", amt("chain_c", "thaler", 6), 50, 80, k},
                   {Role::Holder, "alice", "carol", amt("chain_c", "thaler", 5), 50, 80, 1}};
    c.theorems = {"safety", "unobstructibility"};
    c.expect["alice"] = {{"chain_p:thaler", -1}, {"chain_c:thaler", 6}};
    c.expect["bob"] = {{"chain_p:thaler", 1}};
    c.expect["carol"] = kNone;
    c.expect["mallory"] = {{"chain_c:thaler", -6}};
    return c;
}

bool Verdict::pass() const {
    for (const auto& [n, c] : checks)
        if (!c.pass) return false;
    return true;
}

Verdict evaluate(const ScenarioConfig& cfg) {
    Verdict v;
    v.scenario = cfg.name;
    const auto start = std::chrono::steady_clock::now();
    v.result = run(cfg);
    v.elapsed = std::chrono::steady_clock::now() - start;
    const PayoffReport& r = v.result.report;
    v.checks.emplace_back("conservation", CheckResult{r.conservation_ok, r.conservation_error});
    for (const auto& t : cfg.theorems) v.checks.emplace_back(t, check_theorem(r, v.result.trace, t));
    if (!cfg.expect.empty()) v.checks.emplace_back("balances", check_expectations(cfg, r));
    return v;
}

}  // namespace xopt
