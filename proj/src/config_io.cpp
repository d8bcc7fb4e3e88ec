#include "xopt/config_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace xopt {

namespace {

using nlohmann::json;

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const std::string& path, const std::string& what) const {
        throw ConfigError(source_ + ": " + path + ": " + what);
    }

    const json& at(const json& j, const std::string& path, const char* key) const {
        if (!j.contains(key)) fail(path == "$" ? std::string(key) : path + "." + key, "missing");
        return j.at(key);
    }

    std::string str(const json& j, const std::string& path) const {
        if (!j.is_string()) fail(path, "expected a string");
        return j.get<std::string>();
    }
    std::int64_t integer(const json& j, const std::string& path) const {
        if (!j.is_number_integer()) fail(path, "expected an integer");
        return j.get<std::int64_t>();
    }
    bool boolean(const json& j, const std::string& path) const {
        if (!j.is_boolean()) fail(path, "expected true or false");
        return j.get<bool>();
    }
    const json& array(const json& j, const std::string& path) const {
        if (!j.is_array()) fail(path, "expected an array");
        return j;
    }
    const json& object(const json& j, const std::string& path) const {
        if (!j.is_object()) fail(path, "expected an object");
        return j;
    }

    AssetAmount amount(const json& j, const std::string& path) const {
        object(j, path);
        return {str(at(j, path, "chain"), path + ".chain"), str(at(j, path, "asset"), path + ".asset"),
                integer(at(j, path, "amount"), path + ".amount")};
    }

    Role role(const json& j, const std::string& path) const {
        const std::string s = str(j, path);
        if (s == "holder") return Role::Holder;
        if (s == "writer") return Role::Writer;
        fail(path, "expected \"holder\" or \"writer\"");
    }

private:
    std::string source_;
};

std::string line_col(std::string_view text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return std::to_string(line) + ":" + std::to_string(col);
}

json amount_json(const AssetAmount& a) { return {{"chain", a.chain}, {"asset", a.asset}, {"amount", a.amount}}; }

}  // namespace

ScenarioConfig parse_config(std::string_view text, const std::string& source) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // byte is one past the offending character
        throw ConfigError(source + ":" + line_col(text, e.byte == 0 ? 0 : e.byte - 1) + ": syntax error");
    }
    Reader rd(source);
    rd.object(j, "$");
    ScenarioConfig c;
    c.name = rd.str(rd.at(j, "$", "name"), "name");
    if (j.contains("description")) c.description = rd.str(j["description"], "description");
    if (j.contains("seed")) {
        const std::int64_t s = rd.integer(j["seed"], "seed");
        if (s < 0) rd.fail("seed", "must be non-negative");
        c.seed = static_cast<std::uint64_t>(s);
    }
    if (j.contains("delta")) c.delta = rd.integer(j["delta"], "delta");
    if (j.contains("confirmation_lag")) c.confirmation_lag = rd.integer(j["confirmation_lag"], "confirmation_lag");
    c.horizon = rd.integer(rd.at(j, "$", "horizon"), "horizon");
    if (j.contains("rules")) {
        const json& r = rd.object(j["rules"], "rules");
        for (const auto& [k, v] : r.items()) {
            const std::string p = "rules." + k;
            if (k == "withdrawal_delay") c.rules.withdrawal_delay = rd.boolean(v, p);
            else if (k == "contestation_window") c.rules.contestation_window = rd.boolean(v, p);
            else if (k == "extraction") c.rules.extraction = rd.boolean(v, p);
            else rd.fail(p, "unknown rule");
        }
    }
    const json& chains = rd.array(rd.at(j, "$", "chains"), "chains");
    for (std::size_t i = 0; i < chains.size(); ++i) c.chains.push_back(rd.str(chains[i], "chains[" + std::to_string(i) + "]"));

    const json& parties = rd.array(rd.at(j, "$", "parties"), "parties");
    for (std::size_t i = 0; i < parties.size(); ++i) {
        const std::string p = "parties[" + std::to_string(i) + "]";
        const json& pj = rd.object(parties[i], p);
        PartySpec ps;
        ps.name = rd.str(rd.at(pj, p, "name"), p + ".name");
        const std::string s = rd.str(rd.at(pj, p, "strategy"), p + ".strategy");
        auto id = parse_strategy(s);
        if (!id) rd.fail(p + ".strategy", "unknown strategy '" + s + "'");
        ps.strategy = *id;
        if (pj.contains("balances")) {
            const json& b = rd.array(pj["balances"], p + ".balances");
            for (std::size_t k = 0; k < b.size(); ++k)
                ps.balances.push_back(rd.amount(b[k], p + ".balances[" + std::to_string(k) + "]"));
        }
        c.parties.push_back(std::move(ps));
    }

    const json& o = rd.object(rd.at(j, "$", "option"), "option");
    const std::string mode = rd.str(rd.at(o, "option", "mode"), "option.mode");
    if (mode == "integrated") c.option.mode = OptionMode::Integrated;
    else if (mode == "htlc") c.option.mode = OptionMode::Htlc;
    else rd.fail("option.mode", "expected \"integrated\" or \"htlc\"");
    c.option.holder = rd.str(rd.at(o, "option", "holder"), "option.holder");
    c.option.writer = rd.str(rd.at(o, "option", "writer"), "option.writer");
    c.option.asset_a = rd.amount(rd.at(o, "option", "asset_a"), "option.asset_a");
    c.option.asset_b = rd.amount(rd.at(o, "option", "asset_b"), "option.asset_b");
    if (c.option.mode == OptionMode::Integrated) {
        c.option.guarantee = rd.amount(rd.at(o, "option", "guarantee"), "option.guarantee");
        c.option.premium = rd.amount(rd.at(o, "option", "premium"), "option.premium");
        c.option.activation_time = rd.integer(rd.at(o, "option", "activation_time"), "option.activation_time");
        if (o.contains("premium_at")) c.option.premium_at = rd.integer(o["premium_at"], "option.premium_at");
    }
    c.option.expiry_time = rd.integer(rd.at(o, "option", "expiry_time"), "option.expiry_time");
    if (o.contains("exercise_at") && !o["exercise_at"].is_null())
        c.option.exercise_at = rd.integer(o["exercise_at"], "option.exercise_at");

    if (j.contains("transfers")) {
        const json& ts = rd.array(j["transfers"], "transfers");
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const std::string p = "transfers[" + std::to_string(i) + "]";
            const json& tj = rd.object(ts[i], p);
            TransferSpec t;
            t.role = rd.role(rd.at(tj, p, "role"), p + ".role");
            t.seller = rd.str(rd.at(tj, p, "seller"), p + ".seller");
            t.buyer = rd.str(rd.at(tj, p, "buyer"), p + ".buyer");
            t.fee = rd.amount(rd.at(tj, p, "fee"), p + ".fee");
            t.open_at = rd.integer(rd.at(tj, p, "open_at"), p + ".open_at");
            t.deadline = rd.integer(rd.at(tj, p, "deadline"), p + ".deadline");
            if (tj.contains("count")) t.count = static_cast<int>(rd.integer(tj["count"], p + ".count"));
            c.transfers.push_back(std::move(t));
        }
    }
    if (j.contains("collusion")) {
        const json& cs = rd.array(j["collusion"], "collusion");
        for (std::size_t i = 0; i < cs.size(); ++i) {
            const std::string p = "collusion[" + std::to_string(i) + "]";
            const json& cj = rd.object(cs[i], p);
            CollusionChannel ch;
            const json& m = rd.array(rd.at(cj, p, "members"), p + ".members");
            for (std::size_t k = 0; k < m.size(); ++k) ch.members.push_back(rd.str(m[k], p + ".members"));
            const json& s = rd.array(rd.at(cj, p, "shares"), p + ".shares");
            for (std::size_t k = 0; k < s.size(); ++k) ch.shares.push_back(rd.str(s[k], p + ".shares"));
            c.collusion.push_back(std::move(ch));
        }
    }
    if (j.contains("theorems")) {
        const json& th = rd.array(j["theorems"], "theorems");
        for (std::size_t i = 0; i < th.size(); ++i) c.theorems.push_back(rd.str(th[i], "theorems[" + std::to_string(i) + "]"));
    }
    if (j.contains("expect")) {
        for (const auto& [party, m] : rd.object(j["expect"], "expect").items()) {
            c.expect[party];  // an empty map still pins every delta to zero
            for (const auto& [k, v] : rd.object(m, "expect." + party).items())
                c.expect[party][k] = rd.integer(v, "expect." + party + "." + k);
        }
    }
    try {
        validate(c);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string dump_config(const ScenarioConfig& c) {
    json j;
    j["name"] = c.name;
    if (!c.description.empty()) j["description"] = c.description;
    j["seed"] = c.seed;
    j["delta"] = c.delta;
    j["confirmation_lag"] = c.confirmation_lag;
    j["horizon"] = c.horizon;
    j["rules"] = {{"withdrawal_delay", c.rules.withdrawal_delay},
                  {"contestation_window", c.rules.contestation_window},
                  {"extraction", c.rules.extraction}};
    j["chains"] = c.chains;
    json parties = json::array();
    for (const auto& p : c.parties) {
        json b = json::array();
        for (const auto& a : p.balances) b.push_back(amount_json(a));
        parties.push_back({{"name", p.name}, {"strategy", to_string(p.strategy)}, {"balances", b}});
    }
    j["parties"] = parties;
    json o = {{"mode", to_string(c.option.mode)},
              {"holder", c.option.holder},
              {"writer", c.option.writer},
              {"asset_a", amount_json(c.option.asset_a)},
              {"asset_b", amount_json(c.option.asset_b)},
              {"expiry_time", c.option.expiry_time}};
    if (c.option.mode == OptionMode::Integrated) {
        o["guarantee"] = amount_json(c.option.guarantee);
        o["premium"] = amount_json(c.option.premium);
        o["premium_at"] = c.option.premium_at;
        o["activation_time"] = c.option.activation_time;
    }
    if (c.option.exercise_at) o["exercise_at"] = *c.option.exercise_at;
    j["option"] = o;
    json ts = json::array();
    for (const auto& t : c.transfers) {
        ts.push_back({{"role", to_string(t.role)},
                      {"seller", t.seller},
                      {"buyer", t.buyer},
                      {"fee", amount_json(t.fee)},
                      {"open_at", t.open_at},
                      {"deadline", t.deadline},
                      {"count", t.count}});
    }
    j["transfers"] = ts;
    json cs = json::array();
    for (const auto& ch : c.collusion) cs.push_back({{"members", ch.members}, {"shares", ch.shares}});
    j["collusion"] = cs;
    j["theorems"] = c.theorems;
    j["expect"] = c.expect;
    return j.dump(2) + "\n";
}

ScenarioConfig with_delta(const ScenarioConfig& cfg, Tick delta) {
    if (delta <= 0) throw std::invalid_argument("delta must be positive");
    ScenarioConfig c = cfg;
    auto scale = [&](Tick& t, const char* what) {
        if ((t * delta) % cfg.delta != 0) {
            throw std::invalid_argument(std::string(what) + " = " + std::to_string(t) + " does not scale to delta " +
                                        std::to_string(delta));
        }
        t = t * delta / cfg.delta;
    };
    c.delta = delta;
    scale(c.horizon, "horizon");
    scale(c.option.activation_time, "option.activation_time");
    scale(c.option.expiry_time, "option.expiry_time");
    if (c.option.exercise_at) scale(*c.option.exercise_at, "option.exercise_at");
    for (auto& t : c.transfers) {
        scale(t.open_at, "transfers.open_at");
        scale(t.deadline, "transfers.deadline");
    }
    return c;
}

}  // namespace xopt
