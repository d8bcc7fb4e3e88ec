#include "xopt/scenario.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "xopt/contracts.hpp"
#include "xopt/parties.hpp"

namespace xopt {

std::string asset_key(const AssetAmount& a) { return a.chain + ":" + a.asset; }

const PartySpec* find_party(const ScenarioConfig& cfg, const Party& p) {
    for (const auto& s : cfg.parties)
        if (s.name == p) return &s;
    return nullptr;
}

namespace {

void check(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

}  // namespace

void validate(const ScenarioConfig& cfg) {
    check(!cfg.name.empty(), "name: must be nonempty");
    check(cfg.delta > 0, "delta: must be positive");
    check(cfg.confirmation_lag >= 1 && cfg.confirmation_lag <= cfg.delta, "confirmation_lag: must lie in [1, delta]");
    check(cfg.horizon > 0, "horizon: must be positive");
    std::set<ChainId> chains(cfg.chains.begin(), cfg.chains.end());
    check(!chains.empty() && chains.size() == cfg.chains.size(), "chains: must be nonempty and distinct");
    auto known_chain = [&](const AssetAmount& a, const std::string& field) {
        check(chains.contains(a.chain), field + ": unknown chain '" + a.chain + "'");
        check(a.amount >= 0, field + ": amount must be non-negative");
    };
    std::set<Party> names;
    for (const auto& p : cfg.parties) {
        check(!p.name.empty() && names.insert(p.name).second, "parties: names must be nonempty and distinct");
        for (const auto& b : p.balances) known_chain(b, "parties." + p.name + ".balances");
    }
    const OptionSpec& o = cfg.option;
    check(names.contains(o.holder), "option.holder: unknown party '" + o.holder + "'");
    check(names.contains(o.writer), "option.writer: unknown party '" + o.writer + "'");
    check(o.holder != o.writer, "option: holder and writer must differ");
    known_chain(o.asset_a, "option.asset_a");
    known_chain(o.asset_b, "option.asset_b");
    check(o.asset_a.chain != o.asset_b.chain, "option: Asset_A and Asset_B must live on different chains");
    check(o.expiry_time > 0, "option.expiry_time: must be positive");
    if (o.mode == OptionMode::Integrated) {
        known_chain(o.guarantee, "option.guarantee");
        known_chain(o.premium, "option.premium");
        check(o.guarantee.chain == o.asset_a.chain, "option.guarantee: must live on Asset_A's chain");
        check(o.premium_at >= cfg.confirmation_lag, "option.premium_at: earlier than the first confirmation");
        check(o.premium_at + cfg.confirmation_lag <= o.activation_time - cfg.delta,
              "option.activation_time: leaves no room to deploy by T_A - delta");
        check(o.activation_time <= o.expiry_time, "option: T_A must not exceed T_E");
    }
    for (std::size_t i = 0; i < cfg.transfers.size(); ++i) {
        const TransferSpec& t = cfg.transfers[i];
        const std::string f = "transfers[" + std::to_string(i) + "]";
        check(names.contains(t.seller), f + ".seller: unknown party '" + t.seller + "'");
        check(names.contains(t.buyer), f + ".buyer: unknown party '" + t.buyer + "'");
        check(t.seller != t.buyer, f + ": seller and buyer must differ");
        known_chain(t.fee, f + ".fee");
        check(t.count >= 1 && t.count <= 1000, f + ".count: must lie in [1, 1000]");
        check(t.open_at >= cfg.confirmation_lag, f + ".open_at: earlier than the first confirmation");
        check(t.open_at <= t.deadline - 3 * cfg.delta, f + ".deadline: escrow must open by deadline - 3*delta");
        check(t.deadline <= o.expiry_time - 4 * cfg.delta, f + ".deadline: transfers must finish by T_E - 4*delta");
    }
    for (std::size_t i = 0; i < cfg.collusion.size(); ++i) {
        const auto& ch = cfg.collusion[i];
        const std::string f = "collusion[" + std::to_string(i) + "]";
        check(ch.members.size() >= 2, f + ".members: need at least two");
        for (const auto& m : ch.members) check(names.contains(m), f + ".members: unknown party '" + m + "'");
        for (const auto& s : ch.shares) {
            check(s == "preimage" || s == "transfer_key", f + ".shares: unknown kind '" + s + "'");
        }
    }
    for (const auto& t : cfg.theorems) {
        check(std::find(kTheorems.begin(), kTheorems.end(), t) != kTheorems.end(), "theorems: unknown '" + t + "'");
    }
    for (const auto& [p, m] : cfg.expect) {
        check(names.contains(p), "expect: unknown party '" + p + "'");
        for (const auto& [k, v] : m) check(k.find(':') != std::string::npos, "expect." + p + ": key must be chain:asset");
    }
}

bool PayoffReport::conforming(const Party& p) const {
    auto it = strategies.find(p);
    return it != strategies.end() && is_conforming(it->second);
}

namespace {

using Balances = std::map<std::pair<Party, std::string>, std::int64_t>;

Balances snapshot(const World& w) {
    Balances out;
    for (const auto& [cid, ch] : w.chains()) {
        for (const auto& [key, v] : ch.balances) out[{key.first, cid + ":" + key.second}] += v;
    }
    return out;
}

bool is_seizure(const Event& e) {
    if (e.kind == "punished") return true;
    const std::string* via = e.field("via");
    return via && *via == "old_hashlock";
}

PayoffReport build_report(const ScenarioConfig& cfg, const World& w, const std::vector<Agent>& agents,
                          const Balances& before) {
    PayoffReport r;
    r.scenario = cfg.name;
    r.mode = cfg.option.mode;
    r.delta = cfg.delta;
    r.final_tick = w.now();
    r.expiry_time = cfg.option.expiry_time;
    r.key_a = asset_key(cfg.option.asset_a);
    r.key_b = asset_key(cfg.option.asset_b);
    r.amount_a = cfg.option.asset_a.amount;
    r.amount_b = cfg.option.asset_b.amount;
    if (cfg.option.mode == OptionMode::Integrated) {
        r.key_g = asset_key(cfg.option.guarantee);
        r.key_p = asset_key(cfg.option.premium);
        r.amount_g = cfg.option.guarantee.amount;
        r.amount_p = cfg.option.premium.amount;
    }
    r.initial_holder = cfg.option.holder;
    r.initial_writer = cfg.option.writer;

    const Balances after = snapshot(w);
    for (const auto& p : cfg.parties) {
        r.strategies[p.name] = p.strategy;
        PartyPayoff& pp = r.parties[p.name];
        std::set<std::string> keys;
        for (const auto& [k, v] : before)
            if (k.first == p.name) keys.insert(k.second);
        for (const auto& [k, v] : after)
            if (k.first == p.name) keys.insert(k.second);
        for (const auto& k : keys) {
            auto b = before.find({p.name, k});
            auto a = after.find({p.name, k});
            const std::int64_t d = (a == after.end() ? 0 : a->second) - (b == before.end() ? 0 : b->second);
            if (d != 0) pp.delta[k] = d;
        }
    }
    for (const auto& [cid, ch] : w.chains())
        for (const auto& [key, v] : ch.escrow)
            if (v != 0) r.escrowed[cid + ":" + key.second] += v;
    for (const auto& a : agents) {
        r.parties[a.name()].secrets_learned = a.memory().learned.preimages.size() + a.memory().learned.keys.size();
    }
    for (const auto& e : w.log())
        if (e.by) ++r.parties[*e.by].transactions;

    if (auto o = find_option(w)) {
        r.option_a = o->a_id;
        r.option_b = o->b_id;
        r.holder_a = o->a->holder.party;
        r.holder_b = o->b->holder.party;
        r.writer_a = o->a->writer.party;
        r.writer_b = o->b->writer.party;
        r.phase_a = o->a->phase;
        r.phase_b = o->b->phase;
        for (const auto& [id, c] : {std::pair{o->a_id, o->a}, std::pair{o->b_id, o->b}}) {
            if (!is_terminal(c->phase) || c->phase == OptionPhase::SettledExercised || c->phase == OptionPhase::Claimed) {
                r.parties[c->holder.party].positions.push_back("holder@" + id);
                r.parties[c->writer.party].positions.push_back("writer@" + id);
            }
        }
    }
    r.activated = cfg.option.mode == OptionMode::Htlc;
    std::optional<Tick> premium_tick;
    for (const auto& e : w.log()) {
        if (e.kind == "premium_locked" && !premium_tick) premium_tick = e.tick;
        if (e.contract == r.option_a && e.kind == "activated") {
            r.activated = true;
            if (premium_tick) r.phase_elapsed["setup"] = e.tick - *premium_tick;
        }
        const bool exercise_event =
            (r.mode == OptionMode::Integrated && e.contract == r.option_a && e.kind == "exercised") ||
            (r.mode == OptionMode::Htlc && e.contract == r.option_b && e.kind == "collateral_claimed");
        if (exercise_event && !r.exercise_time) {
            r.exercise_time = e.tick;
            r.exerciser = e.by;
        }
        if (e.contract == r.option_a && (e.kind == "exercise_settled" || e.kind == "compensated") && !r.settle_time) {
            r.settle_time = e.tick;
        }
        if ((e.contract == r.option_a || e.contract == r.option_b) && is_seizure(e)) {
            const std::string* to = e.field("to");
            r.seizures.push_back({e.tick, e.contract, e.kind, to ? *to : ""});
        }
    }
    if (r.exercise_time && r.settle_time) r.phase_elapsed["exercise"] = *r.settle_time - *r.exercise_time;

    for (std::size_t i = 0; i < cfg.transfers.size(); ++i) {
        const TransferSpec& t = cfg.transfers[i];
        TransferOutcome out{i, t.role, t.seller, t.buyer, t.fee, {}, {}, {}, {}, {}, {}, false};
        std::vector<daps::Message> messages;
        for (int c = 0; c < t.count; ++c) messages.push_back(material::expected_message(cfg, i, c));
        for (const auto& id : w.contract_ids()) {
            const auto* esc = std::get_if<TransferEscrow>(w.find_contract(id));
            if (!esc || esc->buyer != t.buyer || esc->seller != t.seller || esc->role != t.role ||
                std::find(messages.begin(), messages.end(), esc->expected_message) == messages.end()) {
                continue;
            }
            out.escrows.push_back(id);
            if (esc->state == EscrowState::Reclaimed) out.reclaimed = true;
            if (esc->transfer_time && (!out.revealed || *esc->transfer_time < *out.revealed)) {
                out.revealed = esc->transfer_time;
            }
        }
        const std::set<ContractId> mine(out.escrows.begin(), out.escrows.end());
        const std::string transfer_kind = t.role == Role::Holder ? "transfer_holder" : "transfer_writer";
        for (const auto& e : w.log()) {
            if (mine.contains(e.contract)) {
                if (e.kind == "escrow_opened" && !out.opened) out.opened = e.tick;
                if (e.kind == "fee_withdrawn" && !out.withdrawn) out.withdrawn = e.tick;
            }
            if (e.kind != transfer_kind || !out.opened || e.tick < *out.opened) continue;
            const std::string* to = e.field("to");
            if (!to || *to != t.buyer) continue;
            if (e.contract == r.option_a && !out.acquired_a) out.acquired_a = e.tick;
            if (e.contract == r.option_b && !out.acquired_b) out.acquired_b = e.tick;
        }
        if (out.opened && out.withdrawn) r.phase_elapsed["transfer" + std::to_string(i)] = *out.withdrawn - *out.opened;
        r.transfers.push_back(std::move(out));
    }
    return r;
}

}  // namespace

Session::Session(ScenarioConfig cfg) : cfg_(std::make_shared<const ScenarioConfig>(std::move(cfg))) {
    const ScenarioConfig& c = *cfg_;
    validate(c);
    world_ = World(WorldParams{c.delta, c.confirmation_lag, c.rules});
    for (const auto& ch : c.chains) world_.add_chain(ch);
    for (const auto& p : c.parties) {
        world_.add_party(p.name);
        for (const auto& b : p.balances) world_.mint(b.chain, p.name, b.asset, b.amount);
    }
    initial_ = snapshot(world_);
    const OptionSpec& o = c.option;
    if (o.mode == OptionMode::Htlc) {
        OptionTerms terms{OptionMode::Htlc, 0, o.expiry_time, o.asset_a, o.asset_b, {}, {}, material::daps_address(c)};
        install_htlc_option(world_, o.holder, o.writer, terms, hashlock_of(material::exercise_secret(c, o.holder, 0)),
                            material::transfer_key(c, o.holder, 0).public_key,
                            material::transfer_key(c, o.writer, 0).public_key);
    }
    agents_.reserve(c.parties.size());
    for (const auto& p : c.parties) agents_.emplace_back(c, p);
    open_side_channels(agents_, c);
    fresh_ = world_.log();
}

Agent* Session::agent(const Party& p) {
    for (auto& a : agents_)
        if (a.name() == p) return &a;
    return nullptr;
}

void Session::step(const std::vector<std::pair<Party, Call>>& injected) {
    if (!conserved_) return;
    for (auto& a : agents_) a.learn(world_, fresh_);
    for (const auto& [p, c] : injected) world_.submit(p, c);
    for (auto& a : agents_) {
        for (auto& c : a.decide(world_)) world_.submit(a.name(), std::move(c));
    }
    try {
        fresh_ = world_.advance(world_.now() + 1);
    } catch (const ConservationViolation& ex) {
        conserved_ = false;
        error_ = ex.what();
    }
}

PayoffReport Session::report() const {
    PayoffReport r = build_report(*cfg_, world_, agents_, initial_);
    r.conservation_ok = conserved_;
    r.conservation_error = error_;
    return r;
}

std::string Session::fingerprint() const {
    const Bytes w = world_.state_fingerprint();
    std::string out(w.begin(), w.end());
    for (const auto& a : agents_) out += "|" + a.memory().fingerprint();
    return out;
}

RunResult run(const ScenarioConfig& cfg) {
    Session s(cfg);
    while (!s.finished()) s.step();
    RunResult result;
    result.report = s.report();
    result.trace = s.world().log();
    result.final_state = dump_contracts(s.world());
    return result;
}

namespace {

CheckResult fail(std::string detail) { return {false, std::move(detail)}; }

std::string fmt(const Party& p, const std::string& what) { return p + ": " + what; }

// Fees this party collected as the seller of a completed transfer.
std::int64_t fees_received(const PayoffReport& r, const Party& p) {
    std::int64_t total = 0;
    for (const auto& t : r.transfers)
        if (t.seller == p && t.withdrawn) total += t.fee.amount;
    return total;
}

// When the party stopped owning what it bought in transfer `t`: the time it
// resold that role, if it did.
std::optional<Tick> resold_at(const PayoffReport& r, const TransferOutcome& t) {
    for (const auto& u : r.transfers) {
        if (u.index > t.index && u.seller == t.buyer && u.role == t.role && u.acquired_a) return u.acquired_a;
    }
    return std::nullopt;
}

CheckResult safety(const PayoffReport& r) {
    for (const auto& [p, pay] : r.parties) {
        if (!r.conforming(p)) continue;
        const bool fee = fees_received(r, p) > 0;
        const std::int64_t ka = pay.of(r.key_a), kb = pay.of(r.key_b);
        const std::int64_t kg = r.key_g.empty() ? 0 : pay.of(r.key_g);
        const std::int64_t kp = r.key_p.empty() ? 0 : pay.of(r.key_p);
        if (ka < 0 && !(kb > 0 || kg > 0 || fee)) return fail(fmt(p, "lost Asset_A uncovered"));
        if (kb < 0 && !(ka > 0 || fee)) return fail(fmt(p, "lost Asset_B uncovered"));
        if (kg < 0 && !(ka > 0 || fee)) return fail(fmt(p, "lost the guarantee uncovered"));
        if (kp < 0 && !r.activated) return fail(fmt(p, "paid a premium for an option that never activated"));
    }
    for (const auto& t : r.transfers) {
        if (r.conforming(t.buyer) && t.withdrawn) {
            if (!t.acquired_a || !t.acquired_b) return fail(fmt(t.buyer, "paid a fee without owning both contracts"));
            const Tick from = std::min(*t.acquired_a, *t.acquired_b);
            const auto until = resold_at(r, t);
            for (const auto& s : r.seizures) {
                if (s.tick >= from && (!until || s.tick < *until) && s.beneficiary != t.buyer) {
                    return fail(fmt(t.buyer, "position seized on " + s.contract + " after purchase"));
                }
            }
        }
        if (r.conforming(t.seller) && (t.acquired_a || t.acquired_b) && !t.withdrawn) {
            const PartyPayoff& pay = r.parties.at(t.seller);
            const bool compensated = pay.of(r.key_a) > 0 || pay.of(r.key_b) > 0 ||
                                     (!r.key_g.empty() && pay.of(r.key_g) > 0);
            if (!compensated) return fail(fmt(t.seller, "lost the position without payment"));
        }
    }
    return {};
}

CheckResult fee_balance(const PayoffReport& r) {
    std::map<Party, std::map<std::string, std::int64_t>> fees;
    std::set<std::string> fee_keys;
    for (const auto& t : r.transfers) {
        fee_keys.insert(asset_key(t.fee));
        if (!t.withdrawn) continue;
        fees[t.seller][asset_key(t.fee)] += t.fee.amount;
        fees[t.buyer][asset_key(t.fee)] -= t.fee.amount;
    }
    for (const auto& [p, pay] : r.parties) {
        for (const auto& k : fee_keys) {
            if (k == r.key_a || k == r.key_b || k == r.key_g || k == r.key_p) continue;
            if (pay.of(k) != fees[p][k]) return fail(fmt(p, "fee balance " + std::to_string(pay.of(k)) + " on " + k));
        }
    }
    return {};
}

CheckResult liveness(const PayoffReport& r) {
    if (r.transfers.empty()) return fail("no transfers");
    for (const auto& t : r.transfers) {
        const std::string n = "transfer " + std::to_string(t.index);
        if (!t.withdrawn) return fail(n + ": fee not withdrawn");
        if (!t.acquired_a || !t.acquired_b) return fail(n + ": buyer does not own both contracts");
    }
    if (!r.seizures.empty()) return fail("seizure on " + r.seizures.front().contract);
    return fee_balance(r);
}

CheckResult unobstructibility(const PayoffReport& r) {
    std::set<Party> sellers;
    for (const auto& t : r.transfers)
        if (r.conforming(t.seller)) sellers.insert(t.seller);
    if (sellers.empty()) return fail("no conforming seller");
    for (const auto& s : sellers) {
        bool done = false;
        for (const auto& t : r.transfers)
            if (t.seller == s && t.withdrawn && t.acquired_a && t.acquired_b) done = true;
        if (!done) return fail(fmt(s, "could not complete a sale"));
    }
    return {};
}

CheckResult final_owner(const PayoffReport& r, Role role) {
    const TransferOutcome* last = nullptr;
    for (const auto& t : r.transfers)
        if (t.role == role) last = &t;
    if (!last) return fail(std::string("no ") + to_string(role) + " transfer");
    const Party& a = role == Role::Holder ? r.holder_a : r.writer_a;
    const Party& b = role == Role::Holder ? r.holder_b : r.writer_b;
    if (a != last->buyer || b != last->buyer) {
        return fail(std::string(to_string(role)) + " is " + a + "/" + b + ", expected " + last->buyer);
    }
    return {};
}

CheckResult independence(const PayoffReport& r) {
    if (r.transfers.size() < 2) return fail("needs a chain of transfers");
    for (std::size_t i = 1; i < r.transfers.size(); ++i) {
        const auto& prev = r.transfers[i - 1];
        const auto& cur = r.transfers[i];
        if (cur.role != prev.role || cur.seller != prev.buyer) return fail("transfers do not form a chain");
    }
    if (auto c = liveness(r); !c.pass) return c;
    return final_owner(r, r.transfers.front().role);
}

CheckResult isolation(const PayoffReport& r) {
    if (auto c = liveness(r); !c.pass) return c;
    if (auto c = final_owner(r, Role::Holder); !c.pass) return c;
    return final_owner(r, Role::Writer);
}

CheckResult option_correctness(const PayoffReport& r) {
    if (!r.conforming(r.initial_holder) || !r.conforming(r.initial_writer)) return {true, "not applicable"};
    const PartyPayoff& h = r.parties.at(r.initial_holder);
    const PartyPayoff& w = r.parties.at(r.initial_writer);
    std::map<std::string, std::int64_t> want_h, want_w;
    if (r.mode == OptionMode::Integrated) {
        if (!r.activated) return fail("option never activated");
        want_h[r.key_p] -= r.amount_p;
        want_w[r.key_p] += r.amount_p;
    }
    if (r.exercise_time) {
        want_h[r.key_a] -= r.amount_a;
        want_h[r.key_b] += r.amount_b;
        want_w[r.key_a] += r.amount_a;
        want_w[r.key_b] -= r.amount_b;
    }
    for (const auto& [who, pay, want] : {std::tuple{r.initial_holder, &h, &want_h}, {r.initial_writer, &w, &want_w}}) {
        std::set<std::string> keys;
        for (const auto& [k, v] : pay->delta) keys.insert(k);
        for (const auto& [k, v] : *want) keys.insert(k);
        for (const auto& k : keys) {
            const auto it = want->find(k);
            const std::int64_t expect = it == want->end() ? 0 : it->second;
            if (pay->of(k) != expect) {
                return fail(fmt(who, k + " " + std::to_string(pay->of(k)) + " != " + std::to_string(expect)));
            }
        }
    }
    return {};
}

CheckResult exercisability(const PayoffReport& r) {
    if (!r.exercise_time || !r.exerciser) return fail("no exercise confirmed");
    if (!r.settle_time) return fail("exercise never settled");
    if (r.mode == OptionMode::Integrated && *r.settle_time > *r.exercise_time + r.delta) {
        return fail("settled at " + std::to_string(*r.settle_time) + ", later than T_B + delta");
    }
    const PartyPayoff& p = r.parties.at(*r.exerciser);
    if (p.of(r.key_b) != r.amount_b || p.of(r.key_a) != -r.amount_a) {
        return fail(fmt(*r.exerciser, "did not swap Asset_A for Asset_B"));
    }
    return {};
}

CheckResult failure_compensation(const PayoffReport& r) {
    if (!r.exercise_time || !r.exerciser) return fail("no exercise confirmed");
    const PartyPayoff& p = r.parties.at(*r.exerciser);
    const bool swapped = p.of(r.key_b) == r.amount_b && p.of(r.key_a) == -r.amount_a;
    const bool compensated = !r.key_g.empty() && p.of(r.key_g) == r.amount_g && p.of(r.key_a) == 0;
    if (!swapped && !compensated) return fail(fmt(*r.exerciser, "neither received Asset_B nor the guarantee"));
    return {};
}

}  // namespace

CheckResult check_theorem(const PayoffReport& r, const std::vector<Event>& /*trace*/, const std::string& theorem) {
    if (!r.conservation_ok) return fail("conservation: " + r.conservation_error);
    if (theorem == "safety") return safety(r);
    if (theorem == "liveness") return liveness(r);
    if (theorem == "unobstructibility") return unobstructibility(r);
    if (theorem == "independence") return independence(r);
    if (theorem == "isolation") return isolation(r);
    if (theorem == "option_correctness") return option_correctness(r);
    if (theorem == "exercisability") return exercisability(r);
    if (theorem == "failure_compensation") return failure_compensation(r);
    throw std::invalid_argument("unknown theorem: " + theorem);
}

CheckResult check_expectations(const ScenarioConfig& cfg, const PayoffReport& r) {
    if (!r.conservation_ok) return fail("conservation: " + r.conservation_error);
    std::map<std::string, std::int64_t> sums;
    for (const auto& [p, pay] : r.parties)
        for (const auto& [k, v] : pay.delta) sums[k] += v;
    for (const auto& [k, v] : r.escrowed) sums[k] += v;
    for (const auto& [k, v] : sums)
        if (v != 0) return fail("deltas on " + k + " sum to " + std::to_string(v));
    for (const auto& [p, want] : cfg.expect) {
        const PartyPayoff& pay = r.parties.at(p);
        std::set<std::string> keys;
        for (const auto& [k, v] : pay.delta) keys.insert(k);
        for (const auto& [k, v] : want) keys.insert(k);
        for (const auto& k : keys) {
            const auto it = want.find(k);
            const std::int64_t expect = it == want.end() ? 0 : it->second;
            if (pay.of(k) != expect) {
                return fail(fmt(p, k + " " + std::to_string(pay.of(k)) + " != " + std::to_string(expect)));
            }
        }
    }
    return {};
}

std::string report_json(const PayoffReport& r) {
    using nlohmann::json;
    auto opt = [](const auto& o) -> json { return o ? json(*o) : json(nullptr); };
    json j;
    j["scenario"] = r.scenario;
    j["mode"] = to_string(r.mode);
    j["final_tick"] = r.final_tick;
    j["conservation"] = r.conservation_ok ? "ok" : r.conservation_error;
    json parties = json::object();
    for (const auto& [p, pay] : r.parties) {
        parties[p] = {{"strategy", to_string(r.strategies.at(p))},
                      {"delta", pay.delta},
                      {"positions", pay.positions},
                      {"secrets_learned", pay.secrets_learned},
                      {"transactions", pay.transactions}};
    }
    j["parties"] = parties;
    j["option"] = {{"contract_a", r.option_a},     {"contract_b", r.option_b},
                   {"holder", {r.holder_a, r.holder_b}}, {"writer", {r.writer_a, r.writer_b}},
                   {"phase", {to_string(r.phase_a), to_string(r.phase_b)}},
                   {"activated", r.activated},      {"exercise_time", opt(r.exercise_time)},
                   {"exerciser", opt(r.exerciser)}, {"settle_time", opt(r.settle_time)}};
    json transfers = json::array();
    for (const auto& t : r.transfers) {
        transfers.push_back({{"index", t.index},
                             {"role", to_string(t.role)},
                             {"seller", t.seller},
                             {"buyer", t.buyer},
                             {"fee", asset_key(t.fee) + ":" + std::to_string(t.fee.amount)},
                             {"escrows", t.escrows},
                             {"opened", opt(t.opened)},
                             {"revealed", opt(t.revealed)},
                             {"withdrawn", opt(t.withdrawn)},
                             {"acquired_a", opt(t.acquired_a)},
                             {"acquired_b", opt(t.acquired_b)},
                             {"reclaimed", t.reclaimed}});
    }
    j["transfers"] = transfers;
    json seizures = json::array();
    for (const auto& s : r.seizures)
        seizures.push_back({{"tick", s.tick}, {"contract", s.contract}, {"kind", s.kind}, {"to", s.beneficiary}});
    j["seizures"] = seizures;
    j["phase_elapsed"] = r.phase_elapsed;
    return j.dump(2);
}

}  // namespace xopt
