#include "xopt/search.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <optional>
#include <unordered_map>

#include <json.hpp>

#include "xopt/contracts.hpp"

namespace xopt {

const char* to_string(Move m) {
    switch (m) {
        case Move::Reveal: return "reveal";
        case Move::SelfForwardA: return "self_forward_a";
        case Move::SelfForwardB: return "self_forward_b";
        case Move::ForwardA: return "forward_a";
        case Move::ForwardB: return "forward_b";
        case Move::Withdraw: return "withdraw";
        case Move::Exercise: return "exercise";
        case Move::ClaimA: return "claim_a";
        case Move::PunishA: return "punish_a";
        case Move::PunishB: return "punish_b";
    }
    return "?";
}

std::vector<Move> full_menu() {
    return {Move::Reveal,   Move::SelfForwardA, Move::SelfForwardB, Move::ForwardA, Move::ForwardB,
            Move::Withdraw, Move::Exercise,     Move::ClaimA,       Move::PunishA,  Move::PunishB};
}

ScenarioConfig search_template(ContractRules rules, std::uint64_t seed) {
    ScenarioConfig c;
    c.name = "search-holder-transfer";
    c.seed = seed;
    c.delta = 2;
    c.confirmation_lag = 1;
    c.horizon = 24;
    c.rules = rules;
    c.chains = {"chain_a", "chain_b", "chain_c"};
    c.parties = {
        {"alice", StrategyId::ColludeSellerWriter, {{"chain_a", "florin", 100}}},
        {"bob", StrategyId::ColludeSellerWriter, {{"chain_b", "guilder", 100}}},
        {"carol", StrategyId::HonestBuyer, {{"chain_c", "thaler", 20}}},
    };
    c.option.mode = OptionMode::Htlc;
    c.option.holder = "alice";
    c.option.writer = "bob";
    c.option.asset_a = {"chain_a", "florin", 100};
    c.option.asset_b = {"chain_b", "guilder", 100};
    c.option.expiry_time = 40;
    c.transfers = {{Role::Holder, "alice", "carol", {"chain_c", "thaler", 5}, 2, 12, 1}};
    c.collusion = {{{"alice", "bob"}, {"preimage", "transfer_key"}}};
    c.theorems = {"safety"};
    return c;
}

namespace {

constexpr int kSelfGeneration = 900;

using Injected = std::vector<std::pair<Party, Call>>;

struct Coalition {
    std::vector<Party> members;
    Knowledge knows;

    bool has(const Party& p) const { return std::find(members.begin(), members.end(), p) != members.end(); }
};

Coalition coalition(const Session& s, const std::vector<Party>& members) {
    Coalition c{members, {}};
    for (const auto& a : s.agents()) {
        if (!c.has(a.name())) continue;
        for (const Knowledge* k : {&a.memory().own, &a.memory().shared, &a.memory().learned}) {
            c.knows.preimages.insert(k->preimages.begin(), k->preimages.end());
            c.knows.keys.insert(k->keys.begin(), k->keys.end());
        }
        c.knows.add(material::transfer_key(s.config(), a.name(), kSelfGeneration).secret_key);
        c.knows.add(material::exercise_secret(s.config(), a.name(), kSelfGeneration));
    }
    return c;
}

std::optional<std::pair<Party, Call>> build(Move m, const Session& s, const Coalition& co) {
    const World& w = s.world();
    const ScenarioConfig& cfg = s.config();
    const Tick land = w.now() + w.params().confirmation_lag;
    const Tick d = w.delta();
    const auto o = find_option(w);
    if (!o) return std::nullopt;

    std::vector<std::pair<ContractId, const TransferEscrow*>> escrows;
    for (const auto& id : w.contract_ids()) {
        if (const auto* e = std::get_if<TransferEscrow>(w.find_contract(id)); e && co.has(e->seller)) {
            escrows.emplace_back(id, e);
        }
    }
    auto option = [&](bool a) { return a ? std::pair{o->a_id, o->a} : std::pair{o->b_id, o->b}; };

    switch (m) {
        case Move::Reveal:
            for (const auto& [id, e] : escrows) {
                const daps::SecretKey* sk = co.knows.key_for(e->seller_public_key);
                if (e->state == EscrowState::Open && land <= e->deadline - 2 * d && sk) {
                    return std::pair{e->seller, Call{call::RevealSignature{id, daps::sign(*sk, e->expected_message)}}};
                }
            }
            return std::nullopt;
        case Move::SelfForwardA:
        case Move::SelfForwardB: {
            const auto [cid, c] = option(m == Move::SelfForwardA);
            if (is_terminal(c->phase) || !co.has(c->holder.party)) return std::nullopt;
            const daps::SecretKey* sk = co.knows.key_for(c->holder.transfer_key);
            const daps::KeyPair fresh = material::transfer_key(cfg, c->holder.party, kSelfGeneration);
            if (!sk || c->holder.transfer_key == fresh.public_key) return std::nullopt;
            TransferPayload p;
            p.new_owner = c->holder.party;
            p.new_key = fresh.public_key;
            if (material::wants_hashlock(c->terms.mode, Role::Holder)) {
                p.new_hashlock = hashlock_of(material::exercise_secret(cfg, c->holder.party, kSelfGeneration));
            }
            const daps::Message msg{c->terms.daps_address, encode_payload(p)};
            return std::pair{c->holder.party, Call{call::ForwardTransfer{cid, msg, daps::sign(*sk, msg)}}};
        }
        case Move::ForwardA:
        case Move::ForwardB: {
            const auto [cid, c] = option(m == Move::ForwardA);
            if (is_terminal(c->phase)) return std::nullopt;
            for (const auto& [id, e] : escrows) {
                if (e->state != EscrowState::Open && e->revealed_signature &&
                    c->slot(e->role).transfer_key == e->seller_public_key) {
                    return std::pair{e->seller,
                                     Call{call::ForwardTransfer{cid, e->expected_message, *e->revealed_signature}}};
                }
            }
            return std::nullopt;
        }
        case Move::Withdraw:
            for (const auto& [id, e] : escrows) {
                const Tick wait = w.params().rules.withdrawal_delay ? 3 * d : 0;
                if (e->state == EscrowState::Revealed && land > *e->transfer_time + wait) {
                    return std::pair{e->seller, Call{call::WithdrawFee{id}}};
                }
            }
            return std::nullopt;
        case Move::Exercise: {
            const OptionContract& b = *o->b;
            if (b.phase != OptionPhase::Active || land >= b.terms.expiry_time) return std::nullopt;
            const Preimage* p = co.knows.preimage_for(b.exercise_hashlock);
            if (!p) return std::nullopt;
            return std::pair{co.members.front(), Call{call::ClaimCollateral{o->b_id, *p}}};
        }
        case Move::ClaimA: {
            const OptionContract& a = *o->a;
            if (a.phase != OptionPhase::Active || land >= a.terms.expiry_time + d || !co.has(a.writer.party)) {
                return std::nullopt;
            }
            for (const auto& [digest, p] : co.knows.preimages) {
                if (unlocks(w, a, p)) return std::pair{a.writer.party, Call{call::RevealExerciseSecret{o->a_id, p}}};
            }
            return std::nullopt;
        }
        case Move::PunishA:
        case Move::PunishB: {
            const auto [cid, c] = option(m == Move::PunishA);
            if (is_terminal(c->phase)) return std::nullopt;
            for (Role r : {Role::Holder, Role::Writer}) {
                // Only the role on sale: a writer disclosing its own key just
                // hands its collateral to the holder.
                const bool sold = std::any_of(cfg.transfers.begin(), cfg.transfers.end(), [&](const TransferSpec& t) {
                    return t.role == r && co.has(t.seller);
                });
                if (!sold) continue;
                const RoleSlot& slot = c->slot(r);
                for (const auto& pk : {std::optional{slot.transfer_key}, slot.old_transfer_key}) {
                    if (!pk || key_standing(w, *c, r, *pk) == KeyStanding::None) continue;
                    const daps::SecretKey* sk = co.knows.key_for(*pk);
                    if (!sk) continue;
                    // The beneficiary is the other role's owner; only worth it
                    // when that owner is in the coalition.
                    const Party& gains = r == Role::Holder ? c->writer.party : c->holder.party;
                    if (co.has(gains)) return std::pair{co.members.front(), Call{call::PunishWithKey{cid, *sk}}};
                }
            }
            return std::nullopt;
        }
    }
    return std::nullopt;
}

struct Node {
    Session session;
    std::vector<std::string> schedule;
};

std::string outcome_of(const Session& s) {
    const World& w = s.world();
    std::string out;
    if (auto o = find_option(w)) {
        out += std::string(to_string(o->a->phase)) + "/" + to_string(o->b->phase) + " holder=" + o->a->holder.party +
               "/" + o->b->holder.party + " writer=" + o->a->writer.party + "/" + o->b->writer.party;
    }
    for (const auto& id : w.contract_ids()) {
        if (const auto* e = std::get_if<TransferEscrow>(w.find_contract(id))) out += " " + id + "=" + to_string(e->state);
    }
    return out;
}

std::string kind_of(const ContractId& id) {
    const auto slash = id.find('/');
    return id.substr(slash + 1, id.find('#') - slash - 1);
}

void add_transitions(const Session& s, std::set<std::string>& out) {
    const World& w = s.world();
    for (const auto& e : w.log()) {
        if (e.contract != "-" && e.kind != "rejected") out.insert(kind_of(e.contract) + ":" + e.kind);
    }
    for (const auto& id : w.contract_ids()) {
        const Contract* c = w.find_contract(id);
        if (const auto* o = std::get_if<OptionContract>(c)) {
            out.insert(kind_of(id) + "=" + to_string(o->phase) + "/" + o->holder.party + "/" + o->writer.party);
        } else if (const auto* e = std::get_if<TransferEscrow>(c)) {
            out.insert(kind_of(id) + "=" + to_string(e->state));
        }
    }
}

std::vector<std::string> suffix(const std::vector<Event>& trace, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = trace.size() > n ? trace.size() - n : 0; i < trace.size(); ++i) {
        out.push_back(format_event(trace[i]));
    }
    return out;
}

}  // namespace

SearchResult exhaustive_search(const ScenarioConfig& tmpl, const SearchOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    SearchResult result;
    ScenarioConfig cfg = tmpl;
    if (options.horizon > 0) cfg.horizon = options.horizon;
    std::vector<Party> adversaries = options.adversaries;
    if (adversaries.empty()) {
        for (const auto& p : cfg.parties)
            if (!is_conforming(p.strategy)) adversaries.push_back(p.name);
    }
    const Tick every = options.granularity > 0 ? options.granularity : cfg.delta;

    Node root{Session(cfg), {}};
    for (const auto& p : adversaries) {
        Agent* a = root.session.agent(p);
        if (!a) throw std::invalid_argument("unknown adversary: " + p);
        a->passive = true;
    }

    std::vector<Node> layer;
    layer.push_back(std::move(root));
    result.states = 1;
    auto finish = [&](const Node& n) {
        ++result.terminals;
        result.outcomes.insert(outcome_of(n.session));
        add_transitions(n.session, result.transitions);
        const PayoffReport report = n.session.report();
        std::optional<std::pair<std::string, std::string>> bad;
        if (!report.conservation_ok) {
            bad = {"conservation", report.conservation_error};
        } else if (CheckResult c = check_theorem(report, {}, "safety"); !c.pass) {
            bad = {"safety", c.detail};
        }
        if (!bad) return;
        ++result.violation_count;
        if (result.violations.size() < 16) {
            result.violations.push_back({bad->first, bad->second, n.schedule, suffix(n.session.world().log(), 12)});
        }
    };

    while (!layer.empty() && result.complete) {
        std::unordered_map<std::string, std::size_t> seen;
        std::vector<Node> next;
        auto add = [&](Node&& child) {
            const Digest key = sha256(child.session.fingerprint());
            auto [it, fresh] = seen.emplace(std::string(key.begin(), key.end()), next.size());
            if (!fresh) return;
            next.push_back(std::move(child));
            if (++result.states > options.budget) result.complete = false;
        };
        for (Node& n : layer) {
            if (!result.complete) break;
            if (n.session.finished()) {
                finish(n);
                continue;
            }
            const Tick now = n.session.world().now();
            std::vector<std::pair<Move, std::pair<Party, Call>>> legal;
            if (now % every == 0) {
                const Coalition co = coalition(n.session, adversaries);
                for (Move m : options.menu)
                    if (auto c = build(m, n.session, co)) legal.emplace_back(m, std::move(*c));
            }
            const std::uint64_t subsets = std::uint64_t{1} << legal.size();
            for (std::uint64_t mask = 0; mask < subsets; ++mask) {
                Node child = mask + 1 == subsets ? std::move(n) : n;
                Injected calls;
                for (std::size_t i = 0; i < legal.size(); ++i) {
                    if (!(mask >> i & 1)) continue;
                    calls.push_back(legal[i].second);
                    child.schedule.push_back(std::to_string(now) + ":" + legal[i].second.first + ":" +
                                             to_string(legal[i].first));
                }
                child.session.step(calls);
                add(std::move(child));
            }
        }
        layer = std::move(next);
    }
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

std::string search_json(const SearchResult& r) {
    using nlohmann::json;
    json j;
    j["states"] = r.states;
    j["terminals"] = r.terminals;
    j["complete"] = r.complete;
    j["violation_count"] = r.violation_count;
    j["seconds"] = r.seconds;
    json vs = json::array();
    for (const auto& v : r.violations) {
        vs.push_back({{"check", v.check}, {"detail", v.detail}, {"schedule", v.schedule}, {"trace_suffix", v.trace_suffix}});
    }
    j["violations"] = vs;
    j["outcomes"] = r.outcomes;
    j["transitions"] = r.transitions;
    return j.dump(2);
}

}  // namespace xopt
