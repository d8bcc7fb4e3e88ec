#include "xopt/parties.hpp"

#include <algorithm>
#include <array>

namespace xopt {

namespace {

constexpr std::array<std::pair<StrategyId, const char*>, 12> kStrategyNames{{
    {StrategyId::HonestHolder, "HonestHolder"},
    {StrategyId::HonestWriter, "HonestWriter"},
    {StrategyId::HonestBuyer, "HonestBuyer"},
    {StrategyId::DoubleSign, "DoubleSign"},
    {StrategyId::ExerciseDuringTransfer, "ExerciseDuringTransfer"},
    {StrategyId::SingleChainPublish, "SingleChainPublish"},
    {StrategyId::WriterNoReveal, "WriterNoReveal"},
    {StrategyId::HolderNoActivate, "HolderNoActivate"},
    {StrategyId::ColludeSellerWriter, "ColludeSellerWriter"},
    {StrategyId::ColludeSellerBuyer, "ColludeSellerBuyer"},
    {StrategyId::ColludeWriterBuyer, "ColludeWriterBuyer"},
    {StrategyId::PhantomBidders, "PhantomBidders"},
}};

std::string seed_label(const ScenarioConfig& cfg, const std::string& rest) {
    return "xopt/" + std::to_string(cfg.seed) + "/" + rest;
}

Role other(Role r) { return r == Role::Holder ? Role::Writer : Role::Holder; }

std::string hex_key(const daps::PublicKey& pk) { return to_hex(pk.point); }

}  // namespace

const char* to_string(StrategyId s) {
    for (const auto& [id, name] : kStrategyNames)
        if (id == s) return name;
    return "?";
}

std::optional<StrategyId> parse_strategy(std::string_view name) {
    for (const auto& [id, n] : kStrategyNames)
        if (name == n) return id;
    return std::nullopt;
}

bool is_conforming(StrategyId s) {
    return s == StrategyId::HonestHolder || s == StrategyId::HonestWriter || s == StrategyId::HonestBuyer;
}

namespace material {

Preimage activation_secret(const ScenarioConfig& cfg) { return derive_preimage(seed_label(cfg, "activation")); }

Preimage exercise_secret(const ScenarioConfig& cfg, const Party& p, int generation) {
    return derive_preimage(seed_label(cfg, "exercise/" + p + "/" + std::to_string(generation)));
}

daps::KeyPair transfer_key(const ScenarioConfig& cfg, const Party& p, int generation) {
    return daps::keygen(seed_label(cfg, "transfer/" + p + "/" + std::to_string(generation)));
}

daps::Address daps_address(const ScenarioConfig& cfg) { return sha256(seed_label(cfg, "address")); }

Preimage bogus_preimage(const ScenarioConfig& cfg, const Party& p) {
    return derive_preimage(seed_label(cfg, "bogus/" + p));
}

daps::SecretKey bogus_key(const ScenarioConfig& cfg, const Party& p) {
    return daps::keygen(seed_label(cfg, "bogus-key/" + p)).secret_key;
}

int buyer_generation(std::size_t transfer_index, int copy) {
    return static_cast<int>(transfer_index + 1) * 1000 + copy;
}

bool wants_hashlock(OptionMode mode, Role role) { return (mode == OptionMode::Integrated) == (role == Role::Writer); }

daps::Message expected_message(const ScenarioConfig& cfg, std::size_t transfer_index, int copy) {
    const TransferSpec& t = cfg.transfers.at(transfer_index);
    const int gen = buyer_generation(transfer_index, copy);
    TransferPayload p;
    p.new_owner = t.buyer;
    if (wants_hashlock(cfg.option.mode, t.role)) p.new_hashlock = hashlock_of(exercise_secret(cfg, t.buyer, gen));
    p.new_key = transfer_key(cfg, t.buyer, gen).public_key;
    return daps::Message{daps_address(cfg), encode_payload(p)};
}

}  // namespace material

void Knowledge::add(const daps::SecretKey& k) { keys.emplace(daps::public_key_of(k), k); }

const Preimage* Knowledge::preimage_for(const Digest& d) const {
    auto it = preimages.find(d);
    return it == preimages.end() ? nullptr : &it->second;
}

const daps::SecretKey* Knowledge::key_for(const daps::PublicKey& pk) const {
    auto it = keys.find(pk);
    return it == keys.end() ? nullptr : &it->second;
}

std::string AgentMemory::fingerprint() const {
    std::string out;
    for (const Knowledge* k : {&own, &shared, &learned}) {
        out += '[';
        for (const auto& [d, p] : k->preimages) out += to_hex(d).substr(0, 16) + ',';
        for (const auto& [pk, sk] : k->keys) out += to_hex(pk.point).substr(0, 16) + ',';
        out += ']';
    }
    for (const auto& s : seen) out += to_hex(daps::serialize(s.sig)).substr(0, 16) + ';';
    for (const auto& [id, t] : escrow_opened) out += id + '@' + std::to_string(t) + ';';
    for (const auto& [id, s] : revealed) out += id + ';';
    for (const auto& d : done) out += d + ';';
    return out;
}

std::optional<OptionView> find_option(const World& world) {
    for (const auto& id : world.contract_ids()) {
        const Contract* c = world.find_contract(id);
        const auto* o = std::get_if<OptionContract>(c);
        if (!o || o->side != OptionSide::A) continue;
        const Contract* pc = world.find_contract(o->partner);
        const auto* b = pc ? std::get_if<OptionContract>(pc) : nullptr;
        if (!b) continue;
        return OptionView{id, o->partner, o, b};
    }
    return std::nullopt;
}

Agent::Agent(const ScenarioConfig& cfg, const PartySpec& spec)
    : cfg_(&cfg), name_(spec.name), strategy_(spec.strategy) {
    const OptionSpec& o = cfg.option;
    if (name_ == o.holder) {
        memory_.own.add(material::transfer_key(cfg, name_, 0).secret_key);
        if (o.mode == OptionMode::Integrated) memory_.own.add(material::activation_secret(cfg));
        if (o.mode == OptionMode::Htlc) memory_.own.add(material::exercise_secret(cfg, name_, 0));
    }
    if (name_ == o.writer) {
        memory_.own.add(material::transfer_key(cfg, name_, 0).secret_key);
        if (o.mode == OptionMode::Integrated) memory_.own.add(material::exercise_secret(cfg, name_, 0));
    }
    for (std::size_t i = 0; i < cfg.transfers.size(); ++i) {
        const TransferSpec& t = cfg.transfers[i];
        if (t.buyer != name_) continue;
        for (int c = 0; c < t.count; ++c) {
            const int gen = material::buyer_generation(i, c);
            memory_.own.add(material::transfer_key(cfg, name_, gen).secret_key);
            memory_.own.add(material::exercise_secret(cfg, name_, gen));
        }
    }
}

const CollusionChannel* Agent::channel() const {
    for (const auto& ch : cfg_->collusion)
        if (std::find(ch.members.begin(), ch.members.end(), name_) != ch.members.end()) return &ch;
    return nullptr;
}

bool Agent::channel_shares(const std::string& kind) const {
    const CollusionChannel* ch = channel();
    return ch && std::find(ch->shares.begin(), ch->shares.end(), kind) != ch->shares.end();
}

bool Agent::colludes_with(const Party& p) const {
    const CollusionChannel* ch = channel();
    return p != name_ && ch && std::find(ch->members.begin(), ch->members.end(), p) != ch->members.end();
}

void Agent::learn(const World& world, const std::vector<Event>& events) {
    for (const Event& e : events) {
        if (e.kind == "escrow_opened") memory_.escrow_opened.emplace(e.contract, e.tick);
        for (const Disclosure& d : e.disclosures) {
            if (const auto* p = std::get_if<Preimage>(&d)) {
                memory_.learned.add(*p);
            } else if (const auto* k = std::get_if<daps::SecretKey>(&d)) {
                memory_.learned.add(*k);
            } else {
                const auto& s = std::get<SignedTransfer>(d);
                if (std::find(memory_.seen.begin(), memory_.seen.end(), s) != memory_.seen.end()) continue;
                for (const auto& x : memory_.seen) {
                    if (x.signer != s.signer || !daps::colliding(x.message, s.message)) continue;
                    if (auto sk = world.extract(s.signer, x.message, x.sig, s.message, s.sig)) {
                        memory_.learned.add(*sk);
                    }
                }
                memory_.seen.push_back(s);
            }
        }
    }
}

std::vector<Call> Agent::decide(const World& world) {
    std::vector<Call> out;
    if (passive) return out;
    setup(world, out);
    if (auto o = find_option(world)) {
        exercise(world, *o, out);
        sell(world, *o, out);
        collude(world, *o, out);
    }
    buy(world, out);
    for (auto& c : watchdog(world)) out.push_back(std::move(c));
    return out;
}

std::vector<Call> Agent::watchdog(const World& world) {
    std::vector<Call> out;
    if (strategy_ == StrategyId::PhantomBidders) return out;
    if (auto o = find_option(world)) {
        punish(world, *o, out);
        forward_missing(world, *o, out);
    }
    reclaim(world, out);
    return out;
}

void Agent::setup(const World& w, std::vector<Call>& out) {
    const OptionSpec& spec = cfg_->option;
    if (spec.mode != OptionMode::Integrated) return;
    const Tick land = w.now() + w.params().confirmation_lag;
    const Digest activation_lock = hashlock_of(material::activation_secret(*cfg_));
    const auto option = find_option(w);

    if (name_ == spec.holder && land == spec.premium_at && once("premium")) {
        out.push_back(call::DepositPremium{spec.writer, spec.premium, activation_lock, spec.activation_time});
    }

    // Premium escrows addressed to this party.
    std::vector<std::pair<ContractId, const PremiumEscrow*>> premiums;
    for (const auto& id : w.contract_ids()) {
        const auto* p = std::get_if<PremiumEscrow>(w.find_contract(id));
        if (p && p->payee == name_) premiums.emplace_back(id, p);
    }

    if (name_ == spec.writer && !option && land <= spec.activation_time - w.delta()) {
        for (const auto& [id, p] : premiums) {
            if (p->payer != spec.holder || p->state != PremiumState::Locked || p->amount != spec.premium ||
                p->hashlock != activation_lock || !once("deploy")) {
                continue;
            }
            call::DeployOption d;
            d.holder = spec.holder;
            d.terms = OptionTerms{OptionMode::Integrated, spec.activation_time, spec.expiry_time, spec.asset_a,
                                  spec.asset_b,          spec.guarantee,      activation_lock,  material::daps_address(*cfg_)};
            d.exercise_hashlock = hashlock_of(material::exercise_secret(*cfg_, name_, 0));
            d.holder_key = material::transfer_key(*cfg_, spec.holder, 0).public_key;
            d.writer_key = material::transfer_key(*cfg_, name_, 0).public_key;
            out.push_back(d);
            break;
        }
    }

    if (name_ == spec.holder && strategy_ != StrategyId::HolderNoActivate && option && land == spec.activation_time) {
        const OptionContract& a = *option->a;
        const bool terms_ok = a.terms.asset_a == spec.asset_a && a.terms.asset_b == spec.asset_b &&
                              a.terms.guarantee == spec.guarantee && a.terms.expiry_time == spec.expiry_time &&
                              a.holder.party == name_ && memory_.own.key_for(a.holder.transfer_key);
        const Preimage* secret = memory_.own.preimage_for(a.terms.activation_hashlock);
        if (terms_ok && secret && a.phase == OptionPhase::Inactive && option->b->phase == OptionPhase::Inactive &&
            once("activate")) {
            out.push_back(call::Activate{option->a_id, *secret});
            out.push_back(call::Activate{option->b_id, *secret});
        }
    }

    for (const auto& [id, p] : premiums) {
        if (p->state != PremiumState::Locked || land >= p->deadline) continue;
        const Preimage* secret = memory_.learned.preimage_for(p->hashlock);
        if (secret && once("claim_premium:" + id)) out.push_back(call::ClaimPremium{id, *secret});
    }
}

void Agent::exercise(const World& w, const OptionView& o, std::vector<Call>& out) {
    const Tick land = w.now() + w.params().confirmation_lag;
    const Tick d = w.delta();
    const OptionContract& a = *o.a;
    const OptionContract& b = *o.b;
    const Tick te = a.terms.expiry_time;
    const auto& plan = cfg_->option.exercise_at;

    if (a.terms.mode == OptionMode::Integrated) {
        if (plan && *plan == land && a.holder.party == name_ && a.phase == OptionPhase::Active && once("exercise")) {
            out.push_back(call::Exercise{o.a_id});
        }
        if (a.phase == OptionPhase::Exercised && a.writer.party == name_ && strategy_ != StrategyId::WriterNoReveal &&
            land <= *a.exercise_time + d) {
            const Preimage* secret = memory_.own.preimage_for(a.exercise_hashlock);
            if (secret && once("settle:" + to_hex(a.exercise_hashlock))) {
                out.push_back(call::RevealExerciseSecret{o.a_id, *secret});
            }
        }
        if (b.holder.party == name_ && b.phase == OptionPhase::Active && a.phase == OptionPhase::SettledExercised &&
            land < te + 2 * d) {
            for (const auto& [digest, p] : memory_.learned.preimages) {
                if (unlocks(w, b, p) && once("claim_b")) {
                    out.push_back(call::ClaimCollateral{o.b_id, p});
                    break;
                }
            }
        }
        if (a.phase == OptionPhase::Exercised && a.holder.party == name_ && land > *a.exercise_time + d &&
            once("compensation")) {
            out.push_back(call::ClaimCompensation{o.a_id});
        }
        return;
    }

    if (plan && *plan == land && b.holder.party == name_ && b.phase == OptionPhase::Active && land < te) {
        const Preimage* secret = memory_.own.preimage_for(b.exercise_hashlock);
        if (secret && once("exercise")) out.push_back(call::ClaimCollateral{o.b_id, *secret});
    }
    if (a.writer.party == name_ && a.phase == OptionPhase::Active && land < te + d) {
        for (const auto& [digest, p] : memory_.learned.preimages) {
            if (unlocks(w, a, p) && once("claim_a")) {
                out.push_back(call::RevealExerciseSecret{o.a_id, p});
                break;
            }
        }
    }
}

void Agent::sell(const World& w, const OptionView& o, std::vector<Call>& out) {
    const Tick now = w.now();
    const Tick land = now + w.params().confirmation_lag;
    const Tick d = w.delta();
    const OptionContract& a = *o.a;
    const OptionContract& b = *o.b;
    const std::vector<ContractId> ids = w.contract_ids();

    for (Role r : {Role::Holder, Role::Writer}) {
        if (a.slot(r).party != name_ || b.slot(r).party != name_) continue;
        if (is_terminal(a.phase) || is_terminal(b.phase) || a.phase == OptionPhase::Exercised) continue;
        const daps::PublicKey pk = a.slot(r).transfer_key;
        if (b.slot(r).transfer_key != pk) continue;
        const daps::SecretKey* sk = memory_.own.key_for(pk);
        if (!sk || memory_.done.contains("sign:" + hex_key(pk))) continue;

        struct Bid {
            ContractId id;
            std::size_t order;
            const TransferEscrow* esc;
        };
        std::vector<Bid> bids;
        std::optional<Tick> first_open;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const auto* t = std::get_if<TransferEscrow>(w.find_contract(ids[i]));
            if (!t || t->state != EscrowState::Open || t->role != r || t->seller != name_ ||
                t->seller_public_key != pk || t->option_a != o.a_id || t->option_b != o.b_id ||
                land > t->deadline - 2 * d || t->expected_message.address != a.terms.daps_address) {
                continue;
            }
            try {
                const TransferPayload p = decode_payload(t->expected_message.payload);
                if (p.new_hashlock.has_value() != material::wants_hashlock(a.terms.mode, r) ||
                    !w.has_party(p.new_owner)) {
                    continue;
                }
            } catch (const ContractError&) {
                continue;
            }
            bids.push_back({ids[i], i, t});
            auto opened = memory_.escrow_opened.find(ids[i]);
            const Tick at = opened == memory_.escrow_opened.end() ? now : opened->second;
            first_open = first_open ? std::min(*first_open, at) : at;
        }
        // Reveal lands Delta - 1 after the first bid confirms, so the
        // withdrawal at T_R + 3Delta + 1 lands exactly 4Delta after opening.
        if (bids.empty() || land < *first_open + d - 1) continue;
        std::stable_sort(bids.begin(), bids.end(), [](const Bid& x, const Bid& y) {
            if (x.esc->fee.amount != y.esc->fee.amount) return x.esc->fee.amount > y.esc->fee.amount;
            return x.order < y.order;
        });
        const std::size_t picks = strategy_ == StrategyId::DoubleSign ? std::min<std::size_t>(2, bids.size()) : 1;
        memory_.done.insert("sign:" + hex_key(pk));
        for (std::size_t i = 0; i < picks; ++i) {
            const daps::Signature sig = daps::sign(*sk, bids[i].esc->expected_message);
            out.push_back(call::RevealSignature{bids[i].id, sig});
            memory_.revealed.emplace(bids[i].id, SignedTransfer{pk, bids[i].esc->expected_message, sig});
        }
        const bool exercise_now =
            strategy_ == StrategyId::ExerciseDuringTransfer ||
            (strategy_ == StrategyId::ColludeSellerWriter && channel_shares("preimage"));
        if (exercise_now && r == Role::Holder && a.terms.mode == OptionMode::Htlc) {
            if (const Preimage* secret = memory_.own.preimage_for(b.exercise_hashlock)) {
                out.push_back(call::ClaimCollateral{o.b_id, *secret});
            }
        }
    }

    for (const auto& [id, st] : memory_.revealed) {
        const auto* esc = std::get_if<TransferEscrow>(w.find_contract(id));
        if (!esc || esc->state != EscrowState::Revealed || !esc->transfer_time) continue;
        const Tick tr = *esc->transfer_time;
        if (now >= tr + 1) {
            for (const auto& [cid, c] : {std::pair{o.a_id, o.a}, std::pair{o.b_id, o.b}}) {
                if (!is_terminal(c->phase) && c->slot(esc->role).transfer_key == st.signer &&
                    once("sfwd:" + cid + ":" + id)) {
                    out.push_back(call::ForwardTransfer{cid, st.message, st.sig});
                }
            }
        }
        if (land > tr + 3 * d && once("withdraw:" + id)) out.push_back(call::WithdrawFee{id});
    }
}

void Agent::buy(const World& w, std::vector<Call>& out) {
    const Tick land = w.now() + w.params().confirmation_lag;
    const auto o = find_option(w);
    for (std::size_t i = 0; i < cfg_->transfers.size(); ++i) {
        const TransferSpec& t = cfg_->transfers[i];
        if (t.buyer != name_ || land != t.open_at || !o) continue;
        if (o->a->slot(t.role).party != t.seller) continue;
        // Both sides must describe the same live position, or a signature
        // over one of them proves nothing about the other.
        const OptionContract& a = *o->a;
        const OptionContract& b = *o->b;
        const bool consistent = !is_terminal(a.phase) && !is_terminal(b.phase) && a.phase != OptionPhase::Exercised &&
                                b.slot(t.role).party == t.seller && a.slot(t.role).transfer_key == b.slot(t.role).transfer_key &&
                                a.exercise_hashlock == b.exercise_hashlock;
        if (!consistent || !once("open:" + std::to_string(i))) continue;
        std::optional<Digest> evidence_lock;
        if (o->a->terms.mode == OptionMode::Integrated || t.role == Role::Holder) {
            evidence_lock = o->a->exercise_hashlock;
        }
        for (int c = 0; c < t.count; ++c) {
            call::OpenEscrow e;
            e.chain = t.fee.chain;
            e.role = t.role;
            e.option_a = o->a_id;
            e.option_b = o->b_id;
            e.seller = t.seller;
            e.fee = t.fee;
            e.deadline = t.deadline;
            e.option_expiry = o->a->terms.expiry_time;
            e.expected_message = material::expected_message(*cfg_, i, c);
            e.seller_key = o->a->slot(t.role).transfer_key;
            e.old_exercise_hashlock = evidence_lock;
            out.push_back(e);
        }
    }

    if (!o || strategy_ == StrategyId::PhantomBidders || strategy_ == StrategyId::ColludeWriterBuyer) return;
    if (is_terminal(o->a->phase) || is_terminal(o->b->phase)) return;
    for (const auto& id : w.contract_ids()) {
        const auto* esc = std::get_if<TransferEscrow>(w.find_contract(id));
        if (!esc || esc->buyer != name_ || esc->state != EscrowState::Revealed || esc->option_a != o->a_id) continue;
        if (memory_.learned.key_for(esc->seller_public_key) ||
            (esc->old_exercise_hashlock && memory_.learned.preimage_for(*esc->old_exercise_hashlock))) {
            continue;
        }
        for (const auto& [cid, c] : {std::pair{o->a_id, o->a}, std::pair{o->b_id, o->b}}) {
            if (strategy_ == StrategyId::SingleChainPublish && cid == o->b_id) continue;
            if (c->slot(esc->role).transfer_key != esc->seller_public_key) continue;
            if (!once("bfwd:" + cid + ":" + id)) continue;
            daps::Message msg = esc->expected_message;
            daps::Signature sig = *esc->revealed_signature;
            const daps::SecretKey* seller_sk = memory_.shared.key_for(esc->seller_public_key);
            if (strategy_ == StrategyId::ColludeSellerBuyer && cid == o->b_id && seller_sk) {
                // Second, colliding payload for the other chain.
                const int alias = 500;
                TransferPayload p;
                p.new_owner = name_;
                if (material::wants_hashlock(o->a->terms.mode, esc->role)) {
                    p.new_hashlock = hashlock_of(material::exercise_secret(*cfg_, name_, alias));
                }
                p.new_key = material::transfer_key(*cfg_, name_, alias).public_key;
                msg.payload = encode_payload(p);
                sig = daps::sign(*seller_sk, msg);
            }
            out.push_back(call::ForwardTransfer{cid, msg, sig});
        }
    }
}

void Agent::collude(const World& w, const OptionView& o, std::vector<Call>& out) {
    const Tick now = w.now();
    const Tick land = now + w.params().confirmation_lag;
    const OptionContract& a = *o.a;
    if (a.writer.party != name_) return;

    if (strategy_ == StrategyId::ColludeSellerWriter && channel_shares("preimage") && a.phase == OptionPhase::Active) {
        std::optional<Tick> first_open;
        for (const auto& [id, at] : memory_.escrow_opened) {
            const auto* esc = std::get_if<TransferEscrow>(w.find_contract(id));
            if (esc && esc->option_a == o.a_id && colludes_with(esc->seller) && esc->state == EscrowState::Open) {
                first_open = first_open ? std::min(*first_open, at) : at;
            }
        }
        if (first_open && land == *first_open + w.delta() - 1) {
            for (const auto& [digest, p] : memory_.shared.preimages) {
                if (unlocks(w, a, p) && once("collude_claim")) {
                    out.push_back(call::RevealExerciseSecret{o.a_id, p});
                    break;
                }
            }
        }
    }

    for (const auto& id : w.contract_ids()) {
        const auto* esc = std::get_if<TransferEscrow>(w.find_contract(id));
        if (!esc || esc->option_a != o.a_id || esc->transfer_time != now) continue;
        if (strategy_ == StrategyId::ColludeSellerWriter && channel_shares("transfer_key") &&
            colludes_with(esc->seller)) {
            for (const auto& [cid, c] : {std::pair{o.a_id, o.a}, std::pair{o.b_id, o.b}}) {
                const daps::SecretKey* sk = memory_.shared.key_for(c->holder.transfer_key);
                if (sk && !is_terminal(c->phase) && once("collude_punish:" + cid)) {
                    out.push_back(call::PunishWithKey{cid, *sk});
                }
            }
        }
        if (strategy_ == StrategyId::ColludeWriterBuyer && colludes_with(esc->buyer) && once("bogus_punish:" + id)) {
            out.push_back(call::PunishWithKey{o.a_id, material::bogus_key(*cfg_, name_)});
        }
    }
}

void Agent::punish(const World& w, const OptionView& o, std::vector<Call>& out) {
    for (const auto& [cid, c] : {std::pair{o.a_id, o.a}, std::pair{o.b_id, o.b}}) {
        if (is_terminal(c->phase)) continue;
        for (Role r : {Role::Writer, Role::Holder}) {
            if (r == Role::Holder && c->terms.mode == OptionMode::Integrated) continue;
            if (c->slot(other(r)).party != name_) continue;
            const RoleSlot& s = c->slot(r);
            const daps::SecretKey* sk = memory_.learned.key_for(s.transfer_key);
            if (!sk && s.old_transfer_key && key_standing(w, *c, r, *s.old_transfer_key) == KeyStanding::Old) {
                sk = memory_.learned.key_for(*s.old_transfer_key);
            }
            if (sk && once("punish:" + cid)) out.push_back(call::PunishWithKey{cid, *sk});
        }
    }
}

void Agent::forward_missing(const World& w, const OptionView& o, std::vector<Call>& out) {
    switch (strategy_) {
        case StrategyId::SingleChainPublish:
        case StrategyId::ColludeWriterBuyer:
        case StrategyId::ColludeSellerBuyer:
        case StrategyId::PhantomBidders:
            return;
        default:
            break;
    }
    bool stake = false;
    for (const OptionContract* c : {o.a, o.b})
        stake = stake || c->holder.party == name_ || c->writer.party == name_;
    for (const auto& id : w.contract_ids()) {
        const auto* esc = std::get_if<TransferEscrow>(w.find_contract(id));
        stake = stake || (esc && esc->buyer == name_ && esc->option_a == o.a_id);
    }
    if (!stake) return;

    for (Role r : {Role::Holder, Role::Writer}) {
        if (o.a->slot(r).transfer_key == o.b->slot(r).transfer_key) continue;
        const std::array<std::pair<ContractId, const OptionContract*>, 2> lag_lead[2] = {
            {std::pair{o.a_id, o.a}, std::pair{o.b_id, o.b}}, {std::pair{o.b_id, o.b}, std::pair{o.a_id, o.a}}};
        for (const auto& pair : lag_lead) {
            const auto& [lag_id, lag] = pair[0];
            const OptionContract* lead = pair[1].second;
            if (is_terminal(lag->phase)) continue;
            for (const auto& s : memory_.seen) {
                if (s.signer != lag->slot(r).transfer_key || s.message.address != lag->terms.daps_address) continue;
                try {
                    if (decode_payload(s.message.payload).new_key != lead->slot(r).transfer_key) continue;
                } catch (const ContractError&) {
                    continue;
                }
                if (once("mfwd:" + lag_id + ":" + to_hex(daps::serialize(s.sig)))) {
                    out.push_back(call::ForwardTransfer{lag_id, s.message, s.sig});
                }
                break;
            }
        }
    }
}

void Agent::reclaim(const World& w, std::vector<Call>& out) {
    if (strategy_ == StrategyId::ColludeSellerBuyer) return;
    const Tick land = w.now() + w.params().confirmation_lag;
    for (const auto& id : w.contract_ids()) {
        const auto* esc = std::get_if<TransferEscrow>(w.find_contract(id));
        if (!esc || esc->buyer != name_) continue;
        const bool open = esc->state == EscrowState::Open;
        const bool revealed = esc->state == EscrowState::Revealed;
        if (!open && !(revealed && land <= *esc->transfer_time + 3 * w.delta())) continue;

        if (strategy_ == StrategyId::ColludeWriterBuyer) {
            if (revealed && once("bogus_reclaim:" + id)) {
                out.push_back(call::ReclaimEscrow{id, material::bogus_preimage(*cfg_, name_)});
            }
            continue;
        }
        if (const daps::SecretKey* sk = memory_.learned.key_for(esc->seller_public_key)) {
            if (once("reclaim:" + id + ":key")) out.push_back(call::ReclaimEscrow{id, *sk});
            continue;
        }
        if (esc->old_exercise_hashlock) {
            if (const Preimage* p = memory_.learned.preimage_for(*esc->old_exercise_hashlock)) {
                if (once("reclaim:" + id + ":preimage")) out.push_back(call::ReclaimEscrow{id, *p});
                continue;
            }
        }
        if (!revealed) continue;
        for (const auto& s : memory_.seen) {
            if (s.signer == esc->seller_public_key && daps::colliding(esc->expected_message, s.message)) {
                if (once("reclaim:" + id + ":conflict")) {
                    out.push_back(call::ReclaimEscrow{id, call::ConflictingSignature{s.message, s.sig}});
                }
                break;
            }
        }
    }
}

void open_side_channels(std::vector<Agent>& agents, const ScenarioConfig& cfg) {
    for (const auto& ch : cfg.collusion) {
        const bool preimages = std::find(ch.shares.begin(), ch.shares.end(), "preimage") != ch.shares.end();
        const bool keys = std::find(ch.shares.begin(), ch.shares.end(), "transfer_key") != ch.shares.end();
        for (auto& to : agents) {
            if (std::find(ch.members.begin(), ch.members.end(), to.name()) == ch.members.end()) continue;
            for (const auto& from : agents) {
                if (&from == &to || std::find(ch.members.begin(), ch.members.end(), from.name()) == ch.members.end()) {
                    continue;
                }
                if (preimages) {
                    for (const auto& [d, p] : from.memory().own.preimages) to.memory().shared.preimages.emplace(d, p);
                }
                if (keys) {
                    for (const auto& [pk, sk] : from.memory().own.keys) to.memory().shared.keys.emplace(pk, sk);
                }
            }
        }
    }
}

}  // namespace xopt
